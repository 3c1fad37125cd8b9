//! Run configuration: preset defaults, then the INI file, then flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use cnls::linalg::{SolverConfig, SolverMethod};
use cnls::scenarios::{preset, BcRule, ExperimentPreset, InitialData, Manufactured};
use ini::Ini;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Direct,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioKind {
    Poly,
    Trig,
    ConstExp,
    ConstAffine,
}

impl From<ScenarioKind> for Manufactured {
    fn from(s: ScenarioKind) -> Self {
        match s {
            ScenarioKind::Poly => Manufactured::Poly,
            ScenarioKind::Trig => Manufactured::Trig,
            ScenarioKind::ConstExp => Manufactured::ConstExp,
            ScenarioKind::ConstAffine => Manufactured::ConstAffine,
        }
    }
}

/// Flags shared by every computing subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Experiment preset name.
    #[arg(long)]
    pub preset: Option<String>,
    /// INI configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (or file for mesh-gen).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Polynomial degree of the elements (1 or 2).
    #[arg(long)]
    pub degree: Option<usize>,
    /// Time step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time.
    #[arg(long)]
    pub tfinal: Option<f64>,
    /// Relative tolerance of the linear solver.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Linear solver.
    #[arg(long, value_enum)]
    pub solver: Option<SolverKind>,
    /// Coefficient of the cubic term.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Target triangle count of the generated mesh.
    #[arg(long)]
    pub triangles: Option<usize>,
    /// Import the mesh from a .msh or dump file instead of generating it.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Generate { triangles: Option<usize> },
    Import(PathBuf),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub preset: ExperimentPreset,
    pub mesh: MeshSource,
    pub degree: usize,
    pub k: f64,
    pub t_final: f64,
    pub lambda: f64,
    pub solver: SolverConfig,
    pub out: PathBuf,
    pub snapshots: Vec<f64>,
    pub vtk: bool,
    pub cadence: Option<usize>,
    pub ladder: Option<Vec<f64>>,
}

/// Values read from an INI file, keyed as `section.key`.
#[derive(Debug, Default)]
struct FileValues(Vec<(String, String)>);

impl FileValues {
    fn load(path: &Path) -> Result<Self, CliError> {
        let ini = Ini::load_from_file(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut out = Vec::new();
        for (sec, props) in ini.iter() {
            for (k, v) in props.iter() {
                let key = match sec {
                    Some(s) => format!("{s}.{k}"),
                    None => k.to_string(),
                };
                out.push((key, v.trim().to_string()));
            }
        }
        Ok(Self(out))
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| CliError::Config(format!("cannot parse {key} = {v:?}"))))
            .transpose()
    }

    fn check_known(&self) -> Result<(), CliError> {
        const KNOWN: [&str; 16] = [
            "run.preset",
            "run.degree",
            "run.dt",
            "run.tfinal",
            "run.tol",
            "run.solver",
            "run.lambda",
            "run.cadence",
            "mesh.source",
            "mesh.triangles",
            "mesh.path",
            "output.dir",
            "output.snapshots",
            "output.vtk",
            "eoc.ladder",
            "eoc.scenario",
        ];
        match self.0.iter().find(|(k, _)| !KNOWN.contains(&k.as_str())) {
            Some((k, _)) => Err(CliError::Config(format!("unknown config key {k}"))),
            None => Ok(()),
        }
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| CliError::Config(format!("cannot parse list entry {t:?}"))))
        .collect()
}

/// Extra flags of `run` and the EOC commands.
#[derive(Debug, Clone, Default)]
pub struct Extras {
    pub snapshots: Option<String>,
    pub vtk: bool,
    pub cadence: Option<usize>,
    pub ladder: Option<String>,
    pub scenario: Option<ScenarioKind>,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs, extras: &Extras, default_preset: Option<&str>) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => FileValues::load(p)?,
            None => FileValues::default(),
        };
        file.check_known()?;

        let name = args
            .preset
            .clone()
            .or_else(|| file.get("run.preset").map(str::to_string))
            .or_else(|| default_preset.map(str::to_string))
            .ok_or_else(|| CliError::Config("no preset given".into()))?;
        let mut preset = preset(&name).map_err(|e| CliError::Config(e.to_string()))?;

        let scenario = match extras.scenario {
            Some(s) => Some(Manufactured::from(s)),
            None => match file.get("eoc.scenario") {
                Some(v) => Some(Manufactured::from(
                    ScenarioKind::from_str(v, true).map_err(|_| CliError::Config(format!("unknown scenario {v:?}")))?,
                )),
                None => None,
            },
        };
        if let Some(m) = scenario {
            preset.initial = InitialData::Manufactured(m);
            preset.bc = match m {
                Manufactured::Poly | Manufactured::Trig => BcRule::Dirichlet,
                Manufactured::ConstExp | Manufactured::ConstAffine => BcRule::Neumann,
            };
        }

        let triangles = args.triangles.or(file.parse("mesh.triangles")?);
        let import = args.mesh.clone().or_else(|| {
            (file.get("mesh.source") == Some("import")).then(|| file.get("mesh.path").map(PathBuf::from)).flatten()
        });
        if file.get("mesh.source") == Some("import") && import.is_none() {
            return Err(CliError::Config("mesh.source = import needs mesh.path".into()));
        }
        if let Some(src) = file.get("mesh.source") {
            if src != "import" && src != "generate" {
                return Err(CliError::Config(format!("mesh.source must be generate or import, got {src:?}")));
            }
        }
        let mesh = match (import, triangles) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("give either an imported mesh or a triangle count, not both".into()))
            }
            (Some(p), None) => MeshSource::Import(p),
            (None, t) => MeshSource::Generate { triangles: t },
        };

        let degree = args.degree.or(file.parse("run.degree")?).unwrap_or(preset.degree);
        let k = args.dt.or(file.parse("run.dt")?).unwrap_or(preset.k);
        let t_final = args.tfinal.or(file.parse("run.tfinal")?).unwrap_or(preset.t_final);
        let lambda = args.lambda.or(file.parse("run.lambda")?).unwrap_or(preset.lambda);
        let tol = args.tol.or(file.parse("run.tol")?).unwrap_or(SolverConfig::default().rel_tolerance);
        let solver_kind = match args.solver {
            Some(s) => s,
            None => match file.get("run.solver") {
                Some(v) => SolverKind::from_str(v, true).map_err(|_| CliError::Config(format!("unknown solver {v:?}")))?,
                None => SolverKind::Direct,
            },
        };
        let method = match solver_kind {
            SolverKind::Direct => SolverMethod::DirectLu,
            SolverKind::Iterative => SolverMethod::IterativeResidual,
        };
        let solver = SolverConfig { method, ..SolverConfig::default().with_tolerance(tol) };
        solver.validate().map_err(|e| CliError::Config(e.to_string()))?;

        let out = args
            .out
            .clone()
            .or_else(|| file.get("output.dir").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(format!("out-{name}")));
        let snapshots = match extras.snapshots.as_deref().or(file.get("output.snapshots")) {
            Some(s) => parse_list(s)?,
            None => vec![0.0, t_final],
        };
        let vtk = extras.vtk || file.parse::<bool>("output.vtk")?.unwrap_or(false);
        let cadence = extras.cadence.or(file.parse("run.cadence")?);
        let ladder = extras.ladder.as_deref().or(file.get("eoc.ladder")).map(parse_list).transpose()?;

        preset.degree = degree;
        preset.k = k;
        preset.t_final = t_final;
        preset.lambda = lambda;
        let cfg = Self { preset, mesh, degree, k, t_final, lambda, solver, out, snapshots, vtk, cadence, ladder };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.degree != 1 && self.degree != 2 {
            return bad(format!("degree must be 1 or 2, got {}", self.degree));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(format!("final time must be positive, got {}", self.t_final));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return bad(format!("time step must be positive, got {}", self.k));
        }
        if self.k > self.t_final {
            return bad(format!("time step {} exceeds the final time {}", self.k, self.t_final));
        }
        if !self.lambda.is_finite() {
            return bad("lambda must be finite".into());
        }
        if let Some(t) = self.snapshots.iter().find(|t| !(**t >= 0.0 && **t <= self.t_final)) {
            return bad(format!("snapshot time {t} outside [0, {}]", self.t_final));
        }
        if self.cadence == Some(0) {
            return bad("cadence must be at least 1".into());
        }
        Ok(())
    }
}
