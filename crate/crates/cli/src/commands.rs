use std::path::{Path, PathBuf};
use std::sync::Arc;

use cnls::fem::FESpace;
use cnls::linalg::SolverConfig;
use cnls::mesh::{delaunay_triangulate, export_msh, import_msh, read_dump, write_dump, Mesh};
use cnls::scenarios::{
    compare_mirrored, cross_section, delaunay_with_count, least_squares_rate, mirrored_difference, spatial_study,
    structured_with_count, temporal_study, InitialData, MeshSpec, ProfileComparison,
};
use cnls::stepper::{init_state, run as run_stepper, RunOutput, StepperConfig};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{
    diagnostics_csv, eoc_space_csv, eoc_table, eoc_time_csv, parse_state, profile_csv, read_file, snapshot_csv,
    snapshot_vtk, state_text, write_file, StateMeta,
};

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn load_mesh(path: &Path) -> Result<Mesh, CliError> {
    let text = read_file(path)?;
    let mesh = if path.extension().is_some_and(|e| e == "msh") { import_msh(&text)? } else { read_dump(&text)? };
    Ok(mesh)
}

pub fn build_mesh(cfg: &RunConfig) -> Result<Mesh, CliError> {
    match &cfg.mesh {
        crate::config::MeshSource::Import(p) => load_mesh(p),
        crate::config::MeshSource::Generate { triangles } => Ok(cfg.preset.build_mesh(*triangles)?),
    }
}

/// `mesh-gen`: writes the preset's mesh as MSH (by `.msh` extension) or dump.
pub fn mesh_gen(cfg: &RunConfig, h: Option<f64>) -> Result<PathBuf, CliError> {
    let mesh = match h {
        Some(h) => cfg.preset.bc.apply(&delaunay_triangulate(&cfg.preset.domain, h)?),
        None => build_mesh(cfg)?,
    };
    let out = if cfg.out.extension().is_some() { cfg.out.clone() } else { cfg.out.with_extension("msh") };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    let text = if out.extension().is_some_and(|e| e == "msh") { export_msh(&mesh) } else { write_dump(&mesh) };
    write_file(&out, &text)?;
    let q = mesh.quality_report();
    println!(
        "{} triangles, {} points, h = {:.6e}, min angle {:.2} deg -> {}",
        q.triangle_count,
        mesh.points().len(),
        q.h,
        q.min_angle,
        out.display()
    );
    Ok(out)
}

/// Result of `run`, also returned on blow-up so callers can inspect it.
#[derive(Debug)]
pub struct RunSummary {
    pub output: RunOutput,
    pub snapshot_files: Vec<PathBuf>,
}

/// `run`: time integration with diagnostics, snapshots and a final state.
pub fn run(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let mesh = Arc::new(build_mesh(cfg)?);
    let space = FESpace::with_solver(mesh, cfg.degree, cfg.solver)?;
    let state = init_state(&space, cfg.preset.u0())?;
    let scfg = StepperConfig { solver: cfg.solver, ..cfg.preset.stepper_config() };
    let n_steps = scfg.n_steps();
    let mut wanted: Vec<usize> =
        cfg.snapshots.iter().map(|t| ((t / cfg.k).round() as usize).min(n_steps)).collect();
    wanted.sort_unstable();
    wanted.dedup();
    ensure_dir(&cfg.out)?;
    let meta = StateMeta { preset: cfg.preset.name.to_string(), lambda: cfg.lambda };
    write_file(&cfg.out.join("initial.state"), &state_text(&state, &meta))?;
    let mut snapshot_files = Vec::new();
    let mut io_error = None;
    let result = run_stepper(state, &scfg, cfg.cadence, |s| {
        if wanted.binary_search(&s.n).is_ok() {
            let base = cfg.out.join(format!("snapshot_{:06}", s.n));
            let csv = base.with_extension("csv");
            let r = write_file(&csv, &snapshot_csv(&s.u)).and_then(|_| {
                if cfg.vtk {
                    write_file(&base.with_extension("vtk"), &snapshot_vtk(&s.u, &format!("|u| at t = {:.16e}", s.t())))
                } else {
                    Ok(())
                }
            });
            if let Err(e) = r {
                let msg = e.to_string();
                io_error = Some(e);
                return Err(msg);
            }
            snapshot_files.push(csv);
        }
        Ok(())
    });
    match result {
        Ok(output) => {
            write_file(&cfg.out.join("diagnostics.csv"), &diagnostics_csv(&output.records))?;
            write_file(&cfg.out.join("final.state"), &state_text(&output.state, &meta))?;
            report(&output);
            Ok(RunSummary { output, snapshot_files })
        }
        Err(fail) => {
            write_file(&cfg.out.join("diagnostics.csv"), &diagnostics_csv(&fail.records))?;
            if let Some(s) = &fail.last_state {
                write_file(&cfg.out.join("last.state"), &state_text(s, &meta))?;
            }
            match io_error {
                Some(e) => Err(e),
                None => Err(fail.error.into()),
            }
        }
    }
}

fn report(out: &RunOutput) {
    let first = out.records[0];
    let drift = |f: fn(&cnls::stepper::DiagnosticsRecord) -> f64| {
        let base = f(&first);
        out.records.iter().map(|r| ((f(r) - base) / base).abs()).fold(0.0, f64::max)
    };
    println!(
        "steps {} t {:.6} mass {:.10e} (max rel drift {:.3e}) energy {:.10e} (max rel drift {:.3e})",
        out.state.n,
        out.state.t(),
        out.records.last().map_or(f64::NAN, |r| r.mass),
        drift(|r| r.mass),
        out.records.last().map_or(f64::NAN, |r| r.energy),
        drift(|r| r.energy)
    );
}

fn manufactured(cfg: &RunConfig) -> Result<cnls::scenarios::Manufactured, CliError> {
    match cfg.preset.initial {
        InitialData::Manufactured(m) => Ok(m),
        _ => Err(CliError::Config(format!("preset {} has no manufactured solution; pass --scenario", cfg.preset.name))),
    }
}

/// `eoc-time`: temporal convergence on one mesh.
pub fn eoc_time(cfg: &RunConfig) -> Result<Vec<cnls::scenarios::ConvergenceRow>, CliError> {
    let m = manufactured(cfg)?;
    let ladder = match &cfg.ladder {
        Some(l) => l.clone(),
        None if !cfg.preset.k_ladder.is_empty() => cfg.preset.k_ladder.clone(),
        None => vec![cfg.k],
    };
    if let Some(k) = ladder.iter().find(|k| !(**k > 0.0 && **k <= cfg.t_final)) {
        return Err(CliError::Config(format!("time step {k} not in (0, {}]", cfg.t_final)));
    }
    let mesh = Arc::new(build_mesh(cfg)?);
    let space = FESpace::with_solver(mesh, cfg.degree, cfg.solver)?;
    let rows = temporal_study(&space, m, cfg.lambda, cfg.t_final, &ladder, cfg.solver)?;
    ensure_dir(&cfg.out)?;
    write_file(&cfg.out.join("eoc_time.csv"), &eoc_time_csv(&rows))?;
    print!("{}", eoc_table("k", &rows));
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct SpaceStudy {
    pub triangles: Vec<usize>,
    pub rows: Vec<cnls::scenarios::ConvergenceRow>,
    /// Least-squares rate over all rows; NaN when any error sits at the floor.
    pub rate: f64,
}

/// `eoc-space`: spatial convergence over a ladder of meshes.
pub fn eoc_space(cfg: &RunConfig) -> Result<SpaceStudy, CliError> {
    let m = manufactured(cfg)?;
    let counts: Vec<usize> = match &cfg.ladder {
        Some(l) => l
            .iter()
            .map(|&v| {
                if v >= 1.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(CliError::Config(format!("triangle count {v} is not a positive integer")))
                }
            })
            .collect::<Result<_, _>>()?,
        None => match &cfg.preset.mesh {
            MeshSpec::Structured { ladder } => ladder.clone(),
            MeshSpec::Delaunay { triangles } => vec![triangles / 16, triangles / 4, *triangles],
        },
    };
    let mut meshes = Vec::with_capacity(counts.len());
    for &n in &counts {
        let mesh = match cfg.preset.mesh {
            MeshSpec::Structured { .. } => structured_with_count(cfg.preset.bounding_rect(), n)?,
            MeshSpec::Delaunay { .. } => delaunay_with_count(&cfg.preset.domain, n)?,
        };
        meshes.push(Arc::new(cfg.preset.bc.apply(&mesh)));
    }
    let rows = spatial_study(&meshes, cfg.degree, m, cfg.lambda, cfg.k, cfg.t_final, cfg.solver)?;
    let triangles: Vec<usize> = meshes.iter().map(|m| m.triangles().len()).collect();
    let rate = if rows.len() < 2 || rows.iter().any(|r| r.error <= r.floor) {
        f64::NAN
    } else {
        let e: Vec<f64> = rows.iter().map(|r| r.error).collect();
        let h: Vec<f64> = rows.iter().map(|r| r.step).collect();
        least_squares_rate(&e, &h).map_err(|e| CliError::Config(e.to_string()))?
    };
    ensure_dir(&cfg.out)?;
    write_file(&cfg.out.join("eoc_space.csv"), &eoc_space_csv(&triangles, &rows))?;
    print!("{}", eoc_table("h", &rows));
    if rate.is_nan() {
        println!("least-squares rate: n/a");
    } else {
        println!("least-squares rate: {rate:.4}");
    }
    Ok(SpaceStudy { triangles, rows, rate })
}

#[derive(Debug, Clone)]
pub struct ProbeArgs {
    pub state: PathBuf,
    pub y0: f64,
    pub samples: usize,
    pub x_range: Option<(f64, f64)>,
    pub out: Option<PathBuf>,
    pub mirror_of: Option<PathBuf>,
    pub background: f64,
}

#[derive(Debug, Clone)]
pub struct ProbeResult {
    pub samples: Vec<cnls::scenarios::ProfileSample>,
    /// Difference from the unshifted mirror image and the best mirrored translate.
    pub mirror: Option<(f64, ProfileComparison)>,
}

/// `probe`: cross-section of a saved state along y = y0.
pub fn probe(args: &ProbeArgs) -> Result<ProbeResult, CliError> {
    if args.samples < 2 {
        return Err(CliError::Config("probe needs at least 2 samples".into()));
    }
    let (state, _) = parse_state(&read_file(&args.state)?, SolverConfig::default())?;
    let samples = cross_section(&state.u, args.y0, args.samples, args.x_range)?;
    let text = profile_csv(&samples);
    match &args.out {
        Some(p) => write_file(p, &text)?,
        None => print!("{text}"),
    }
    let mirror = match &args.mirror_of {
        Some(p) => {
            let (init, _) = parse_state(&read_file(p)?, SolverConfig::default())?;
            let reference = cross_section(&init.u, args.y0, args.samples, args.x_range)?;
            let direct = mirrored_difference(&samples, &reference, args.background, 0.0);
            let best = compare_mirrored(&samples, &reference, args.background);
            eprintln!(
                "mirror difference {direct:.6e}; best mirrored translate {:.6e} at shift {:.6}",
                best.rel_diff, best.shift
            );
            Some((direct, best))
        }
        None => None,
    };
    Ok(ProbeResult { samples, mirror })
}
