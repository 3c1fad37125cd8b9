use std::f64::consts::PI;

use num_complex::Complex64;

use super::{bright_soliton, dark_soliton, Manufactured, ScenarioError, SolitonParams};
use crate::mesh::{
    delaunay_triangulate, generate_structured, polygon_area, target_h_for_count, BoundaryTag, Mesh, MeshError, Point2,
    Rect,
};
use crate::stepper::{Forcing, StepperConfig};

pub const PRESET_NAMES: [&str; 6] =
    ["temporal-eoc", "spatial-eoc", "bright-neumann", "bright-mixed", "dark-neumann", "dark-diagonal"];

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSpec {
    /// Delaunay mesh of the domain polygon with at least this many triangles.
    Delaunay { triangles: usize },
    /// Structured meshes of the bounding rectangle, one per triangle count.
    Structured { ladder: Vec<usize> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BcRule {
    Neumann,
    Dirichlet,
    /// Dirichlet on the vertical sides x = lo and x = hi, Neumann elsewhere.
    DirichletAtX { lo: f64, hi: f64 },
}

impl BcRule {
    pub fn apply(&self, mesh: &Mesh) -> Mesh {
        let bb = mesh.bounding_box();
        let tol = 1e-9 * bb.width().max(bb.height());
        match *self {
            BcRule::Neumann => mesh.tag_boundary(|_| BoundaryTag::Neumann),
            BcRule::Dirichlet => mesh.tag_boundary(|_| BoundaryTag::Dirichlet),
            BcRule::DirichletAtX { lo, hi } => mesh.tag_boundary(|p| {
                if (p.x - lo).abs() <= tol || (p.x - hi).abs() <= tol {
                    BoundaryTag::Dirichlet
                } else {
                    BoundaryTag::Neumann
                }
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    Bright { params: SolitonParams, x0: f64 },
    Dark { params: SolitonParams, x0: f64 },
    Manufactured(Manufactured),
}

impl InitialData {
    /// Exact solution where one is known in closed form on the domain.
    pub fn exact(&self, x: f64, y: f64, t: f64) -> Complex64 {
        match *self {
            InitialData::Bright { params, x0 } => bright_soliton(x - x0, y, t, params),
            InitialData::Dark { params, x0 } => dark_soliton(x - x0, y, t, params),
            InitialData::Manufactured(m) => m.u(x, y, t),
        }
    }

    /// Background modulus subtracted before comparing profiles.
    pub fn background(&self) -> f64 {
        match *self {
            InitialData::Dark { params, .. } => params.eta,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPreset {
    pub name: &'static str,
    pub domain: Vec<Point2>,
    pub mesh: MeshSpec,
    pub bc: BcRule,
    pub lambda: f64,
    pub initial: InitialData,
    pub degree: usize,
    pub k: f64,
    pub t_final: f64,
    /// Time-step ladder for temporal convergence studies.
    pub k_ladder: Vec<f64>,
    /// Reference mass and energy, where known.
    pub reported_mass: Option<f64>,
    pub reported_energy: Option<f64>,
}

fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> Vec<Point2> {
    Rect::new(x0, x1, y0, y1).corners().to_vec()
}

pub fn preset(name: &str) -> Result<ExperimentPreset, ScenarioError> {
    let bright = |eta, xi| InitialData::Bright { params: SolitonParams { eta, xi }, x0: 0.0 };
    let dark = |xi| InitialData::Dark { params: SolitonParams { eta: 1.0, xi }, x0: 0.0 };
    let p = match name {
        "temporal-eoc" => ExperimentPreset {
            name: "temporal-eoc",
            domain: rect(0.0, 1.0, 0.0, 0.5),
            mesh: MeshSpec::Delaunay { triangles: 192_802 },
            bc: BcRule::Dirichlet,
            lambda: -2.0,
            initial: InitialData::Manufactured(Manufactured::Poly),
            degree: 2,
            k: 0.0625,
            t_final: 4.0,
            k_ladder: vec![0.5, 0.25, 0.125, 0.0625],
            reported_mass: None,
            reported_energy: None,
        },
        "spatial-eoc" => ExperimentPreset {
            name: "spatial-eoc",
            domain: rect(0.0, 2.0, 0.0, 2.0),
            mesh: MeshSpec::Structured { ladder: vec![32, 128, 512, 2048, 8192, 32768] },
            bc: BcRule::Dirichlet,
            lambda: -2.0,
            initial: InitialData::Manufactured(Manufactured::Trig),
            degree: 1,
            k: 2e-5,
            t_final: 0.1,
            k_ladder: Vec::new(),
            reported_mass: None,
            reported_energy: None,
        },
        "bright-neumann" => ExperimentPreset {
            name: "bright-neumann",
            domain: rect(-5.0, 5.0, -1.0, 1.0),
            mesh: MeshSpec::Delaunay { triangles: 74_496 },
            bc: BcRule::Neumann,
            lambda: 2.0,
            initial: bright(2.0, 2.0),
            degree: 2,
            k: 5e-3,
            t_final: 3.0,
            k_ladder: Vec::new(),
            reported_mass: Some(7.9999999),
            reported_energy: Some(10.5),
        },
        "bright-mixed" => ExperimentPreset {
            name: "bright-mixed",
            domain: rect(-10.0, 10.0, -1.0, 1.0),
            mesh: MeshSpec::Delaunay { triangles: 74_241 },
            bc: BcRule::DirichletAtX { lo: -10.0, hi: 10.0 },
            lambda: 2.0,
            initial: bright(1.0, 1.0),
            degree: 2,
            k: 2.5e-3,
            t_final: 10.0,
            k_ladder: Vec::new(),
            reported_mass: Some(3.9999999),
            reported_energy: Some(1.3333),
        },
        "dark-neumann" => ExperimentPreset {
            name: "dark-neumann",
            domain: rect(-5.0, 5.0, -1.0, 1.0),
            mesh: MeshSpec::Delaunay { triangles: 18_624 },
            bc: BcRule::Neumann,
            lambda: -2.0,
            initial: dark(PI / 4.0),
            degree: 2,
            k: 5e-2,
            t_final: 15.0,
            k_ladder: Vec::new(),
            reported_mass: Some(17.1763733098),
            reported_energy: Some(8.119),
        },
        "dark-diagonal" => ExperimentPreset {
            name: "dark-diagonal",
            domain: vec![Point2::new(-8.0, -1.0), Point2::new(8.0, -1.0), Point2::new(8.0, 1.0), Point2::new(-7.0, 1.0)],
            mesh: MeshSpec::Delaunay { triangles: 28_592 },
            bc: BcRule::Neumann,
            lambda: -2.0,
            // Travels towards the slanted wall on the left.
            initial: dark(3.0 * PI / 4.0),
            degree: 2,
            k: 5e-2,
            t_final: 15.0,
            k_ladder: Vec::new(),
            reported_mass: Some(28.1716833830),
            reported_energy: Some(13.61),
        },
        _ => {
            return Err(ScenarioError::UnknownPreset { name: name.to_string(), available: PRESET_NAMES.to_vec() });
        }
    };
    Ok(p)
}

impl ExperimentPreset {
    pub fn bounding_rect(&self) -> Rect {
        let mut r = Rect::new(f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in &self.domain {
            r.x0 = r.x0.min(p.x);
            r.x1 = r.x1.max(p.x);
            r.y0 = r.y0.min(p.y);
            r.y1 = r.y1.max(p.y);
        }
        r
    }

    /// Default triangle count: the Delaunay target or the finest ladder entry.
    pub fn default_triangles(&self) -> usize {
        match &self.mesh {
            MeshSpec::Delaunay { triangles } => *triangles,
            MeshSpec::Structured { ladder } => ladder.last().copied().unwrap_or(32),
        }
    }

    /// Mesh with boundary tags applied; `triangles` overrides the default count.
    pub fn build_mesh(&self, triangles: Option<usize>) -> Result<Mesh, MeshError> {
        let want = triangles.unwrap_or_else(|| self.default_triangles());
        let mesh = match &self.mesh {
            MeshSpec::Delaunay { .. } => delaunay_with_count(&self.domain, want)?,
            MeshSpec::Structured { .. } => structured_with_count(self.bounding_rect(), want)?,
        };
        Ok(self.bc.apply(&mesh))
    }

    pub fn u0(&self) -> impl Fn(f64, f64) -> Complex64 + Send + Sync + Copy {
        let init = self.initial;
        move |x, y| init.exact(x, y, 0.0)
    }

    pub fn forcing(&self) -> Option<Forcing> {
        match self.initial {
            InitialData::Manufactured(m) => {
                let lambda = self.lambda;
                Some(std::sync::Arc::new(move |x, y, t| m.forcing(x, y, t, lambda)))
            }
            _ => None,
        }
    }

    pub fn stepper_config(&self) -> StepperConfig {
        StepperConfig { forcing: self.forcing(), ..StepperConfig::new(self.k, self.lambda, self.t_final) }
    }
}

/// Delaunay mesh of `polygon` with at least `count` triangles.
pub fn delaunay_with_count(polygon: &[Point2], count: usize) -> Result<Mesh, MeshError> {
    if count == 0 {
        return Err(MeshError::InvalidGeometry("triangle count must be positive".into()));
    }
    let mut h = target_h_for_count(polygon, count);
    if !(h.is_finite() && h > 0.0) || polygon_area(polygon) == 0.0 {
        return Err(MeshError::InvalidGeometry("degenerate domain polygon".into()));
    }
    let mut mesh = delaunay_triangulate(polygon, h)?;
    for _ in 0..8 {
        let got = mesh.triangles().len();
        if got >= count {
            break;
        }
        h *= (got as f64 / count as f64).sqrt() * 0.99;
        mesh = delaunay_triangulate(polygon, h)?;
    }
    if mesh.triangles().len() < count {
        return Err(MeshError::InvalidGeometry(format!("could not reach {count} triangles")));
    }
    Ok(mesh)
}

/// Structured n × n mesh with 2n² = `count` triangles.
pub fn structured_with_count(bbox: Rect, count: usize) -> Result<Mesh, MeshError> {
    let n = ((count as f64 / 2.0).sqrt()).round() as usize;
    if n == 0 || 2 * n * n != count {
        return Err(MeshError::InvalidGeometry(format!("{count} triangles is not of the form 2n²")));
    }
    generate_structured(n, n, bbox)
}
