//! File formats written and read by the CLI. Floats use `{:.16e}`, which
//! round-trips every double.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use cnls::fem::{FESpace, Field, FieldComplex};
use cnls::linalg::SolverConfig;
use cnls::mesh::{read_dump, write_dump};
use cnls::scenarios::{ConvergenceRow, ProfileSample};
use cnls::stepper::{DiagnosticsRecord, RelaxationState};
use num_complex::Complex64;

use crate::error::CliError;

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn diagnostics_csv(records: &[DiagnosticsRecord]) -> String {
    let mut s = String::from("t,mass,energy\n");
    for r in records {
        let _ = writeln!(s, "{:.16e},{:.16e},{:.16e}", r.t, r.mass, r.energy);
    }
    s
}

/// Parses a diagnostics file back into records.
pub fn parse_diagnostics(text: &str) -> Result<Vec<DiagnosticsRecord>, CliError> {
    let mut lines = text.lines();
    if lines.next() != Some("t,mass,energy") {
        return Err(CliError::Config("diagnostics header must be t,mass,energy".into()));
    }
    lines
        .map(|l| {
            let v: Vec<f64> = l
                .split(',')
                .map(|t| t.parse::<f64>().map_err(|_| CliError::Config(format!("bad diagnostics line {l:?}"))))
                .collect::<Result<_, _>>()?;
            match v[..] {
                [t, mass, energy] => Ok(DiagnosticsRecord { t, mass, energy }),
                _ => Err(CliError::Config(format!("bad diagnostics line {l:?}"))),
            }
        })
        .collect()
}

/// One line per DOF: coordinates and value, constrained DOFs included.
pub fn snapshot_csv(u: &FieldComplex) -> String {
    let mut s = String::from("x,y,re,im,abs\n");
    for (p, v) in u.space().dof_coords().iter().zip(u.full_coeffs()) {
        let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", p.x, p.y, v.re, v.im, v.norm());
    }
    s
}

/// Legacy VTK unstructured grid over the DOF points. Quadratic triangles
/// are split into four linear ones through their edge DOFs.
pub fn snapshot_vtk(u: &FieldComplex, title: &str) -> String {
    let space = u.space();
    let coords = space.dof_coords();
    let vals = u.full_coeffs();
    let n_tri = space.mesh().triangles().len();
    let mut cells: Vec<[usize; 3]> = Vec::with_capacity(n_tri * 4);
    for t in 0..n_tri {
        let d = space.triangle_dofs(t);
        if space.degree() == 1 {
            cells.push([d[0], d[1], d[2]]);
        } else {
            cells.push([d[0], d[3], d[5]]);
            cells.push([d[3], d[1], d[4]]);
            cells.push([d[5], d[4], d[2]]);
            cells.push([d[3], d[4], d[5]]);
        }
    }
    let mut s = format!("# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", coords.len());
    for p in coords {
        let _ = writeln!(s, "{:.16e} {:.16e} 0", p.x, p.y);
    }
    let _ = writeln!(s, "CELLS {} {}", cells.len(), cells.len() * 4);
    for c in &cells {
        let _ = writeln!(s, "3 {} {} {}", c[0], c[1], c[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {}", cells.len());
    for _ in &cells {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {}", coords.len());
    for (name, f) in [("abs", Complex64::norm as fn(Complex64) -> f64), ("re", |v: Complex64| v.re), ("im", |v: Complex64| v.im)] {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in &vals {
            let _ = writeln!(s, "{:.16e}", f(*v));
        }
    }
    s
}

pub fn profile_csv(samples: &[ProfileSample]) -> String {
    let mut s = String::from("x,re,im,abs\n");
    for p in samples {
        let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", p.x, p.re, p.im, p.abs);
    }
    s
}

fn rate_cell(i: usize, r: &ConvergenceRow) -> String {
    if i == 0 {
        String::new()
    } else if r.eoc.is_nan() {
        "n/a".into()
    } else {
        format!("{:.16e}", r.eoc)
    }
}

pub fn eoc_time_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("k,error,eoc\n");
    for (i, r) in rows.iter().enumerate() {
        let _ = writeln!(s, "{:.16e},{:.16e},{}", r.step, r.error, rate_cell(i, r));
    }
    s
}

pub fn eoc_space_csv(triangles: &[usize], rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("triangles,h,error,eoc\n");
    for (i, (n, r)) in triangles.iter().zip(rows).enumerate() {
        let _ = writeln!(s, "{n},{:.16e},{:.16e},{}", r.step, r.error, rate_cell(i, r));
    }
    s
}

/// Human-readable convergence table.
pub fn eoc_table(label: &str, rows: &[ConvergenceRow]) -> String {
    let mut s = format!("{label:>12} {:>14} {:>8}\n", "error", "eoc");
    for (i, r) in rows.iter().enumerate() {
        let rate = match rate_cell(i, r).as_str() {
            "" => String::new(),
            "n/a" => "n/a".into(),
            _ => format!("{:.4}", r.eoc),
        };
        let _ = writeln!(s, "{:>12.6e} {:>14.6e} {:>8}", r.step, r.error, rate);
    }
    s
}

/// Metadata stored with a saved state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMeta {
    pub preset: String,
    pub lambda: f64,
}

const STATE_MAGIC: &str = "cnls-state 1";

pub fn state_text(state: &RelaxationState, meta: &StateMeta) -> String {
    let space = state.space();
    let mut s = format!("{STATE_MAGIC}\npreset {}\n", meta.preset);
    let _ = writeln!(s, "degree {}\nlambda {:.16e}\nk {:.16e}\nn {}", space.degree(), meta.lambda, state.k, state.n);
    s.push_str("mesh\n");
    s.push_str(&write_dump(space.mesh()));
    s.push_str("end-mesh\n");
    let _ = writeln!(s, "u {}", space.n_free());
    for v in state.u.coeffs() {
        let _ = writeln!(s, "{:.16e} {:.16e}", v.re, v.im);
    }
    let _ = writeln!(s, "phi {}", space.n_free());
    for v in state.phi.coeffs() {
        let _ = writeln!(s, "{:.16e}", v);
    }
    s
}

pub fn parse_state(text: &str, solver: SolverConfig) -> Result<(RelaxationState, StateMeta), CliError> {
    let bad = |m: &str| CliError::Config(format!("state file: {m}"));
    let mut lines = text.lines();
    if lines.next() != Some(STATE_MAGIC) {
        return Err(bad("missing header"));
    }
    let mut field = |key: &str| -> Result<String, CliError> {
        let l = lines.next().ok_or_else(|| bad("truncated"))?;
        l.strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .map(str::to_string)
            .ok_or_else(|| bad(&format!("expected {key}")))
    };
    let num = |v: String| v.trim().parse::<f64>().map_err(|_| bad("bad number"));
    let preset = field("preset")?;
    let degree: usize = field("degree")?.trim().parse().map_err(|_| bad("bad degree"))?;
    let lambda = num(field("lambda")?)?;
    let k = num(field("k")?)?;
    let n: usize = field("n")?.trim().parse().map_err(|_| bad("bad step count"))?;
    if lines.next() != Some("mesh") {
        return Err(bad("expected mesh"));
    }
    let mut dump = String::new();
    loop {
        match lines.next() {
            Some("end-mesh") => break,
            Some(l) => {
                dump.push_str(l);
                dump.push('\n');
            }
            None => return Err(bad("unterminated mesh")),
        }
    }
    let mesh = Arc::new(read_dump(&dump)?);
    let space = FESpace::with_solver(mesh, degree, solver)?;
    let count = |l: Option<&str>, key: &str| -> Result<usize, CliError> {
        l.and_then(|l| l.strip_prefix(key))
            .and_then(|r| r.trim().parse().ok())
            .ok_or_else(|| bad(&format!("expected {key} count")))
    };
    let nu = count(lines.next(), "u ")?;
    if nu != space.n_free() {
        return Err(bad("coefficient count does not match the mesh"));
    }
    let mut u = Vec::with_capacity(nu);
    for _ in 0..nu {
        let l = lines.next().ok_or_else(|| bad("truncated u"))?;
        let mut t = l.split_whitespace().map(|v| v.parse::<f64>());
        match (t.next(), t.next()) {
            (Some(Ok(re)), Some(Ok(im))) => u.push(Complex64::new(re, im)),
            _ => return Err(bad("bad u line")),
        }
    }
    let np = count(lines.next(), "phi ")?;
    if np != nu {
        return Err(bad("phi count does not match"));
    }
    let mut phi = Vec::with_capacity(np);
    for _ in 0..np {
        phi.push(num(lines.next().ok_or_else(|| bad("truncated phi"))?.to_string())?);
    }
    let state = RelaxationState { u: Field::new(space.clone(), u)?, phi: Field::new(space, phi)?, n, k };
    Ok((state, StateMeta { preset, lambda }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use cnls::mesh::{generate_structured, BoundaryTag, Rect};
    use cnls::stepper::init_state;

    fn state() -> RelaxationState {
        let m = generate_structured(3, 2, Rect::new(-1.0, 1.0, 0.0, 1.0))
            .unwrap()
            .tag_boundary(|p| if p.x < -0.99 { BoundaryTag::Dirichlet } else { BoundaryTag::Neumann });
        let space = FESpace::new(Arc::new(m), 2).unwrap();
        let mut s = init_state(&space, |x, y| Complex64::new((1.0 + x).sin() * 0.3, y / 3.0)).unwrap();
        s.n = 7;
        s.k = 0.1;
        s
    }

    #[test]
    fn state_round_trip_is_exact() {
        let s = state();
        let meta = StateMeta { preset: "bright-mixed".into(), lambda: -2.0 };
        let text = state_text(&s, &meta);
        let (back, m2) = parse_state(&text, SolverConfig::default()).unwrap();
        assert_eq!(m2, meta);
        assert_eq!((back.n, back.k), (7, 0.1));
        assert_eq!(back.u.coeffs(), s.u.coeffs());
        assert_eq!(back.phi.coeffs(), s.phi.coeffs());
        assert_eq!(back.space().n_free(), s.space().n_free());
        assert!(parse_state(&text.replace("phi ", "psi "), SolverConfig::default()).is_err());
        assert!(parse_state("nonsense", SolverConfig::default()).is_err());
    }

    #[test]
    fn diagnostics_round_trip() {
        let recs = vec![
            DiagnosticsRecord { t: 0.0, mass: 1.0 / 3.0, energy: -2.5e-17 },
            DiagnosticsRecord { t: 0.1, mass: std::f64::consts::PI, energy: 1e300 },
        ];
        assert_eq!(parse_diagnostics(&diagnostics_csv(&recs)).unwrap(), recs);
    }

    #[test]
    fn vtk_counts() {
        let s = state();
        let text = snapshot_vtk(&s.u, "t");
        let n_tri = s.space().mesh().triangles().len();
        assert!(text.contains(&format!("CELLS {} {}", 4 * n_tri, 16 * n_tri)));
        assert!(text.contains(&format!("POINT_DATA {}", s.space().n_dofs())));
        assert_eq!(snapshot_csv(&s.u).lines().count(), s.space().n_dofs() + 1);
    }
}
