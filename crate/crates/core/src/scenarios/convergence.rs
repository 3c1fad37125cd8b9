use std::sync::Arc;

use super::{Manufactured, ScenarioError};
use crate::fem::{FESpace, Field};
use crate::linalg::SolverConfig;
use crate::mesh::Mesh;
use crate::stepper::{init_state, run, StepError, StepperConfig};

/// Errors at or below this fraction of the exact solution's norm count as
/// exact; their rates are reported as NaN.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-10;

fn check(errors: &[f64], steps: &[f64]) -> Result<(), ScenarioError> {
    if errors.len() != steps.len() || errors.len() < 2 {
        return Err(ScenarioError::Domain(format!(
            "need two or more matching entries, got {} errors and {} steps",
            errors.len(),
            steps.len()
        )));
    }
    if let Some(v) = errors.iter().chain(steps).find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(ScenarioError::Domain(format!("non-positive or non-finite value {v}")));
    }
    Ok(())
}

/// log(E_{i+1}/E_i) / log(k_{i+1}/k_i) for consecutive runs.
pub fn eoc(errors: &[f64], steps: &[f64]) -> Result<Vec<f64>, ScenarioError> {
    check(errors, steps)?;
    Ok(errors
        .windows(2)
        .zip(steps.windows(2))
        .map(|(e, k)| (e[1] / e[0]).ln() / (k[1] / k[0]).ln())
        .collect())
}

/// As [`eoc`], but pairs touching an error at or below `floor` give NaN.
pub fn eoc_with_floor(errors: &[f64], steps: &[f64], floor: f64) -> Result<Vec<f64>, ScenarioError> {
    if errors.len() != steps.len() || errors.len() < 2 {
        return check(errors, steps).map(|_| Vec::new());
    }
    let clamped: Vec<f64> = errors.iter().map(|&e| if e > floor { e } else { 1.0 }).collect();
    let mut out = eoc(&clamped, steps)?;
    for (i, r) in out.iter_mut().enumerate() {
        if errors[i] <= floor || errors[i + 1] <= floor {
            *r = f64::NAN;
        }
    }
    Ok(out)
}

/// Slope of the least-squares line through (log step, log error).
pub fn least_squares_rate(errors: &[f64], steps: &[f64]) -> Result<f64, ScenarioError> {
    check(errors, steps)?;
    let n = errors.len() as f64;
    let xs: Vec<f64> = steps.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(ScenarioError::Domain("all steps are equal".into()));
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    /// Time step or mesh size.
    pub step: f64,
    pub error: f64,
    /// Rate against the previous row; NaN on the first row and at the floor.
    pub eoc: f64,
    /// Error floor used for this row.
    pub floor: f64,
}

fn attach_rates(raw: Vec<(f64, f64, f64)>) -> Vec<ConvergenceRow> {
    let mut rows: Vec<ConvergenceRow> =
        raw.iter().map(|&(step, error, floor)| ConvergenceRow { step, error, eoc: f64::NAN, floor }).collect();
    for i in 1..rows.len() {
        let (a, b) = (rows[i - 1], rows[i]);
        if a.error > a.floor && b.error > b.floor && a.step != b.step {
            rows[i].eoc = (b.error / a.error).ln() / (b.step / a.step).ln();
        }
    }
    rows
}

/// L² error at T of the relaxation scheme against the manufactured solution.
fn final_error(space: &Arc<FESpace>, m: Manufactured, cfg: &StepperConfig) -> Result<(f64, f64), StepError> {
    let state = init_state(space, |x, y| m.u(x, y, 0.0))?;
    let out = run(state, cfg, Some(usize::MAX), |_| Ok(())).map_err(|f| f.error)?;
    let t = out.state.t();
    let err = out.state.u.l2_error(|x, y| m.u(x, y, t));
    let norm = Field::zeros(space.clone()).l2_error(|x, y| m.u(x, y, t));
    Ok((err, RELATIVE_ERROR_FLOOR * norm.max(1.0)))
}

fn mms_config(m: Manufactured, k: f64, lambda: f64, t_final: f64, solver: SolverConfig) -> StepperConfig {
    StepperConfig::new(k, lambda, t_final).with_solver(solver).with_forcing(move |x, y, t| m.forcing(x, y, t, lambda))
}

/// Error at T for each time step on a fixed space.
pub fn temporal_study(
    space: &Arc<FESpace>,
    m: Manufactured,
    lambda: f64,
    t_final: f64,
    ks: &[f64],
    solver: SolverConfig,
) -> Result<Vec<ConvergenceRow>, StepError> {
    let mut raw = Vec::with_capacity(ks.len());
    for &k in ks {
        let (e, floor) = final_error(space, m, &mms_config(m, k, lambda, t_final, solver))?;
        raw.push((k, e, floor));
    }
    Ok(attach_rates(raw))
}

/// Error at T for each mesh with a fixed time step; the step column holds h.
pub fn spatial_study(
    meshes: &[Arc<Mesh>],
    degree: usize,
    m: Manufactured,
    lambda: f64,
    k: f64,
    t_final: f64,
    solver: SolverConfig,
) -> Result<Vec<ConvergenceRow>, StepError> {
    let cfg = mms_config(m, k, lambda, t_final, solver);
    let mut raw = Vec::with_capacity(meshes.len());
    for mesh in meshes {
        let space = FESpace::with_solver(mesh.clone(), degree, solver)?;
        let (e, floor) = final_error(&space, m, &cfg)?;
        raw.push((mesh.h(), e, floor));
    }
    Ok(attach_rates(raw))
}
