//! Relaxation Crank-Nicolson time stepping for i u_t + Δu + λ|u|²u = f.
//!
//! The auxiliary real field Φ approximates |u|² at half steps:
//!
//! ```text
//! M Φ^{n+1/2} = 2 load(|U^n|²) − M Φ^{n−1/2}
//! [(i/k)M − ½S + (λ/2)W] U^{n+1} = [(i/k)M + ½S − (λ/2)W] U^n + load(f(t_n + k/2))
//! ```
//!
//! with W the mass matrix weighted by Φ^{n+1/2}. The step is linear in
//! U^{n+1} and conserves ‖U‖ exactly when f = 0.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::fem::{assemble_weighted_mass, l2_project, load_vector, norms, FESpace, FemError, Field, FieldComplex, FieldReal};
use crate::linalg::{CsrMatrix, LinalgError, SolverConfig, SolverMethod, SparseMatrixReal, SymmetricSolver};

/// Pointwise complex source term f(x, y, t).
pub type Forcing = Arc<dyn Fn(f64, f64, f64) -> Complex64 + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StepError {
    #[error("invalid stepper configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error("linear solve failed at step {n}: {source}")]
    Solver { n: usize, source: LinalgError },
    #[error("non-finite values at step {n} (t = {t})")]
    BlowUp { n: usize, t: f64 },
}

#[derive(Clone)]
pub struct StepperConfig {
    pub k: f64,
    pub lambda: f64,
    pub t_final: f64,
    pub solver: SolverConfig,
    pub forcing: Option<Forcing>,
}

impl std::fmt::Debug for StepperConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StepperConfig")
            .field("k", &self.k)
            .field("lambda", &self.lambda)
            .field("t_final", &self.t_final)
            .field("solver", &self.solver)
            .field("forcing", &self.forcing.is_some())
            .finish()
    }
}

impl StepperConfig {
    pub fn new(k: f64, lambda: f64, t_final: f64) -> Self {
        Self { k, lambda, t_final, solver: SolverConfig::default(), forcing: None }
    }

    pub fn with_forcing(mut self, f: impl Fn(f64, f64, f64) -> Complex64 + Send + Sync + 'static) -> Self {
        self.forcing = Some(Arc::new(f));
        self
    }

    pub fn with_solver(mut self, solver: SolverConfig) -> Self {
        self.solver = solver;
        self
    }

    pub fn validate(&self) -> Result<(), StepError> {
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(StepError::Config(format!("time step must be positive, got {}", self.k)));
        }
        if !self.lambda.is_finite() {
            return Err(StepError::Config("lambda must be finite".into()));
        }
        if !(self.t_final.is_finite() && self.t_final >= self.k * (1.0 - 1e-12)) {
            return Err(StepError::Config(format!("final time {} is shorter than one step {}", self.t_final, self.k)));
        }
        self.solver.validate().map_err(|e| StepError::Config(e.to_string()))
    }

    /// Number of uniform steps, the nearest integer to T/k.
    pub fn n_steps(&self) -> usize {
        (self.t_final / self.k + 0.5).floor() as usize
    }
}

/// U^n and Φ^{n−1/2} at step n of size k.
#[derive(Debug, Clone)]
pub struct RelaxationState {
    pub u: FieldComplex,
    pub phi: FieldReal,
    pub n: usize,
    pub k: f64,
}

impl RelaxationState {
    pub fn t(&self) -> f64 {
        self.n as f64 * self.k
    }

    pub fn space(&self) -> &Arc<FESpace> {
        self.u.space()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
}

/// U⁰ = P u₀ and Φ^{−1/2} = P |u₀|².
pub fn init_state(
    space: &Arc<FESpace>,
    u0: impl Fn(f64, f64) -> Complex64 + Sync,
) -> Result<RelaxationState, StepError> {
    let u = l2_project(space, |x, y, _| u0(x, y), 0.0)?;
    let phi = l2_project(space, |x, y, _| u0(x, y).norm_sqr(), 0.0)?;
    Ok(RelaxationState { u, phi, n: 0, k: 0.0 })
}

/// Φ^{n+1/2} = 2 P(|U^n|²) − Φ^{n−1/2}.
pub fn phi_update(state: &RelaxationState) -> Result<FieldReal, StepError> {
    let space = state.space();
    let abs2: Vec<f64> = state.u.quad_values().iter().map(|v| v.norm_sqr()).collect();
    let load = crate::fem::load_from_quad_values(space, &abs2);
    let mphi = space.mass().spmv(state.phi.coeffs()).map_err(FemError::from)?;
    let rhs: Vec<f64> = load.iter().zip(&mphi).map(|(l, m)| 2.0 * l - m).collect();
    let c = space.solve_mass(&rhs)?;
    Ok(Field::new(space.clone(), c)?)
}

/// Real matrix times complex vector.
fn spmv_rc(a: &SparseMatrixReal, x: &[Complex64]) -> Vec<Complex64> {
    (0..a.dim())
        .map(|i| (a.row_ptr()[i]..a.row_ptr()[i + 1]).map(|k| x[a.col_idx()[k]] * a.values()[k]).sum())
        .collect()
}

/// One step of the scheme.
pub fn step(state: &RelaxationState, cfg: &StepperConfig) -> Result<RelaxationState, StepError> {
    cfg.validate()?;
    advance(state, cfg, cfg.k)
}

/// One step of signed size `dt`. A negative `dt` steps backwards and
/// decrements n; the state keeps the nominal step size `cfg.k`.
pub fn advance(state: &RelaxationState, cfg: &StepperConfig, dt: f64) -> Result<RelaxationState, StepError> {
    if !(dt != 0.0 && dt.is_finite()) {
        return Err(StepError::Config(format!("invalid step {dt}")));
    }
    let space = state.space().clone();
    let n_next = if dt > 0.0 { state.n + 1 } else { state.n.saturating_sub(1) };
    let phi = phi_update(state)?;
    let m = space.mass();
    let s = space.stiffness();
    let w = assemble_weighted_mass(&space, &phi)?;
    let ik = Complex64::new(0.0, 1.0 / dt);
    let half_l = 0.5 * cfg.lambda;

    // All three operators share the space's sparsity pattern.
    let values: Vec<Complex64> = m
        .values()
        .iter()
        .zip(s.values())
        .zip(w.values())
        .map(|((&mv, &sv), &wv)| ik * mv + Complex64::from(-0.5 * sv + half_l * wv))
        .collect();
    let a = CsrMatrix::from_pattern_values(space.pattern(), values).map_err(FemError::from)?;

    let u = state.u.coeffs();
    let mu = spmv_rc(m, u);
    let su = spmv_rc(s, u);
    let wu = spmv_rc(&w, u);
    let mut rhs: Vec<Complex64> = (0..u.len()).map(|i| ik * mu[i] + 0.5 * su[i] - half_l * wu[i]).collect();
    if let Some(f) = &cfg.forcing {
        let t_mid = state.t() + 0.5 * dt;
        let fl = load_vector(&space, |x, y, t| f(x, y, t), t_mid);
        for (r, v) in rhs.iter_mut().zip(fl) {
            *r += v;
        }
    }

    let solve_err = |source| StepError::Solver { n: n_next, source };
    let next = if rhs.is_empty() {
        Vec::new()
    } else {
        let solver = match cfg.solver.method {
            SolverMethod::DirectLu => {
                let sym = space.symbolic().map_err(solve_err)?;
                SymmetricSolver::with_symbolic(a, &sym, cfg.solver)
            }
            SolverMethod::IterativeResidual => SymmetricSolver::new(a, cfg.solver),
        }
        .map_err(solve_err)?;
        solver.solve_with_guess(&rhs, Some(u)).map_err(solve_err)?
    };
    let out = RelaxationState { u: Field::new(space, next)?, phi, n: n_next, k: cfg.k };
    if !out.u.is_finite() || !out.phi.is_finite() {
        return Err(StepError::BlowUp { n: out.n, t: out.t() });
    }
    Ok(out)
}

/// Mass ‖U‖² and energy ½‖∇U‖² − (λ/4)‖U‖⁴_{L⁴}.
pub fn diagnostics(state: &RelaxationState, lambda: f64) -> DiagnosticsRecord {
    let nrm = norms(&state.u);
    DiagnosticsRecord {
        t: state.t(),
        mass: nrm.l2 * nrm.l2,
        energy: 0.5 * nrm.h1_semi * nrm.h1_semi - 0.25 * lambda * nrm.l4.powi(4),
    }
}

/// Diagnostics every `cadence` steps; the default keeps a run under 500
/// records including the first and last.
pub fn default_cadence(n_steps: usize) -> usize {
    n_steps.div_ceil(498).max(1)
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: RelaxationState,
    pub records: Vec<DiagnosticsRecord>,
}

/// A failed run with the diagnostics gathered before the failure.
#[derive(Debug, Clone, Error)]
#[error("{error}")]
pub struct RunFailure {
    pub error: StepError,
    pub records: Vec<DiagnosticsRecord>,
    pub last_state: Option<Box<RelaxationState>>,
}

/// Advances `state` to `cfg.t_final`.
///
/// `observer` sees the initial state and every later state; returning an
/// error from it aborts the run.
pub fn run(
    state: RelaxationState,
    cfg: &StepperConfig,
    cadence: Option<usize>,
    mut observer: impl FnMut(&RelaxationState) -> Result<(), String>,
) -> Result<RunOutput, RunFailure> {
    let fail = |error, records, last: Option<&RelaxationState>| RunFailure {
        error,
        records,
        last_state: last.map(|s| Box::new(s.clone())),
    };
    if let Err(e) = cfg.validate() {
        return Err(fail(e, Vec::new(), None));
    }
    let n_steps = cfg.n_steps();
    let every = cadence.unwrap_or_else(|| default_cadence(n_steps)).max(1);
    let mut state = RelaxationState { k: cfg.k, ..state };
    let mut records = vec![diagnostics(&state, cfg.lambda)];
    if let Err(msg) = observer(&state) {
        return Err(fail(StepError::Config(msg), records, Some(&state)));
    }
    for i in 1..=n_steps {
        match step(&state, cfg) {
            Ok(next) => state = next,
            Err(e) => return Err(fail(e, records, Some(&state))),
        }
        if i % every == 0 || i == n_steps {
            let rec = diagnostics(&state, cfg.lambda);
            if !(rec.mass.is_finite() && rec.energy.is_finite()) {
                records.push(rec);
                return Err(fail(StepError::BlowUp { n: state.n, t: state.t() }, records, Some(&state)));
            }
            records.push(rec);
        }
        if let Err(msg) = observer(&state) {
            return Err(fail(StepError::Config(msg), records, Some(&state)));
        }
    }
    Ok(RunOutput { state, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::build_space;
    use crate::mesh::{generate_structured, BoundaryTag, Mesh, Point2, Rect, Triangle};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_triangles() -> Arc<Mesh> {
        let pts = vec![Point2::new(0.0, 0.0), Point2::new(1.2, 0.1), Point2::new(1.0, 0.9), Point2::new(-0.1, 1.0)];
        Arc::new(Mesh::from_triangles(pts, vec![Triangle::new(0, 1, 2), Triangle::new(0, 2, 3)]).unwrap())
    }

    fn random_state(space: &Arc<FESpace>, rng: &mut ChaCha8Rng) -> RelaxationState {
        let u = (0..space.n_free()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let phi = (0..space.n_free()).map(|_| rng.gen_range(0.0..1.0)).collect();
        RelaxationState {
            u: Field::new(space.clone(), u).unwrap(),
            phi: Field::new(space.clone(), phi).unwrap(),
            n: 3,
            k: 0.1,
        }
    }

    /// Dense complex Gaussian elimination with partial pivoting.
    fn dense_solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Vec<Complex64> {
        let n = b.len();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| a[i][c].norm().partial_cmp(&a[j][c].norm()).unwrap()).unwrap();
            a.swap(c, p);
            b.swap(c, p);
            for r in c + 1..n {
                let f = a[r][c] / a[c][c];
                for j in c..n {
                    let v = a[c][j];
                    a[r][j] -= f * v;
                }
                let v = b[c];
                b[r] -= f * v;
            }
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for r in (0..n).rev() {
            let s: Complex64 = (r + 1..n).map(|j| a[r][j] * x[j]).sum();
            x[r] = (b[r] - s) / a[r][r];
        }
        x
    }

    #[test]
    fn phi_update_relation_and_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for r in [1, 2] {
            let space = build_space(two_triangles(), r).unwrap();
            let st = random_state(&space, &mut rng);
            let new = phi_update(&st).unwrap();
            // M(φ_new + φ_old)/2 = load(|U|²)
            let m = space.mass().to_dense();
            let abs2: Vec<f64> = st.u.quad_values().iter().map(|v| v.norm_sqr()).collect();
            let load = crate::fem::load_from_quad_values(&space, &abs2);
            for i in 0..m.len() {
                let lhs: f64 = (0..m.len()).map(|j| m[i][j] * 0.5 * (new.coeffs()[j] + st.phi.coeffs()[j])).sum();
                assert!((lhs - load[i]).abs() < 1e-11);
            }
            let fixed = RelaxationState { phi: l2_abs2(&st.u), ..st.clone() };
            let again = phi_update(&fixed).unwrap();
            for (a, b) in again.coeffs().iter().zip(fixed.phi.coeffs()) {
                assert!((a - b).abs() < 1e-11);
            }
            let zero = RelaxationState { u: FieldComplex::zeros(space.clone()), ..st.clone() };
            let neg = phi_update(&zero).unwrap();
            for (a, b) in neg.coeffs().iter().zip(st.phi.coeffs()) {
                assert!((a + b).abs() < 1e-12);
            }
        }
    }

    fn l2_abs2(u: &FieldComplex) -> FieldReal {
        let space = u.space();
        let abs2: Vec<f64> = u.quad_values().iter().map(|v| v.norm_sqr()).collect();
        let c = space.solve_mass(&crate::fem::load_from_quad_values(space, &abs2)).unwrap();
        Field::new(space.clone(), c).unwrap()
    }

    #[test]
    fn step_matches_dense_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for r in [1, 2] {
            let space = build_space(two_triangles(), r).unwrap();
            let st = random_state(&space, &mut rng);
            let cfg = StepperConfig::new(0.05, 1.7, 1.0).with_forcing(|x, y, t| Complex64::new(x * t, y - t));
            let next = step(&st, &cfg).unwrap();

            let m = space.mass().to_dense();
            let s = space.stiffness().to_dense();
            let phi = phi_update(&st).unwrap();
            let w = assemble_weighted_mass(&space, &phi).unwrap().to_dense();
            let n = m.len();
            let ik = Complex64::new(0.0, 1.0 / cfg.k);
            let lhs: Vec<Vec<Complex64>> = (0..n)
                .map(|i| (0..n).map(|j| ik * m[i][j] - 0.5 * s[i][j] + 0.5 * cfg.lambda * w[i][j]).collect())
                .collect();
            let f = load_vector(&space, |x, y, t| Complex64::new(x * t, y - t), st.t() + 0.5 * cfg.k);
            let rhs: Vec<Complex64> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| (ik * m[i][j] + 0.5 * s[i][j] - 0.5 * cfg.lambda * w[i][j]) * st.u.coeffs()[j])
                        .sum::<Complex64>()
                        + f[i]
                })
                .collect();
            let x = dense_solve(lhs, rhs);
            for (a, b) in next.u.coeffs().iter().zip(&x) {
                assert!((a - b).norm() < 1e-10);
            }
            assert_eq!(next.n, 4);
            assert!((next.t() - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn free_schroedinger_is_reversible() {
        let mesh = Arc::new(generate_structured(6, 4, Rect::new(0.0, 1.5, 0.0, 1.0)).unwrap());
        let space = build_space(mesh, 2).unwrap();
        let st = init_state(&space, |x, y| Complex64::new((3.0 * x).cos() * y, x * y)).unwrap();
        let cfg = StepperConfig::new(0.01, 0.0, 1.0);
        let fwd = advance(&st, &cfg, cfg.k).unwrap();
        // Φ enters with λ = 0 only through its own update, so it is irrelevant here.
        let back = advance(&fwd, &cfg, -cfg.k).unwrap();
        let diff: f64 = back.u.coeffs().iter().zip(st.u.coeffs()).map(|(a, b)| (a - b).norm_sqr()).sum();
        let size: f64 = st.u.coeffs().iter().map(|a| a.norm_sqr()).sum();
        assert!((diff / size).sqrt() < 1e-9);
        let m0 = diagnostics(&st, 0.0).mass;
        assert!((diagnostics(&fwd, 0.0).mass - m0).abs() < 1e-12 * m0);
    }

    #[test]
    fn zero_state_stays_zero() {
        let space = build_space(two_triangles(), 2).unwrap();
        let st = init_state(&space, |_, _| Complex64::new(0.0, 0.0)).unwrap();
        assert!(st.u.coeffs().iter().all(|c| c.norm() == 0.0));
        assert!(st.phi.coeffs().iter().all(|&c| c == 0.0));
        assert_eq!(diagnostics(&st, 2.0), DiagnosticsRecord { t: 0.0, mass: 0.0, energy: 0.0 });
    }

    #[test]
    fn real_initial_data_has_real_projection() {
        let space = build_space(Arc::new(generate_structured(4, 4, Rect::new(0.0, 1.0, 0.0, 1.0)).unwrap()), 2).unwrap();
        let st = init_state(&space, |x, y| Complex64::new(x * x - y, 0.0)).unwrap();
        assert!(st.u.coeffs().iter().all(|c| c.im.abs() < 1e-12));
        let p = l2_project(&space, |x, y, _| (x * x - y).powi(2), 0.0).unwrap();
        for (a, b) in st.phi.coeffs().iter().zip(p.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_field_diagnostics() {
        let space = build_space(Arc::new(generate_structured(3, 2, Rect::new(0.0, 3.0, 0.0, 2.0)).unwrap()), 1).unwrap();
        let c = Complex64::new(0.3, 0.4);
        let st = RelaxationState {
            u: Field::new(space.clone(), vec![c; space.n_free()]).unwrap(),
            phi: FieldReal::zeros(space.clone()),
            n: 0,
            k: 0.1,
        };
        let d = diagnostics(&st, 1.5);
        assert!((d.mass - 0.25 * 6.0).abs() < 1e-13);
        assert!((d.energy + 0.25 * 1.5 * 0.0625 * 6.0).abs() < 1e-13);
    }

    #[test]
    fn config_validation_and_step_count() {
        assert!(StepperConfig::new(0.0, 1.0, 1.0).validate().is_err());
        assert!(StepperConfig::new(0.5, 1.0, 0.1).validate().is_err());
        assert_eq!(StepperConfig::new(5e-3, 2.0, 3.0).n_steps(), 600);
        assert_eq!(StepperConfig::new(0.1, 2.0, 0.1).n_steps(), 1);
        assert_eq!(StepperConfig::new(5e-2, -2.0, 15.0).n_steps(), 300);
    }

    #[test]
    fn run_records_cadence_and_observer() {
        let space = build_space(two_triangles(), 1).unwrap();
        let st = init_state(&space, |x, _| Complex64::new(1.0 + x, 0.5)).unwrap();
        let cfg = StepperConfig::new(0.01, 1.0, 0.1);
        let mut seen = Vec::new();
        let out = run(st.clone(), &cfg, Some(3), |s| {
            seen.push(s.n);
            Ok(())
        })
        .unwrap();
        assert_eq!(out.state.n, 10);
        assert_eq!(seen, (0..=10).collect::<Vec<_>>());
        let ts: Vec<usize> = out.records.iter().map(|r| (r.t / 0.01).round() as usize).collect();
        assert_eq!(ts, vec![0, 3, 6, 9, 10]);
        assert!(default_cadence(300) == 1 && default_cadence(1600) == 4);
        assert!(1600 / default_cadence(1600) + 2 <= 500);

        let stop = run(st, &cfg, None, |s| if s.n == 4 { Err("stop".into()) } else { Ok(()) }).unwrap_err();
        assert_eq!(stop.records.len(), 5);
        assert_eq!(stop.last_state.unwrap().n, 4);
    }

    #[test]
    fn mixed_boundary_step_keeps_dirichlet_zero() {
        let m = generate_structured(8, 2, Rect::new(-2.0, 2.0, -0.5, 0.5)).unwrap().tag_boundary(|p| {
            if (p.x.abs() - 2.0).abs() < 1e-12 {
                BoundaryTag::Dirichlet
            } else {
                BoundaryTag::Neumann
            }
        });
        let space = build_space(Arc::new(m), 2).unwrap();
        let st = init_state(&space, |x, _| Complex64::new(1.0 / x.cosh(), 0.0)).unwrap();
        let next = step(&st, &StepperConfig::new(0.05, 2.0, 1.0)).unwrap();
        assert_eq!(next.u.evaluate(Point2::new(2.0, 0.1)).unwrap(), Complex64::new(0.0, 0.0));
        let (m0, m1) = (diagnostics(&st, 2.0).mass, diagnostics(&next, 2.0).mass);
        assert!((m1 - m0).abs() <= 1e-11 * m0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn unforced_step_conserves_mass(seed in any::<u64>(), lambda in -4.0f64..4.0, k in 1e-3f64..0.5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let space = build_space(Arc::new(generate_structured(3, 3, Rect::new(0.0, 1.0, 0.0, 1.0)).unwrap()), 2).unwrap();
            let st = random_state(&space, &mut rng);
            let next = step(&st, &StepperConfig::new(k, lambda, 1.0)).unwrap();
            let (m0, m1) = (diagnostics(&st, lambda).mass, diagnostics(&next, lambda).mass);
            prop_assert!((m1 - m0).abs() <= 100.0 * 1e-12 * m0, "{} -> {}", m0, m1);
        }
    }
}
