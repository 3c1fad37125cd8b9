//! Worst-case discrepancies between the library and the dense reference.
//! Each function returns the largest deviation it saw together with a label
//! of where it happened.

use std::sync::Arc;

use cnls::fem::{assemble_mass, assemble_stiffness, assemble_weighted_mass, l2_project, load_vector, FESpace, Field};
use cnls::mesh::{delaunay_triangulate, generate_structured, BoundaryTag, Point2, Rect};
use cnls::stepper::{advance, diagnostics, phi_update, step, RelaxationState, StepperConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{circumcircle_violation, dense_solve, fixture_meshes, max_diff, to_complex, DenseFe, C};

#[derive(Debug, Clone)]
pub struct Worst {
    pub value: f64,
    pub at: String,
}

impl Worst {
    fn new() -> Self {
        Self { value: f64::NEG_INFINITY, at: String::new() }
    }

    fn see(&mut self, value: f64, at: impl FnOnce() -> String) {
        if value > self.value || value.is_nan() {
            self.value = value;
            self.at = at();
        }
    }
}

fn cmax(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn fmax(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// P1 and P2 spaces on every fixture mesh.
pub fn fixture_spaces() -> Vec<(String, Arc<FESpace>)> {
    let mut out = Vec::new();
    for (name, mesh) in fixture_meshes() {
        let mesh = Arc::new(mesh);
        for r in [1, 2] {
            out.push((format!("{name}/P{r}"), FESpace::new(mesh.clone(), r).unwrap()));
        }
    }
    out
}

/// Larger spaces for the random-state identities: a mixed strip and a
/// Delaunay quadrilateral, each with P1 and P2.
pub fn identity_spaces() -> Vec<Arc<FESpace>> {
    let strip = generate_structured(8, 3, Rect::new(-2.0, 2.0, -0.5, 1.0))
        .unwrap()
        .tag_boundary(|p| if p.x > 1.999 { BoundaryTag::Dirichlet } else { BoundaryTag::Neumann });
    let poly = [Point2::new(0.0, 0.0), Point2::new(2.0, 0.0), Point2::new(2.5, 1.0), Point2::new(0.5, 1.2)];
    let delaunay = delaunay_triangulate(&poly, 0.25).unwrap();
    let mut out = Vec::new();
    for m in [strip, delaunay] {
        let m = Arc::new(m);
        for r in [1, 2] {
            out.push(FESpace::new(m.clone(), r).unwrap());
        }
    }
    out
}

pub fn random_state(space: &Arc<FESpace>, rng: &mut ChaCha8Rng) -> RelaxationState {
    let n = space.n_free();
    let u = (0..n).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let phi = (0..n).map(|_| rng.gen_range(0.0..1.5)).collect();
    RelaxationState { u: Field::new(space.clone(), u).unwrap(), phi: Field::new(space.clone(), phi).unwrap(), n: 0, k: 0.0 }
}

/// Mass and stiffness matrices, entrywise.
pub fn mass_stiffness() -> Worst {
    let mut w = Worst::new();
    for (name, space) in fixture_spaces() {
        let oracle = DenseFe::new(&space);
        w.see(max_diff(&oracle.mass(), &assemble_mass(&space).to_dense()), || format!("{name} mass"));
        w.see(max_diff(&oracle.stiffness(), &assemble_stiffness(&space).to_dense()), || format!("{name} stiffness"));
    }
    w
}

/// Φ-weighted mass matrix for random Φ, entrywise.
pub fn weighted_mass() -> Worst {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut w = Worst::new();
    for (name, space) in fixture_spaces() {
        if space.n_free() == 0 {
            continue;
        }
        let oracle = DenseFe::new(&space);
        let phi: Vec<f64> = (0..space.n_free()).map(|_| rng.gen_range(-1.0..2.0)).collect();
        let lib = assemble_weighted_mass(&space, &Field::new(space.clone(), phi.clone()).unwrap()).unwrap();
        w.see(max_diff(&oracle.weighted_mass(&oracle.nodes_from_free(&phi)), &lib.to_dense()), || name.clone());
    }
    w
}

/// Load vector of a cubic source (exact for both rules) and its L² projection.
pub fn load_and_projection() -> (Worst, Worst) {
    let f = |x: f64, y: f64| C::new(1.0 + x * y - 0.5 * x * x * x, y * y - x);
    let (mut wl, mut wp) = (Worst::new(), Worst::new());
    for (name, space) in fixture_spaces() {
        let oracle = DenseFe::new(&space);
        let dense = oracle.load(f);
        wl.see(cmax(&load_vector(&space, |x, y, _| f(x, y), 0.0), &dense), || name.clone());
        if space.n_free() == 0 {
            continue;
        }
        let p = l2_project(&space, |x, y, _| f(x, y), 0.0).unwrap();
        let expect = dense_solve(to_complex(&oracle.mass()), dense);
        wp.see(cmax(p.coeffs(), &expect), || name.clone());
    }
    (wl, wp)
}

/// One full relaxation step from random data, with and without forcing.
pub fn relaxation_step() -> Worst {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let forcing = |x: f64, y: f64, t: f64| C::new(x * y + t, 1.0 - y * t);
    let mut w = Worst::new();
    for (name, space) in fixture_spaces() {
        if space.n_free() == 0 {
            continue;
        }
        let oracle = DenseFe::new(&space);
        let mut state = random_state(&space, &mut rng);
        state.n = 4;
        state.k = 0.05;
        for (lambda, with_f) in [(2.0, false), (-2.0, true), (0.0, true)] {
            let mut cfg = StepperConfig::new(0.05, lambda, 1.0);
            if with_f {
                cfg = cfg.with_forcing(forcing);
            }
            let next = step(&state, &cfg).unwrap();
            let f: Option<&dyn Fn(f64, f64, f64) -> C> = if with_f { Some(&forcing) } else { None };
            let (u1, phi1) = oracle.step(state.u.coeffs(), state.phi.coeffs(), 0.05, lambda, 0.2, f);
            let d = cmax(next.u.coeffs(), &u1).max(fmax(next.phi.coeffs(), &phi1));
            w.see(d, || format!("{name} λ={lambda}"));
        }
    }
    w
}

/// Relative mass change over one unforced step, for `count` random states,
/// time steps and coupling constants.
pub fn single_step_mass(count: usize) -> Worst {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let spaces = identity_spaces();
    let mut w = Worst::new();
    for i in 0..count {
        let space = &spaces[i % spaces.len()];
        let state = random_state(space, &mut rng);
        let cfg = StepperConfig::new(rng.gen_range(1e-3..0.5), rng.gen_range(-4.0..4.0), 1.0);
        let m0 = diagnostics(&state, cfg.lambda).mass;
        let m1 = diagnostics(&step(&state, &cfg).unwrap(), cfg.lambda).mass;
        w.see(((m1 - m0) / m0).abs(), || format!("state {i}, k={:.3e}, λ={:.3}", cfg.k, cfg.lambda));
    }
    w
}

/// The Φ update against the dense oracle on every fixture space.
pub fn phi_update_relation() -> Worst {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut w = Worst::new();
    for (name, space) in fixture_spaces() {
        if space.n_free() == 0 {
            continue;
        }
        let oracle = DenseFe::new(&space);
        let state = random_state(&space, &mut rng);
        let lib = phi_update(&state).unwrap();
        w.see(fmax(lib.coeffs(), &oracle.phi_update(state.u.coeffs(), state.phi.coeffs())), || name.clone());
    }
    w
}

/// Relative L² coefficient error of a λ=0 step forward followed by one back.
pub fn linear_reversibility() -> Worst {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut w = Worst::new();
    for (i, space) in identity_spaces().into_iter().enumerate() {
        let state = random_state(&space, &mut rng);
        let k = 0.05;
        let cfg = StepperConfig::new(k, 0.0, 1.0);
        let back = advance(&advance(&state, &cfg, k).unwrap(), &cfg, -k).unwrap();
        let num: f64 = back.u.coeffs().iter().zip(state.u.coeffs()).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = state.u.coeffs().iter().map(|a| a.norm_sqr()).sum();
        w.see((num / den).sqrt(), || format!("space {i}"));
    }
    w
}

/// Empty-circumcircle violation over generated meshes of convex polygons.
pub fn delaunay_polygons() -> Worst {
    let polygons: Vec<Vec<Point2>> = vec![
        (0..7).map(|i| std::f64::consts::TAU * i as f64 / 7.0).map(|a| Point2::new(3.0 * a.cos(), a.sin())).collect(),
        vec![Point2::new(0.0, 0.0), Point2::new(1e-3, 0.0), Point2::new(1e-3, 2e-4), Point2::new(0.0, 3e-4)],
        vec![Point2::new(-8.0, -1.0), Point2::new(8.0, -1.0), Point2::new(8.0, 1.0), Point2::new(-7.0, 1.0)],
    ];
    let mut w = Worst::new();
    for (i, poly) in polygons.iter().enumerate() {
        let span = poly.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max)
            - poly.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        for frac in [0.3, 0.08, 0.03] {
            let mesh = delaunay_triangulate(poly, frac * span).unwrap();
            w.see(circumcircle_violation(&mesh), || format!("polygon {i} at h = {frac}·span"));
        }
    }
    w
}
