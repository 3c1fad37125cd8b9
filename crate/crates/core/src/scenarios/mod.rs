//! Closed-form solutions, manufactured forcings and experiment presets.

mod convergence;
mod preset;
mod profile;

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

pub use convergence::{
    eoc, eoc_with_floor, least_squares_rate, spatial_study, temporal_study, ConvergenceRow, RELATIVE_ERROR_FLOOR,
};
pub use preset::{
    delaunay_with_count, preset, structured_with_count, BcRule, ExperimentPreset, InitialData, MeshSpec, PRESET_NAMES,
};
pub use profile::{compare_mirrored, cross_section, mirrored_difference, ProfileComparison, ProfileSample};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("invalid soliton parameters: {0}")]
    InvalidParams(String),
    #[error("EOC input error: {0}")]
    Domain(String),
    #[error("unknown preset {name:?}; available: {}", available.join(", "))]
    UnknownPreset { name: String, available: Vec<&'static str> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonParams {
    pub eta: f64,
    pub xi: f64,
}

impl SolitonParams {
    pub fn new(eta: f64, xi: f64) -> Result<Self, ScenarioError> {
        if !(eta > 0.0 && eta.is_finite() && xi.is_finite()) {
            return Err(ScenarioError::InvalidParams(format!("eta = {eta}, xi = {xi}")));
        }
        Ok(Self { eta, xi })
    }

    pub fn validate_dark(&self) -> Result<(), ScenarioError> {
        if self.xi.sin().abs() < 1e-12 {
            return Err(ScenarioError::InvalidParams(format!("sin(xi) vanishes for xi = {}", self.xi)));
        }
        Ok(())
    }
}

/// η sech(η(x + 2ξt)) e^{−iθ}, θ = ξx + (ξ² − η²)t; solves the focusing
/// equation with λ = 2.
pub fn bright_soliton(x: f64, _y: f64, t: f64, p: SolitonParams) -> Complex64 {
    let (eta, xi) = (p.eta, p.xi);
    let theta = xi * x + (xi * xi - eta * eta) * t;
    let amp = eta / (eta * (x + 2.0 * xi * t)).cosh();
    Complex64::from_polar(amp, -theta)
}

/// η[cos ξ + i sin ξ tanh(η sin ξ (2η cos ξ t − x))] e^{−2iη²t}; solves the
/// defocusing equation with λ = −2.
pub fn dark_soliton(x: f64, _y: f64, t: f64, p: SolitonParams) -> Complex64 {
    let (eta, xi) = (p.eta, p.xi);
    let (s, c) = xi.sin_cos();
    let arg = s * eta * (-x + 2.0 * eta * c * t);
    Complex64::new(eta * c, eta * s * arg.tanh()) * Complex64::from_polar(1.0, -2.0 * eta * eta * t)
}

/// Manufactured exact solutions with their source terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Manufactured {
    /// eᵗ x(1−x) y(1/2−y) on [0,1]×[0,1/2], zero on the boundary.
    Poly,
    /// eᵗ (1 − cos 2πx) sin 2πy on [0,2]², zero on the boundary.
    Trig,
    /// eᵗ (1 + i/2), constant in space; compatible with Neumann conditions.
    ConstExp,
    /// (1 + t)(1 + i/2); reproduced exactly by the scheme when λ = 0.
    ConstAffine,
}

const CONST_AMP: Complex64 = Complex64::new(1.0, 0.5);

impl Manufactured {
    pub fn u(self, x: f64, y: f64, t: f64) -> Complex64 {
        match self {
            Self::Poly => mms_poly(x, y, t),
            Self::Trig => mms_trig(x, y, t),
            Self::ConstExp => CONST_AMP * t.exp(),
            Self::ConstAffine => CONST_AMP * (1.0 + t),
        }
    }

    pub fn forcing(self, x: f64, y: f64, t: f64, lambda: f64) -> Complex64 {
        match self {
            Self::Poly => mms_poly_forcing(x, y, t, lambda),
            Self::Trig => mms_trig_forcing(x, y, t, lambda),
            Self::ConstExp => {
                let u = self.u(x, y, t);
                Complex64::i() * u + lambda * u.norm_sqr() * u
            }
            Self::ConstAffine => {
                let u = self.u(x, y, t);
                Complex64::i() * CONST_AMP + lambda * u.norm_sqr() * u
            }
        }
    }
}

/// eᵗ x(1−x) y(1/2−y).
pub fn mms_poly(x: f64, y: f64, t: f64) -> Complex64 {
    Complex64::new(t.exp() * x * (1.0 - x) * y * (0.5 - y), 0.0)
}

/// i u_t + Δu + λ|u|²u for [`mms_poly`].
pub fn mms_poly_forcing(x: f64, y: f64, t: f64, lambda: f64) -> Complex64 {
    let e = t.exp();
    let u = e * x * (1.0 - x) * y * (0.5 - y);
    let lap = -2.0 * e * (y * (0.5 - y) + x * (1.0 - x));
    Complex64::new(lap + lambda * u * u * u, u)
}

/// eᵗ (1 − cos 2πx) sin 2πy.
pub fn mms_trig(x: f64, y: f64, t: f64) -> Complex64 {
    Complex64::new(t.exp() * (1.0 - (2.0 * PI * x).cos()) * (2.0 * PI * y).sin(), 0.0)
}

/// i u_t + Δu + λ|u|²u for [`mms_trig`].
pub fn mms_trig_forcing(x: f64, y: f64, t: f64, lambda: f64) -> Complex64 {
    let e = t.exp();
    let (cx, sy) = ((2.0 * PI * x).cos(), (2.0 * PI * y).sin());
    let u = e * (1.0 - cx) * sy;
    let lap = 4.0 * PI * PI * e * sy * (2.0 * cx - 1.0);
    Complex64::new(lap + lambda * u * u * u, u)
}
