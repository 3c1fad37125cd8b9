use crate::fem::{FemError, FieldComplex};
use crate::mesh::Point2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub x: f64,
    pub abs: f64,
    pub re: f64,
    pub im: f64,
}

/// `n` evenly spaced samples of `field` along y = y0. The range defaults to
/// the domain's extent on that line.
pub fn cross_section(
    field: &FieldComplex,
    y0: f64,
    n: usize,
    x_range: Option<(f64, f64)>,
) -> Result<Vec<ProfileSample>, FemError> {
    if n < 2 {
        return Err(FemError::Incompatible(format!("need at least 2 samples, got {n}")));
    }
    let (a, b) = match x_range {
        Some(r) => r,
        None => field.space().mesh().x_extent_at(y0).ok_or(FemError::OutsideDomain { x: f64::NAN, y: y0 })?,
    };
    (0..n)
        .map(|i| {
            let x = if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 };
            let u = field.evaluate(Point2::new(x, y0))?;
            Ok(ProfileSample { x, abs: u.norm(), re: u.re, im: u.im })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileComparison {
    /// Best s in the mirrored translate x ↦ p₀(s − x).
    pub shift: f64,
    /// ‖p − p₀(s − ·)‖ / ‖p₀‖ over the sampled line.
    pub rel_diff: f64,
}

/// Linear interpolation of a sampled profile, zero outside its range.
fn interp(xs: &[f64], ps: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x < xs[0] || x > xs[n - 1] {
        return 0.0;
    }
    let i = xs.partition_point(|&v| v <= x).clamp(1, n - 1);
    let (x0, x1) = (xs[i - 1], xs[i]);
    let w = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
    ps[i - 1] * (1.0 - w) + ps[i] * w
}

fn l2(xs: &[f64], ps: &[f64]) -> f64 {
    let dx = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    (ps.iter().map(|p| p * p).sum::<f64>() * dx).sqrt()
}

/// Relative L² difference between `p(x)` and the mirrored translate
/// `p₀(s − x)` for one shift. Profiles are |u| minus `background`.
pub fn mirrored_difference(
    profile: &[ProfileSample],
    initial: &[ProfileSample],
    background: f64,
    shift: f64,
) -> f64 {
    let x0: Vec<f64> = initial.iter().map(|s| s.x).collect();
    let p0: Vec<f64> = initial.iter().map(|s| s.abs - background).collect();
    let xs: Vec<f64> = profile.iter().map(|s| s.x).collect();
    let d: Vec<f64> = profile.iter().map(|s| s.abs - background - interp(&x0, &p0, shift - s.x)).collect();
    l2(&xs, &d) / l2(&x0, &p0)
}

/// Smallest [`mirrored_difference`] over all shifts: a coarse scan at half
/// the sample spacing followed by golden-section refinement.
pub fn compare_mirrored(profile: &[ProfileSample], initial: &[ProfileSample], background: f64) -> ProfileComparison {
    let (a0, b0) = (initial[0].x, initial[initial.len() - 1].x);
    let (a1, b1) = (profile[0].x, profile[profile.len() - 1].x);
    let dx = ((b1 - a1) / (profile.len() - 1) as f64).min((b0 - a0) / (initial.len() - 1) as f64);
    let (lo, hi) = (a0 + a1, b0 + b1);
    let f = |s: f64| mirrored_difference(profile, initial, background, s);
    let steps = ((hi - lo) / (0.5 * dx)).ceil() as usize;
    let mut best = ProfileComparison { shift: lo, rel_diff: f(lo) };
    for i in 1..=steps {
        let s = lo + (hi - lo) * i as f64 / steps as f64;
        let v = f(s);
        if v < best.rel_diff {
            best = ProfileComparison { shift: s, rel_diff: v };
        }
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (best.shift - 0.5 * dx, best.shift + 0.5 * dx);
    for _ in 0..40 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let s = 0.5 * (a + b);
    let v = f(s);
    if v < best.rel_diff {
        best = ProfileComparison { shift: s, rel_diff: v };
    }
    best
}
