//! Analytic oracle for classification-line geometry and accuracy bounds.
//!
//! Both classifiers decide by the sign of a product of two linear forms in
//! the encoded vector (cos x, sin x), so their decision boundaries are two
//! lines `y + k x = 0` through the origin. The VQC lines are always mutually
//! perpendicular; the NEVQC lines have a trainable included angle, which is
//! what lifts its accuracy ceiling.

use crate::datasets::{self, Pattern};
use crate::qsim;
use crate::{Error, Result};
use std::f64::consts::{FRAC_PI_2, PI};

/// Slope magnitude beyond which a line is reported as vertical.
const SLOPE_SINGULARITY: f64 = 1e-12;

/// The two classification lines `y + k1 x = 0`, `y + k2 x = 0`.
///
/// A vertical line (singular slope denominator) is reported with the
/// `f64::INFINITY` sentinel; its slope angle is pi/2. The slope angles
/// `gamma_i = atan(-k_i) mod pi` are always finite and are the quantities the
/// accuracy theory consumes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinePair {
    pub k1: f64,
    pub k2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl LinePair {
    fn from_slopes(k1: f64, k2: f64) -> LinePair {
        LinePair { k1, k2, gamma1: gamma_of(k1), gamma2: gamma_of(k2) }
    }

    /// Included angle of the two lines, in [0, pi/2].
    ///
    /// Computed in the angle representation, which stays finite at the
    /// vertical-slope singularities: fold |gamma1 - gamma2| into [0, pi/2].
    pub fn included_angle(&self) -> f64 {
        let d = (self.gamma1 - self.gamma2).abs().rem_euclid(PI);
        d.min(PI - d)
    }

    /// Boundary angles where the lines cross the arc [0, pi).
    pub fn boundary_angles(&self) -> [f64; 2] {
        [self.gamma1, self.gamma2]
    }
}

fn gamma_of(k: f64) -> f64 {
    // atan(+-inf) = +-pi/2, so the sentinel folds to pi/2 without a branch.
    (-k).atan().rem_euclid(PI)
}

fn ratio_or_vertical(num: f64, den: f64) -> f64 {
    if den.abs() <= SLOPE_SINGULARITY {
        f64::INFINITY
    } else {
        num / den
    }
}

/// Classification lines of the VQC at gate parameter `rho`:
/// k1 = sin(rho + pi/4)/sin(rho - pi/4), k2 = -sin(rho - pi/4)/sin(rho + pi/4).
/// The product k1 k2 = -1, so the lines are always perpendicular.
pub fn vqc_lines(rho: f64) -> LinePair {
    let sp = (rho + qsim::PARAM_SHIFT).sin();
    let sm = (rho - qsim::PARAM_SHIFT).sin();
    LinePair::from_slopes(ratio_or_vertical(sp, sm), ratio_or_vertical(-sm, sp))
}

/// Classification lines of the NEVQC at gate parameters (rho1, rho2):
/// k1 = cot(rho1 - rho2), k2 = cot(rho1 + rho2). Their included angle is
/// arctan|tan(2 rho2)|.
pub fn nevqc_lines(rho1: f64, rho2: f64) -> LinePair {
    let cot = |a: f64| ratio_or_vertical(a.cos(), a.sin());
    LinePair::from_slopes(cot(rho1 - rho2), cot(rho1 + rho2))
}

/// Maximum classification accuracy of a two-line classifier with included
/// angle `delta_gamma` on a pattern with margin difference `delta_beta`:
/// 1 - |delta_beta - delta_gamma| / pi.
pub fn max_accuracy(delta_beta: f64, delta_gamma: f64) -> f64 {
    1.0 - (delta_beta - delta_gamma).abs() / PI
}

/// An ancilla-plate parameter whose included angle matches the pattern margin
/// difference exactly: rho2 = delta_beta / 2, so the accuracy bound is 1.
pub fn nevqc_optimal_rho2(delta_beta: f64) -> f64 {
    delta_beta / 2.0
}

/// Squared statistical overlap of two binary outcome distributions:
/// (sqrt(p q) + sqrt((1-p)(1-q)))^2.
pub fn statistical_fidelity(p: f64, q: f64) -> f64 {
    let f = (p * q).sqrt() + ((1.0 - p) * (1.0 - q)).sqrt();
    f * f
}

/// 1 - statistical_fidelity.
pub fn statistical_infidelity(p: f64, q: f64) -> f64 {
    1.0 - statistical_fidelity(p, q)
}

/// Mean absolute elementwise difference of two equal-length series.
pub fn mean_abs_error(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::EmptyData);
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}

/// The per-pattern VQC and NEVQC accuracy bounds, as printed by the `theory`
/// CLI subcommand.
pub fn bound_table() -> Vec<(u8, f64, f64, f64)> {
    (1..=3)
        .map(|id| {
            let delta = Pattern::builtin_delta(id).expect("built-in id");
            let vqc = max_accuracy(delta, FRAC_PI_2);
            let rho2 = nevqc_optimal_rho2(delta);
            let nevqc = max_accuracy(delta, (2.0 * rho2).tan().abs().atan());
            (id, delta, vqc, nevqc)
        })
        .collect()
}

/// Test-grid accuracy of the analytic VQC at parameter `rho`, used by the
/// grid-search bound checks.
pub fn vqc_grid_accuracy(rho: f64, grid: &[datasets::DataPoint]) -> f64 {
    let correct = grid
        .iter()
        .filter(|p| {
            let z = qsim::analytic_expectation_vqc(p.x, rho);
            let pred: i8 = if z >= 0.0 { 1 } else { -1 };
            Some(pred) == p.label
        })
        .count();
    correct as f64 / grid.len() as f64
}

/// Test-grid accuracy of the analytic NEVQC at (rho1, rho2).
pub fn nevqc_grid_accuracy(rho1: f64, rho2: f64, grid: &[datasets::DataPoint]) -> f64 {
    let correct = grid
        .iter()
        .filter(|p| {
            let z = qsim::analytic_expectation_nevqc(p.x, rho1, rho2);
            let pred: i8 = if z >= 0.0 { 1 } else { -1 };
            Some(pred) == p.label
        })
        .count();
    correct as f64 / grid.len() as f64
}
