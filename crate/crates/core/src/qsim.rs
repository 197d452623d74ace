//! Exact forward models and finite-shot coincidence sampling for the VQC and
//! NEVQC/NEVQC* circuits.
//!
//! All states in this crate are real-amplitude polarization qubits; a half-wave
//! plate acts as the reflection
//!
//! ```text
//! H(rho) = | cos rho   sin rho |
//!          | sin rho  -cos rho |
//! ```
//!
//! where `rho` is the rotation parameter (twice the physical plate angle).
//! Encoding a data angle `x` sends |H> to (cos x, sin x). The NEVQC adds an
//! ancilla prepared in |+>, a polarizing beam splitter post-selected on one
//! photon per output port, a trainable plate on the ancilla, and post-selection
//! of |0> on the ancilla. The interference and no-interference variants of the
//! PBS step produce identical outcome statistics; both routes are implemented
//! and checked against each other.

use crate::{Error, Result};
use rand::Rng;
use rand_distr::{Binomial, Distribution};

/// Default shots per expectation evaluation for the single-qubit classifier.
pub const VQC_DEFAULT_SHOTS: u32 = 2000;
/// Default shots per expectation evaluation for the ancilla-assisted classifier.
pub const NEVQC_DEFAULT_SHOTS: u32 = 5500;
/// Parameter-shift offset in rotation-parameter space.
pub const PARAM_SHIFT: f64 = std::f64::consts::FRAC_PI_4;
/// Below this ancilla-|0> probability the analytic backend treats the
/// post-selected expectation as vanished and returns 0.
pub const VANISH_EPS: f64 = 1e-15;

/// A real-amplitude single polarization qubit `a0|H> + a1|V>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarizationState {
    pub a0: f64,
    pub a1: f64,
}

impl PolarizationState {
    /// The |H> (= |0>) basis state.
    pub const fn horizontal() -> Self {
        PolarizationState { a0: 1.0, a1: 0.0 }
    }

    /// Encodes a data angle as (cos x, sin x) by passing |H> through HWP(x).
    pub fn encode(x: f64) -> Self {
        hwp_apply(PolarizationState::horizontal(), x)
    }

    pub fn norm_sq(&self) -> f64 {
        self.a0 * self.a0 + self.a1 * self.a1
    }
}

/// Applies a half-wave plate with rotation parameter `rho`.
///
/// The gate is an involution: applying it twice with the same `rho` returns
/// the input state.
pub fn hwp_apply(state: PolarizationState, rho: f64) -> PolarizationState {
    let (s, c) = rho.sin_cos();
    PolarizationState {
        a0: state.a0 * c + state.a1 * s,
        a1: state.a0 * s - state.a1 * c,
    }
}

/// Probability of measuring |0> on the VQC output for data angle `x` and gate
/// parameter `theta`: cos^2(theta - x).
pub fn vqc_prob0(x: f64, theta: f64) -> f64 {
    let c = (theta - x).cos();
    c * c
}

/// Analytic VQC expectation <Z(x, rho)> = 2 P0 - 1 = cos(2 rho - 2 x).
pub fn analytic_expectation_vqc(x: f64, rho: f64) -> f64 {
    (2.0 * rho - 2.0 * x).cos()
}

/// Joint outcome probabilities of the NEVQC circuit, conditioned on the PBS
/// post-selection succeeding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NevqcJoint {
    /// P(data = |0> and ancilla = |0>).
    pub p_d0_a0: f64,
    /// P(data = |1> and ancilla = |0>).
    pub p_d1_a0: f64,
    /// Ancilla-|0> probability, `p_d0_a0 + p_d1_a0`.
    pub p0_star: f64,
    /// PBS post-selection success probability (1/2 for unit inputs).
    pub keep_prob: f64,
}

/// Forward model of the NEVQC circuit for data angle `x` and gate parameters
/// `rho1` (data plate) and `rho2` (ancilla plate).
///
/// With `interference = false` the PBS output is the classical two-branch
/// mixture of |00> and |11>; with `interference = true` it is the coherent
/// superposition. The two routes give the same outcome distribution; they are
/// computed through genuinely different intermediate quantities so the
/// equivalence can be tested numerically.
pub fn nevqc_forward(x: f64, rho1: f64, rho2: f64, interference: bool) -> NevqcJoint {
    let data = hwp_apply(PolarizationState::encode(x), rho1);
    let (a0, a1) = (data.a0, data.a1);
    let keep_prob = 0.5 * (a0 * a0 + a1 * a1);
    let (s2, c2) = rho2.sin_cos();
    let (p_d0_a0, p_d1_a0) = if interference {
        // Pure-state route: propagate amplitudes through the ancilla plate,
        // square at the end.
        let amp_d0_a0 = a0 * c2;
        let amp_d1_a0 = a1 * s2;
        (amp_d0_a0 * amp_d0_a0, amp_d1_a0 * amp_d1_a0)
    } else {
        // Mixture route: branch weights a0^2, a1^2 propagate classically
        // through the ancilla-plate outcome probabilities.
        let w0 = a0 * a0;
        let w1 = a1 * a1;
        (w0 * (c2 * c2), w1 * (s2 * s2))
    };
    let norm = a0 * a0 + a1 * a1;
    NevqcJoint {
        p_d0_a0: p_d0_a0 / norm,
        p_d1_a0: p_d1_a0 / norm,
        p0_star: (p_d0_a0 + p_d1_a0) / norm,
        keep_prob,
    }
}

/// Analytic NEVQC expectation: (p_d0_a0 - p_d1_a0) / p0_star, or exactly 0
/// when the ancilla-|0> probability vanishes.
pub fn analytic_expectation_nevqc(x: f64, rho1: f64, rho2: f64) -> f64 {
    let j = nevqc_forward(x, rho1, rho2, false);
    if j.p0_star < VANISH_EPS {
        0.0
    } else {
        (j.p_d0_a0 - j.p_d1_a0) / j.p0_star
    }
}

/// Simulated coincidence counts for one expectation evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountRecord {
    /// Plus-outcome coincidences (VQC: transmitted port; NEVQC: data |0>).
    pub n_plus: u64,
    /// Minus-outcome coincidences.
    pub n_minus: u64,
    /// Total trials.
    pub shots: u64,
    /// True when no trial survived post-selection.
    pub vanished: bool,
}

/// Samples coincidence counts: each of `shots` trials independently lands in
/// {plus, minus, discarded} with probabilities (p_plus, p_minus, rest).
///
/// Sampling is done as a chained pair of binomial draws, which realises the
/// same trinomial distribution in O(1) time per call. Deterministic for a
/// given generator state.
pub fn sample_counts(
    p_plus: f64,
    p_minus: f64,
    shots: u64,
    rng: &mut impl Rng,
) -> Result<CountRecord> {
    const TOL: f64 = 1e-12;
    if p_plus < -TOL || p_minus < -TOL || p_plus.is_nan() || p_minus.is_nan() {
        return Err(Error::InvalidProbability(p_plus.min(p_minus)));
    }
    if p_plus + p_minus > 1.0 + TOL {
        return Err(Error::InvalidProbability(p_plus + p_minus));
    }
    let p_plus = p_plus.clamp(0.0, 1.0);
    let p_minus = p_minus.clamp(0.0, 1.0);
    let n_plus = Binomial::new(shots, p_plus).expect("validated").sample(rng);
    let rest = shots - n_plus;
    let q = if p_plus >= 1.0 { 0.0 } else { (p_minus / (1.0 - p_plus)).clamp(0.0, 1.0) };
    let n_minus = Binomial::new(rest, q).expect("validated").sample(rng);
    Ok(CountRecord {
        n_plus,
        n_minus,
        shots,
        vanished: n_plus + n_minus == 0,
    })
}

/// VQC expectation from counts: (N+ - N-)/(N+ + N-).
///
/// Zero total counts cannot occur for a VQC evaluation with shots > 0 and are
/// reported as an error.
pub fn expectation_vqc(counts: &CountRecord) -> Result<f64> {
    let total = counts.n_plus + counts.n_minus;
    if total == 0 {
        return Err(Error::ZeroCounts);
    }
    Ok((counts.n_plus as f64 - counts.n_minus as f64) / total as f64)
}

/// NEVQC expectation from counts. A vanished record (no event survived
/// post-selection) is a defined outcome and yields exactly 0.
pub fn expectation_nevqc(counts: &CountRecord) -> f64 {
    let total = counts.n_plus + counts.n_minus;
    if total == 0 {
        0.0
    } else {
        (counts.n_plus as f64 - counts.n_minus as f64) / total as f64
    }
}

/// Samples a VQC expectation evaluation at (x, rho).
pub fn sample_expectation_vqc(x: f64, rho: f64, shots: u64, rng: &mut impl Rng) -> f64 {
    let p0 = vqc_prob0(x, rho);
    let counts = sample_counts(p0, 1.0 - p0, shots, rng).expect("probabilities in range");
    expectation_vqc(&counts).expect("vqc counts nonzero for shots > 0")
}

/// Samples an NEVQC expectation evaluation at (x, rho1, rho2).
///
/// Per-trial outcome probabilities include the PBS post-selection loss, so
/// roughly `keep_prob * p0_star` of the shots survive.
pub fn sample_expectation_nevqc(
    x: f64,
    rho1: f64,
    rho2: f64,
    shots: u64,
    rng: &mut impl Rng,
) -> f64 {
    let j = nevqc_forward(x, rho1, rho2, false);
    let p_plus = j.keep_prob * j.p_d0_a0;
    let p_minus = j.keep_prob * j.p_d1_a0;
    let counts = sample_counts(p_plus, p_minus, shots, rng).expect("probabilities in range");
    expectation_nevqc(&counts)
}
