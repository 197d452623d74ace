//! VQC and NEVQC models: prediction rule, MSE loss, shift-rule gradients,
//! Adam updates, and the per-epoch training loop.
//!
//! Every expectation estimate made through an [`Evaluator`] is counted; the
//! cumulative count is the unit of computational cost reported by the
//! harness. Test-accuracy probes go through the analytic closed forms and do
//! not touch the counter.
//!
//! Per epoch the unshifted expectations are evaluated once and shared between
//! the loss and the gradient residuals, so one epoch on `m` items costs
//! exactly `2 m` evaluations for the VQC and `5 m` for the NEVQC, matching
//! the measurement positions the rotation routes visit.

use crate::datasets::{DataPoint, LabeledPoint};
use crate::qsim;
use crate::route_planner::{self, CircuitRoute, Metric, VisitPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Which circuit family a parameter set belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Vqc,
    Nevqc,
}

/// Trainable rotation parameters. Values are unbounded; the geometry is
/// pi-periodic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelParams {
    Vqc { rho: f64 },
    Nevqc { rho1: f64, rho2: f64 },
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Vqc { .. } => ModelKind::Vqc,
            ModelParams::Nevqc { .. } => ModelKind::Nevqc,
        }
    }

    pub fn n_params(&self) -> usize {
        match self {
            ModelParams::Vqc { .. } => 1,
            ModelParams::Nevqc { .. } => 2,
        }
    }

    pub fn values(&self) -> [f64; 2] {
        match *self {
            ModelParams::Vqc { rho } => [rho, 0.0],
            ModelParams::Nevqc { rho1, rho2 } => [rho1, rho2],
        }
    }

    fn set_values(&mut self, v: [f64; 2]) {
        match self {
            ModelParams::Vqc { rho } => *rho = v[0],
            ModelParams::Nevqc { rho1, rho2 } => {
                *rho1 = v[0];
                *rho2 = v[1];
            }
        }
    }

    /// Draws each parameter i.i.d. uniform on [0, pi).
    pub fn init_uniform(kind: ModelKind, rng: &mut impl Rng) -> ModelParams {
        match kind {
            ModelKind::Vqc => ModelParams::Vqc { rho: rng.random_range(0.0..PI) },
            ModelKind::Nevqc => ModelParams::Nevqc {
                rho1: rng.random_range(0.0..PI),
                rho2: rng.random_range(0.0..PI),
            },
        }
    }

    fn route(&self) -> CircuitRoute {
        match *self {
            ModelParams::Vqc { rho } => CircuitRoute::Vqc { theta: rho },
            ModelParams::Nevqc { rho1, rho2 } => CircuitRoute::Nevqc { rho1, rho2 },
        }
    }
}

/// Expectation-evaluation backend.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    /// Infinite-shot closed forms.
    Analytic,
    /// Finite-shot coincidence sampling.
    Sampled { shots: u32 },
}

impl Backend {
    /// The default shot counts used by the hardware protocol.
    pub fn sampled_default(kind: ModelKind) -> Backend {
        match kind {
            ModelKind::Vqc => Backend::Sampled { shots: qsim::VQC_DEFAULT_SHOTS },
            ModelKind::Nevqc => Backend::Sampled { shots: qsim::NEVQC_DEFAULT_SHOTS },
        }
    }
}

/// Cumulative cost counters for one run. Both fields are monotonically
/// nondecreasing.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvalCounter {
    /// Number of expectation estimates.
    pub evaluations: u64,
    /// Within-epoch rotation travel, in rotation-parameter radians.
    pub rotation_distance: f64,
}

/// Binds a backend, a seeded generator, and the cost counter.
///
/// Pure function of its inputs plus the generator state; a single instance
/// must not be shared across concurrent callers.
pub struct Evaluator {
    backend: Backend,
    rng: ChaCha8Rng,
    counter: EvalCounter,
    counting: bool,
}

impl Evaluator {
    pub fn new(backend: Backend, seed: u64) -> Evaluator {
        Evaluator {
            backend,
            rng: ChaCha8Rng::seed_from_u64(seed),
            counter: EvalCounter::default(),
            counting: true,
        }
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn counter(&self) -> EvalCounter {
        self.counter
    }

    /// Enables or disables evaluation counting (rotation accounting is not
    /// affected). Returns the previous setting.
    pub fn set_counting(&mut self, on: bool) -> bool {
        std::mem::replace(&mut self.counting, on)
    }

    pub(crate) fn add_rotation(&mut self, radians: f64) {
        self.counter.rotation_distance += radians;
    }

    pub(crate) fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Draws an initial parameter set from this evaluator's generator.
    pub fn init_params(&mut self, kind: ModelKind) -> ModelParams {
        ModelParams::init_uniform(kind, &mut self.rng)
    }

    /// One expectation estimate at (x, params). Counts one evaluation.
    pub fn expectation(&mut self, params: &ModelParams, x: f64) -> f64 {
        if self.counting {
            self.counter.evaluations += 1;
        }
        match (self.backend, *params) {
            (Backend::Analytic, _) => analytic_expectation(params, x),
            (Backend::Sampled { shots }, ModelParams::Vqc { rho }) => {
                qsim::sample_expectation_vqc(x, rho, shots as u64, &mut self.rng)
            }
            (Backend::Sampled { shots }, ModelParams::Nevqc { rho1, rho2 }) => {
                qsim::sample_expectation_nevqc(x, rho1, rho2, shots as u64, &mut self.rng)
            }
        }
    }
}

/// Infinite-shot expectation <Z(x, params)>, with the vanishment fallback for
/// the NEVQC.
pub fn analytic_expectation(params: &ModelParams, x: f64) -> f64 {
    match *params {
        ModelParams::Vqc { rho } => qsim::analytic_expectation_vqc(x, rho),
        ModelParams::Nevqc { rho1, rho2 } => qsim::analytic_expectation_nevqc(x, rho1, rho2),
    }
}

/// Classification rule: +1 when <Z> >= 0 (exact zero maps to +1), else -1.
/// Counts one evaluation on the supplied evaluator.
pub fn predict(eval: &mut Evaluator, params: &ModelParams, x: f64) -> i8 {
    if eval.expectation(params, x) >= 0.0 {
        1
    } else {
        -1
    }
}

/// Prediction through the analytic closed form, without touching any counter.
/// This is the probe path used for test accuracy.
pub fn predict_analytic(params: &ModelParams, x: f64) -> i8 {
    if analytic_expectation(params, x) >= 0.0 {
        1
    } else {
        -1
    }
}

/// Test accuracy of `params` on a labeled grid (analytic, uncounted).
pub fn accuracy(params: &ModelParams, grid: &[DataPoint]) -> f64 {
    let correct = grid
        .iter()
        .filter(|p| p.label == Some(predict_analytic(params, p.x)))
        .count();
    correct as f64 / grid.len() as f64
}

/// Sum-of-squares loss sum_i (<Z(x_i)> - y_i)^2; one evaluation per item.
pub fn mse_loss(eval: &mut Evaluator, params: &ModelParams, data: &[LabeledPoint]) -> f64 {
    data.iter()
        .map(|p| {
            let z = eval.expectation(params, p.x);
            let r = z - p.y as f64;
            r * r
        })
        .sum()
}

/// MSE loss through the analytic closed forms, without counting.
pub fn analytic_mse_loss(params: &ModelParams, data: &[LabeledPoint]) -> f64 {
    data.iter()
        .map(|p| {
            let r = analytic_expectation(params, p.x) - p.y as f64;
            r * r
        })
        .sum()
}

fn shifted(params: &ModelParams, index: usize, delta: f64) -> ModelParams {
    let mut v = params.values();
    v[index] += delta;
    let mut out = *params;
    out.set_values(v);
    out
}

/// One-shift VQC gradient estimate:
/// `sum_i (<Z(x_i, rho)> - y_i) <Z(x_i, rho + pi/4)>`.
///
/// The shifted factor has closed form `<Z(x, rho + pi/4)> = -sin(2 rho - 2 x)`
/// = 2 P0(rho + pi/4) - 1, so a single shifted visit per item replaces the
/// two-shift difference quotient: the derivative of the loss is exactly four
/// times this sum. Uses exactly 2 |data| evaluations.
pub fn gradient_vqc(eval: &mut Evaluator, params: &ModelParams, data: &[LabeledPoint]) -> f64 {
    assert_eq!(params.kind(), ModelKind::Vqc, "gradient_vqc needs VQC parameters");
    let z0: Vec<f64> = data.iter().map(|p| eval.expectation(params, p.x)).collect();
    gradient_vqc_from_unshifted(eval, params, data, &z0)
}

fn gradient_vqc_from_unshifted(
    eval: &mut Evaluator,
    params: &ModelParams,
    data: &[LabeledPoint],
    z0: &[f64],
) -> f64 {
    let plus = shifted(params, 0, qsim::PARAM_SHIFT);
    data.iter()
        .zip(z0)
        .map(|(p, &z)| (z - p.y as f64) * eval.expectation(&plus, p.x))
        .sum()
}

/// Two-shift VQC gradient
/// `sum_i (<Z> - y_i) (<Z(rho + pi/4)> - <Z(rho - pi/4)>) / 2`; equal to the
/// one-shift form through the probability identity
/// P0(rho + pi/4) + P0(rho - pi/4) = 1. Uses 3 |data| evaluations.
pub fn gradient_vqc_two_shift(
    eval: &mut Evaluator,
    params: &ModelParams,
    data: &[LabeledPoint],
) -> f64 {
    assert_eq!(params.kind(), ModelKind::Vqc, "gradient_vqc needs VQC parameters");
    let z0: Vec<f64> = data.iter().map(|p| eval.expectation(params, p.x)).collect();
    let plus = shifted(params, 0, qsim::PARAM_SHIFT);
    let minus = shifted(params, 0, -qsim::PARAM_SHIFT);
    data.iter()
        .zip(&z0)
        .map(|(p, &z)| {
            let d = (eval.expectation(&plus, p.x) - eval.expectation(&minus, p.x)) / 2.0;
            (z - p.y as f64) * d
        })
        .sum()
}

/// Shift-rule NEVQC gradient estimate, per parameter k:
/// `g_k = sum_i (<Z(x_i)> - y_i) (<Z(rho_k + pi/4)> - <Z(rho_k - pi/4)>) / 2`
/// with the other parameter held fixed. Uses exactly 5 |data| evaluations.
///
/// Closed forms of the shift differences, with D = cos(2 rho1 - 2 x),
/// T = sin(2 rho1 - 2 x), C = cos(2 rho2), S = sin(2 rho2):
///
/// ```text
/// (<Z(rho1 + pi/4)> - <Z(rho1 - pi/4)>)/2 = -T (1 - C^2) / (1 - T^2 C^2)
/// (<Z(rho2 + pi/4)> - <Z(rho2 - pi/4)>)/2 = -S (1 - D^2) / (1 - D^2 S^2)
/// ```
///
/// Because the post-selected expectation is a ratio of probabilities, these
/// differences are not proportional to the true partial derivatives of <Z>;
/// the update direction is a reweighted descent direction rather than the
/// exact gradient.
pub fn gradient_nevqc(
    eval: &mut Evaluator,
    params: &ModelParams,
    data: &[LabeledPoint],
) -> (f64, f64) {
    assert_eq!(params.kind(), ModelKind::Nevqc, "gradient_nevqc needs NEVQC parameters");
    let z0: Vec<f64> = data.iter().map(|p| eval.expectation(params, p.x)).collect();
    gradient_nevqc_from_unshifted(eval, params, data, &z0)
}

fn gradient_nevqc_from_unshifted(
    eval: &mut Evaluator,
    params: &ModelParams,
    data: &[LabeledPoint],
    z0: &[f64],
) -> (f64, f64) {
    let mut g = [0.0; 2];
    for (k, gk) in g.iter_mut().enumerate() {
        let plus = shifted(params, k, qsim::PARAM_SHIFT);
        let minus = shifted(params, k, -qsim::PARAM_SHIFT);
        let zp: Vec<f64> = data.iter().map(|p| eval.expectation(&plus, p.x)).collect();
        let zm: Vec<f64> = data.iter().map(|p| eval.expectation(&minus, p.x)).collect();
        *gk = data
            .iter()
            .enumerate()
            .map(|(i, p)| (z0[i] - p.y as f64) * (zp[i] - zm[i]) / 2.0)
            .sum();
    }
    (g[0], g[1])
}

/// Loss and gradient of one epoch with the unshifted expectations shared:
/// 2 m evaluations for the VQC, 5 m for the NEVQC.
pub fn loss_and_gradient(
    eval: &mut Evaluator,
    params: &ModelParams,
    data: &[LabeledPoint],
) -> (f64, [f64; 2]) {
    let z0: Vec<f64> = data.iter().map(|p| eval.expectation(params, p.x)).collect();
    let loss = data
        .iter()
        .zip(&z0)
        .map(|(p, &z)| {
            let r = z - p.y as f64;
            r * r
        })
        .sum();
    let grad = match params.kind() {
        ModelKind::Vqc => [gradient_vqc_from_unshifted(eval, params, data, &z0), 0.0],
        ModelKind::Nevqc => {
            let (g1, g2) = gradient_nevqc_from_unshifted(eval, params, data, &z0);
            [g1, g2]
        }
    };
    (loss, grad)
}

/// Training hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: u32,
    pub backend: Backend,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    /// Probe the test grid every this many epochs.
    pub test_interval: u32,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 35,
            backend: Backend::Analytic,
            learning_rate: 0.15,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            test_interval: 5,
        }
    }
}

/// Adam moment state with bias correction.
#[derive(Clone, Copy, Debug, Default)]
pub struct AdamState {
    m: [f64; 2],
    v: [f64; 2],
    t: u64,
}

impl AdamState {
    pub fn new() -> AdamState {
        AdamState::default()
    }
}

/// One Adam update; deterministic.
pub fn adam_step(state: &mut AdamState, params: &mut ModelParams, grad: [f64; 2], cfg: &TrainConfig) {
    state.t += 1;
    let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
    let mut v = params.values();
    for k in 0..params.n_params() {
        state.m[k] = b1 * state.m[k] + (1.0 - b1) * grad[k];
        state.v[k] = b2 * state.v[k] + (1.0 - b2) * grad[k] * grad[k];
        let m_hat = state.m[k] / (1.0 - b1.powi(state.t as i32));
        let v_hat = state.v[k] / (1.0 - b2.powi(state.t as i32));
        v[k] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_eps);
    }
    params.set_values(v);
}

/// One row of a training trace. `test_accuracy` is present only on probe
/// rows; `loss` on row `e >= 1` is the in-epoch loss at the parameters the
/// epoch's gradient was measured at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub epoch: u32,
    pub labeled_size: usize,
    pub evaluations: u64,
    pub rotation_distance: f64,
    pub loss: f64,
    pub test_accuracy: Option<f64>,
}

/// Per-epoch record of one training run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
}

impl RunTrace {
    /// Accuracy probes as (cumulative evaluations, accuracy) pairs.
    pub fn probes(&self) -> Vec<(u64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.test_accuracy.map(|a| (r.evaluations, a)))
            .collect()
    }

    /// In-training loss series (rows 1..), used for backend comparisons.
    pub fn losses(&self) -> Vec<f64> {
        self.rows.iter().skip(1).map(|r| r.loss).collect()
    }

    pub fn total_evaluations(&self) -> u64 {
        self.rows.last().map_or(0, |r| r.evaluations)
    }
}

/// Drives epochs of shared-evaluation loss/gradient plus Adam, accumulating
/// evaluation and rotation costs.
pub struct Trainer {
    pub params: ModelParams,
    pub adam: AdamState,
    pub eval: Evaluator,
    pub cfg: TrainConfig,
    /// Stage travel between epoch rest configurations (repositioning between
    /// epochs), kept separate from the within-epoch route costs.
    pub chained_rotation: f64,
    last_end: Option<VisitPoint>,
}

impl Trainer {
    pub fn new(params: ModelParams, cfg: TrainConfig) -> Trainer {
        Trainer::from_evaluator(params, cfg, Evaluator::new(cfg.backend, cfg.seed))
    }

    /// Builds a trainer around an existing evaluator, continuing its counter
    /// and generator stream.
    pub fn from_evaluator(params: ModelParams, cfg: TrainConfig, eval: Evaluator) -> Trainer {
        Trainer {
            params,
            adam: AdamState::new(),
            eval,
            cfg,
            chained_rotation: 0.0,
            last_end: None,
        }
    }

    /// Runs one epoch on `data`; returns the in-epoch loss.
    pub fn epoch(&mut self, data: &[LabeledPoint]) -> f64 {
        let mut xs: Vec<f64> = data.iter().map(|p| p.x).collect();
        xs.sort_by(f64::total_cmp);
        let v = self.params.values();
        let rest = VisitPoint {
            x: xs[0],
            theta1: v[0],
            theta2: match self.params.kind() {
                ModelKind::Vqc => None,
                ModelKind::Nevqc => Some(v[1]),
            },
        };
        if let Some(prev) = self.last_end {
            self.chained_rotation += route_planner::config_distance(&prev, &rest, Metric::Sum);
        }
        let schedule = route_planner::plan_route(&xs, &self.params.route(), Metric::Sum);
        self.eval.add_rotation(schedule.total_cost);
        self.last_end = schedule.points.last().copied();

        let (loss, grad) = loss_and_gradient(&mut self.eval, &self.params, data);
        adam_step(&mut self.adam, &mut self.params, grad, &self.cfg);
        loss
    }

    /// Snapshot of the counters as a trace row.
    pub fn trace_row(&self, epoch: u32, data_len: usize, loss: f64, acc: Option<f64>) -> TraceRow {
        let c = self.eval.counter();
        TraceRow {
            epoch,
            labeled_size: data_len,
            evaluations: c.evaluations,
            rotation_distance: c.rotation_distance,
            loss,
            test_accuracy: acc,
        }
    }
}

/// Trains for `cfg.epochs` epochs from `params0`, probing `grid` every
/// `cfg.test_interval` epochs (plus the initial and final rows).
///
/// Row 0 carries the analytic loss and accuracy of the initial parameters and
/// costs no evaluations. Bit-reproducible for a fixed config.
pub fn train(
    params0: ModelParams,
    data: &[LabeledPoint],
    cfg: &TrainConfig,
    grid: &[DataPoint],
) -> (ModelParams, RunTrace) {
    let mut trainer = Trainer::new(params0, *cfg);
    let trace = train_trainer(&mut trainer, data, grid);
    (trainer.params, trace)
}

/// The loop behind [`train`], driving an externally owned trainer so callers
/// can keep its counters and chained-rotation accumulator.
pub fn train_trainer(trainer: &mut Trainer, data: &[LabeledPoint], grid: &[DataPoint]) -> RunTrace {
    assert!(!data.is_empty(), "training data must be nonempty");
    let epochs = trainer.cfg.epochs;
    let interval = trainer.cfg.test_interval.max(1);
    let mut trace = RunTrace::default();
    trace.rows.push(trainer.trace_row(
        0,
        data.len(),
        analytic_mse_loss(&trainer.params, data),
        Some(accuracy(&trainer.params, grid)),
    ));
    for e in 1..=epochs {
        let loss = trainer.epoch(data);
        let probe = if e % interval == 0 || e == epochs {
            Some(accuracy(&trainer.params, grid))
        } else {
            None
        };
        trace.rows.push(trainer.trace_row(e, data.len(), loss, probe));
    }
    trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{generate_pool, generate_test_grid, label_all, Pattern, PoolScheme};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn analytic_eval() -> Evaluator {
        Evaluator::new(Backend::Analytic, 0)
    }

    fn even_labeled(pattern: &Pattern, n: usize) -> Vec<LabeledPoint> {
        let pool = generate_pool(pattern, n, PoolScheme::EvenlySpaced, 0).unwrap();
        label_all(pattern, &pool)
    }

    #[test]
    fn predict_rule_and_ties() {
        let mut eval = analytic_eval();
        assert_eq!(predict(&mut eval, &ModelParams::Vqc { rho: FRAC_PI_2 }, FRAC_PI_2), 1);
        assert_eq!(predict(&mut eval, &ModelParams::Vqc { rho: 0.0 }, FRAC_PI_2), -1);
        // <Z> = 0 exactly at a quarter-shift: tie maps to +1.
        assert_eq!(predict_analytic(&ModelParams::Vqc { rho: FRAC_PI_4 }, FRAC_PI_2), 1);
        assert_eq!(eval.counter().evaluations, 2);
    }

    #[test]
    fn vqc_at_half_pi_is_exact_on_pattern1() {
        let p1 = Pattern::built_in(1).unwrap();
        let grid = generate_test_grid(&p1, 500);
        let acc = accuracy(&ModelParams::Vqc { rho: FRAC_PI_2 }, &grid);
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn mse_loss_examples() {
        let mut eval = analytic_eval();
        // Perfect fit.
        let data = [LabeledPoint { x: 0.0, y: 1 }, LabeledPoint { x: FRAC_PI_2, y: -1 }];
        assert_abs_diff_eq!(
            mse_loss(&mut eval, &ModelParams::Vqc { rho: 0.0 }, &data),
            0.0,
            epsilon = 1e-12
        );
        // Single item with <Z> = 1 against y = -1.
        let one = [LabeledPoint { x: 0.0, y: -1 }];
        assert_abs_diff_eq!(
            mse_loss(&mut eval, &ModelParams::Vqc { rho: 0.0 }, &one),
            4.0,
            epsilon = 1e-12
        );
        // Permutation invariance.
        let mut rev = data;
        rev.reverse();
        assert_abs_diff_eq!(
            mse_loss(&mut eval, &ModelParams::Vqc { rho: 0.4 }, &data),
            mse_loss(&mut eval, &ModelParams::Vqc { rho: 0.4 }, &rev),
            epsilon = 1e-12
        );
    }

    #[test]
    fn vqc_gradient_matches_closed_form_and_finite_difference() {
        let p2 = Pattern::built_in(2).unwrap();
        let data = even_labeled(&p2, 20);
        let mut eval = analytic_eval();
        let rho = 0.77;
        let params = ModelParams::Vqc { rho };
        let g = gradient_vqc(&mut eval, &params, &data);
        let closed: f64 = data
            .iter()
            .map(|p| {
                (qsim::analytic_expectation_vqc(p.x, rho) - p.y as f64)
                    * -(2.0 * rho - 2.0 * p.x).sin()
            })
            .sum();
        assert_abs_diff_eq!(g, closed, epsilon = 1e-9);

        // Central finite difference of the loss: dC/drho = 4 g.
        let h = 1e-6;
        let lp = analytic_mse_loss(&ModelParams::Vqc { rho: rho + h }, &data);
        let lm = analytic_mse_loss(&ModelParams::Vqc { rho: rho - h }, &data);
        assert_abs_diff_eq!((lp - lm) / (2.0 * h), 4.0 * g, epsilon = 1e-5);
    }

    #[test]
    fn vqc_one_shift_equals_two_shift() {
        let p1 = Pattern::built_in(1).unwrap();
        let data = even_labeled(&p1, 20);
        let mut eval = analytic_eval();
        for k in 0..50 {
            let params = ModelParams::Vqc { rho: k as f64 * PI / 50.0 };
            let one = gradient_vqc(&mut eval, &params, &data);
            let two = gradient_vqc_two_shift(&mut eval, &params, &data);
            assert_abs_diff_eq!(one, two, epsilon = 1e-9);
        }
    }

    #[test]
    fn fitted_item_contributes_zero() {
        let mut eval = analytic_eval();
        // <Z(x, rho)> = 1 = y at x = rho.
        let data = [LabeledPoint { x: 0.6, y: 1 }];
        let g = gradient_vqc(&mut eval, &ModelParams::Vqc { rho: 0.6 }, &data);
        assert_abs_diff_eq!(g, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn gradient_small_at_trained_minimum() {
        let p1 = Pattern::built_in(1).unwrap();
        let data = even_labeled(&p1, 20);
        let grid = generate_test_grid(&p1, 500);
        let cfg = TrainConfig {
            epochs: 3000,
            learning_rate: 0.02,
            seed: 5,
            ..TrainConfig::default()
        };
        let (params, _) = train(ModelParams::Vqc { rho: 0.3 }, &data, &cfg, &grid);
        let mut eval = analytic_eval();
        let g = gradient_vqc(&mut eval, &params, &data);
        assert!(g.abs() < 1e-3, "gradient at minimum: {g}");
    }

    #[test]
    fn nevqc_gradient_matches_closed_forms() {
        let p2 = Pattern::built_in(2).unwrap();
        let data = even_labeled(&p2, 12);
        let mut eval = analytic_eval();
        let (rho1, rho2) = (0.9, 0.5);
        let params = ModelParams::Nevqc { rho1, rho2 };
        let (g1, g2) = gradient_nevqc(&mut eval, &params, &data);
        let (mut c1, mut c2) = (0.0, 0.0);
        for p in &data {
            let d = (2.0 * rho1 - 2.0 * p.x).cos();
            let t = (2.0 * rho1 - 2.0 * p.x).sin();
            let c = (2.0 * rho2).cos();
            let s = (2.0 * rho2).sin();
            let z = (d + c) / (1.0 + d * c);
            let r = z - p.y as f64;
            c1 += r * (-t * (1.0 - c * c) / (1.0 - t * t * c * c));
            c2 += r * (-s * (1.0 - d * d) / (1.0 - d * d * s * s));
        }
        assert_abs_diff_eq!(g1, c1, epsilon = 1e-9);
        assert_abs_diff_eq!(g2, c2, epsilon = 1e-9);
    }

    #[test]
    fn nevqc_gradient_symmetric_dataset_cancels() {
        // Items at x and pi - x with equal labels and rho1 = pi/2 produce
        // opposite rho1 shift factors and equal residuals.
        let mut eval = analytic_eval();
        for x in [0.3, 0.7, 1.1] {
            let data = [LabeledPoint { x, y: 1 }, LabeledPoint { x: PI - x, y: 1 }];
            let params = ModelParams::Nevqc { rho1: FRAC_PI_2, rho2: 0.8 };
            let (g1, _) = gradient_nevqc(&mut eval, &params, &data);
            assert_abs_diff_eq!(g1, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn nevqc_gradient_handles_vanishment_items() {
        let mut eval = analytic_eval();
        // x = pi/2 with rho1 = 0, rho2 = 0 is a vanishment point: the
        // unshifted expectation falls back to 0 and all shifted terms stay
        // finite. A vanished item feeds the residual (0 - y) and contributes
        // nothing beyond it, so the gradient of a mixed set equals the
        // gradient of the regular items alone here.
        let vanish = LabeledPoint { x: FRAC_PI_2, y: 1 };
        let regular = LabeledPoint { x: 0.4, y: -1 };
        let params = ModelParams::Nevqc { rho1: 0.0, rho2: 0.0 };
        let (g1, g2) = gradient_nevqc(&mut eval, &params, &[vanish, regular]);
        assert!(g1.is_finite() && g2.is_finite());
        let (r1, r2) = gradient_nevqc(&mut eval, &params, &[regular]);
        assert_abs_diff_eq!(g1, r1, epsilon = 1e-12);
        assert_abs_diff_eq!(g2, r2, epsilon = 1e-12);
    }

    #[test]
    fn evaluation_accounting_is_exact() {
        let p1 = Pattern::built_in(1).unwrap();
        let data = even_labeled(&p1, 20);
        let m = data.len() as u64;

        let mut eval = analytic_eval();
        mse_loss(&mut eval, &ModelParams::Vqc { rho: 0.3 }, &data);
        assert_eq!(eval.counter().evaluations, m);
        gradient_vqc(&mut eval, &ModelParams::Vqc { rho: 0.3 }, &data);
        assert_eq!(eval.counter().evaluations, m + 2 * m);
        gradient_nevqc(&mut eval, &ModelParams::Nevqc { rho1: 0.3, rho2: 0.4 }, &data);
        assert_eq!(eval.counter().evaluations, 3 * m + 5 * m);

        // Shared-evaluation epochs: 2m (VQC) and 5m (NEVQC).
        let mut eval = analytic_eval();
        loss_and_gradient(&mut eval, &ModelParams::Vqc { rho: 0.3 }, &data);
        assert_eq!(eval.counter().evaluations, 2 * m);
        let mut eval = analytic_eval();
        loss_and_gradient(&mut eval, &ModelParams::Nevqc { rho1: 0.3, rho2: 0.4 }, &data);
        assert_eq!(eval.counter().evaluations, 5 * m);

        // Probes are free.
        let grid = generate_test_grid(&p1, 500);
        let before = eval.counter().evaluations;
        accuracy(&ModelParams::Nevqc { rho1: 0.3, rho2: 0.4 }, &grid);
        assert_eq!(eval.counter().evaluations, before);
    }

    #[test]
    fn adam_properties() {
        let cfg = TrainConfig::default();

        // Zero gradient leaves parameters unchanged.
        let mut st = AdamState::new();
        let mut p = ModelParams::Nevqc { rho1: 1.0, rho2: 2.0 };
        adam_step(&mut st, &mut p, [0.0, 0.0], &cfg);
        assert_eq!(p, ModelParams::Nevqc { rho1: 1.0, rho2: 2.0 });

        // First-step magnitude is the learning rate, independent of |g|.
        for g in [1e-3, 1.0, 1e3] {
            let mut st = AdamState::new();
            let mut p = ModelParams::Vqc { rho: 0.5 };
            adam_step(&mut st, &mut p, [g, 0.0], &cfg);
            let delta = (p.values()[0] - 0.5).abs();
            assert_abs_diff_eq!(delta, cfg.learning_rate, epsilon = 1e-4 * cfg.learning_rate);
        }
    }

    #[test]
    fn train_is_deterministic_and_zero_epochs_is_identity() {
        let p2 = Pattern::built_in(2).unwrap();
        let data = even_labeled(&p2, 20);
        let grid = generate_test_grid(&p2, 500);

        let cfg = TrainConfig { epochs: 0, ..TrainConfig::default() };
        let start = ModelParams::Vqc { rho: 0.9 };
        let (params, trace) = train(start, &data, &cfg, &grid);
        assert_eq!(params, start);
        assert_eq!(trace.rows.len(), 1);
        assert_eq!(trace.rows[0].evaluations, 0);

        let cfg = TrainConfig { epochs: 12, backend: Backend::Sampled { shots: 500 }, seed: 9, ..TrainConfig::default() };
        let (pa, ta) = train(start, &data, &cfg, &grid);
        let (pb, tb) = train(start, &data, &cfg, &grid);
        assert_eq!(pa, pb);
        assert_eq!(ta, tb);
    }

    #[test]
    fn trace_accounting_matches_closed_form() {
        let p1 = Pattern::built_in(1).unwrap();
        let data = even_labeled(&p1, 20);
        let grid = generate_test_grid(&p1, 500);
        let cfg = TrainConfig { epochs: 35, ..TrainConfig::default() };
        let (_, trace) = train(ModelParams::Vqc { rho: 0.2 }, &data, &cfg, &grid);
        assert_eq!(trace.total_evaluations(), 35 * 2 * 20);
        assert_eq!(trace.rows.len(), 36);
        // Monotone counters.
        for w in trace.rows.windows(2) {
            assert!(w[1].evaluations >= w[0].evaluations);
            assert!(w[1].rotation_distance >= w[0].rotation_distance);
        }
        // Probe rows at every multiple of five.
        for r in &trace.rows {
            assert_eq!(r.test_accuracy.is_some(), r.epoch % 5 == 0 || r.epoch == 35);
        }
    }

    #[test]
    fn vqc_training_reaches_pattern_plateaus() {
        // Pattern 1 rewards exact centering; pattern 2 has a wide plateau at
        // its 0.75 ceiling.
        let p1 = Pattern::built_in(1).unwrap();
        let grid1 = generate_test_grid(&p1, 500);
        let data1 = even_labeled(&p1, 20);
        let mut accs = Vec::new();
        for seed in 0..4 {
            let cfg = TrainConfig { epochs: 35, seed, ..TrainConfig::default() };
            let mut eval = Evaluator::new(Backend::Analytic, seed);
            let params0 = eval.init_params(ModelKind::Vqc);
            let (params, _) = train(params0, &data1, &cfg, &grid1);
            accs.push(accuracy(&params, &grid1));
        }
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        assert!(mean >= 0.98, "pattern 1 mean accuracy {mean} ({accs:?})");

        let p2 = Pattern::built_in(2).unwrap();
        let grid2 = generate_test_grid(&p2, 500);
        let data2 = even_labeled(&p2, 20);
        let mut accs = Vec::new();
        for seed in 0..4 {
            let cfg = TrainConfig { epochs: 35, seed, ..TrainConfig::default() };
            let mut eval = Evaluator::new(Backend::Analytic, seed);
            let params0 = eval.init_params(ModelKind::Vqc);
            let (params, _) = train(params0, &data2, &cfg, &grid2);
            accs.push(accuracy(&params, &grid2));
        }
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        assert!(mean <= 0.78, "pattern 2 mean accuracy {mean} stays at its ceiling");
        assert!(mean >= 0.72, "pattern 2 mean accuracy {mean} reaches its ceiling");
    }

    #[test]
    fn accuracy_never_exceeds_bound_plus_grid_cell() {
        use crate::theory;
        for id in 1..=3u8 {
            let p = Pattern::built_in(id).unwrap();
            let grid = generate_test_grid(&p, 500);
            let data = even_labeled(&p, 20);
            let bound = theory::max_accuracy(p.delta_beta, FRAC_PI_2);
            let cfg = TrainConfig { epochs: 35, seed: 3, ..TrainConfig::default() };
            let mut eval = Evaluator::new(Backend::Analytic, 3);
            let params0 = eval.init_params(ModelKind::Vqc);
            let (_, trace) = train(params0, &data, &cfg, &grid);
            for (_, acc) in trace.probes() {
                assert!(
                    acc <= bound + 1.0 / 500.0 + 1e-12,
                    "pattern {id}: probe accuracy {acc} exceeds bound {bound}"
                );
            }
        }
    }
}
