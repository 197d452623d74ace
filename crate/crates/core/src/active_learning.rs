//! Pool-based active-learning loop: uncertainty sampling (USAMP) and
//! query-by-committee (QBC) selection against the pattern labeling oracle,
//! with incremental retraining after every query.
//!
//! A run seeds the labeled set with a few randomly drawn items guaranteed to
//! contain both classes (2 for USAMP, 3 for QBC), then repeats: select the
//! most informative unlabeled item, query its label, retrain for a fixed
//! number of epochs on the grown labeled set. USAMP scoring spends one
//! expectation evaluation per pool item; QBC votes are classical and free.

use crate::classifier::{
    accuracy, analytic_mse_loss, AdamState, EvalCounter, Evaluator, ModelKind, ModelParams,
    RunTrace, TrainConfig, Trainer,
};
use crate::committee::Committee;
use crate::datasets::{DataPoint, LabeledPoint, Pattern};
use crate::{Error, Result};
use rand::Rng;

/// Pool-selection strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Usamp,
    Qbc,
}

impl Strategy {
    /// Size of the randomly seeded initial labeled set.
    pub fn initial_labeled(self) -> usize {
        match self {
            Strategy::Usamp => 2,
            Strategy::Qbc => 3,
        }
    }
}

/// Record of one selection round.
#[derive(Clone, Copy, Debug)]
pub struct SelectionRound {
    pub round_index: u32,
    pub chosen_x: f64,
    /// Selection score of the chosen item (uncertainty or vote entropy).
    pub score: f64,
    pub labeled_size_after: usize,
    /// Cumulative evaluations at the end of the round.
    pub evaluations_spent: u64,
    /// Model parameters at selection time.
    pub params_before: ModelParams,
}

/// Active-learning protocol knobs. `train.epochs` is ignored;
/// `epochs_per_round` governs each retraining burst.
#[derive(Clone, Copy, Debug)]
pub struct AlConfig {
    pub rounds: u32,
    pub epochs_per_round: u32,
    /// Count the per-item pool scan of USAMP toward the evaluation budget.
    pub count_selection_evals: bool,
    /// Keep parameters and Adam state across rounds; otherwise every round
    /// restarts from a fresh random draw.
    pub warm_start: bool,
    pub train: TrainConfig,
}

impl Default for AlConfig {
    fn default() -> Self {
        AlConfig {
            rounds: 10,
            epochs_per_round: 10,
            count_selection_evals: true,
            warm_start: true,
            train: TrainConfig::default(),
        }
    }
}

/// Uncertainty score U(x) = -max(P+, P-) with P+ = (1 + <Z>)/2. Larger is
/// more uncertain; the maximum -1/2 sits on the decision boundary. Spends
/// one evaluation.
pub fn usamp_score(eval: &mut Evaluator, params: &ModelParams, x: f64) -> f64 {
    let z = eval.expectation(params, x);
    let p_plus = (1.0 + z) / 2.0;
    -p_plus.max(1.0 - p_plus)
}

/// Vote entropy -sum_j (V_j/C) ln(V_j/C) over the labels that received votes.
pub fn qbc_vote_entropy(votes: &[i8]) -> Result<f64> {
    if votes.is_empty() {
        return Err(Error::EmptyVotes);
    }
    let c = votes.len() as f64;
    let plus = votes.iter().filter(|&&v| v > 0).count() as f64;
    let mut e = 0.0;
    for count in [plus, c - plus] {
        if count > 0.0 {
            let p = count / c;
            e -= p * p.ln();
        }
    }
    Ok(e)
}

/// What drives a selection round.
pub enum Selector<'a> {
    Usamp(&'a ModelParams),
    Qbc(&'a Committee),
}

/// Picks the highest-scoring pool item; ties resolve to the smallest pool
/// index. Returns (index into `pool`, score).
pub fn select_next(
    selector: &Selector<'_>,
    pool: &[DataPoint],
    eval: &mut Evaluator,
) -> Result<(usize, f64)> {
    if pool.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, point) in pool.iter().enumerate() {
        let score = match selector {
            Selector::Usamp(params) => usamp_score(eval, params, point.x),
            Selector::Qbc(committee) => qbc_vote_entropy(&committee.votes(point.x))?,
        };
        if score > best.1 {
            best = (i, score);
        }
    }
    Ok(best)
}

/// Outcome of one active-learning run.
#[derive(Clone, Debug)]
pub struct AlOutcome {
    pub params: ModelParams,
    pub trace: RunTrace,
    pub rounds: Vec<SelectionRound>,
    /// Pool indices of the randomly seeded initial labeled set.
    pub initial_indices: Vec<usize>,
    pub counter: EvalCounter,
    pub chained_rotation: f64,
}

/// Runs the full active-learning protocol on `pool` against the `pattern`
/// labeling oracle, probing `grid` after every round.
pub fn al_train(
    strategy: Strategy,
    pattern: &Pattern,
    pool: &[DataPoint],
    kind: ModelKind,
    cfg: &AlConfig,
    grid: &[DataPoint],
) -> Result<AlOutcome> {
    let init_n = strategy.initial_labeled();
    let need = init_n + cfg.rounds as usize;
    if pool.len() < need {
        return Err(Error::PoolTooSmall { pool: pool.len(), need });
    }

    let mut eval = Evaluator::new(cfg.train.backend, cfg.train.seed);
    let params0 = eval.init_params(kind);
    let initial_indices = seed_labeled(&mut eval, pattern, pool, init_n)?;
    let mut trainer = Trainer::from_evaluator(params0, cfg.train, eval);

    let mut labeled_idx = initial_indices.clone();
    let mut unlabeled_idx: Vec<usize> =
        (0..pool.len()).filter(|i| !labeled_idx.contains(i)).collect();
    let labeled_points = |idx: &[usize]| -> Vec<LabeledPoint> {
        idx.iter()
            .map(|&i| LabeledPoint { x: pool[i].x, y: pattern.label(pool[i].x) })
            .collect()
    };

    let mut trace = RunTrace::default();
    let mut data = labeled_points(&labeled_idx);
    trace.rows.push(trainer.trace_row(
        0,
        data.len(),
        analytic_mse_loss(&trainer.params, &data),
        Some(accuracy(&trainer.params, grid)),
    ));

    let mut rounds = Vec::with_capacity(cfg.rounds as usize);
    let mut epoch_global = 0u32;
    for round in 1..=cfg.rounds {
        let params_before = trainer.params;
        let candidates: Vec<DataPoint> = unlabeled_idx.iter().map(|&i| pool[i]).collect();
        let committee;
        let selector = match strategy {
            Strategy::Usamp => Selector::Usamp(&params_before),
            Strategy::Qbc => {
                committee = Committee::fit(&data)?;
                Selector::Qbc(&committee)
            }
        };
        let was_counting = trainer.eval.set_counting(cfg.count_selection_evals);
        let picked = select_next(&selector, &candidates, &mut trainer.eval);
        trainer.eval.set_counting(was_counting);
        let (pos, score) = picked?;

        let chosen = unlabeled_idx.remove(pos);
        labeled_idx.push(chosen);
        data = labeled_points(&labeled_idx);

        if !cfg.warm_start {
            trainer.params = trainer.eval.init_params(kind);
            trainer.adam = AdamState::new();
        }
        for e in 1..=cfg.epochs_per_round {
            let loss = trainer.epoch(&data);
            epoch_global += 1;
            let probe = if e == cfg.epochs_per_round {
                Some(accuracy(&trainer.params, grid))
            } else {
                None
            };
            trace.rows.push(trainer.trace_row(epoch_global, data.len(), loss, probe));
        }

        rounds.push(SelectionRound {
            round_index: round,
            chosen_x: pool[chosen].x,
            score,
            labeled_size_after: labeled_idx.len(),
            evaluations_spent: trainer.eval.counter().evaluations,
            params_before,
        });
    }

    Ok(AlOutcome {
        params: trainer.params,
        trace,
        rounds,
        initial_indices,
        counter: trainer.eval.counter(),
        chained_rotation: trainer.chained_rotation,
    })
}

/// Draws `n` distinct pool indices uniformly, redrawing wholesale until both
/// classes appear under the oracle.
fn seed_labeled(
    eval: &mut Evaluator,
    pattern: &Pattern,
    pool: &[DataPoint],
    n: usize,
) -> Result<Vec<usize>> {
    let labels: Vec<i8> = pool.iter().map(|p| pattern.label(p.x)).collect();
    if !labels.contains(&1) || !labels.contains(&-1) {
        return Err(Error::SingleClass);
    }
    let rng = eval.rng_mut();
    loop {
        let mut picked: Vec<usize> = Vec::with_capacity(n);
        while picked.len() < n {
            let i = rng.random_range(0..pool.len());
            if !picked.contains(&i) {
                picked.push(i);
            }
        }
        let has_plus = picked.iter().any(|&i| labels[i] == 1);
        let has_minus = picked.iter().any(|&i| labels[i] == -1);
        if has_plus && has_minus {
            return Ok(picked);
        }
    }
}
