//! Experiment runner: executes a config over its seeds, aggregates
//! accuracy-versus-evaluations curves, computes labeling/computation cost
//! ratios between selection strategies, and compares sampled runs against
//! their analytic twins.
//!
//! Seed discipline: every run has a per-run master seed (explicit in the
//! config, or derived from the suite master seed by index). From it, the
//! pool seed is derived with tag [pattern, 0] and the training seed with tag
//! [pattern, strategy, 1]. The pool seed does not depend on classifier or
//! strategy, so all arms of a comparison see the same data; the starred
//! ancilla variant shares the stream of the plain one and reproduces its
//! traces exactly.

mod config;
mod output;

pub use config::{BackendChoice, ClassifierKind, ExperimentConfig, StrategyChoice};
pub use output::{
    emit_outputs, read_trace_csv, render_curves_svg, write_ratios_csv, write_schedule_csv,
    write_selections_csv, write_trace_csv, NamedCurve, RatioLine,
};

use crate::active_learning::{al_train, AlConfig, SelectionRound, Strategy};
use crate::classifier::{train_trainer, Evaluator, ModelParams, RunTrace, TrainConfig, Trainer};
use crate::datasets::{generate_pool, generate_test_grid, label_all, Pattern};
use crate::theory;
use crate::{seeds, Error, Result};
use rayon::prelude::*;

const POOL_TAG: u64 = 0;
const TRAIN_TAG: u64 = 1;

/// One training run of a suite.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub seed_index: usize,
    pub run_seed: u64,
    pub trace: RunTrace,
    /// Selection log; empty for runs without active learning.
    pub selections: Vec<SelectionRound>,
    /// Pool indices of the seeded initial labeled set (selection runs only).
    pub initial_indices: Vec<usize>,
    pub final_params: ModelParams,
    /// Between-epoch repositioning travel, kept apart from the within-epoch
    /// route costs recorded in the trace.
    pub chained_rotation: f64,
}

impl RunResult {
    /// Re-derives the pool this run trained on.
    pub fn pool(&self, cfg: &ExperimentConfig) -> Result<Vec<crate::datasets::DataPoint>> {
        let pattern = Pattern::built_in(cfg.pattern)?;
        let pool_seed = seeds::derive(self.run_seed, &[cfg.pattern as u64, POOL_TAG]);
        generate_pool(&pattern, cfg.pool_size, cfg.pool_scheme, pool_seed)
    }
}

/// Mean/std accuracy over seeds on the union grid of probe evaluation counts
/// (step interpolation with last-value carry-forward).
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateCurve {
    pub evaluations: Vec<u64>,
    pub mean_accuracy: Vec<f64>,
    pub std_accuracy: Vec<f64>,
}

impl AggregateCurve {
    pub fn final_mean(&self) -> f64 {
        *self.mean_accuracy.last().expect("aggregate curve is never empty")
    }
}

/// All runs of one experiment cell plus their aggregate curve.
#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub config: ExperimentConfig,
    pub master_seed: u64,
    pub runs: Vec<RunResult>,
    pub curve: AggregateCurve,
}

impl SuiteResult {
    /// Total evaluations of the costliest run (identical across seeds under
    /// the fixed protocol).
    pub fn total_evaluations(&self) -> u64 {
        self.runs.iter().map(|r| r.trace.total_evaluations()).max().unwrap_or(0)
    }
}

/// Runs every seed of the config independently (fanning out over the rayon
/// pool) and aggregates the accuracy curves.
pub fn run_suite(cfg: &ExperimentConfig, master_seed: u64) -> Result<SuiteResult> {
    cfg.validate()?;
    let pattern = Pattern::built_in(cfg.pattern)?;
    let grid = generate_test_grid(&pattern, cfg.test_size);
    let run_seeds = cfg.resolved_seeds(master_seed);
    let runs: Result<Vec<RunResult>> = run_seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| run_one(cfg, &pattern, &grid, i, s))
        .collect();
    let runs = runs?;
    let curve = aggregate_probes(&runs.iter().map(|r| r.trace.probes()).collect::<Vec<_>>());
    Ok(SuiteResult { config: cfg.clone(), master_seed, runs, curve })
}

fn run_one(
    cfg: &ExperimentConfig,
    pattern: &Pattern,
    grid: &[crate::datasets::DataPoint],
    seed_index: usize,
    run_seed: u64,
) -> Result<RunResult> {
    let pool_seed = seeds::derive(run_seed, &[cfg.pattern as u64, POOL_TAG]);
    let strategy_tag = cfg.strategy as u64;
    let train_seed = seeds::derive(run_seed, &[cfg.pattern as u64, strategy_tag, TRAIN_TAG]);
    let pool = generate_pool(pattern, cfg.pool_size, cfg.pool_scheme, pool_seed)?;
    let train_cfg = TrainConfig {
        epochs: cfg.non_al_epochs,
        backend: cfg.resolved_backend(),
        learning_rate: cfg.learning_rate,
        seed: train_seed,
        test_interval: cfg.probe_interval,
        ..TrainConfig::default()
    };
    let kind = cfg.classifier.model_kind();

    match cfg.strategy {
        StrategyChoice::NoAl => {
            let data = label_all(pattern, &pool);
            let mut eval = Evaluator::new(train_cfg.backend, train_cfg.seed);
            let params0 = eval.init_params(kind);
            let mut trainer = Trainer::from_evaluator(params0, train_cfg, eval);
            let trace = train_trainer(&mut trainer, &data, grid);
            Ok(RunResult {
                seed_index,
                run_seed,
                trace,
                selections: Vec::new(),
                initial_indices: Vec::new(),
                final_params: trainer.params,
                chained_rotation: trainer.chained_rotation,
            })
        }
        StrategyChoice::Usamp | StrategyChoice::Qbc => {
            let strategy = match cfg.strategy {
                StrategyChoice::Usamp => Strategy::Usamp,
                _ => Strategy::Qbc,
            };
            let al_cfg = AlConfig {
                rounds: cfg.al_rounds,
                epochs_per_round: cfg.epochs_per_round,
                count_selection_evals: cfg.count_selection_evals,
                warm_start: cfg.warm_start,
                train: train_cfg,
            };
            let out = al_train(strategy, pattern, &pool, kind, &al_cfg, grid)?;
            Ok(RunResult {
                seed_index,
                run_seed,
                trace: out.trace,
                selections: out.rounds,
                initial_indices: out.initial_indices,
                final_params: out.params,
                chained_rotation: out.chained_rotation,
            })
        }
    }
}

/// Aggregates per-run probe series onto the union evaluation grid with
/// last-value carry-forward, then takes mean and population std per grid
/// point.
pub fn aggregate_probes(per_run: &[Vec<(u64, f64)>]) -> AggregateCurve {
    let mut grid: Vec<u64> = per_run.iter().flatten().map(|&(e, _)| e).collect();
    grid.sort_unstable();
    grid.dedup();
    let n = per_run.len() as f64;
    let mut mean = Vec::with_capacity(grid.len());
    let mut std = Vec::with_capacity(grid.len());
    for &g in &grid {
        let values: Vec<f64> = per_run
            .iter()
            .map(|probes| {
                probes
                    .iter()
                    .take_while(|&&(e, _)| e <= g)
                    .last()
                    .map(|&(_, a)| a)
                    .unwrap_or_else(|| probes.first().map(|&(_, a)| a).unwrap_or(0.0))
            })
            .collect();
        let m = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
        mean.push(m);
        std.push(var.sqrt());
    }
    AggregateCurve { evaluations: grid, mean_accuracy: mean, std_accuracy: std }
}

/// Labeling and computational cost ratios (selection / no-selection), as in
/// the headline comparison table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostRatioRow {
    /// Labels used at the match point over the full pool size.
    pub labeling_ratio: Option<f64>,
    /// Evaluations at the match point over the non-selection total.
    pub computation_ratio: Option<f64>,
    /// False when the selection arm never reaches the converged accuracy of
    /// the no-selection arm.
    pub matched: bool,
    pub match_evaluations: Option<u64>,
    pub labels_at_match: Option<usize>,
    /// The accuracy bar: converged mean accuracy of the no-selection arm.
    pub target_accuracy: f64,
}

/// Finds where the selection arm's mean curve first reaches the final mean
/// accuracy of the no-selection arm. Matching is done on mean curves.
pub fn cost_ratios(al: &SuiteResult, non_al: &SuiteResult) -> Result<CostRatioRow> {
    if al.config.strategy == StrategyChoice::NoAl || non_al.config.strategy != StrategyChoice::NoAl
    {
        return Err(Error::Config(
            "cost_ratios expects (selection arm, no-selection arm)".into(),
        ));
    }
    if al.config.pattern != non_al.config.pattern || al.config.classifier != non_al.config.classifier
    {
        return Err(Error::Config(
            "cost ratio arms must share pattern and classifier".into(),
        ));
    }
    let bar = non_al.curve.final_mean();
    let non_al_total = non_al.total_evaluations();
    let hit = al
        .curve
        .evaluations
        .iter()
        .zip(&al.curve.mean_accuracy)
        .find(|&(_, &acc)| acc >= bar - 1e-12);
    Ok(match hit {
        None => CostRatioRow {
            labeling_ratio: None,
            computation_ratio: None,
            matched: false,
            match_evaluations: None,
            labels_at_match: None,
            target_accuracy: bar,
        },
        Some((&evals, _)) => {
            let labels = labels_at(al, evals);
            CostRatioRow {
                labeling_ratio: Some(labels as f64 / al.config.pool_size as f64),
                computation_ratio: Some(evals as f64 / non_al_total as f64),
                matched: true,
                match_evaluations: Some(evals),
                labels_at_match: Some(labels),
                target_accuracy: bar,
            }
        }
    })
}

/// Labeled-set size in effect at the probe with the given evaluation count.
fn labels_at(suite: &SuiteResult, evaluations: u64) -> usize {
    suite
        .runs
        .iter()
        .map(|r| {
            r.trace
                .rows
                .iter()
                .rev()
                .find(|row| row.test_accuracy.is_some() && row.evaluations <= evaluations)
                .map(|row| row.labeled_size)
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0)
}

/// Per-seed and mean absolute errors between a sampled suite and its
/// analytic twin.
#[derive(Clone, Debug)]
pub struct ErrorReport {
    pub per_run: Vec<(usize, f64, f64)>,
    pub loss_error: f64,
    pub accuracy_error: f64,
}

/// Compares a sampled suite to an analytic suite with otherwise equal
/// protocol: mean absolute error over the loss series and over the accuracy
/// probe series, averaged over seeds.
pub fn compare_to_analytic(sampled: &SuiteResult, analytic: &SuiteResult) -> Result<ErrorReport> {
    let mut a_cfg = sampled.config.clone();
    let mut b_cfg = analytic.config.clone();
    a_cfg.backend = BackendChoice::Analytic;
    a_cfg.shots = None;
    b_cfg.backend = BackendChoice::Analytic;
    b_cfg.shots = None;
    if a_cfg != b_cfg || sampled.master_seed != analytic.master_seed {
        return Err(Error::Config(
            "compare_to_analytic needs identical configs up to the backend".into(),
        ));
    }
    if sampled.runs.len() != analytic.runs.len() {
        return Err(Error::LengthMismatch(sampled.runs.len(), analytic.runs.len()));
    }
    let mut per_run = Vec::with_capacity(sampled.runs.len());
    for (s, a) in sampled.runs.iter().zip(&analytic.runs) {
        let loss_mae = theory::mean_abs_error(&s.trace.losses(), &a.trace.losses())?;
        let s_acc: Vec<f64> = s.trace.probes().iter().map(|&(_, acc)| acc).collect();
        let a_acc: Vec<f64> = a.trace.probes().iter().map(|&(_, acc)| acc).collect();
        let acc_mae = theory::mean_abs_error(&s_acc, &a_acc)?;
        per_run.push((s.seed_index, loss_mae, acc_mae));
    }
    let n = per_run.len() as f64;
    Ok(ErrorReport {
        loss_error: per_run.iter().map(|r| r.1).sum::<f64>() / n,
        accuracy_error: per_run.iter().map(|r| r.2).sum::<f64>() / n,
        per_run,
    })
}
