//! Experiment configuration: defaults, validation, and the flat
//! `key = value` config-file format (unknown keys are errors, lists are
//! comma-separated).

use crate::classifier::{Backend, ModelKind};
use crate::datasets::PoolScheme;
use crate::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Classifier under test. The starred variant runs the interference form of
/// the ancilla circuit, whose outcome statistics are identical to the plain
/// NEVQC; runs with equal seeds produce identical traces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassifierKind {
    Vqc,
    Nevqc,
    NevqcStar,
}

impl ClassifierKind {
    pub fn model_kind(self) -> ModelKind {
        match self {
            ClassifierKind::Vqc => ModelKind::Vqc,
            ClassifierKind::Nevqc | ClassifierKind::NevqcStar => ModelKind::Nevqc,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Vqc => "VQC",
            ClassifierKind::Nevqc => "NEVQC",
            ClassifierKind::NevqcStar => "NEVQC_STAR",
        }
    }
}

/// Selection strategy of a run; `NoAl` trains on the fully labeled pool.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyChoice {
    NoAl,
    Usamp,
    Qbc,
}

impl StrategyChoice {
    pub fn name(self) -> &'static str {
        match self {
            StrategyChoice::NoAl => "none",
            StrategyChoice::Usamp => "usamp",
            StrategyChoice::Qbc => "qbc",
        }
    }
}

/// Backend choice before shot-count resolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendChoice {
    Analytic,
    Sampled,
}

/// One experiment cell: a classifier, a pattern, a strategy, and the
/// protocol numbers. The defaults reproduce the hardware protocol: a pool of
/// 20, 35 epochs without selection, 10 rounds of 10 epochs with it, probes
/// every 5 epochs on a 500-point grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub classifier: ClassifierKind,
    pub pattern: u8,
    pub strategy: StrategyChoice,
    /// Explicit per-run seeds; when empty, four seeds are derived from the
    /// master seed.
    pub seeds: Vec<u64>,
    pub backend: BackendChoice,
    /// Shots per evaluation for the sampled backend; defaults to 2000 (VQC)
    /// or 5500 (NEVQC).
    pub shots: Option<u32>,
    pub pool_size: usize,
    pub al_rounds: u32,
    pub epochs_per_round: u32,
    pub non_al_epochs: u32,
    pub test_size: usize,
    pub probe_interval: u32,
    pub count_selection_evals: bool,
    pub warm_start: bool,
    pub pool_scheme: PoolScheme,
    pub learning_rate: f64,
}

impl ExperimentConfig {
    pub fn new(classifier: ClassifierKind, pattern: u8, strategy: StrategyChoice) -> Self {
        ExperimentConfig {
            classifier,
            pattern,
            strategy,
            seeds: Vec::new(),
            backend: BackendChoice::Analytic,
            shots: None,
            pool_size: 20,
            al_rounds: 10,
            epochs_per_round: 10,
            non_al_epochs: 35,
            test_size: 500,
            probe_interval: 5,
            count_selection_evals: true,
            warm_start: true,
            pool_scheme: PoolScheme::UniformRandom,
            learning_rate: 0.15,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(1..=3).contains(&self.pattern) {
            return fail(format!("pattern must be 1, 2, or 3, got {}", self.pattern));
        }
        if self.pool_size < 2 {
            return fail(format!("pool_size must be at least 2, got {}", self.pool_size));
        }
        if self.strategy != StrategyChoice::NoAl {
            let need = self.initial_labeled() + self.al_rounds as usize;
            if self.pool_size < need {
                return fail(format!(
                    "pool_size {} cannot cover {} seeded items plus {} rounds",
                    self.pool_size,
                    self.initial_labeled(),
                    self.al_rounds
                ));
            }
        }
        if self.test_size == 0 {
            return fail("test_size must be positive".into());
        }
        if self.probe_interval == 0 {
            return fail("probe_interval must be positive".into());
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return fail(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if let Some(0) = self.shots {
            return fail("shots must be positive".into());
        }
        Ok(())
    }

    pub fn initial_labeled(&self) -> usize {
        match self.strategy {
            StrategyChoice::NoAl => self.pool_size,
            StrategyChoice::Usamp => 2,
            StrategyChoice::Qbc => 3,
        }
    }

    /// The backend with the shot count resolved.
    pub fn resolved_backend(&self) -> Backend {
        match (self.backend, self.shots) {
            (BackendChoice::Analytic, _) => Backend::Analytic,
            (BackendChoice::Sampled, Some(shots)) => Backend::Sampled { shots },
            (BackendChoice::Sampled, None) => {
                Backend::sampled_default(self.classifier.model_kind())
            }
        }
    }

    /// Per-run master seeds: the explicit list, or four derived from
    /// `master_seed`.
    pub fn resolved_seeds(&self, master_seed: u64) -> Vec<u64> {
        if self.seeds.is_empty() {
            (0..4).map(|i| crate::seeds::derive(master_seed, &[i])).collect()
        } else {
            self.seeds.clone()
        }
    }

    /// A short directory-friendly label, e.g. `vqc_p1_usamp`.
    pub fn label(&self) -> String {
        format!(
            "{}_p{}_{}",
            self.classifier.name().to_lowercase(),
            self.pattern,
            self.strategy.name()
        )
    }

    /// Parses the flat `key = value` format. Lines that are empty or start
    /// with `#` are skipped; unknown keys are errors.
    pub fn from_file(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = ExperimentConfig::new(ClassifierKind::Vqc, 1, StrategyChoice::NoAl);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`, got {raw:?}", lineno + 1))
            })?;
            cfg.apply(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` assignment.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("bad {what} value {value:?}"));
        match key {
            "classifier" => {
                self.classifier = match value.to_ascii_uppercase().as_str() {
                    "VQC" => ClassifierKind::Vqc,
                    "NEVQC" => ClassifierKind::Nevqc,
                    "NEVQC_STAR" | "NEVQC*" => ClassifierKind::NevqcStar,
                    _ => return Err(bad("classifier")),
                }
            }
            "pattern" => self.pattern = value.parse().map_err(|_| bad("pattern"))?,
            "strategy" => {
                self.strategy = match value.to_ascii_lowercase().as_str() {
                    "none" => StrategyChoice::NoAl,
                    "usamp" => StrategyChoice::Usamp,
                    "qbc" => StrategyChoice::Qbc,
                    _ => return Err(bad("strategy")),
                }
            }
            "seeds" => {
                self.seeds = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse::<u64>().map_err(|_| bad("seeds")))
                    .collect::<Result<Vec<u64>>>()?;
            }
            "backend" => {
                self.backend = match value.to_ascii_lowercase().as_str() {
                    "analytic" => BackendChoice::Analytic,
                    "sampled" => BackendChoice::Sampled,
                    _ => return Err(bad("backend")),
                }
            }
            "shots" => self.shots = Some(value.parse().map_err(|_| bad("shots"))?),
            "pool_size" => self.pool_size = value.parse().map_err(|_| bad("pool_size"))?,
            "al_rounds" => self.al_rounds = value.parse().map_err(|_| bad("al_rounds"))?,
            "epochs_per_round" => {
                self.epochs_per_round = value.parse().map_err(|_| bad("epochs_per_round"))?
            }
            "non_al_epochs" => {
                self.non_al_epochs = value.parse().map_err(|_| bad("non_al_epochs"))?
            }
            "test_size" => self.test_size = value.parse().map_err(|_| bad("test_size"))?,
            "probe_interval" => {
                self.probe_interval = value.parse().map_err(|_| bad("probe_interval"))?
            }
            "count_selection_evals" => {
                self.count_selection_evals = parse_bool(value).ok_or_else(|| bad("count_selection_evals"))?
            }
            "warm_start" => {
                self.warm_start = parse_bool(value).ok_or_else(|| bad("warm_start"))?
            }
            "pool_scheme" => {
                self.pool_scheme = match value.to_ascii_lowercase().as_str() {
                    "random" | "uniform" => PoolScheme::UniformRandom,
                    "even" | "evenly_spaced" => PoolScheme::EvenlySpaced,
                    _ => return Err(bad("pool_scheme")),
                }
            }
            "learning_rate" => {
                self.learning_rate = value.parse().map_err(|_| bad("learning_rate"))?
            }
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Full resolved configuration in config-file syntax, as written to
    /// `config.echo`.
    pub fn echo(&self, master_seed: u64) -> String {
        let mut out = String::new();
        let scheme = match self.pool_scheme {
            PoolScheme::UniformRandom => "random",
            PoolScheme::EvenlySpaced => "even",
        };
        let backend = match self.backend {
            BackendChoice::Analytic => "analytic",
            BackendChoice::Sampled => "sampled",
        };
        let shots = match self.resolved_backend() {
            Backend::Analytic => "".to_string(),
            Backend::Sampled { shots } => shots.to_string(),
        };
        let seeds = self
            .resolved_seeds(master_seed)
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(",");
        writeln!(out, "artifact_version = {}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(out, "master_seed = {master_seed}").unwrap();
        writeln!(out, "classifier = {}", self.classifier.name()).unwrap();
        writeln!(out, "pattern = {}", self.pattern).unwrap();
        writeln!(out, "strategy = {}", self.strategy.name()).unwrap();
        writeln!(out, "seeds = {seeds}").unwrap();
        writeln!(out, "backend = {backend}").unwrap();
        if !shots.is_empty() {
            writeln!(out, "shots = {shots}").unwrap();
        }
        writeln!(out, "pool_size = {}", self.pool_size).unwrap();
        writeln!(out, "al_rounds = {}", self.al_rounds).unwrap();
        writeln!(out, "epochs_per_round = {}", self.epochs_per_round).unwrap();
        writeln!(out, "non_al_epochs = {}", self.non_al_epochs).unwrap();
        writeln!(out, "test_size = {}", self.test_size).unwrap();
        writeln!(out, "probe_interval = {}", self.probe_interval).unwrap();
        writeln!(out, "count_selection_evals = {}", self.count_selection_evals).unwrap();
        writeln!(out, "warm_start = {}", self.warm_start).unwrap();
        writeln!(out, "pool_scheme = {scheme}").unwrap();
        writeln!(out, "learning_rate = {}", self.learning_rate).unwrap();
        out
    }
}

fn parse_bool(value: &str) -> Option<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_reproduce_protocol() {
        let cfg = ExperimentConfig::new(ClassifierKind::Vqc, 1, StrategyChoice::Usamp);
        assert_eq!(cfg.pool_size, 20);
        assert_eq!(cfg.al_rounds, 10);
        assert_eq!(cfg.epochs_per_round, 10);
        assert_eq!(cfg.non_al_epochs, 35);
        assert_eq!(cfg.test_size, 500);
        assert_eq!(cfg.probe_interval, 5);
        assert_eq!(cfg.initial_labeled(), 2);
        assert!(cfg.count_selection_evals);
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.resolved_seeds(7).len(), 4);
        assert_eq!(
            ExperimentConfig::new(ClassifierKind::Vqc, 1, StrategyChoice::Qbc).initial_labeled(),
            3
        );
    }

    #[test]
    fn default_shot_counts_follow_classifier() {
        let mut cfg = ExperimentConfig::new(ClassifierKind::Vqc, 1, StrategyChoice::NoAl);
        cfg.backend = BackendChoice::Sampled;
        assert_eq!(cfg.resolved_backend(), Backend::Sampled { shots: 2000 });
        cfg.classifier = ClassifierKind::NevqcStar;
        assert_eq!(cfg.resolved_backend(), Backend::Sampled { shots: 5500 });
        cfg.shots = Some(123);
        assert_eq!(cfg.resolved_backend(), Backend::Sampled { shots: 123 });
    }

    #[test]
    fn parse_round_trip_and_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.cfg");
        std::fs::write(
            &path,
            "# experiment\nclassifier = NEVQC\npattern = 2\nstrategy = qbc\n\
             seeds = 5, 6, 7\nbackend = sampled\nshots = 700\npool_size = 20\n\
             learning_rate = 0.2\npool_scheme = even\nwarm_start = false\n",
        )
        .unwrap();
        let cfg = ExperimentConfig::from_file(&path).unwrap();
        assert_eq!(cfg.classifier, ClassifierKind::Nevqc);
        assert_eq!(cfg.pattern, 2);
        assert_eq!(cfg.strategy, StrategyChoice::Qbc);
        assert_eq!(cfg.seeds, vec![5, 6, 7]);
        assert_eq!(cfg.resolved_backend(), Backend::Sampled { shots: 700 });
        assert!(!cfg.warm_start);

        std::fs::write(&path, "not_a_key = 3\n").unwrap();
        let err = ExperimentConfig::from_file(&path).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");

        std::fs::write(&path, "pattern 3\n").unwrap();
        assert!(ExperimentConfig::from_file(&path).is_err());
    }

    #[test]
    fn validation_catches_protocol_violations() {
        let mut cfg = ExperimentConfig::new(ClassifierKind::Vqc, 5, StrategyChoice::NoAl);
        assert!(cfg.validate().is_err());
        cfg.pattern = 1;
        assert!(cfg.validate().is_ok());
        cfg.pool_size = 5;
        cfg.strategy = StrategyChoice::Usamp;
        assert!(cfg.validate().is_err(), "pool too small for 10 rounds");
        cfg.al_rounds = 3;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn echo_lists_resolved_seeds() {
        let cfg = ExperimentConfig::new(ClassifierKind::Vqc, 1, StrategyChoice::NoAl);
        let echo = cfg.echo(42);
        assert!(echo.contains("master_seed = 42"));
        let seeds = cfg.resolved_seeds(42);
        assert!(echo.contains(&seeds[0].to_string()));
        assert!(echo.contains("artifact_version"));
    }
}
