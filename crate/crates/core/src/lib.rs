//! Simulator and training harness for two polarization-photonics variational
//! quantum classifiers: a single-qubit classifier (VQC) driven by one trainable
//! half-wave plate, and an ancilla-assisted nonlinearity-enhanced variant
//! (NEVQC) built from a polarizing beam splitter with post-selection.
//!
//! The crate covers the full desk-scale experiment loop:
//!
//! - [`qsim`]: exact forward models and finite-shot coincidence sampling,
//!   including post-selection and probability-vanishment handling;
//! - [`datasets`]: arc-dividing label patterns, pools, and test grids;
//! - [`classifier`]: prediction, MSE loss, shift-rule gradients, Adam, and
//!   the training loop with evaluation accounting;
//! - [`active_learning`]: pool-based selection with uncertainty sampling
//!   and query-by-committee;
//! - [`committee`]: from-scratch SVC(RBF), 3-NN, LDA, and CART committee
//!   members operating on (cos x, sin x) features;
//! - [`theory`]: classification-line geometry and accuracy bounds;
//! - [`route_planner`]: wave-plate rotation schedules and travel costs;
//! - [`harness`]: experiment runner, seed aggregation, cost ratios, and
//!   CSV/SVG output.

pub mod active_learning;
pub mod classifier;
pub mod committee;
pub mod datasets;
pub mod harness;
pub mod qsim;
pub mod route_planner;
pub mod seeds;
pub mod theory;

use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid probability {0}")]
    InvalidProbability(f64),
    #[error("expectation undefined: zero coincidence counts")]
    ZeroCounts,
    #[error("dataset is empty")]
    EmptyData,
    #[error("need at least {need} items, got {got}")]
    TooFewItems { need: usize, got: usize },
    #[error("training data contains a single class")]
    SingleClass,
    #[error("series length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("pool of {pool} items cannot supply {need} labeled items")]
    PoolTooSmall { pool: usize, need: usize },
    #[error("vote list is empty")]
    EmptyVotes,
    #[error("unlabeled data point at x = {0}")]
    MissingLabel(f64),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
