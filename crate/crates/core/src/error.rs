use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DecodeError {
    #[error("expected 7 pipe-separated fields, found {0}")]
    FieldCount(usize),
    #[error("invalid {field} field: {value:?}")]
    Field { field: &'static str, value: String },
}

/// A scenario configuration that fails validation. Each variant names the
/// offending field.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("framework: unknown framework {0:?}")]
    UnknownFramework(String),
    #[error("n_nfs: must be at least 1")]
    NoNfs,
    #[error("n_nfs: {n_nfs} is not divisible by nfs_per_multi_nwdaf = {group}")]
    MultiGrouping { n_nfs: u32, group: u32 },
    #[error("nfs_per_multi_nwdaf: must be at least 1")]
    EmptyGroup,
    #[error("N_T: must be at least 1")]
    NoEvents,
    #[error("alpha: {0} is outside [0, 1]")]
    Alpha(f64),
    #[error("beta: {0} is outside [0, 1]")]
    Beta(f64),
    #[error("{field}: must be positive and finite, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("{field}: must be a positive integer")]
    ZeroBytes { field: &'static str },
    #[error("{field}: must be non-negative and finite, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error("config: {0}")]
    Parse(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("event scheduled at t={at} before current time t={now}")]
    ScheduleInPast { at: f64, now: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("no completion records")]
    Empty,
    #[error("{0} events never received a response")]
    Incomplete(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredictorError {
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("normal equations are singular; use ridge_lambda > 0")]
    Singular,
    #[error("model was trained on {trained:?} but asked to predict with {requested:?}")]
    FeatureSetMismatch {
        trained: crate::predictor::FeatureSet,
        requested: crate::predictor::FeatureSet,
    },
    #[error("evaluation split is empty")]
    EmptySplit,
    #[error("ridge_lambda must be non-negative and finite")]
    BadLambda,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("sweep needs at least one repetition")]
    NoRepetitions,
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Predictor(#[from] PredictorError),
}
