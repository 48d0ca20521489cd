use thiserror::Error;

/// Errors raised while reading point data.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input is empty")]
    Empty,
    #[error("header: {0}")]
    Header(String),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("line {line}: {field} = {value} is out of range")]
    OutOfRange {
        line: u64,
        field: &'static str,
        value: f64,
    },
    #[error("cannot compute latitude scaling: {0}")]
    Alpha(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum ReconstructError {
    #[error("dataset has no points")]
    EmptyDataset,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Error)]
pub enum NpcError {
    #[error("need at least {needed} points for k-neighbor grouping, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("training data has no labeled points")]
    NoTrainingLabels,
    #[error("no label has a point at or before test points {indices:?}")]
    Unclassifiable { indices: Vec<usize> },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("point {0} has no vessel id")]
    MissingVid(usize),
    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("inconsistent counts: {clusters} clusters + {merges} merges - {jumps} jumps < 1")]
    InconsistentCount {
        clusters: usize,
        jumps: usize,
        merges: usize,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("bounding box too small to place {vessels} anchors {separation_m} m apart")]
    BboxTooSmall { vessels: usize, separation_m: f64 },
}

/// Top-level error used by the command layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),
    #[error(transparent)]
    Npc(#[from] NpcError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
