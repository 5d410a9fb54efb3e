use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("graph has no edges")]
    EmptyEdgeSet,

    #[error("graph is not connected")]
    Disconnected,

    #[error("no connected instance found after {attempts} attempts starting at seed {seed}")]
    NoConnectedInstance { seed: u64, attempts: u32 },

    #[error("node {} is corrupted; an honest target is required", .0 + 1)]
    CorruptedTarget(usize),

    #[error("node {} is out of range for a graph with {n} nodes", .node + 1)]
    NodeOutOfRange { node: usize, n: usize },

    #[error("the adversary controls no nodes")]
    NoCorruptedNodes,

    #[error("honest node {} has no corrupted neighbor", .0 + 1)]
    HonestNodeUnobserved(usize),

    #[error("DOSP requires the PDMM solver")]
    DospRequiresPdmm,

    #[error("too few samples for kNN estimation: {trials} trials with k = {k}")]
    InsufficientSamples { trials: usize, k: usize },

    #[error("spec error{}: {message}", if *.line > 0 { format!(" at line {}", .line) } else { String::new() })]
    Spec { line: usize, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Violations of the network or adversary model, as opposed to bad input.
    pub fn is_model_violation(&self) -> bool {
        matches!(
            self,
            Error::Disconnected
                | Error::NoConnectedInstance { .. }
                | Error::CorruptedTarget(_)
                | Error::NoCorruptedNodes
                | Error::HonestNodeUnobserved(_)
        )
    }

    pub fn is_spec_error(&self) -> bool {
        matches!(self, Error::Spec { .. } | Error::Parse(_) | Error::DospRequiresPdmm)
    }
}
