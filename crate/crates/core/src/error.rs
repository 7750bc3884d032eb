use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    Shape {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("train-mode batch norm needs at least 2 rows, got {0}")]
    DegenerateBatch(usize),

    #[error("non-finite value produced by layer {layer} ({name})")]
    NonFinite { layer: usize, name: &'static str },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot sample from an empty replay buffer")]
    EmptyBuffer,

    #[error("unknown environment {0:?} (expected pendulum, cartpole, reacher or lqr)")]
    UnknownEnv(String),

    #[error("not a checkpoint: bad magic string")]
    NotACheckpoint,

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),

    #[error("checkpoint schema mismatch:\n{0}")]
    Schema(String),

    #[error("training diverged ({what}); norms: {norms}")]
    Diverged { what: &'static str, norms: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(context: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        Error::Shape {
            context,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
