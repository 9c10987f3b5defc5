use thiserror::Error;

use crate::model::FlowId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid flow {flow}: {reason}")]
    InvalidFlow { flow: FlowId, reason: String },

    #[error("duplicate flow id {0}")]
    DuplicateFlow(FlowId),

    #[error("unknown flow id {0}")]
    UnknownFlow(FlowId),

    #[error("frame {frame} out of range (horizon {horizon})")]
    FrameOutOfRange { frame: usize, horizon: usize },

    #[error("PHY configuration error: {0}")]
    PhyConfig(String),

    #[error("infeasible schedule: frame {frame} needs {demand} but capacity is {capacity}")]
    Infeasible {
        frame: usize,
        demand: String,
        capacity: String,
    },

    #[error("deadline miss: flow {flow} window arriving at frame {arrival} unfinished at frame {deadline}")]
    DeadlineMiss {
        flow: FlowId,
        arrival: usize,
        deadline: usize,
    },

    #[error("rejected swap at frame {frame} (giver {giver}, receiver {receiver}): {reason}")]
    InvalidSwap {
        frame: usize,
        giver: FlowId,
        receiver: FlowId,
        reason: &'static str,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("scenario generation failed for seed {seed}: no admissible draw for mobile station {station} after {attempts} attempts")]
    Generation {
        seed: u64,
        station: usize,
        attempts: usize,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// Attach a line number to a parse error raised without one.
    pub(crate) fn at_line(self, line: usize) -> Self {
        match self {
            Error::Parse { line: 0, message } => Error::Parse { line, message },
            other => other,
        }
    }
}
