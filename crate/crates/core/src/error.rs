use std::path::PathBuf;

use crate::ps::ClipId;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("missing clip {0:?}")]
    MissingClip(ClipId),
    #[error("nonpositive weight {0}")]
    NonpositiveWeight(f64),
    #[error("terminal clip {0:?} has no outgoing edges")]
    TerminalClip(ClipId),
    #[error("broken path: no edge {0:?} -> {1:?}")]
    BrokenPath(ClipId, ClipId),

    #[error("unknown {kind} `{id}`")]
    Unknown { kind: &'static str, id: String },
    #[error("skill `{0}` has no void behaviour")]
    MissingVoid(String),
    #[error("self-reference: skill `{0}` cannot be promoted into itself")]
    SelfReference(String),
    #[error("skill `{0}` is not well-trained")]
    NotWellTrained(String),
    #[error("degenerate behaviour set: {0} behaviours, need at least 2")]
    DegenerateBehaviourSet(usize),
    #[error("degenerate state set: {0} states, need at least 2")]
    DegenerateStateSet(usize),
    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid world: {0}")]
    InvalidWorld(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value.is_nan() || value < lo || value > hi {
        return Err(Error::OutOfRange {
            name,
            value,
            lo,
            hi,
        });
    }
    Ok(())
}
