use std::fmt;

use crate::NodeId;

/// A single failed constraint, qualified by the path of the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("nodes {0} and {1} occupy the same position")]
    CoincidentNodes(NodeId, NodeId),

    #[error("coincident positions")]
    CoincidentPoints,

    #[error("channel mismatch: transmitter on {tx_hz} Hz, receiver on {rx_hz} Hz")]
    ChannelMismatch { tx_hz: f64, rx_hz: f64 },

    #[error("half-power beamwidth {hpbw_deg} deg is not achievable by a {family} pattern")]
    UnachievableBeamwidth { family: &'static str, hpbw_deg: f64 },

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("validation failed: {}", join_violations(.0))]
    Validation(Vec<Violation>),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
