use std::fmt;

use serde::{Deserialize, Serialize};

use crate::antenna::AntennaConfig;
use crate::error::Violation;
use crate::geometry::Position;
use crate::linkbudget::RadioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub id: NodeId,
    pub position: Position,
    pub antenna: AntennaConfig,
    pub radio: RadioConfig,
}

impl NodeState {
    pub fn new(id: impl Into<NodeId>, position: Position, antenna: AntennaConfig, radio: RadioConfig) -> Self {
        Self {
            id: id.into(),
            position,
            antenna,
            radio,
        }
    }

    pub fn validate(&self, path: &str, out: &mut Vec<Violation>) {
        if !self.position.x.is_finite() {
            out.push(Violation::new(format!("{path}.x_m"), "must be finite"));
        }
        if !self.position.y.is_finite() {
            out.push(Violation::new(format!("{path}.y_m"), "must be finite"));
        }
        self.antenna.validate(&format!("{path}.antenna"), out);
        self.radio.validate(&format!("{path}.radio"), out);
    }
}

/// Look up a node by id.
pub fn find(nodes: &[NodeState], id: NodeId) -> Option<&NodeState> {
    nodes.iter().find(|n| n.id == id)
}
