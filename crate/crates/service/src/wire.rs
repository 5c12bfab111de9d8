//! Request and response bodies. Node bodies reuse the scenario document's
//! node schema so a client can round-trip what it reads from `/state`.

use dirant_core::scenario_io::{AntennaDoc, MediumDoc, NodeDoc, RadioDoc};
use dirant_core::{LinkBudgetReport, MediumParams, Mutation, NodeId, NodeState, Position, Violation};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize)]
pub struct ApiState {
    pub version: u64,
    pub clock_s: f64,
    pub running: bool,
    pub pending_batches: usize,
    pub medium: MediumDoc,
    pub nodes: Vec<NodeDoc>,
}

/// Partial node update. `orientation_deg` at the top level is shorthand for
/// `antenna.orientation_deg`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodePatch {
    pub x_m: Option<f64>,
    pub y_m: Option<f64>,
    pub orientation_deg: Option<f64>,
    pub antenna: Option<AntennaDoc>,
    pub radio: Option<RadioDoc>,
}

impl NodePatch {
    /// One mutation batch against `node`, or the field-level violations.
    pub fn to_mutations(&self, node: &NodeState) -> Result<Vec<Mutation>, Vec<Violation>> {
        let mut v = Vec::new();
        let mut batch = Vec::new();

        if self.x_m.is_some() || self.y_m.is_some() {
            let p = Position::new(self.x_m.unwrap_or(node.position.x), self.y_m.unwrap_or(node.position.y));
            if !p.x.is_finite() {
                v.push(Violation::new("x_m", "must be finite"));
            }
            if !p.y.is_finite() {
                v.push(Violation::new("y_m", "must be finite"));
            }
            batch.push(Mutation::SetPosition(node.id, p));
        }

        match (&self.antenna, self.orientation_deg) {
            (Some(doc), shortcut) => {
                let mut doc = doc.clone();
                match (doc.orientation_deg, shortcut) {
                    (Some(a), Some(b)) if a != b => v.push(Violation::new(
                        "orientation_deg",
                        "conflicts with antenna.orientation_deg",
                    )),
                    (None, Some(b)) => doc.orientation_deg = Some(b),
                    _ => {}
                }
                if let Some(a) = doc.resolve(Some(&node.antenna), "antenna", &mut v) {
                    batch.push(Mutation::SetAntenna(node.id, a));
                }
            }
            (None, Some(deg)) => {
                if deg.is_finite() {
                    batch.push(Mutation::SetOrientation(node.id, deg));
                } else {
                    v.push(Violation::new("orientation_deg", "must be finite"));
                }
            }
            (None, None) => {}
        }

        if let Some(doc) = &self.radio {
            let r = doc.resolve(&node.radio);
            r.validate("radio", &mut v);
            batch.push(Mutation::SetRadio(node.id, r));
        }

        if batch.is_empty() && v.is_empty() {
            v.push(Violation::new("", "patch changes nothing"));
        }
        if v.is_empty() {
            Ok(batch)
        } else {
            Err(v)
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "action", rename_all = "lowercase", deny_unknown_fields)]
pub enum Control {
    Start,
    Pause,
    Step { seconds: f64 },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhatIfRequest {
    pub tx_id: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct WhatIfReport {
    pub rx_id: NodeId,
    #[serde(flatten)]
    pub budget: LinkBudgetReport,
    pub link: bool,
    pub interferes: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WhatIf {
    pub version: u64,
    pub tx_id: NodeId,
    pub receivers: Vec<NodeId>,
    pub interfered: Vec<NodeId>,
    pub reports: Vec<WhatIfReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Connectivity {
    pub version: u64,
    pub ids: Vec<NodeId>,
    /// `links[i][j]`: node `ids[i]` reaches node `ids[j]`.
    pub links: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PatternSample {
    pub angle_deg: f64,
    pub gain_dbi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Pattern {
    pub version: u64,
    pub node_id: NodeId,
    pub orientation_deg: f64,
    pub peak_gain_dbi: f64,
    pub samples: Vec<PatternSample>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PatchAccepted {
    pub version: u64,
    pub time_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PatchDeferred {
    pub status: &'static str,
    pub version: u64,
    pub apply_at_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ViolationBody {
    pub path: String,
    pub message: String,
}

impl From<&Violation> for ViolationBody {
    fn from(v: &Violation) -> Self {
        Self {
            path: v.path.clone(),
            message: v.message.clone(),
        }
    }
}

/// One event-stream frame.
#[derive(Debug, Clone, Serialize)]
pub struct Frame {
    pub version: u64,
    pub time_s: f64,
    pub payload: serde_json::Value,
}

pub fn medium_doc(m: &MediumParams) -> MediumDoc {
    MediumDoc {
        path_loss_exponent: Some(m.path_loss_exponent),
        reference_distance_m: Some(m.reference_distance_m),
        interference_threshold_dbm: Some(m.interference_threshold_dbm),
        capture_threshold_db: Some(m.capture_threshold_db),
    }
}
