//! Outcome resolution across the whole node population.
//!
//! A receiver decodes a transmission when the signal clears its sensitivity
//! and the signal-to-interference ratio against every other co-active
//! transmitter clears the capture threshold. Only transmitters whose power at
//! the receiver is above the interference threshold (or above the receiver's
//! own sensitivity) count as interferers. Noise is left out of the ratio;
//! sensitivity already covers the noise-limited regime.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::distance_m;
use crate::linkbudget::{interferes, link_exists, received_power_dbm, MediumParams};
use crate::node::{find, NodeId, NodeState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Received,
    LostInterference,
    BelowSensitivity,
    /// The receiver was itself on air for part of the packet.
    ReceiverBusy,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Received => "received",
            Classification::LostInterference => "lost_interference",
            Classification::BelowSensitivity => "below_sensitivity",
            Classification::ReceiverBusy => "receiver_busy",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeliveryOutcome {
    pub receiver_id: NodeId,
    pub classification: Classification,
    pub signal_dbm: f64,
    pub strongest_interferer_dbm: Option<f64>,
}

/// Per-receiver fates of one transmission within one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionOutcomes {
    pub tx_id: NodeId,
    pub outcomes: BTreeMap<NodeId, DeliveryOutcome>,
}

fn node(nodes: &[NodeState], id: NodeId) -> Result<&NodeState> {
    find(nodes, id).ok_or(Error::UnknownNode(id))
}

/// Nodes that can decode `tx_id`, and nodes that cannot but are disturbed by it.
pub fn receive_set(
    tx_id: NodeId,
    nodes: &[NodeState],
    params: &MediumParams,
) -> Result<(BTreeSet<NodeId>, BTreeSet<NodeId>)> {
    let tx = node(nodes, tx_id)?;
    let mut receivers = BTreeSet::new();
    let mut interfered = BTreeSet::new();
    for rx in nodes.iter().filter(|n| n.id != tx_id) {
        let report = received_power_dbm(tx, rx, params)?;
        if report.prx_dbm > rx.radio.sensitivity_dbm {
            receivers.insert(rx.id);
        } else if report.prx_dbm > params.interference_threshold_dbm {
            interfered.insert(rx.id);
        }
    }
    Ok((receivers, interfered))
}

/// Resolve simultaneously active transmissions at every node that is not
/// itself transmitting.
pub fn resolve_concurrent(
    active: &[NodeId],
    nodes: &[NodeState],
    params: &MediumParams,
) -> Result<Vec<TransmissionOutcomes>> {
    let receivers: Vec<NodeId> = nodes.iter().map(|n| n.id).filter(|id| !active.contains(id)).collect();
    resolve_at(active, &receivers, nodes, params)
}

/// Resolve simultaneously active transmissions at an explicit receiver set.
pub fn resolve_at(
    active: &[NodeId],
    receivers: &[NodeId],
    nodes: &[NodeState],
    params: &MediumParams,
) -> Result<Vec<TransmissionOutcomes>> {
    if active.is_empty() {
        return Err(Error::InvalidTopology("no active transmitter".into()));
    }
    let mut seen = BTreeSet::new();
    for &id in active {
        node(nodes, id)?;
        if !seen.insert(id) {
            return Err(Error::InvalidTopology(format!("node {id} listed twice as transmitter")));
        }
    }
    if let Some(id) = receivers.iter().find(|r| active.contains(r)) {
        return Err(Error::InvalidTopology(format!(
            "node {id} cannot transmit and receive at once"
        )));
    }

    let mut result: Vec<TransmissionOutcomes> = active
        .iter()
        .map(|&tx_id| TransmissionOutcomes {
            tx_id,
            outcomes: BTreeMap::new(),
        })
        .collect();

    for &rx_id in receivers {
        let rx = node(nodes, rx_id)?;
        let powers = active
            .iter()
            .map(|&t| Ok(received_power_dbm(node(nodes, t)?, rx, params)?.prx_dbm))
            .collect::<Result<Vec<f64>>>()?;
        let outcomes = classify_at(rx, &powers, params);
        for (slot, outcome) in result.iter_mut().zip(outcomes) {
            slot.outcomes.insert(rx_id, outcome);
        }
    }
    Ok(result)
}

/// Classify each of the co-active signals `powers_dbm` at `rx`.
fn classify_at(rx: &NodeState, powers_dbm: &[f64], params: &MediumParams) -> Vec<DeliveryOutcome> {
    let sensitivity = rx.radio.sensitivity_dbm;
    let disturbing: Vec<bool> = powers_dbm
        .iter()
        .map(|&p| p > params.interference_threshold_dbm || p > sensitivity)
        .collect();

    let mut outcomes: Vec<DeliveryOutcome> = powers_dbm
        .iter()
        .enumerate()
        .map(|(i, &signal)| {
            let mut sum_mw = 0.0;
            let mut strongest: Option<f64> = None;
            for (j, &p) in powers_dbm.iter().enumerate() {
                if j != i && disturbing[j] {
                    sum_mw += dbm_to_mw(p);
                    strongest = Some(strongest.map_or(p, |s| s.max(p)));
                }
            }
            let classification = if signal <= sensitivity {
                Classification::BelowSensitivity
            } else if sum_mw == 0.0 || signal - mw_to_dbm(sum_mw) >= params.capture_threshold_db {
                Classification::Received
            } else {
                Classification::LostInterference
            };
            DeliveryOutcome {
                receiver_id: rx.id,
                classification,
                signal_dbm: signal,
                strongest_interferer_dbm: strongest,
            }
        })
        .collect();

    // an exact power tie at a zero capture threshold lets two signals pass
    let received = outcomes
        .iter()
        .filter(|o| o.classification == Classification::Received)
        .count();
    if received > 1 {
        for o in &mut outcomes {
            if o.classification == Classification::Received {
                o.classification = Classification::LostInterference;
            }
        }
    }
    outcomes
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Directed adjacency of `link_exists`, rows are transmitters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConnectivityMatrix {
    pub ids: Vec<NodeId>,
    pub links: Vec<Vec<bool>>,
}

impl ConnectivityMatrix {
    pub fn get(&self, tx: NodeId, rx: NodeId) -> Option<bool> {
        let i = self.ids.iter().position(|&id| id == tx)?;
        let j = self.ids.iter().position(|&id| id == rx)?;
        Some(self.links[i][j])
    }

    /// `(tx, rx, linked)` for every off-diagonal entry in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, NodeId, bool)> + '_ {
        self.ids.iter().enumerate().flat_map(move |(i, &tx)| {
            self.ids
                .iter()
                .enumerate()
                .filter(move |&(j, _)| j != i)
                .map(move |(j, &rx)| (tx, rx, self.links[i][j]))
        })
    }
}

impl fmt::Display for ConnectivityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tx\\rx")?;
        for id in &self.ids {
            write!(f, "\t{id}")?;
        }
        writeln!(f)?;
        for (i, id) in self.ids.iter().enumerate() {
            write!(f, "{id}")?;
            for j in 0..self.ids.len() {
                let cell = if i == j {
                    "-"
                } else if self.links[i][j] {
                    "T"
                } else {
                    "F"
                };
                write!(f, "\t{cell}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

pub fn connectivity_matrix(nodes: &[NodeState], params: &MediumParams) -> Result<ConnectivityMatrix> {
    let links = nodes
        .iter()
        .map(|tx| {
            nodes
                .iter()
                .map(|rx| {
                    if tx.id == rx.id {
                        Ok(false)
                    } else {
                        link_exists(tx, rx, params)
                    }
                })
                .collect::<Result<Vec<bool>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConnectivityMatrix {
        ids: nodes.iter().map(|n| n.id).collect(),
        links,
    })
}

/// Whether `tx` disturbs `victim` without being decodable there.
pub fn interferes_only(tx: &NodeState, victim: &NodeState, params: &MediumParams) -> Result<bool> {
    Ok(!link_exists(tx, victim, params)? && interferes(tx, victim, params)?)
}

/// Two-ring unit-disk classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UdgmClass {
    InRange,
    InterferenceOnly,
    Oblivious,
}

pub fn udgm_classify(tx: &NodeState, rx: &NodeState, tx_range_m: f64, interference_range_m: f64) -> Result<UdgmClass> {
    if !(tx_range_m > 0.0 && tx_range_m <= interference_range_m && interference_range_m.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "need 0 < transmitting range ({tx_range_m}) <= interference range ({interference_range_m})"
        )));
    }
    let d = distance_m(tx.position, rx.position);
    Ok(if d <= tx_range_m {
        UdgmClass::InRange
    } else if d <= interference_range_m {
        UdgmClass::InterferenceOnly
    } else {
        UdgmClass::Oblivious
    })
}
