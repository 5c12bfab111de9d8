//! Deterministic discrete-event simulation of broadcast traffic over the
//! radio medium.
//!
//! Each node broadcasts after an interval drawn uniformly from the traffic
//! bounds, using its own random stream keyed by `(seed, node id)`. A packet
//! occupies the air for a fixed airtime. When it ends, its airtime is split
//! into maximal intervals over which the set of active transmitters is
//! constant, and the medium resolves each interval. A receiver gets the
//! packet only if every interval resolves to `Received`.
//!
//! Events sharing a timestamp are ordered by kind (ends, deliveries,
//! mutations, starts), then transmitter id, then sequence number.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::antenna::AntennaConfig;
use crate::error::{Error, Result, Violation};
use crate::geometry::{normalize_deg, Position};
use crate::linkbudget::{received_power_dbm, MediumParams, RadioConfig};
use crate::medium::{resolve_at, Classification, DeliveryOutcome};
use crate::node::{NodeId, NodeState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficModel {
    pub min_interval_s: f64,
    pub max_interval_s: f64,
}

impl Default for TrafficModel {
    fn default() -> Self {
        Self {
            min_interval_s: 0.5,
            max_interval_s: 2.0,
        }
    }
}

/// Complete simulation input.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub nodes: Vec<NodeState>,
    pub medium: MediumParams,
    pub traffic: TrafficModel,
    pub packet_airtime_s: f64,
    pub duration_s: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        self.medium.validate("medium", &mut v);

        let t = &self.traffic;
        if !t.min_interval_s.is_finite() || t.min_interval_s < 0.0 {
            v.push(Violation::new("traffic.min_s", "must be finite and >= 0"));
        }
        if !t.max_interval_s.is_finite() {
            v.push(Violation::new("traffic.max_s", "must be finite"));
        } else if t.min_interval_s > t.max_interval_s {
            v.push(Violation::new(
                "traffic.max_s",
                format!("must be >= traffic.min_s ({})", t.min_interval_s),
            ));
        } else if t.max_interval_s <= 0.0 {
            v.push(Violation::new("traffic.max_s", "must be > 0"));
        }
        if !self.packet_airtime_s.is_finite() || self.packet_airtime_s <= 0.0 {
            v.push(Violation::new("traffic.packet_airtime_s", "must be finite and > 0"));
        }
        if !self.duration_s.is_finite() || self.duration_s <= 0.0 {
            v.push(Violation::new("duration_s", "must be finite and > 0"));
        }

        let mut ids = BTreeSet::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let path = format!("nodes[{i}]");
            if !ids.insert(n.id) {
                v.push(Violation::new(
                    format!("{path}.id"),
                    format!("duplicate node id {}", n.id),
                ));
            }
            n.validate(&path, &mut v);
        }
        node_set_violations(&self.nodes, &mut v);
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }
}

/// Cross-node constraints: distinct positions and a single channel.
fn node_set_violations(nodes: &[NodeState], v: &mut Vec<Violation>) {
    for (i, a) in nodes.iter().enumerate() {
        for (j, b) in nodes.iter().enumerate().skip(i + 1) {
            if a.position == b.position {
                v.push(Violation::new(
                    format!("nodes[{j}]"),
                    format!("position coincides with node {}", a.id),
                ));
            }
            if a.radio.frequency_hz != b.radio.frequency_hz {
                v.push(Violation::new(
                    format!("nodes[{j}].radio.frequency_hz"),
                    format!("differs from node {} (single shared channel)", a.id),
                ));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mutation {
    SetPosition(NodeId, Position),
    SetOrientation(NodeId, f64),
    SetAntenna(NodeId, AntennaConfig),
    SetRadio(NodeId, RadioConfig),
}

impl Mutation {
    pub fn target(&self) -> NodeId {
        match self {
            Mutation::SetPosition(id, _)
            | Mutation::SetOrientation(id, _)
            | Mutation::SetAntenna(id, _)
            | Mutation::SetRadio(id, _) => *id,
        }
    }

    fn apply_to(&self, nodes: &mut [NodeState]) -> Result<()> {
        let id = self.target();
        let node = nodes.iter_mut().find(|n| n.id == id).ok_or(Error::UnknownNode(id))?;
        match self {
            Mutation::SetPosition(_, p) => node.position = *p,
            Mutation::SetOrientation(_, deg) => node.antenna.orientation_deg = normalize_deg(*deg)?,
            Mutation::SetAntenna(_, a) => node.antenna = a.clone(),
            Mutation::SetRadio(_, r) => node.radio = *r,
        }
        Ok(())
    }

    fn kind(&self) -> &'static str {
        match self {
            Mutation::SetPosition(..) => "set_position",
            Mutation::SetOrientation(..) => "set_orientation",
            Mutation::SetAntenna(..) => "set_antenna",
            Mutation::SetRadio(..) => "set_radio",
        }
    }
}

/// Apply `mutations` to a copy of `nodes`, returning it if every invariant
/// still holds.
pub fn apply_mutations(nodes: &[NodeState], mutations: &[Mutation]) -> Result<Vec<NodeState>> {
    let mut next = nodes.to_vec();
    for m in mutations {
        m.apply_to(&mut next)?;
    }
    let mut v = Vec::new();
    for (i, n) in next.iter().enumerate() {
        n.validate(&format!("nodes[{i}]"), &mut v);
    }
    node_set_violations(&next, &mut v);
    if v.is_empty() {
        Ok(next)
    } else {
        Err(Error::Validation(v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    TxStart,
    TxEnd,
    Delivery(DeliveryOutcome),
    Mutation { version: u64, mutation: Mutation },
}

impl EventKind {
    pub fn rank(&self) -> u8 {
        match self {
            EventKind::TxEnd => 0,
            EventKind::Delivery(_) => 1,
            EventKind::Mutation { .. } => 2,
            EventKind::TxStart => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EventKind::TxStart => "tx_start",
            EventKind::TxEnd => "tx_end",
            EventKind::Delivery(_) => "delivery",
            EventKind::Mutation { .. } => "mutation",
        }
    }
}

/// One log entry. For mutations `tx_id` is the mutated node and
/// `sequence_no` the version the mutation produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SimEvent {
    pub time_s: f64,
    pub kind: EventKind,
    pub tx_id: NodeId,
    pub sequence_no: u64,
}

impl SimEvent {
    /// Single-line JSON record.
    pub fn to_record(&self) -> String {
        let mut s = format!(
            "{{\"time_s\":{:.6},\"kind\":\"{}\",\"tx_id\":{},\"sequence_no\":{}",
            self.time_s,
            self.kind.name(),
            self.tx_id,
            self.sequence_no
        );
        match &self.kind {
            EventKind::Delivery(o) => {
                s.push_str(&format!(
                    ",\"receiver_id\":{},\"classification\":\"{}\",\"signal_dbm\":{:.6},\"strongest_interferer_dbm\":{}",
                    o.receiver_id,
                    o.classification,
                    o.signal_dbm,
                    o.strongest_interferer_dbm
                        .map_or_else(|| "null".to_string(), |p| format!("{p:.6}"))
                ));
            }
            EventKind::Mutation { version, mutation } => {
                s.push_str(&format!(",\"version\":{version},\"mutation\":\"{}\"", mutation.kind()));
                match mutation {
                    Mutation::SetPosition(_, p) => s.push_str(&format!(",\"x_m\":{:.6},\"y_m\":{:.6}", p.x, p.y)),
                    Mutation::SetOrientation(_, d) => {
                        s.push_str(&format!(",\"orientation_deg\":{:.6}", normalize_deg(*d).unwrap_or(*d)))
                    }
                    Mutation::SetAntenna(_, a) => s.push_str(&format!(
                        ",\"antenna\":\"{}\",\"orientation_deg\":{:.6},\"peak_gain_dbi\":{:.6},\"beamwidth_deg\":{:.6}",
                        a.pattern.kind(),
                        a.orientation_deg,
                        a.peak_gain_dbi,
                        a.beamwidth_deg
                    )),
                    Mutation::SetRadio(_, r) => s.push_str(&format!(
                        ",\"tx_power_dbm\":{:.6},\"sensitivity_dbm\":{:.6},\"frequency_hz\":{:.6}",
                        r.tx_power_dbm, r.sensitivity_dbm, r.frequency_hz
                    )),
                }
            }
            EventKind::TxStart | EventKind::TxEnd => {}
        }
        s.push('}');
        s
    }

    fn order_key(&self) -> (u8, NodeId, u64) {
        (self.kind.rank(), self.tx_id, self.sequence_no)
    }

    /// Total order used for the log.
    pub fn log_cmp(&self, other: &Self) -> Ordering {
        self.time_s
            .total_cmp(&other.time_s)
            .then_with(|| self.order_key().cmp(&other.order_key()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PairStats {
    pub received: u64,
    pub lost_interference: u64,
    pub below_sensitivity: u64,
    pub receiver_busy: u64,
}

impl PairStats {
    fn record(&mut self, c: Classification) {
        match c {
            Classification::Received => self.received += 1,
            Classification::LostInterference => self.lost_interference += 1,
            Classification::BelowSensitivity => self.below_sensitivity += 1,
            Classification::ReceiverBusy => self.receiver_busy += 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DeliveryStats {
    pub sent: BTreeMap<NodeId, u64>,
    pub pairs: BTreeMap<(NodeId, NodeId), PairStats>,
}

impl DeliveryStats {
    pub fn received(&self, tx: NodeId, rx: NodeId) -> u64 {
        self.pairs.get(&(tx, rx)).map_or(0, |p| p.received)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("tx_id,rx_id,sent,received,lost_interference,below_sensitivity,receiver_busy\n");
        for ((tx, rx), p) in &self.pairs {
            out.push_str(&format!(
                "{tx},{rx},{},{},{},{},{}\n",
                self.sent.get(tx).copied().unwrap_or(0),
                p.received,
                p.lost_interference,
                p.below_sensitivity,
                p.receiver_busy
            ));
        }
        out
    }
}

/// Result of submitting a mutation batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MutationTicket {
    Applied {
        version: u64,
        time_s: f64,
    },
    /// Something is on air; the batch applies once the medium is idle,
    /// no earlier than `earliest_s`.
    Deferred {
        earliest_s: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Packet {
    tx: NodeId,
    seq: u64,
    start: f64,
    end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Action {
    End(Packet),
    Start { node: NodeId, autonomous: bool },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Scheduled {
    time: f64,
    rank: u8,
    node: NodeId,
    order: u64,
    action: Action,
}

impl Eq for Scheduled {}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.rank.cmp(&other.rank))
            .then(self.node.cmp(&other.node))
            .then(self.order.cmp(&other.order))
    }
}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Everything a finished run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub log: Vec<SimEvent>,
    pub stats: DeliveryStats,
}

impl RunOutput {
    pub fn log_jsonl(&self) -> String {
        log_jsonl(&self.log)
    }
}

pub fn log_jsonl(log: &[SimEvent]) -> String {
    let mut out = String::new();
    for e in log {
        out.push_str(&e.to_record());
        out.push('\n');
    }
    out
}

/// Run `scenario` from t = 0 to its duration. Packets still on air at the
/// end are allowed to finish.
pub fn run(scenario: &Scenario) -> Result<RunOutput> {
    let mut sim = Simulation::new(scenario.clone())?;
    sim.run_to_completion()?;
    Ok(sim.into_output())
}

/// Single-owner simulation state.
#[derive(Debug, Clone)]
pub struct Simulation {
    scenario: Scenario,
    horizon_s: Option<f64>,
    autonomous: bool,
    clock_s: f64,
    version: u64,
    queue: BinaryHeap<Reverse<Scheduled>>,
    order: u64,
    rngs: BTreeMap<NodeId, ChaCha8Rng>,
    next_seq: BTreeMap<NodeId, u64>,
    in_flight: Vec<Packet>,
    // packets that may still overlap something in flight
    recent: Vec<Packet>,
    pending: Vec<Vec<Mutation>>,
    log: Vec<SimEvent>,
    stats: DeliveryStats,
}

impl Simulation {
    pub fn new(scenario: Scenario) -> Result<Self> {
        Self::build(scenario, true)
    }

    /// No autonomous broadcasts; traffic comes only from
    /// [`Simulation::inject_broadcast`].
    pub fn without_traffic(scenario: Scenario) -> Result<Self> {
        Self::build(scenario, false)
    }

    fn build(scenario: Scenario, autonomous: bool) -> Result<Self> {
        scenario.validate()?;
        let rngs = scenario
            .nodes
            .iter()
            .map(|n| (n.id, node_stream(scenario.seed, n.id)))
            .collect();
        let mut sim = Self {
            horizon_s: Some(scenario.duration_s),
            scenario,
            autonomous,
            clock_s: 0.0,
            version: 0,
            queue: BinaryHeap::new(),
            order: 0,
            rngs,
            next_seq: BTreeMap::new(),
            in_flight: Vec::new(),
            recent: Vec::new(),
            pending: Vec::new(),
            log: Vec::new(),
            stats: DeliveryStats::default(),
        };
        if autonomous {
            let ids: Vec<NodeId> = sim.scenario.nodes.iter().map(|n| n.id).collect();
            for id in ids {
                let first = sim.draw_interval(id);
                sim.schedule_start(id, first, true);
            }
        }
        Ok(sim)
    }

    /// Keep broadcasting past the scenario duration.
    pub fn unbounded(mut self) -> Self {
        self.horizon_s = None;
        self
    }

    pub fn clock_s(&self) -> f64 {
        self.clock_s
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.scenario.nodes
    }

    /// Scenario with the current node states.
    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn log(&self) -> &[SimEvent] {
        &self.log
    }

    pub fn stats(&self) -> &DeliveryStats {
        &self.stats
    }

    pub fn is_idle(&self) -> bool {
        self.in_flight.is_empty()
    }

    pub fn pending_mutations(&self) -> usize {
        self.pending.len()
    }

    pub fn into_output(self) -> RunOutput {
        RunOutput {
            log: self.log,
            stats: self.stats,
        }
    }

    fn draw_interval(&mut self, id: NodeId) -> f64 {
        let t = self.scenario.traffic;
        let rng = self.rngs.get_mut(&id).expect("stream exists for every node");
        if t.min_interval_s == t.max_interval_s {
            t.min_interval_s
        } else {
            rng.random_range(t.min_interval_s..=t.max_interval_s)
        }
    }

    fn push(&mut self, time: f64, node: NodeId, action: Action) {
        let rank = match action {
            Action::End(_) => 0,
            Action::Start { .. } => 3,
        };
        self.order += 1;
        self.queue.push(Reverse(Scheduled {
            time,
            rank,
            node,
            order: self.order,
            action,
        }));
    }

    fn schedule_start(&mut self, node: NodeId, time: f64, autonomous: bool) {
        if autonomous {
            if let Some(h) = self.horizon_s {
                if time >= h {
                    return;
                }
            }
        }
        self.push(time, node, Action::Start { node, autonomous });
    }

    /// Queue a one-off broadcast by `node` at `at_s` (deferred to the end of
    /// the node's own transmission if it is on air then).
    pub fn inject_broadcast(&mut self, node: NodeId, at_s: f64) -> Result<()> {
        if !self.scenario.nodes.iter().any(|n| n.id == node) {
            return Err(Error::UnknownNode(node));
        }
        if !at_s.is_finite() || at_s < self.clock_s {
            return Err(Error::InvalidInput(format!(
                "broadcast time {at_s} is before the clock ({})",
                self.clock_s
            )));
        }
        self.schedule_start(node, at_s, false);
        Ok(())
    }

    /// Validate and apply (or defer) a batch of mutations as one version.
    pub fn submit(&mut self, batch: Vec<Mutation>) -> Result<MutationTicket> {
        if batch.is_empty() {
            return Err(Error::InvalidInput("empty mutation batch".into()));
        }
        // check against the state the batch will land on
        let mut base = self.scenario.nodes.clone();
        for queued in &self.pending {
            base = apply_mutations(&base, queued)?;
        }
        apply_mutations(&base, &batch)?;

        if self.is_idle() && self.pending.is_empty() {
            let version = self.apply_batch(batch)?;
            return Ok(MutationTicket::Applied {
                version,
                time_s: self.clock_s,
            });
        }
        self.pending.push(batch);
        Ok(MutationTicket::Deferred {
            earliest_s: self.quiescent_estimate(),
        })
    }

    /// Earliest instant the medium can be idle given what is on air now.
    pub fn quiescent_estimate(&self) -> f64 {
        self.in_flight.iter().map(|p| p.end).fold(self.clock_s, f64::max)
    }

    fn apply_batch(&mut self, batch: Vec<Mutation>) -> Result<u64> {
        let next = apply_mutations(&self.scenario.nodes, &batch)?;
        self.scenario.nodes = next;
        self.version += 1;
        let from = self.log.len();
        for m in batch {
            self.log.push(SimEvent {
                time_s: self.clock_s,
                tx_id: m.target(),
                sequence_no: self.version,
                kind: EventKind::Mutation {
                    version: self.version,
                    mutation: m,
                },
            });
        }
        self.sort_mutation_tail(from);
        Ok(self.version)
    }

    fn apply_pending(&mut self) -> Result<()> {
        let from = self.log.len();
        for batch in std::mem::take(&mut self.pending) {
            self.apply_batch(batch)?;
        }
        self.sort_mutation_tail(from);
        Ok(())
    }

    /// Mutations on different nodes commute, so same-instant mutation
    /// events can be put in log order; per-node order is preserved.
    fn sort_mutation_tail(&mut self, from: usize) {
        self.log[from..].sort_by(|a, b| a.log_cmp(b));
    }

    /// Time of the next queued event.
    pub fn next_event_s(&self) -> Option<f64> {
        self.queue.peek().map(|Reverse(s)| s.time)
    }

    /// Process every event at or before `t` and move the clock to `t`.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        while let Some(next) = self.next_event_s() {
            if next > t {
                break;
            }
            self.process_instant(next)?;
        }
        if t > self.clock_s {
            self.clock_s = t;
        }
        Ok(())
    }

    /// Run until no events remain (bounded simulations only).
    pub fn run_to_completion(&mut self) -> Result<()> {
        if self.horizon_s.is_none() && self.autonomous {
            return Err(Error::InvalidInput("unbounded simulation never completes".into()));
        }
        while let Some(next) = self.next_event_s() {
            self.process_instant(next)?;
        }
        Ok(())
    }

    fn process_instant(&mut self, time: f64) -> Result<()> {
        self.clock_s = time;
        let mut ended = Vec::new();
        let mut starts = Vec::new();
        while let Some(Reverse(s)) = self.queue.peek() {
            if s.time != time {
                break;
            }
            let Reverse(s) = self.queue.pop().expect("peeked");
            match s.action {
                Action::End(p) => ended.push(p),
                Action::Start { node, autonomous } => starts.push((node, autonomous)),
            }
        }

        for p in &ended {
            self.log.push(SimEvent {
                time_s: time,
                kind: EventKind::TxEnd,
                tx_id: p.tx,
                sequence_no: p.seq,
            });
        }
        self.in_flight.retain(|f| !ended.contains(f));
        for p in &ended {
            self.deliver(p)?;
        }
        self.prune_recent();

        if self.is_idle() && !self.pending.is_empty() {
            self.apply_pending()?;
        }

        for (node, autonomous) in starts {
            self.start(node, autonomous, time);
        }
        Ok(())
    }

    fn start(&mut self, node: NodeId, autonomous: bool, time: f64) {
        if let Some(busy) = self.in_flight.iter().find(|p| p.tx == node) {
            // no self-overlap: retry when the current packet ends
            let end = busy.end;
            self.push(end, node, Action::Start { node, autonomous });
            return;
        }
        let seq = {
            let s = self.next_seq.entry(node).or_insert(0);
            *s += 1;
            *s
        };
        let packet = Packet {
            tx: node,
            seq,
            start: time,
            end: time + self.scenario.packet_airtime_s,
        };
        self.log.push(SimEvent {
            time_s: time,
            kind: EventKind::TxStart,
            tx_id: node,
            sequence_no: seq,
        });
        *self.stats.sent.entry(node).or_insert(0) += 1;
        self.in_flight.push(packet);
        self.recent.push(packet);
        self.push(packet.end, node, Action::End(packet));

        if autonomous {
            let next = (time + self.draw_interval(node)).max(packet.end);
            self.schedule_start(node, next, true);
        }
    }

    fn prune_recent(&mut self) {
        let horizon = self.in_flight.iter().map(|p| p.start).fold(f64::INFINITY, f64::min);
        self.recent.retain(|p| p.end > horizon);
    }

    fn deliver(&mut self, packet: &Packet) -> Result<()> {
        let overlapping: Vec<Packet> = self
            .recent
            .iter()
            .copied()
            .filter(|q| q.start < packet.end && q.end > packet.start)
            .collect();
        let receivers: Vec<NodeId> = self
            .scenario
            .nodes
            .iter()
            .map(|n| n.id)
            .filter(|&id| id != packet.tx)
            .collect();
        for rx in receivers {
            let outcome = resolve_packet(packet, rx, &overlapping, &self.scenario.nodes, &self.scenario.medium)?;
            self.stats
                .pairs
                .entry((packet.tx, rx))
                .or_default()
                .record(outcome.classification);
            self.log.push(SimEvent {
                time_s: packet.end,
                kind: EventKind::Delivery(outcome),
                tx_id: packet.tx,
                sequence_no: packet.seq,
            });
        }
        Ok(())
    }
}

fn node_stream(seed: u64, id: NodeId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(id.0));
    rng
}

/// Fate of `packet` at `rx` given every packet overlapping its airtime.
fn resolve_packet(
    packet: &Packet,
    rx: NodeId,
    overlapping: &[Packet],
    nodes: &[NodeState],
    params: &MediumParams,
) -> Result<DeliveryOutcome> {
    let rx_node = crate::node::find(nodes, rx).ok_or(Error::UnknownNode(rx))?;
    let tx_node = crate::node::find(nodes, packet.tx).ok_or(Error::UnknownNode(packet.tx))?;

    if overlapping.iter().any(|q| q.tx == rx) {
        return Ok(DeliveryOutcome {
            receiver_id: rx,
            classification: Classification::ReceiverBusy,
            signal_dbm: received_power_dbm(tx_node, rx_node, params)?.prx_dbm,
            strongest_interferer_dbm: None,
        });
    }

    let mut cuts: Vec<f64> = vec![packet.start, packet.end];
    for q in overlapping {
        for t in [q.start, q.end] {
            if t > packet.start && t < packet.end {
                cuts.push(t);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut merged: Option<DeliveryOutcome> = None;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut active: Vec<NodeId> = overlapping
            .iter()
            .filter(|q| q.start <= a && q.end >= b)
            .map(|q| q.tx)
            .collect();
        active.sort();
        let resolved = resolve_at(&active, &[rx], nodes, params)?;
        let outcome = resolved
            .iter()
            .find(|t| t.tx_id == packet.tx)
            .and_then(|t| t.outcomes.get(&rx))
            .copied()
            .expect("packet is active over its own airtime");
        merged = Some(match merged {
            None => outcome,
            Some(prev) => merge(prev, outcome),
        });
    }
    Ok(merged.expect("airtime is positive"))
}

fn merge(a: DeliveryOutcome, b: DeliveryOutcome) -> DeliveryOutcome {
    use Classification::*;
    let classification = match (a.classification, b.classification) {
        (BelowSensitivity, _) | (_, BelowSensitivity) => BelowSensitivity,
        (Received, Received) => Received,
        _ => LostInterference,
    };
    let strongest = match (a.strongest_interferer_dbm, b.strongest_interferer_dbm) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, y) => x.or(y),
    };
    DeliveryOutcome {
        receiver_id: a.receiver_id,
        classification,
        signal_dbm: a.signal_dbm,
        strongest_interferer_dbm: strongest,
    }
}
