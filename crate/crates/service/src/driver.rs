//! The task that owns the simulation. Handlers talk to it over a command
//! channel; it publishes immutable snapshots and event frames after every
//! step.

use std::sync::Arc;
use std::time::Duration;

use dirant_core::{Error, EventKind, MediumParams, MutationTicket, NodeId, NodeState, Simulation};
use tokio::sync::{broadcast, mpsc, oneshot, watch};
use tokio::time::MissedTickBehavior;

use crate::wire::{Control, Frame, NodePatch};

/// Wall-clock period of the run loop; simulated time advances by the same
/// amount each tick.
const TICK: Duration = Duration::from_millis(20);

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub version: u64,
    pub clock_s: f64,
    pub running: bool,
    pub pending_batches: usize,
    pub medium: MediumParams,
    pub nodes: Vec<NodeState>,
}

pub enum PatchError {
    UnknownNode(NodeId),
    Invalid(Vec<dirant_core::Violation>),
}

pub enum Command {
    Patch {
        id: NodeId,
        patch: NodePatch,
        reply: oneshot::Sender<Result<MutationTicket, PatchError>>,
    },
    Control {
        control: Control,
        reply: oneshot::Sender<Result<(), Error>>,
    },
}

pub struct Driver {
    sim: Simulation,
    running: bool,
    published: usize,
    stream_version: u64,
    snapshots: watch::Sender<Arc<Snapshot>>,
    frames: broadcast::Sender<Arc<str>>,
}

impl Driver {
    pub fn new(sim: Simulation, snapshots: watch::Sender<Arc<Snapshot>>, frames: broadcast::Sender<Arc<str>>) -> Self {
        Self {
            sim,
            running: false,
            published: 0,
            stream_version: 0,
            snapshots,
            frames,
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            version: self.sim.version(),
            clock_s: self.sim.clock_s(),
            running: self.running,
            pending_batches: self.sim.pending_mutations(),
            medium: self.sim.scenario().medium,
            nodes: self.sim.nodes().to_vec(),
        }
    }

    pub async fn run(mut self, mut commands: mpsc::Receiver<Command>) {
        let mut ticker = tokio::time::interval(TICK);
        ticker.set_missed_tick_behavior(MissedTickBehavior::Skip);
        loop {
            tokio::select! {
                cmd = commands.recv() => match cmd {
                    Some(cmd) => self.handle(cmd),
                    None => break,
                },
                _ = ticker.tick(), if self.running => {
                    let to = self.sim.clock_s() + TICK.as_secs_f64();
                    if let Err(e) = self.sim.advance_to(to) {
                        eprintln!("engine stopped: {e}");
                        self.running = false;
                    }
                    self.publish();
                }
            }
        }
    }

    fn handle(&mut self, cmd: Command) {
        match cmd {
            Command::Patch { id, patch, reply } => {
                let result = self.patch(id, &patch);
                self.publish();
                let _ = reply.send(result);
            }
            Command::Control { control, reply } => {
                let result = self.control(control);
                self.publish();
                let _ = reply.send(result);
            }
        }
    }

    fn patch(&mut self, id: NodeId, patch: &NodePatch) -> Result<MutationTicket, PatchError> {
        let (index, node) = self
            .sim
            .nodes()
            .iter()
            .enumerate()
            .find(|(_, n)| n.id == id)
            .ok_or(PatchError::UnknownNode(id))?;
        let batch = patch.to_mutations(node).map_err(PatchError::Invalid)?;
        let prefix = format!("nodes[{index}].");
        self.sim.submit(batch).map_err(|e| match e {
            Error::UnknownNode(id) => PatchError::UnknownNode(id),
            Error::Validation(mut v) => {
                for x in &mut v {
                    if let Some(rest) = x.path.strip_prefix(&prefix) {
                        x.path = rest.to_string();
                    }
                }
                PatchError::Invalid(v)
            }
            other => PatchError::Invalid(vec![dirant_core::Violation::new("", other.to_string())]),
        })
    }

    fn control(&mut self, control: Control) -> Result<(), Error> {
        match control {
            Control::Start => self.running = true,
            Control::Pause => self.running = false,
            Control::Step { seconds } => {
                if !seconds.is_finite() || seconds <= 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "step must be finite and > 0, got {seconds}"
                    )));
                }
                let to = self.sim.clock_s() + seconds;
                self.sim.advance_to(to)?;
            }
        }
        Ok(())
    }

    /// Push new log entries as frames, then the new snapshot. Frames go out
    /// first so a client reacting to a snapshot has already been sent
    /// everything that led to it.
    fn publish(&mut self) {
        for event in &self.sim.log()[self.published..] {
            if let EventKind::Mutation { version, .. } = event.kind {
                self.stream_version = version;
            }
            let payload = serde_json::from_str(&event.to_record()).expect("log records are JSON");
            let frame = Frame {
                version: self.stream_version,
                time_s: event.time_s,
                payload,
            };
            let text = serde_json::to_string(&frame).expect("frames serialize");
            // no subscribers is fine
            let _ = self.frames.send(text.into());
        }
        self.published = self.sim.log().len();
        let _ = self.snapshots.send(Arc::new(self.snapshot()));
    }
}
