//! Live HTTP interface over a running simulation.
//!
//! | method | path | |
//! |---|---|---|
//! | GET | `/state` | nodes, medium, clock, version |
//! | PATCH | `/nodes/{id}` | partial node update, applied as one batch |
//! | GET | `/connectivity` | directed link matrix |
//! | GET | `/nodes/{id}/pattern?step=DEG` | world-frame gain samples |
//! | POST | `/control` | `{"action": "start" \| "pause" \| "step", "seconds"}` |
//! | POST | `/whatif` | `{"tx_id"}`: who would hear a broadcast now |
//! | GET | `/events` | server-sent `{version, time_s, payload}` frames |
//!
//! The simulation starts paused. A PATCH that arrives while a packet is on
//! air is queued and answered with 409 and the time it is expected to apply.

mod driver;
pub mod wire;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use dirant_core::scenario_io::NodeDoc;
use dirant_core::{
    connectivity_matrix, interferes, link_exists, receive_set, received_power_dbm, MutationTicket, NodeId, Scenario,
    Simulation, Violation,
};
use futures::Stream;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use tokio::net::TcpListener;
use tokio::sync::{broadcast, mpsc, oneshot, watch};

use driver::{Command, Driver, PatchError, Snapshot};
use wire::*;

const FRAME_BUFFER: usize = 1 << 16;

#[derive(Clone)]
struct AppState {
    commands: mpsc::Sender<Command>,
    snapshots: watch::Receiver<Arc<Snapshot>>,
    frames: broadcast::Sender<Arc<str>>,
}

impl AppState {
    fn current(&self) -> Arc<Snapshot> {
        self.snapshots.borrow().clone()
    }

    async fn send(&self, cmd: Command) -> Result<(), ApiError> {
        self.commands.send(cmd).await.map_err(|_| ApiError::EngineGone)
    }
}

#[derive(Debug)]
enum ApiError {
    NotFound(NodeId),
    BadRequest(String),
    Invalid(Vec<Violation>),
    EngineGone,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, errors) = match self {
            ApiError::NotFound(id) => (
                StatusCode::NOT_FOUND,
                vec![ViolationBody {
                    path: "id".into(),
                    message: format!("no node {id}"),
                }],
            ),
            ApiError::BadRequest(msg) => (
                StatusCode::BAD_REQUEST,
                vec![ViolationBody {
                    path: String::new(),
                    message: msg,
                }],
            ),
            ApiError::Invalid(v) => (StatusCode::UNPROCESSABLE_ENTITY, v.iter().map(Into::into).collect()),
            ApiError::EngineGone => (
                StatusCode::SERVICE_UNAVAILABLE,
                vec![ViolationBody {
                    path: String::new(),
                    message: "engine stopped".into(),
                }],
            ),
        };
        (status, Json(serde_json::json!({ "errors": errors }))).into_response()
    }
}

/// Parse a JSON body: malformed text is 400, a well-formed body of the
/// wrong shape is 422.
fn body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| {
        use serde_json::error::Category;
        match e.classify() {
            Category::Data => ApiError::Invalid(vec![Violation::new("", e.to_string())]),
            _ => ApiError::BadRequest(e.to_string()),
        }
    })
}

/// Build the router and spawn the engine task. Must be called inside a
/// tokio runtime.
pub fn app(scenario: Scenario) -> dirant_core::Result<Router> {
    let sim = Simulation::new(scenario)?.unbounded();
    let (frames, _) = broadcast::channel(FRAME_BUFFER);
    let (commands, rx) = mpsc::channel(64);

    let (snap_tx, snapshots) = watch::channel(Arc::new(Snapshot {
        version: 0,
        clock_s: 0.0,
        running: false,
        pending_batches: 0,
        medium: sim.scenario().medium,
        nodes: sim.nodes().to_vec(),
    }));
    let driver = Driver::new(sim, snap_tx, frames.clone());
    tokio::spawn(driver.run(rx));

    let state = AppState {
        commands,
        snapshots,
        frames,
    };
    Ok(Router::new()
        .route("/state", get(get_state))
        .route("/nodes/{id}", axum::routing::patch(patch_node))
        .route("/nodes/{id}/pattern", get(get_pattern))
        .route("/connectivity", get(get_connectivity))
        .route("/control", post(post_control))
        .route("/whatif", post(post_whatif))
        .route("/events", get(get_events))
        .with_state(state))
}

/// Serve `scenario` on an already bound listener until the process exits.
pub async fn serve_on(listener: TcpListener, scenario: Scenario) -> std::io::Result<()> {
    let router = app(scenario).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e.to_string()))?;
    axum::serve(listener, router).await
}

pub async fn serve(scenario: Scenario, addr: SocketAddr) -> std::io::Result<()> {
    serve_on(TcpListener::bind(addr).await?, scenario).await
}

fn api_state(s: &Snapshot) -> ApiState {
    ApiState {
        version: s.version,
        clock_s: s.clock_s,
        running: s.running,
        pending_batches: s.pending_batches,
        medium: medium_doc(&s.medium),
        nodes: s.nodes.iter().map(NodeDoc::from_state).collect(),
    }
}

async fn get_state(State(app): State<AppState>) -> Json<ApiState> {
    Json(api_state(&app.current()))
}

async fn patch_node(State(app): State<AppState>, Path(id): Path<u32>, bytes: Bytes) -> Result<Response, ApiError> {
    let patch: NodePatch = body(&bytes)?;
    let (reply, rx) = oneshot::channel();
    app.send(Command::Patch {
        id: NodeId(id),
        patch,
        reply,
    })
    .await?;
    match rx.await.map_err(|_| ApiError::EngineGone)? {
        Ok(MutationTicket::Applied { version, time_s }) => {
            Ok((StatusCode::OK, Json(PatchAccepted { version, time_s })).into_response())
        }
        Ok(MutationTicket::Deferred { earliest_s }) => Ok((
            StatusCode::CONFLICT,
            Json(PatchDeferred {
                status: "deferred",
                version: app.current().version,
                apply_at_s: earliest_s,
            }),
        )
            .into_response()),
        Err(PatchError::UnknownNode(id)) => Err(ApiError::NotFound(id)),
        Err(PatchError::Invalid(v)) => Err(ApiError::Invalid(v)),
    }
}

#[derive(Deserialize)]
struct PatternQuery {
    step: Option<f64>,
}

async fn get_pattern(
    State(app): State<AppState>,
    Path(id): Path<u32>,
    Query(q): Query<PatternQuery>,
) -> Result<Json<Pattern>, ApiError> {
    let snap = app.current();
    let node = snap
        .nodes
        .iter()
        .find(|n| n.id == NodeId(id))
        .ok_or(ApiError::NotFound(NodeId(id)))?;
    let samples = node
        .antenna
        .sample_pattern(q.step.unwrap_or(5.0))
        .map_err(|e| ApiError::Invalid(vec![Violation::new("step", e.to_string())]))?;
    Ok(Json(Pattern {
        version: snap.version,
        node_id: node.id,
        orientation_deg: node.antenna.orientation_deg,
        peak_gain_dbi: node.antenna.peak_gain_dbi,
        samples: samples
            .into_iter()
            .map(|(angle_deg, gain_dbi)| PatternSample { angle_deg, gain_dbi })
            .collect(),
    }))
}

async fn get_connectivity(State(app): State<AppState>) -> Result<Json<Connectivity>, ApiError> {
    let snap = app.current();
    let m = connectivity_matrix(&snap.nodes, &snap.medium)
        .map_err(|e| ApiError::Invalid(vec![Violation::new("", e.to_string())]))?;
    Ok(Json(Connectivity {
        version: snap.version,
        ids: m.ids,
        links: m.links,
    }))
}

async fn post_control(State(app): State<AppState>, bytes: Bytes) -> Result<Json<ApiState>, ApiError> {
    let control: Control = body(&bytes)?;
    let (reply, rx) = oneshot::channel();
    app.send(Command::Control { control, reply }).await?;
    rx.await
        .map_err(|_| ApiError::EngineGone)?
        .map_err(|e| ApiError::Invalid(vec![Violation::new("seconds", e.to_string())]))?;
    Ok(Json(api_state(&app.current())))
}

async fn post_whatif(State(app): State<AppState>, bytes: Bytes) -> Result<Json<WhatIf>, ApiError> {
    let req: WhatIfRequest = body(&bytes)?;
    let snap = app.current();
    let tx_id = NodeId(req.tx_id);
    let tx = snap
        .nodes
        .iter()
        .find(|n| n.id == tx_id)
        .ok_or(ApiError::NotFound(tx_id))?;
    let internal = |e: dirant_core::Error| ApiError::Invalid(vec![Violation::new("", e.to_string())]);

    let (receivers, interfered) = receive_set(tx_id, &snap.nodes, &snap.medium).map_err(internal)?;
    let mut reports = Vec::new();
    for rx in snap.nodes.iter().filter(|n| n.id != tx_id) {
        reports.push(WhatIfReport {
            rx_id: rx.id,
            budget: received_power_dbm(tx, rx, &snap.medium).map_err(internal)?,
            link: link_exists(tx, rx, &snap.medium).map_err(internal)?,
            interferes: interferes(tx, rx, &snap.medium).map_err(internal)?,
        });
    }
    Ok(Json(WhatIf {
        version: snap.version,
        tx_id,
        receivers: receivers.into_iter().collect(),
        interfered: interfered.into_iter().collect(),
        reports,
    }))
}

async fn get_events(State(app): State<AppState>) -> Sse<impl Stream<Item = Result<Event, std::convert::Infallible>>> {
    let rx = app.frames.subscribe();
    let stream = futures::stream::unfold(rx, |mut rx| async move {
        let event = match rx.recv().await {
            Ok(frame) => Event::default().data(&*frame),
            Err(broadcast::error::RecvError::Lagged(n)) => Event::default().event("lagged").data(n.to_string()),
            Err(broadcast::error::RecvError::Closed) => return None,
        };
        Some((Ok(event), rx))
    });
    Sse::new(stream).keep_alive(KeepAlive::default())
}
