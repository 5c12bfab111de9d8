//! Radio-medium simulation for nodes with directional antennas.
//!
//! - [`antenna`]: radiation patterns, beamwidth calibration, gain lookup
//! - [`geometry`]: positions, bearings, angle normalization
//! - [`linkbudget`]: path loss and received power, sensitivity and
//!   interference predicates
//! - [`medium`]: receive sets, concurrent-transmission resolution,
//!   connectivity, the two-ring unit-disk baseline
//! - [`engine`]: deterministic discrete-event broadcast simulation with
//!   live mutations
//! - [`scenario_io`]: scenario documents and output files

pub mod antenna;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod linkbudget;
pub mod medium;
pub mod node;
pub mod scenario_io;

pub use antenna::{calibrate_exponent, AntennaConfig, ParametricFamily, PatternFamily, GAIN_FLOOR_DB};
pub use engine::{
    run, DeliveryStats, EventKind, Mutation, MutationTicket, RunOutput, Scenario, SimEvent, Simulation, TrafficModel,
};
pub use error::{Error, Result, Violation};
pub use geometry::{bearing_deg, distance_m, normalize_deg, Position};
pub use linkbudget::{
    interferes, link_exists, path_loss_db, received_power_dbm, LinkBudgetReport, MediumParams, RadioConfig,
};
pub use medium::{
    connectivity_matrix, receive_set, resolve_concurrent, udgm_classify, Classification, ConnectivityMatrix,
    DeliveryOutcome, UdgmClass,
};
pub use node::{NodeId, NodeState};
pub use scenario_io::{emit_scenario, parse_scenario};
