#![allow(dead_code)]

use dirant_core::{AntennaConfig, NodeState, ParametricFamily, Position, RadioConfig};
use proptest::prelude::*;

pub mod invariants;

pub const PAPER_EVAL: &str = include_str!("../../examples/paper-eval.toml");

pub fn antenna_strategy() -> impl Strategy<Value = AntennaConfig> {
    let omni = (0.0f64..10.0).prop_map(AntennaConfig::omni);
    let cardioid = (-179.0f64..180.0, 0.0f64..10.0, 30.0f64..350.0)
        .prop_map(|(o, g, bw)| AntennaConfig::parametric(ParametricFamily::Cardioid, o, g, bw).unwrap());
    let dipole = (-179.0f64..180.0, 0.0f64..10.0, 20.0f64..120.0)
        .prop_map(|(o, g, bw)| AntennaConfig::parametric(ParametricFamily::Dipole, o, g, bw).unwrap());
    prop_oneof![omni, cardioid, dipole]
}

pub fn radio_strategy() -> impl Strategy<Value = RadioConfig> {
    (-5.0f64..10.0, -95.0f64..-70.0).prop_map(|(p, s)| RadioConfig {
        tx_power_dbm: p,
        sensitivity_dbm: s,
        frequency_hz: 2.4e9,
    })
}

/// Up to `max` nodes with distinct positions inside a `span`-metre square.
pub fn topology(max: usize, span: f64) -> impl Strategy<Value = Vec<NodeState>> {
    prop::collection::vec(
        (-span..span, -span..span, antenna_strategy(), radio_strategy()),
        2..=max,
    )
    .prop_map(|raw| {
        raw.into_iter()
            .enumerate()
            .map(|(i, (x, y, a, r))| NodeState::new(i as u32 + 1, Position::new(x, y), a, r))
            .collect::<Vec<_>>()
    })
    .prop_filter("distinct positions", |nodes| {
        nodes.iter().enumerate().all(|(i, a)| {
            nodes[i + 1..]
                .iter()
                .all(|b| dirant_core::distance_m(a.position, b.position) > 1e-3)
        })
    })
}
