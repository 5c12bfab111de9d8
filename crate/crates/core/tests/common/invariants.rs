//! Randomized invariant checks, each a plain function so that both the
//! property tests and the acceptance run can drive them.

use std::collections::BTreeSet;

use dirant_core::antenna::HALF_POWER_DB;
use dirant_core::*;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use super::{antenna_strategy, radio_strategy, topology};

pub const CASES: u32 = 256;

type Check = Result<(), TestCaseError>;

fn run<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Check) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn pattern_strategy() -> impl Strategy<Value = PatternFamily> {
    prop_oneof![
        Just(PatternFamily::Omni),
        (0.0f64..20.0).prop_map(|k| PatternFamily::Cardioid { exponent: k }),
        (1.0f64..20.0).prop_map(|k| PatternFamily::Dipole { exponent: k }),
    ]
}

pub fn antenna_peak_at_boresight() -> Result<(), String> {
    let steps = prop::sample::select(vec![1.0, 2.0, 5.0, 7.5, 15.0]);
    run((antenna_strategy(), steps), |(a, step)| {
        let best = a
            .sample_pattern(step)
            .unwrap()
            .into_iter()
            .map(|(_, g)| g)
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(best <= a.peak_gain_dbi + 1e-9);
        let at_boresight = a.gain_dbi(a.orientation_deg).unwrap();
        prop_assert!((at_boresight - a.peak_gain_dbi).abs() < 1e-9);
        Ok(())
    })
}

pub fn antenna_symmetry_and_floor() -> Result<(), String> {
    run((pattern_strategy(), -180.0f64..=180.0), |(p, theta)| {
        let g = p.relative_gain_db(theta).unwrap();
        prop_assert!((GAIN_FLOOR_DB..=0.0).contains(&g));
        let mirrored = p.relative_gain_db(-theta).unwrap();
        prop_assert!((g - mirrored).abs() < 1e-12, "{} vs {}", g, mirrored);
        Ok(())
    })
}

pub fn antenna_main_lobe_monotone() -> Result<(), String> {
    run((0.1f64..20.0, 0.0f64..180.0, 0.0f64..180.0), |(k, a, b)| {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let c = PatternFamily::Cardioid { exponent: k };
        prop_assert!(c.relative_gain_db(lo).unwrap() >= c.relative_gain_db(hi).unwrap());
        let d = PatternFamily::Dipole { exponent: k.max(1.0) };
        let (lo, hi) = (lo / 2.0, hi / 2.0);
        prop_assert!(d.relative_gain_db(lo).unwrap() >= d.relative_gain_db(hi).unwrap());
        Ok(())
    })
}

/// Residual at the calibrated half-power angle stays under 1e-6 dB.
pub fn calibration_round_trip() -> Result<(), String> {
    run((1.0f64..359.0, any::<bool>()), |(hpbw, dipole)| {
        let family = if dipole {
            ParametricFamily::Dipole
        } else {
            ParametricFamily::Cardioid
        };
        match calibrate_exponent(family, hpbw) {
            Ok(k) => {
                let g = family.with_exponent(k).relative_gain_db(hpbw / 2.0).unwrap();
                prop_assert!((g - HALF_POWER_DB).abs() < 1e-6);
            }
            Err(Error::UnachievableBeamwidth { .. }) => prop_assert!(dipole && hpbw > 120.0),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
        Ok(())
    })
}

pub fn link_reciprocity() -> Result<(), String> {
    run((topology(2, 500.0), -5.0f64..10.0), |(nodes, p)| {
        let (mut a, mut b) = (nodes[0].clone(), nodes[1].clone());
        a.radio.tx_power_dbm = p;
        b.radio.tx_power_dbm = p;
        let params = MediumParams::default();
        let ab = received_power_dbm(&a, &b, &params).unwrap();
        let ba = received_power_dbm(&b, &a, &params).unwrap();
        prop_assert_eq!(ab.prx_dbm, ba.prx_dbm);
        prop_assert!(ab.identity_holds() && ba.identity_holds());
        Ok(())
    })
}

pub fn link_monotone_in_distance() -> Result<(), String> {
    let inputs = (
        (antenna_strategy(), antenna_strategy(), radio_strategy()),
        (-180.0f64..180.0, 1.0001f64..1e4, 1.0001f64..1e4, 1.0f64..6.0),
    );
    run(inputs, |((ta, ra, radio), (bearing, d1, d2, n))| {
        prop_assume!((d1 - d2).abs() > 1e-3);
        let params = MediumParams {
            path_loss_exponent: n,
            ..Default::default()
        };
        let at = |d: f64| NodeState::new(2, Position::new(d, 0.0).rotated(bearing), ra.clone(), radio);
        let tx = NodeState::new(1, Position::new(0.0, 0.0), ta.clone(), radio);
        let near = received_power_dbm(&tx, &at(d1.min(d2)), &params).unwrap();
        let far = received_power_dbm(&tx, &at(d1.max(d2)), &params).unwrap();
        // the two receivers see the transmitter along (nearly) the same bearing
        let gain_drift = (near.gtx_dbi + near.grx_dbi) - (far.gtx_dbi + far.grx_dbi);
        prop_assert!(far.pl_db > near.pl_db);
        prop_assert!(near.prx_dbm - far.prx_dbm > -gain_drift.abs() - 1e-9);
        if gain_drift.abs() < 1e-9 {
            prop_assert!(far.prx_dbm < near.prx_dbm);
        }
        Ok(())
    })
}

pub fn gain_superposition() -> Result<(), String> {
    run(
        (topology(2, 500.0), -20.0f64..20.0, any::<bool>()),
        |(nodes, delta, on_tx)| {
            let params = MediumParams::default();
            let base = received_power_dbm(&nodes[0], &nodes[1], &params).unwrap();
            let (mut tx, mut rx) = (nodes[0].clone(), nodes[1].clone());
            if on_tx {
                tx.antenna.peak_gain_dbi += delta
            } else {
                rx.antenna.peak_gain_dbi += delta
            }
            let bumped = received_power_dbm(&tx, &rx, &params).unwrap();
            prop_assert!((bumped.prx_dbm - base.prx_dbm - delta).abs() < 1e-9);
            Ok(())
        },
    )
}

pub fn receive_set_matches_pair_loop() -> Result<(), String> {
    run(topology(50, 800.0), |nodes| {
        let params = MediumParams::default();
        for tx in &nodes {
            let (recv, intf) = receive_set(tx.id, &nodes, &params).unwrap();
            prop_assert!(recv.is_disjoint(&intf));
            let mut naive_recv = BTreeSet::new();
            let mut naive_intf = BTreeSet::new();
            for rx in nodes.iter().filter(|n| n.id != tx.id) {
                if link_exists(tx, rx, &params).unwrap() {
                    naive_recv.insert(rx.id);
                } else if interferes(tx, rx, &params).unwrap() {
                    naive_intf.insert(rx.id);
                }
            }
            prop_assert_eq!(recv, naive_recv);
            prop_assert_eq!(intf, naive_intf);
        }
        Ok(())
    })
}

pub fn at_most_one_capture_per_receiver() -> Result<(), String> {
    let inputs = (
        topology(12, 150.0),
        prop::collection::vec(any::<bool>(), 12),
        prop::sample::select(vec![0.0, 0.5, 3.0, 10.0]),
    );
    run(inputs, |(nodes, picks, capture)| {
        let params = MediumParams {
            capture_threshold_db: capture,
            ..Default::default()
        };
        let active = pick(&nodes, &picks);
        prop_assume!(!active.is_empty() && active.len() < nodes.len());
        let out = resolve_concurrent(&active, &nodes, &params).unwrap();
        for rx in nodes.iter().filter(|n| !active.contains(&n.id)) {
            let received = out
                .iter()
                .filter(|t| t.outcomes[&rx.id].classification == Classification::Received)
                .count();
            prop_assert!(received <= 1);
            for t in &out {
                let o = t.outcomes[&rx.id];
                if o.classification == Classification::Received {
                    prop_assert!(o.signal_dbm > rx.radio.sensitivity_dbm);
                }
            }
        }
        Ok(())
    })
}

/// Rigidly rotating the whole layout, antennas included, changes no
/// classification. Cases within 0.5 dB of any threshold are skipped.
pub fn classifications_rotation_equivariant() -> Result<(), String> {
    let inputs = (
        topology(10, 300.0),
        prop::collection::vec(any::<bool>(), 10),
        -180.0f64..180.0,
    );
    run(inputs, |(nodes, picks, angle)| {
        let params = MediumParams::default();
        let active = pick(&nodes, &picks);
        prop_assume!(!active.is_empty() && active.len() < nodes.len());
        prop_assume!(margins_ok(&nodes, &active, &params, 0.5));

        let rotated: Vec<NodeState> = nodes
            .iter()
            .map(|n| {
                let mut r = n.clone();
                r.position = n.position.rotated(angle);
                r.antenna = n.antenna.clone().facing(n.antenna.orientation_deg + angle).unwrap();
                r
            })
            .collect();

        let a = resolve_concurrent(&active, &nodes, &params).unwrap();
        let b = resolve_concurrent(&active, &rotated, &params).unwrap();
        for (ta, tb) in a.iter().zip(&b) {
            for (rx, oa) in &ta.outcomes {
                prop_assert_eq!(oa.classification, tb.outcomes[rx].classification);
            }
        }
        for tx in &nodes {
            prop_assert_eq!(
                receive_set(tx.id, &nodes, &params).unwrap(),
                receive_set(tx.id, &rotated, &params).unwrap()
            );
        }
        Ok(())
    })
}

pub fn udgm_matches_brute_force() -> Result<(), String> {
    run(
        (0.0f64..200.0, 1.0f64..100.0, 0.0f64..100.0, 0u8..3),
        |(d, tx_range, extra, snap)| {
            let ir = tx_range + extra;
            // land exactly on a ring boundary a third of the time
            let d = match snap {
                0 => tx_range,
                1 => ir,
                _ => d,
            };
            let a = NodeState::new(
                1,
                Position::new(0.0, 0.0),
                AntennaConfig::omni(0.0),
                RadioConfig::default(),
            );
            let b = NodeState::new(
                2,
                Position::new(d, 0.0),
                AntennaConfig::omni(0.0),
                RadioConfig::default(),
            );
            let c = udgm_classify(&a, &b, tx_range, ir).unwrap();
            let expected = if d <= tx_range {
                UdgmClass::InRange
            } else if d <= ir {
                UdgmClass::InterferenceOnly
            } else {
                UdgmClass::Oblivious
            };
            prop_assert_eq!(c, expected);
            // growing both rings never demotes a pair
            let wider = udgm_classify(&a, &b, tx_range + 1.0, ir + 1.0).unwrap();
            prop_assert!(rank(wider) <= rank(c));
            Ok(())
        },
    )
}

pub fn scenario_round_trip() -> Result<(), String> {
    run(
        (topology(8, 1000.0), 0u64..(i64::MAX as u64), 0.1f64..1e4),
        |(nodes, seed, dur)| {
            let s = Scenario {
                nodes,
                medium: MediumParams::default(),
                traffic: TrafficModel::default(),
                packet_airtime_s: 0.004,
                duration_s: dur,
                seed,
            };
            let text = emit_scenario(&s).unwrap();
            prop_assert_eq!(parse_scenario(&text).unwrap(), s);
            Ok(())
        },
    )
}

fn pick(nodes: &[NodeState], picks: &[bool]) -> Vec<NodeId> {
    nodes.iter().zip(picks).filter(|(_, &p)| p).map(|(n, _)| n.id).collect()
}

fn rank(c: UdgmClass) -> u8 {
    match c {
        UdgmClass::InRange => 0,
        UdgmClass::InterferenceOnly => 1,
        UdgmClass::Oblivious => 2,
    }
}

/// Every power is at least `margin` dB away from every threshold it meets.
fn margins_ok(nodes: &[NodeState], active: &[NodeId], params: &MediumParams, margin: f64) -> bool {
    let find = |id: NodeId| nodes.iter().find(|n| n.id == id).unwrap();
    for tx in nodes {
        for rx in nodes.iter().filter(|n| n.id != tx.id) {
            let p = received_power_dbm(tx, rx, params).unwrap().prx_dbm;
            if (p - rx.radio.sensitivity_dbm).abs() < margin || (p - params.interference_threshold_dbm).abs() < margin {
                return false;
            }
        }
    }
    for rx in nodes.iter().filter(|n| !active.contains(&n.id)) {
        let powers: Vec<f64> = active
            .iter()
            .map(|&t| received_power_dbm(find(t), rx, params).unwrap().prx_dbm)
            .collect();
        for (i, &s) in powers.iter().enumerate() {
            let sum: f64 = powers
                .iter()
                .enumerate()
                .filter(|&(j, &p)| j != i && (p > params.interference_threshold_dbm || p > rx.radio.sensitivity_dbm))
                .map(|(_, &p)| 10f64.powf(p / 10.0))
                .sum();
            if sum > 0.0 && (s - 10.0 * sum.log10() - params.capture_threshold_db).abs() < margin {
                return false;
            }
        }
    }
    true
}
