mod common;

use std::collections::BTreeMap;

use dirant_core::medium::resolve_at;
use dirant_core::scenario_io::parse_scenario;
use dirant_core::*;
use proptest::prelude::*;

fn short_scenario(nodes: Vec<NodeState>, seed: u64, airtime: f64) -> Scenario {
    Scenario {
        nodes,
        medium: MediumParams::default(),
        traffic: TrafficModel {
            min_interval_s: 0.01,
            max_interval_s: 0.05,
        },
        packet_airtime_s: airtime,
        duration_s: 0.5,
        seed,
    }
}

/// (tx, seq) -> (start, end) recovered from the log.
fn airtimes(log: &[SimEvent]) -> BTreeMap<(NodeId, u64), (f64, Option<f64>)> {
    let mut m = BTreeMap::new();
    for e in log {
        match e.kind {
            EventKind::TxStart => {
                assert!(m.insert((e.tx_id, e.sequence_no), (e.time_s, None)).is_none());
            }
            EventKind::TxEnd => {
                let slot = m.get_mut(&(e.tx_id, e.sequence_no)).expect("end without start");
                assert!(slot.1.is_none(), "duplicate end");
                slot.1 = Some(e.time_s);
            }
            _ => {}
        }
    }
    m
}

fn strict_overlap(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 < b.1 && b.0 < a.1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn same_seed_same_log(nodes in common::topology(5, 60.0), seed in any::<u64>()) {
        let s = short_scenario(nodes, seed, 0.004);
        let a = run(&s).unwrap();
        let b = run(&s).unwrap();
        prop_assert_eq!(a.log_jsonl(), b.log_jsonl());
        prop_assert_eq!(a.stats.to_csv(), b.stats.to_csv());
    }

    #[test]
    fn airtime_is_conserved(nodes in common::topology(5, 60.0), seed in any::<u64>(), airtime in 0.001f64..0.03) {
        let s = short_scenario(nodes, seed, airtime);
        let out = run(&s).unwrap();
        let spans = airtimes(&out.log);
        let mut per_node: BTreeMap<NodeId, Vec<(f64, f64)>> = BTreeMap::new();
        for (&(tx, _), &(start, end)) in &spans {
            let end = end.expect("every start has an end");
            prop_assert_eq!(end, start + airtime);
            per_node.entry(tx).or_default().push((start, end));
        }
        for spans in per_node.values_mut() {
            spans.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in spans.windows(2) {
                prop_assert!(w[1].0 >= w[0].1, "node overlaps itself");
            }
        }
        let sent: u64 = out.stats.sent.values().sum();
        prop_assert_eq!(sent as usize, spans.len());
    }

    #[test]
    fn log_is_totally_ordered(nodes in common::topology(5, 60.0), seed in any::<u64>()) {
        let out = run(&short_scenario(nodes, seed, 0.01)).unwrap();
        for w in out.log.windows(2) {
            prop_assert!(w[0].log_cmp(&w[1]).is_le());
        }
    }

    #[test]
    fn stats_match_log(nodes in common::topology(5, 60.0), seed in any::<u64>()) {
        let out = run(&short_scenario(nodes, seed, 0.01)).unwrap();
        let mut counted: BTreeMap<(NodeId, NodeId), [u64; 4]> = BTreeMap::new();
        for e in &out.log {
            if let EventKind::Delivery(o) = &e.kind {
                let slot = counted.entry((e.tx_id, o.receiver_id)).or_default();
                let i = match o.classification {
                    Classification::Received => 0,
                    Classification::LostInterference => 1,
                    Classification::BelowSensitivity => 2,
                    Classification::ReceiverBusy => 3,
                };
                slot[i] += 1;
            }
        }
        prop_assert_eq!(counted.len(), out.stats.pairs.len());
        for (k, c) in counted {
            let p = out.stats.pairs[&k];
            prop_assert_eq!(c, [p.received, p.lost_interference, p.below_sensitivity, p.receiver_busy]);
        }
    }

    #[test]
    fn deliveries_replay_against_medium(nodes in common::topology(5, 40.0), seed in any::<u64>()) {
        let s = short_scenario(nodes, seed, 0.02);
        let out = run(&s).unwrap();
        let spans: BTreeMap<_, _> = airtimes(&out.log)
            .into_iter()
            .map(|(k, (a, b))| (k, (a, b.unwrap())))
            .collect();

        for e in &out.log {
            let EventKind::Delivery(o) = &e.kind else { continue };
            let me = spans[&(e.tx_id, e.sequence_no)];
            let others: Vec<(NodeId, (f64, f64))> = spans
                .iter()
                .filter(|(k, span)| **k != (e.tx_id, e.sequence_no) && strict_overlap(me, **span))
                .map(|(k, span)| (k.0, *span))
                .collect();

            if others.iter().any(|(tx, _)| *tx == o.receiver_id) {
                prop_assert_eq!(o.classification, Classification::ReceiverBusy);
                continue;
            }
            if others.is_empty() {
                let alone = resolve_concurrent(&[e.tx_id], &s.nodes, &s.medium).unwrap();
                let expected = alone[0].outcomes[&o.receiver_id];
                prop_assert_eq!(*o, expected);
                continue;
            }
            // sample the middle of every constant-activity stretch
            let mut cuts = vec![me.0, me.1];
            for (_, (a, b)) in &others {
                cuts.extend([*a, *b].into_iter().filter(|t| *t > me.0 && *t < me.1));
            }
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut any_below = false;
            let mut all_received = true;
            for w in cuts.windows(2) {
                let mid = (w[0] + w[1]) / 2.0;
                let mut active: Vec<NodeId> = others
                    .iter()
                    .filter(|(_, (a, b))| *a <= mid && mid < *b)
                    .map(|(tx, _)| *tx)
                    .collect();
                active.push(e.tx_id);
                active.sort();
                let r = resolve_at(&active, &[o.receiver_id], &s.nodes, &s.medium).unwrap();
                let c = r.iter().find(|t| t.tx_id == e.tx_id).unwrap().outcomes[&o.receiver_id].classification;
                any_below |= c == Classification::BelowSensitivity;
                all_received &= c == Classification::Received;
            }
            let expected = if any_below {
                Classification::BelowSensitivity
            } else if all_received {
                Classification::Received
            } else {
                Classification::LostInterference
            };
            prop_assert_eq!(o.classification, expected);
        }
    }

    #[test]
    fn one_capture_per_receiver_per_instant(nodes in common::topology(6, 30.0), seed in any::<u64>()) {
        // long packets to force overlap
        let out = run(&short_scenario(nodes, seed, 0.04)).unwrap();
        let spans: BTreeMap<_, _> = airtimes(&out.log)
            .into_iter()
            .map(|(k, (a, b))| (k, (a, b.unwrap())))
            .collect();
        let received: Vec<(NodeId, (f64, f64))> = out
            .log
            .iter()
            .filter_map(|e| match &e.kind {
                EventKind::Delivery(o) if o.classification == Classification::Received => {
                    Some((o.receiver_id, spans[&(e.tx_id, e.sequence_no)]))
                }
                _ => None,
            })
            .collect();
        for (i, (rx, a)) in received.iter().enumerate() {
            for (rx2, b) in &received[i + 1..] {
                prop_assert!(!(rx == rx2 && strict_overlap(*a, *b)), "two overlapping captures at {}", rx);
            }
        }
    }
}

#[test]
fn paper_eval_seed_changes_times_not_pattern() {
    let base = parse_scenario(common::PAPER_EVAL).unwrap();
    let a = run(&base).unwrap();
    let b = run(&Scenario {
        seed: 7,
        ..base.clone()
    })
    .unwrap();

    let starts = |o: &RunOutput| -> Vec<f64> {
        o.log
            .iter()
            .filter(|e| e.kind == EventKind::TxStart)
            .map(|e| e.time_s)
            .collect()
    };
    assert_ne!(starts(&a), starts(&b));

    let ids: Vec<NodeId> = base.nodes.iter().map(|n| n.id).collect();
    for &tx in &ids {
        for &rx in &ids {
            if tx != rx {
                assert_eq!(a.stats.received(tx, rx) > 0, b.stats.received(tx, rx) > 0, "{tx}->{rx}");
            }
        }
    }
}

#[test]
fn deferred_mutation_lands_after_airtime() {
    let s = parse_scenario(common::PAPER_EVAL).unwrap();
    let mut sim = Simulation::without_traffic(s).unwrap();
    sim.inject_broadcast(NodeId(1), 1.0).unwrap();
    sim.advance_to(1.002).unwrap();
    assert!(!sim.is_idle());

    let ticket = sim.submit(vec![Mutation::SetOrientation(NodeId(2), -120.0)]).unwrap();
    match ticket {
        MutationTicket::Deferred { earliest_s } => assert_eq!(earliest_s, 1.0 + 0.004),
        other => panic!("expected deferral, got {other:?}"),
    }
    assert_eq!(sim.version(), 0);

    sim.run_to_completion().unwrap();
    assert_eq!(sim.version(), 1);
    let kinds: Vec<&str> = sim.log().iter().map(|e| e.kind.name()).collect();
    let end = kinds.iter().position(|k| *k == "tx_end").unwrap();
    let applied = kinds.iter().position(|k| *k == "mutation").unwrap();
    assert!(applied > end);
    assert_eq!(kinds.iter().filter(|k| **k == "mutation").count(), 1);
}
