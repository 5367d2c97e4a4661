use std::collections::HashMap;

use gapsim_core::gap::gap_schedule_with_stats;
use gapsim_core::sim::peak_occupancy;
use gapsim_core::workload::{DeadlineModel, SubmitModel};
use gapsim_core::*;
use proptest::prelude::*;

fn instance_strategy(max_tasks: usize, max_nodes: usize) -> impl Strategy<Value = Instance> {
    (
        1..=max_tasks,
        1..=max_nodes,
        prop_oneof![Just(0.0), 0.5..10.0f64],
        0.5..2.0f64,
        1u32..=8,
        any::<u64>(),
    )
        .prop_map(|(n_tasks, n_vms, horizon, slack_lo, npe_hi, seed)| {
            let spec = WorkloadSpec {
                n_tasks,
                n_vms,
                submit_model: if horizon > 0.0 {
                    SubmitModel::Uniform { horizon }
                } else {
                    SubmitModel::AllZero
                },
                deadline_model: DeadlineModel {
                    base: 0.0,
                    slack: (slack_lo, slack_lo + 2.5),
                },
                task_npe_range: (1, npe_hi),
                seed,
                ..WorkloadSpec::default()
            };
            let (tasks, nodes) = generate(&spec);
            Instance::new(tasks, nodes)
        })
}

fn faulty(lambda0: f64) -> FaultModel {
    FaultModel {
        lambda0,
        ..FaultModel::default()
    }
}

fn gap(inst: &Instance) -> Schedule {
    gap_schedule(
        &inst.tasks,
        &inst.nodes,
        &inst.dvfs,
        &inst.fault_model,
        &GapConfig::default(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn planned_entries_meet_deadlines(inst in instance_strategy(50, 6)) {
        let deadlines: HashMap<_, _> = inst.tasks.iter().map(|t| (t.id, t.deadline)).collect();
        for s in [gap(&inst), wgap_schedule(&inst.tasks, &inst.nodes, &inst.fault_model, &GapConfig::default())] {
            for e in &s.entries {
                prop_assert!(e.completion <= deadlines[&e.task_id]);
            }
            prop_assert_eq!(s.entries.len() + s.failed.len(), inst.tasks.len());
            for id in &s.failed {
                prop_assert!(!s.assignment.contains_key(id));
            }
            prop_assert!(s.cb == s.failed.len());
        }
    }

    #[test]
    fn runtime_backups_avoid_the_primary_node(inst in instance_strategy(30, 5), seed in any::<u64>()) {
        let fm = faulty(1e-3);
        let s = gap(&inst);
        let (trace, _) = run(&s, &inst, &fm, &mut FaultSampler::new(seed), &SimConfig::default()).unwrap();
        let primary: HashMap<_, _> = trace
            .executions
            .iter()
            .filter(|x| x.entry.phase == Phase::Primary)
            .map(|x| (x.entry.task_id, x.entry.node_id))
            .collect();
        for x in trace.executions.iter().filter(|x| x.entry.phase == Phase::Backup) {
            prop_assert_ne!(primary.get(&x.entry.task_id), Some(&x.entry.node_id));
        }
        for (id, status) in &trace.status {
            if *status == TaskStatus::CompletedViaBackup {
                prop_assert!(trace.faults.iter().any(|f| f.task_id == *id));
            }
        }
    }

    #[test]
    fn node_capacity_holds_under_faults(inst in instance_strategy(40, 4), seed in any::<u64>()) {
        let fm = faulty(1e-3);
        let slots: HashMap<_, _> = inst.nodes.iter().map(|n| (n.id, n.npe_slots)).collect();
        for s in [gap(&inst), fcfs_schedule(&inst.tasks, &inst.nodes), rr_schedule(&inst.tasks, &inst.nodes)] {
            let (trace, _) = run(&s, &inst, &fm, &mut FaultSampler::new(seed), &SimConfig::default()).unwrap();
            for (node, peak) in peak_occupancy(&trace) {
                prop_assert!(peak <= slots[&node]);
            }
        }
    }

    #[test]
    fn fault_free_runs_follow_the_plan(inst in instance_strategy(40, 6)) {
        let s = gap(&inst);
        let (trace, report) = run(&s, &inst, &FaultModel::fault_free(), &mut FaultSampler::new(1), &SimConfig::default()).unwrap();
        prop_assert!(trace.faults.is_empty());
        prop_assert_eq!(trace.backups_dispatched, 0);
        let cts = trace.completion_times();
        for e in &s.entries {
            prop_assert_eq!(cts[&e.task_id], e.completion);
        }
        if s.failed.is_empty() {
            prop_assert_eq!(report.reliability_estimate, 1.0);
        }
    }

    #[test]
    fn reported_energy_matches_resum(inst in instance_strategy(40, 6), seed in any::<u64>()) {
        let fm = faulty(1e-3);
        let s = gap(&inst);
        let (trace, report) = run(&s, &inst, &fm, &mut FaultSampler::new(seed), &SimConfig::default()).unwrap();
        let by_id: HashMap<_, _> = inst.nodes.iter().map(|n| (n.id, n)).collect();
        let resum: f64 = trace
            .executions
            .iter()
            .map(|x| {
                let n = by_id[&x.entry.node_id];
                let p = n.activity * n.load_cap * (x.entry.rho * n.v_max).powi(2) * x.entry.rho * n.f_max;
                (p + n.static_power) * x.entry.exec_time
            })
            .sum();
        prop_assert!((resum - report.total_energy).abs() <= 1e-9 * resum.max(1e-300));
    }

    #[test]
    fn task_order_does_not_matter(inst in instance_strategy(30, 5), seed in any::<u64>()) {
        let fm = faulty(1e-3);
        let mut shuffled = inst.clone();
        shuffled.tasks.reverse();
        shuffled.tasks.rotate_left(inst.tasks.len() / 3);
        let go = |i: &Instance| {
            let s = gap(i);
            run(&s, i, &fm, &mut FaultSampler::new(seed), &SimConfig::default()).unwrap().1
        };
        prop_assert_eq!(go(&inst), go(&shuffled));
    }

    #[test]
    fn one_construction_per_level_and_bounded_work(inst in instance_strategy(50, 6)) {
        let (_, stats) = gap_schedule_with_stats(&inst.tasks, &inst.nodes, &inst.dvfs, &GapConfig::default());
        prop_assert_eq!(stats.constructions, inst.dvfs.levels.len());
        let bound = 2 * inst.tasks.len() * inst.nodes.len();
        for &e in &stats.evaluations {
            prop_assert!(e <= bound);
        }
    }

    #[test]
    fn dvfs_never_loses_to_full_speed(inst in instance_strategy(40, 6)) {
        let g = gap(&inst);
        let w = wgap_schedule(&inst.tasks, &inst.nodes, &inst.fault_model, &GapConfig::default());
        prop_assert!(g.failed.len() <= w.failed.len());
        if g.failed.len() == w.failed.len() && g.cp == w.cp {
            let e = |s: &Schedule| gapsim_core::gap::planned_energy(&inst.nodes, s);
            prop_assert!(e(&g) <= e(&w));
        }
    }

    #[test]
    fn runs_replay_exactly(inst in instance_strategy(30, 5), seed in any::<u64>()) {
        let fm = faulty(1e-3);
        let s = gap(&inst);
        let a = run(&s, &inst, &fm, &mut FaultSampler::new(seed), &SimConfig::default()).unwrap();
        let b = run(&s, &inst, &fm, &mut FaultSampler::new(seed), &SimConfig::default()).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn backups_grow_with_the_fault_rate() {
    let spec = WorkloadSpec {
        n_tasks: 40,
        n_vms: 5,
        submit_model: SubmitModel::Uniform { horizon: 10.0 },
        seed: 77,
        ..WorkloadSpec::default()
    };
    let (tasks, nodes) = generate(&spec);
    let inst = Instance::new(tasks, nodes);
    let s = gap(&inst);
    let mut means = Vec::new();
    for lambda0 in [0.0, 1e-6, 1e-4, 1e-3] {
        let fm = faulty(lambda0);
        let total: usize = (0..200)
            .map(|k| {
                let (trace, _) = run(
                    &s,
                    &inst,
                    &fm,
                    &mut FaultSampler::for_run(5, k),
                    &SimConfig::default(),
                )
                .unwrap();
                trace.backups_dispatched
            })
            .sum();
        means.push(total as f64 / 200.0);
    }
    assert!(means.windows(2).all(|w| w[0] <= w[1]), "{means:?}");
    assert_eq!(means[0], 0.0);
    assert!(means[3] > 0.0);
}

#[test]
fn fault_free_reliability_is_exactly_one() {
    let spec = WorkloadSpec {
        n_tasks: 60,
        n_vms: 20,
        submit_model: SubmitModel::Uniform { horizon: 30.0 },
        seed: 3,
        ..WorkloadSpec::default()
    };
    let (tasks, nodes) = generate(&spec);
    let mut inst = Instance::new(tasks, nodes);
    inst.nodes.iter_mut().for_each(|n| n.npe_slots = 8);
    let s = gap(&inst);
    assert!(s.failed.is_empty());
    let (_, report) = run(
        &s,
        &inst,
        &FaultModel::fault_free(),
        &mut FaultSampler::new(9),
        &SimConfig::default(),
    )
    .unwrap();
    assert_eq!(report.reliability_estimate, 1.0);
    assert_eq!(report.cb, 0);
}
