//! Property and oracle checks over seeded random instances.
//!
//! Every check is a named, self-contained function so the `verify` command and the test
//! suites run exactly the same code.

use std::collections::HashMap;

use gapsim_core::gap::{gap_schedule_with_stats, planned_energy};
use gapsim_core::oracle::exhaustive;
use gapsim_core::power::{self, dynamic_power};
use gapsim_core::reliability::{derive_seed, fault_probability};
use gapsim_core::sim::TaskStatus;
use gapsim_core::workload::{generate, DeadlineModel, SubmitModel, WorkloadSpec};
use gapsim_core::{
    gap_schedule, run, wgap_schedule, DvfsConfig, FaultModel, FaultSampler, FogNode, GapConfig,
    Instance, Phase, Recovery, SimConfig,
};

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, failure: Option<String>, ok_detail: String) -> Self {
        match failure {
            Some(detail) => Check {
                name,
                passed: false,
                detail,
            },
            None => Check {
                name,
                passed: true,
                detail: ok_detail,
            },
        }
    }
}

/// Uniform draw in `[0, 1)` addressed by `(seed, path)`.
fn unit(seed: u64, path: &[u64]) -> f64 {
    (derive_seed(seed, path) >> 11) as f64 / (1u64 << 53) as f64
}

fn pick(seed: u64, path: &[u64], lo: u64, hi: u64) -> u64 {
    lo + derive_seed(seed, path) % (hi - lo + 1)
}

/// A random small instance: up to `max_tasks` tasks on up to `max_nodes` nodes, with
/// deadlines tight enough that some tasks cannot be placed.
pub fn random_instance(seed: u64, max_tasks: u64, max_nodes: u64) -> Instance {
    let horizon = [0.0, 1.0, 5.0][pick(seed, &[2], 0, 2) as usize];
    let slack_lo = 0.5 + unit(seed, &[3]) * 1.5;
    let spec = WorkloadSpec {
        n_tasks: pick(seed, &[0], 1, max_tasks) as usize,
        n_vms: pick(seed, &[1], 1, max_nodes) as usize,
        submit_model: if horizon > 0.0 {
            SubmitModel::Uniform { horizon }
        } else {
            SubmitModel::AllZero
        },
        deadline_model: DeadlineModel {
            base: 0.0,
            slack: (slack_lo, slack_lo + 2.0),
        },
        task_npe_range: (1, pick(seed, &[4], 1, 4) as u32),
        vm_npe_range: (1, 4),
        seed: derive_seed(seed, &[5]),
        ..WorkloadSpec::default()
    };
    let (tasks, nodes) = generate(&spec);
    Instance::new(tasks, nodes)
}

/// Dynamic power at scale `rho` against `rho³` times full power.
pub fn cubic_identity(pairs: usize, seed: u64) -> Check {
    let mut worst: f64 = 0.0;
    for k in 0..pairs as u64 {
        let mut node = FogNode::new(0, 1000.0);
        node.v_max = 0.5 + 1.5 * unit(seed, &[k, 0]);
        node.f_max = 1e8 + 3e9 * unit(seed, &[k, 1]);
        node.activity = unit(seed, &[k, 2]);
        node.load_cap = 1e-10 + 1e-8 * unit(seed, &[k, 3]);
        let rho = 1.0 - unit(seed, &[k, 4]);
        let full = dynamic_power(&node, node.v_max, node.f_max).expect("in range");
        let sample = power::operating_point(&node, rho).expect("in range");
        let expected = rho.powi(3) * full;
        if expected > 0.0 {
            worst = worst.max((sample.watts - expected).abs() / expected);
        }
    }
    let fail = (worst > 1e-12).then(|| format!("relative error {worst:e} exceeds 1e-12"));
    Check::new(
        "power-cubic-identity",
        fail,
        format!("{pairs} pairs, worst relative error {worst:e}"),
    )
}

/// Empirical fault frequency against `1 - exp(-λt)` at each `(λ, t)` point.
pub fn fault_frequency(points: &[(f64, f64)], samples: usize, seed: u64) -> Check {
    let mut worst: f64 = 0.0;
    let mut fail = None;
    for (k, &(lambda, t)) in points.iter().enumerate() {
        let p = fault_probability(lambda, t).expect("valid rate");
        let mut sampler = FaultSampler::for_run(seed, k as u64);
        let hits = (0..samples)
            .filter(|_| sampler.sample_fault(p).expect("p in [0, 1]").occurred)
            .count();
        let err = (hits as f64 / samples as f64 - p).abs();
        worst = worst.max(err);
        if err > 0.01 && fail.is_none() {
            fail = Some(format!("lambda={lambda} t={t}: frequency off by {err:.4}"));
        }
    }
    Check::new(
        "fault-frequency",
        fail,
        format!(
            "{} points x {samples} samples, worst deviation {worst:.4}",
            points.len()
        ),
    )
}

/// No GAP or WGAP entry completes after its deadline, and failed tasks have no placement.
pub fn deadline_safety(instances: usize, seed: u64) -> Check {
    let cfg = GapConfig::default();
    for k in 0..instances as u64 {
        let inst = random_instance(derive_seed(seed, &[k]), 50, 6);
        let fm = FaultModel::default();
        for (name, s) in [
            (
                "gap",
                gap_schedule(&inst.tasks, &inst.nodes, &inst.dvfs, &fm, &cfg),
            ),
            ("wgap", wgap_schedule(&inst.tasks, &inst.nodes, &fm, &cfg)),
        ] {
            let by_id: HashMap<_, _> = inst.tasks.iter().map(|t| (t.id, t)).collect();
            if let Some(e) = s
                .entries
                .iter()
                .find(|e| e.completion > by_id[&e.task_id].deadline)
            {
                return Check::new(
                    "deadline-safety",
                    Some(format!(
                        "instance {k}, {name}: task {} completes at {}",
                        e.task_id.0, e.completion
                    )),
                    String::new(),
                );
            }
            let placed = s.entries.len() + s.failed.len();
            if placed != inst.tasks.len() || s.failed.iter().any(|id| s.assignment.contains_key(id))
            {
                return Check::new(
                    "deadline-safety",
                    Some(format!(
                        "instance {k}, {name}: a task is both placed and failed, or neither"
                    )),
                    String::new(),
                );
            }
        }
    }
    Check::new("deadline-safety", None, format!("{instances} instances"))
}

/// Under heavy fault load every backup execution avoids its primary's node.
pub fn backup_separation(runs: usize, lambda0: f64, seed: u64) -> Check {
    let fm = FaultModel {
        lambda0,
        ..FaultModel::default()
    };
    let mut backups = 0usize;
    for k in 0..runs as u64 {
        let inst = random_instance(derive_seed(seed, &[k]), 30, 5);
        let s = gap_schedule(
            &inst.tasks,
            &inst.nodes,
            &inst.dvfs,
            &fm,
            &GapConfig::default(),
        );
        let mut sampler = FaultSampler::for_run(seed, k);
        let (trace, _) =
            run(&s, &inst, &fm, &mut sampler, &SimConfig::default()).expect("valid schedule");
        let primary: HashMap<_, _> = trace
            .executions
            .iter()
            .filter(|x| x.entry.phase == Phase::Primary)
            .map(|x| (x.entry.task_id, x.entry.node_id))
            .collect();
        for x in trace
            .executions
            .iter()
            .filter(|x| x.entry.phase == Phase::Backup)
        {
            backups += 1;
            if primary.get(&x.entry.task_id) == Some(&x.entry.node_id) {
                return Check::new(
                    "backup-separation",
                    Some(format!(
                        "run {k}: task {} backed up on node {}",
                        x.entry.task_id.0, x.entry.node_id.0
                    )),
                    String::new(),
                );
            }
        }
        for (id, status) in &trace.status {
            if *status == TaskStatus::CompletedViaBackup
                && !trace.faults.iter().any(|f| f.task_id == *id)
            {
                return Check::new(
                    "backup-separation",
                    Some(format!(
                        "run {k}: task {} completed via backup without a fault",
                        id.0
                    )),
                    String::new(),
                );
            }
        }
    }
    let fail = (backups == 0).then(|| "no backups were exercised".to_string());
    Check::new(
        "backup-separation",
        fail,
        format!("{runs} runs, {backups} backup executions"),
    )
}

/// Summary of an oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSummary {
    pub check: Check,
    /// Median of GAP energy over the oracle optimum, over fully feasible GAP schedules.
    pub median_ratio: Option<f64>,
    pub compared: usize,
}

/// GAP's fault-free energy is never below the exhaustive optimum, and a fully feasible GAP
/// schedule implies the oracle found a feasible candidate.
pub fn oracle_bounding(instances: usize, seed: u64) -> OracleSummary {
    let all_levels = [0.6, 0.8, 1.0];
    let mut ratios = Vec::new();
    let mut fail = None;
    for k in 0..instances as u64 {
        let s = derive_seed(seed, &[k]);
        let mut inst = random_instance(s, 5, 3);
        let n_levels = pick(s, &[9], 1, 3) as usize;
        inst.dvfs = DvfsConfig::new(all_levels[3 - n_levels..].to_vec());
        let (gap, _) =
            gap_schedule_with_stats(&inst.tasks, &inst.nodes, &inst.dvfs, &GapConfig::default());
        let oracle = exhaustive(&inst.tasks, &inst.nodes, &inst.dvfs).expect("small instance");
        if !gap.failed.is_empty() {
            continue;
        }
        let Some(best) = oracle.best_energy else {
            fail.get_or_insert(format!(
                "instance {k}: GAP fully feasible but oracle found nothing"
            ));
            continue;
        };
        let fm = FaultModel::fault_free();
        let sim = SimConfig {
            recovery: Recovery::Cpb,
            ..SimConfig::default()
        };
        let (_, report) =
            run(&gap, &inst, &fm, &mut FaultSampler::new(0), &sim).expect("valid schedule");
        let planned = planned_energy(&inst.nodes, &gap);
        let energy = report.total_energy;
        if (energy - planned).abs() > 1e-9 * planned.max(1.0) {
            fail.get_or_insert(format!(
                "instance {k}: simulated energy {energy} differs from plan {planned}"
            ));
        }
        if energy < best * (1.0 - 1e-12) {
            fail.get_or_insert(format!(
                "instance {k}: GAP energy {energy} below oracle optimum {best}"
            ));
        }
        if best > 0.0 {
            ratios.push(energy / best);
        }
    }
    ratios.sort_by(f64::total_cmp);
    let median_ratio = (!ratios.is_empty()).then(|| {
        let m = ratios.len() / 2;
        if ratios.len() % 2 == 1 {
            ratios[m]
        } else {
            (ratios[m - 1] + ratios[m]) / 2.0
        }
    });
    let detail = format!(
        "{instances} instances, {} compared, median GAP/oracle energy {}",
        ratios.len(),
        median_ratio.map_or("n/a".to_string(), |r| format!("{r:.4}"))
    );
    OracleSummary {
        check: Check::new("oracle-bounding", fail, detail),
        median_ratio,
        compared: ratios.len(),
    }
}

/// With no faults every runtime completion equals its planned completion.
pub fn fault_free_equivalence(instances: usize, seed: u64) -> Check {
    for k in 0..instances as u64 {
        let inst = random_instance(derive_seed(seed, &[k]), 40, 6);
        let fm = FaultModel::fault_free();
        let s = gap_schedule(
            &inst.tasks,
            &inst.nodes,
            &inst.dvfs,
            &fm,
            &GapConfig::default(),
        );
        let (trace, report) = run(
            &s,
            &inst,
            &fm,
            &mut FaultSampler::new(k),
            &SimConfig::default(),
        )
        .expect("valid schedule");
        let cts = trace.completion_times();
        for e in &s.entries {
            if cts.get(&e.task_id) != Some(&e.completion) {
                return Check::new(
                    "fault-free-equivalence",
                    Some(format!(
                        "instance {k}: task {} completion drifted",
                        e.task_id.0
                    )),
                    String::new(),
                );
            }
        }
        let exact = if s.failed.is_empty() {
            report.reliability_estimate == 1.0
        } else {
            report.reliability_estimate < 1.0
        };
        if !trace.faults.is_empty() || !exact {
            return Check::new(
                "fault-free-equivalence",
                Some(format!(
                    "instance {k}: {} faults, reliability {}",
                    trace.faults.len(),
                    report.reliability_estimate
                )),
                String::new(),
            );
        }
    }
    Check::new(
        "fault-free-equivalence",
        None,
        format!("{instances} instances"),
    )
}

/// The reported energy equals an independent re-sum over executions.
pub fn energy_conservation(instances: usize, seed: u64) -> Check {
    let fm = FaultModel {
        lambda0: 1e-3,
        ..FaultModel::default()
    };
    for k in 0..instances as u64 {
        let inst = random_instance(derive_seed(seed, &[k]), 40, 6);
        let s = gap_schedule(
            &inst.tasks,
            &inst.nodes,
            &inst.dvfs,
            &fm,
            &GapConfig::default(),
        );
        let (trace, report) = run(
            &s,
            &inst,
            &fm,
            &mut FaultSampler::new(k),
            &SimConfig::default(),
        )
        .expect("valid schedule");
        let by_id: HashMap<_, _> = inst.nodes.iter().map(|n| (n.id, n)).collect();
        let resum: f64 = trace
            .executions
            .iter()
            .map(|x| {
                let node = by_id[&x.entry.node_id];
                power::active_power(node, x.entry.rho).expect("valid level") * x.entry.exec_time
            })
            .sum();
        if (resum - report.total_energy).abs() > 1e-9 * resum.abs().max(1e-300) {
            return Check::new(
                "energy-conservation",
                Some(format!(
                    "instance {k}: reported {} vs re-summed {resum}",
                    report.total_energy
                )),
                String::new(),
            );
        }
    }
    Check::new(
        "energy-conservation",
        None,
        format!("{instances} instances"),
    )
}

/// Mean backup count over `runs` seeded runs never decreases as the base rate grows.
pub fn monotone_fault_load(runs: usize, seed: u64) -> Check {
    let rates = [0.0, 1e-6, 1e-4, 1e-3];
    let inst = random_instance(derive_seed(seed, &[0]), 40, 5);
    let mut means = Vec::new();
    for &lambda0 in &rates {
        let fm = FaultModel {
            lambda0,
            ..FaultModel::default()
        };
        let s = gap_schedule(
            &inst.tasks,
            &inst.nodes,
            &inst.dvfs,
            &fm,
            &GapConfig::default(),
        );
        let total: usize = (0..runs as u64)
            .map(|k| {
                let (trace, _) = run(
                    &s,
                    &inst,
                    &fm,
                    &mut FaultSampler::for_run(seed, k),
                    &SimConfig::default(),
                )
                .expect("valid schedule");
                trace.backups_dispatched
            })
            .sum();
        means.push(total as f64 / runs as f64);
    }
    let fail = means
        .windows(2)
        .any(|w| w[1] < w[0])
        .then(|| format!("mean backups {means:?} decrease"));
    Check::new(
        "monotone-fault-load",
        fail,
        format!("mean backups {means:?}"),
    )
}

/// Reversing the input task order leaves the report unchanged.
pub fn permutation_invariance(instances: usize, seed: u64) -> Check {
    let fm = FaultModel {
        lambda0: 1e-3,
        ..FaultModel::default()
    };
    for k in 0..instances as u64 {
        let inst = random_instance(derive_seed(seed, &[k]), 30, 5);
        let mut rev = inst.clone();
        rev.tasks.reverse();
        let go = |i: &Instance| {
            let s = gap_schedule(&i.tasks, &i.nodes, &i.dvfs, &fm, &GapConfig::default());
            run(&s, i, &fm, &mut FaultSampler::new(k), &SimConfig::default())
                .expect("valid schedule")
                .1
        };
        if go(&inst) != go(&rev) {
            return Check::new(
                "permutation-invariance",
                Some(format!("instance {k}: report depends on task order")),
                String::new(),
            );
        }
    }
    Check::new(
        "permutation-invariance",
        None,
        format!("{instances} instances"),
    )
}

/// The same instance, schedule and seed give identical traces and reports.
pub fn replay_determinism(instances: usize, seed: u64) -> Check {
    let fm = FaultModel {
        lambda0: 1e-3,
        ..FaultModel::default()
    };
    for k in 0..instances as u64 {
        let inst = random_instance(derive_seed(seed, &[k]), 30, 5);
        let s = gap_schedule(
            &inst.tasks,
            &inst.nodes,
            &inst.dvfs,
            &fm,
            &GapConfig::default(),
        );
        let a = run(
            &s,
            &inst,
            &fm,
            &mut FaultSampler::new(k),
            &SimConfig::default(),
        )
        .expect("valid schedule");
        let b = run(
            &s,
            &inst,
            &fm,
            &mut FaultSampler::new(k),
            &SimConfig::default(),
        )
        .expect("valid schedule");
        if a != b {
            return Check::new(
                "replay-determinism",
                Some(format!("instance {k}: replay diverged")),
                String::new(),
            );
        }
    }
    Check::new("replay-determinism", None, format!("{instances} instances"))
}

/// Every configuration invariant, each named in the failure detail.
pub fn config_invariants(cfg: &ExperimentConfig) -> Check {
    let problems = cfg.problems();
    let fail = (!problems.is_empty()).then(|| problems.join("; "));
    Check::new(
        "config",
        fail,
        "all configuration invariants hold".to_string(),
    )
}

/// The full suite with the default sample sizes.
pub fn run_all(cfg: &ExperimentConfig) -> Vec<Check> {
    let seed = cfg.master_seed;
    let config = config_invariants(cfg);
    if !config.passed {
        return vec![config];
    }
    vec![
        config,
        cubic_identity(1000, seed),
        fault_frequency(&[(1e-3, 300.0), (0.5, 1.0), (2.0, 0.25)], 100_000, seed),
        deadline_safety(500, seed),
        backup_separation(500, 1e-3, seed),
        oracle_bounding(200, seed).check,
        fault_free_equivalence(100, seed),
        energy_conservation(100, seed),
        monotone_fault_load(200, seed),
        permutation_invariance(50, seed),
        replay_determinism(50, seed),
    ]
}

/// Renders checks as an aligned table.
pub fn table(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for c in checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!("{verdict}  {:width$}  {}\n", c.name, c.detail));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_instances_are_valid_and_reproducible() {
        for k in 0..50 {
            let inst = random_instance(k, 50, 6);
            assert!(gapsim_core::model::validation_errors(&inst).is_empty());
            assert!(!inst.tasks.is_empty() && inst.tasks.len() <= 50);
            assert_eq!(inst, random_instance(k, 50, 6));
        }
    }

    #[test]
    fn small_suite_passes() {
        assert!(cubic_identity(100, 3).passed);
        assert!(deadline_safety(20, 3).passed);
        assert!(backup_separation(20, 1e-3, 3).passed);
        assert!(oracle_bounding(20, 3).check.passed);
        assert!(fault_free_equivalence(10, 3).passed);
        assert!(energy_conservation(10, 3).passed);
        assert!(permutation_invariance(10, 3).passed);
        assert!(replay_determinism(5, 3).passed);
    }

    #[test]
    fn broken_config_is_reported_by_name() {
        let cfg = ExperimentConfig {
            dvfs: Some(DvfsConfig::new(vec![0.5, 0.9])),
            ..ExperimentConfig::default()
        };
        let checks = run_all(&cfg);
        assert_eq!(checks.len(), 1);
        assert!(!checks[0].passed);
        assert!(
            checks[0].detail.contains("dvfs.levels"),
            "{}",
            checks[0].detail
        );
        assert!(table(&checks).starts_with("FAIL  config"));
    }
}
