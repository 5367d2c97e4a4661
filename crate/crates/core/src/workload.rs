//! Seeded random instances in the ranges of the reference experiment setup.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{FogNode, NodeId, Role, Task, TaskId};
use crate::reliability::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SubmitModel {
    AllZero,
    Uniform { horizon: f64 },
}

/// `deadline = submit + base + (length / mips_lo) * slack`, slack uniform in `slack`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeadlineModel {
    pub base: f64,
    pub slack: (f64, f64),
}

impl Default for DeadlineModel {
    fn default() -> Self {
        Self {
            base: 0.0,
            slack: (1.5, 4.0),
        }
    }
}

/// Per-node constants shared by every generated node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HostProfile {
    pub v_max: f64,
    pub f_max: f64,
    pub activity: f64,
    pub load_cap: f64,
    pub static_power: f64,
    /// MB per VM.
    pub ram: f64,
    /// B/s per VM.
    pub bandwidth: f64,
}

impl Default for HostProfile {
    fn default() -> Self {
        Self {
            v_max: 1.2,
            f_max: 1e9,
            activity: 0.5,
            load_cap: 2e-9,
            static_power: 0.0,
            ram: 256.0,
            bandwidth: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkloadSpec {
    pub n_tasks: usize,
    pub n_vms: usize,
    pub length_range: (u64, u64),
    pub mips_range: (u64, u64),
    pub task_npe_range: (u32, u32),
    pub vm_npe_range: (u32, u32),
    pub deadline_model: DeadlineModel,
    pub submit_model: SubmitModel,
    pub host: HostProfile,
    pub seed: u64,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        Self {
            n_tasks: 100,
            n_vms: 10,
            length_range: (1000, 2000),
            mips_range: (1000, 2000),
            task_npe_range: (1, 8),
            vm_npe_range: (1, 8),
            deadline_model: DeadlineModel::default(),
            submit_model: SubmitModel::AllZero,
            host: HostProfile::default(),
            seed: 0,
        }
    }
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        let mut range = |name: &str, ok: bool| {
            if !ok {
                errs.push(format!("{name} must be a nonempty range"));
            }
        };
        range(
            "length_range",
            self.length_range.0 >= 1 && self.length_range.0 <= self.length_range.1,
        );
        range(
            "mips_range",
            self.mips_range.0 >= 1 && self.mips_range.0 <= self.mips_range.1,
        );
        range(
            "task_npe_range",
            self.task_npe_range.0 >= 1 && self.task_npe_range.0 <= self.task_npe_range.1,
        );
        range(
            "vm_npe_range",
            self.vm_npe_range.0 >= 1 && self.vm_npe_range.0 <= self.vm_npe_range.1,
        );
        let (lo, hi) = self.deadline_model.slack;
        range("deadline_model.slack", lo > 0.0 && lo <= hi);
        if self.deadline_model.base < 0.0 {
            errs.push("deadline_model.base must be non-negative".to_string());
        }
        if let SubmitModel::Uniform { horizon } = self.submit_model {
            if horizon.is_nan() || horizon < 0.0 {
                errs.push("submit_model.horizon must be non-negative".to_string());
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

/// Draws nodes and tasks. Nodes and tasks use separate streams, so changing the task
/// count leaves the nodes unchanged and vice versa.
pub fn generate(spec: &WorkloadSpec) -> (Vec<Task>, Vec<FogNode>) {
    let mut node_rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[0]));
    let mut task_rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[1]));
    let h = &spec.host;

    let nodes = (0..spec.n_vms)
        .map(|j| FogNode {
            id: NodeId(j as u32),
            mips: node_rng.gen_range(spec.mips_range.0..=spec.mips_range.1) as f64,
            bandwidth: h.bandwidth,
            ram: h.ram,
            npe_slots: node_rng.gen_range(spec.vm_npe_range.0..=spec.vm_npe_range.1),
            v_max: h.v_max,
            f_max: h.f_max,
            activity: h.activity,
            load_cap: h.load_cap,
            static_power: h.static_power,
        })
        .collect();

    let mips_lo = spec.mips_range.0 as f64;
    let (slack_lo, slack_hi) = spec.deadline_model.slack;
    let tasks = (0..spec.n_tasks)
        .map(|i| {
            let length = task_rng.gen_range(spec.length_range.0..=spec.length_range.1);
            let npe = task_rng.gen_range(spec.task_npe_range.0..=spec.task_npe_range.1);
            let submit_time = match spec.submit_model {
                SubmitModel::AllZero => 0.0,
                SubmitModel::Uniform { horizon } => task_rng.gen_range(0.0..=horizon),
            };
            let slack = task_rng.gen_range(slack_lo..=slack_hi);
            let deadline = submit_time + spec.deadline_model.base + length as f64 / mips_lo * slack;
            Task {
                id: TaskId(i as u32),
                length,
                deadline,
                submit_time,
                npe,
                role: Role::Primary,
                backup_of: None,
            }
        })
        .collect();
    (tasks, nodes)
}

/// Task counts swept at a fixed VM count.
pub const SWEEP_TASKS: [usize; 5] = [200, 400, 600, 800, 1000];
/// VM counts swept at a fixed task count.
pub const SWEEP_VMS: [usize; 4] = [20, 50, 80, 100];

/// One (scenario, seed) cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub scenario_id: String,
    pub scenario_index: usize,
    pub seed_index: usize,
    pub spec: WorkloadSpec,
}

/// The reference sweep: task counts at 100 VMs, then VM counts at 1000 tasks, each shape
/// repeated for `seeds` seeds. Cell seeds derive from `(master, scenario, seed)`.
pub fn paper_sweep(template: &WorkloadSpec, master_seed: u64, seeds: usize) -> Vec<SweepPoint> {
    let shapes = SWEEP_TASKS
        .iter()
        .map(|&n| (format!("tasks-{n}"), n, 100))
        .chain(SWEEP_VMS.iter().map(|&m| (format!("vms-{m}"), 1000, m)));
    let mut out = Vec::new();
    for (scenario_index, (id, n_tasks, n_vms)) in shapes.enumerate() {
        for seed_index in 0..seeds {
            out.push(SweepPoint {
                scenario_id: id.clone(),
                scenario_index,
                seed_index,
                spec: WorkloadSpec {
                    n_tasks,
                    n_vms,
                    seed: derive_seed(master_seed, &[scenario_index as u64, seed_index as u64]),
                    ..template.clone()
                },
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_values_stay_in_range() {
        let spec = WorkloadSpec {
            n_tasks: 10_000,
            n_vms: 10_000,
            submit_model: SubmitModel::Uniform { horizon: 50.0 },
            seed: 17,
            ..WorkloadSpec::default()
        };
        let (tasks, nodes) = generate(&spec);
        assert_eq!(tasks.len(), 10_000);
        for t in &tasks {
            assert!((1000..=2000).contains(&t.length));
            assert!((1..=8).contains(&t.npe));
            assert!((0.0..=50.0).contains(&t.submit_time));
            let slack = (t.deadline - t.submit_time) / (t.length as f64 / 1000.0);
            assert!((1.5 - 1e-9..=4.0 + 1e-9).contains(&slack));
        }
        for n in &nodes {
            assert!((1000.0..=2000.0).contains(&n.mips));
            assert!((1..=8).contains(&n.npe_slots));
            assert_eq!(n.mips.fract(), 0.0);
        }
        // Both range ends are reachable.
        assert!(tasks.iter().any(|t| t.length == 1000) && tasks.iter().any(|t| t.length == 2000));
    }

    #[test]
    fn zero_tasks_is_empty() {
        let spec = WorkloadSpec {
            n_tasks: 0,
            ..WorkloadSpec::default()
        };
        assert!(generate(&spec).0.is_empty());
    }

    #[test]
    fn equal_seeds_equal_instances() {
        let spec = WorkloadSpec {
            seed: 5,
            ..WorkloadSpec::default()
        };
        assert_eq!(generate(&spec), generate(&spec));
        let other = WorkloadSpec {
            seed: 6,
            ..spec.clone()
        };
        assert_ne!(generate(&spec).0, generate(&other).0);
    }

    #[test]
    fn task_count_does_not_perturb_nodes() {
        let a = WorkloadSpec {
            n_tasks: 10,
            seed: 9,
            ..WorkloadSpec::default()
        };
        let b = WorkloadSpec {
            n_tasks: 500,
            ..a.clone()
        };
        assert_eq!(generate(&a).1, generate(&b).1);
    }

    #[test]
    fn lengths_pass_chi_square_uniformity() {
        let spec = WorkloadSpec {
            n_tasks: 100_000,
            n_vms: 0,
            seed: 123,
            ..WorkloadSpec::default()
        };
        let (tasks, _) = generate(&spec);
        // Ten bins over the 1001 integers 1000..=2000.
        let bin = |len: u64| (((len - 1000) * 10) / 1001) as usize;
        let mut observed = [0f64; 10];
        for t in &tasks {
            observed[bin(t.length)] += 1.0;
        }
        let mut width = [0f64; 10];
        for len in 1000..=2000u64 {
            width[bin(len)] += 1.0;
        }
        let n = tasks.len() as f64;
        let chi2: f64 = (0..10)
            .map(|k| {
                let expected = n * width[k] / 1001.0;
                (observed[k] - expected).powi(2) / expected
            })
            .sum();
        // Upper 0.001 quantile of chi-square with 9 degrees of freedom.
        assert!(chi2 < 27.877, "chi2 = {chi2}");
    }

    #[test]
    fn sweep_shape() {
        let sweep = paper_sweep(&WorkloadSpec::default(), 1, 10);
        assert_eq!(sweep.len(), (5 + 4) * 10);
        assert!(sweep
            .iter()
            .any(|p| p.spec.n_tasks == 1000 && p.spec.n_vms == 100));
        let mut seeds: Vec<u64> = sweep.iter().map(|p| p.spec.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), sweep.len());
        assert_eq!(paper_sweep(&WorkloadSpec::default(), 1, 10), sweep);
        assert!(sweep.iter().all(|p| p.spec.length_range == (1000, 2000)));
    }
}
