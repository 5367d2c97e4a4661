//! Particle swarm baseline. A particle is a real vector with one coordinate per task;
//! rounding and clamping a coordinate yields the task's node.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{list_schedule, submit_order};
use crate::model::{FogNode, Schedule, Task};
use crate::numeric::CompensatedSum;
use crate::power;
use crate::slots::NodeSlots;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
    /// Joules charged per missed deadline. `None` uses ten times the largest single-task
    /// full-speed energy of the instance.
    pub penalty: Option<f64>,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 30,
            iterations: 100,
            inertia: 0.7,
            c1: 1.5,
            c2: 1.5,
            penalty: None,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        if self.swarm_size < 2 {
            errs.push("swarm_size must be at least 2".to_string());
        }
        if self.iterations < 1 {
            errs.push("iterations must be at least 1".to_string());
        }
        if !(0.0..=1.0).contains(&self.inertia) {
            errs.push("inertia must lie in [0, 1]".to_string());
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0) {
            errs.push("c1 and c2 must be positive".to_string());
        }
        if let Some(p) = self.penalty {
            if p.is_nan() || p <= 0.0 {
                errs.push("penalty must be positive".to_string());
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

/// Ten times the largest full-speed energy any task can incur on a node that hosts it.
pub fn default_penalty(tasks: &[Task], nodes: &[FogNode]) -> f64 {
    let mut max: f64 = 0.0;
    for n in nodes {
        let p = power::active_power(n, 1.0).expect("full speed in range");
        for t in tasks.iter().filter(|t| n.can_host(t.npe)) {
            max = max.max(p * t.length as f64 / n.mips);
        }
    }
    if max > 0.0 {
        10.0 * max
    } else {
        1.0
    }
}

/// Full-speed energy plus `penalty` per deadline miss.
pub fn fitness(tasks: &[Task], nodes: &[FogNode], schedule: &Schedule, penalty: f64) -> f64 {
    let energy = crate::gap::planned_energy(nodes, schedule);
    let missed = schedule
        .entries
        .iter()
        .filter(|e| {
            tasks
                .iter()
                .find(|t| t.id == e.task_id)
                .is_some_and(|t| e.completion > t.deadline)
        })
        .count();
    energy + penalty * missed as f64
}

struct Decoder<'a> {
    tasks: &'a [Task],
    nodes: &'a [FogNode],
    order: Vec<usize>,
    power: Vec<f64>,
}

impl<'a> Decoder<'a> {
    fn new(tasks: &'a [Task], nodes: &'a [FogNode]) -> Self {
        Self {
            tasks,
            nodes,
            order: submit_order(tasks),
            power: nodes
                .iter()
                .map(|n| power::active_power(n, 1.0).expect("full speed in range"))
                .collect(),
        }
    }

    /// Node position for a coordinate, moving forward past nodes too small for the task.
    fn node_for(&self, x: f64, task: &Task) -> Option<usize> {
        let m = self.nodes.len();
        let j = x.round().clamp(0.0, (m - 1) as f64) as usize;
        (0..m)
            .map(|off| (j + off) % m)
            .find(|&k| self.nodes[k].can_host(task.npe))
    }

    fn fitness(&self, position: &[f64], penalty: f64) -> f64 {
        let mut slots: Vec<NodeSlots> = self.nodes.iter().map(NodeSlots::for_node).collect();
        let mut energy = CompensatedSum::new();
        let mut missed = 0usize;
        for &ti in &self.order {
            let task = &self.tasks[ti];
            let Some(j) = self.node_for(position[ti], task) else {
                continue;
            };
            let start = slots[j]
                .earliest_start(task.npe, task.submit_time)
                .expect("hostable");
            let exec = task.length as f64 / self.nodes[j].mips;
            slots[j].reserve(task.npe, start, start + exec);
            energy.add(self.power[j] * exec);
            if start + exec > task.deadline {
                missed += 1;
            }
        }
        energy.value() + penalty * missed as f64
    }

    fn schedule(&self, position: &[f64]) -> Schedule {
        list_schedule(self.tasks, self.nodes, &self.order, |k, t, _| {
            self.node_for(position[self.order[k]], t)
        })
    }
}

/// Runs the swarm and returns the decoded global best. Deterministic for a given seed.
pub fn pso_schedule(tasks: &[Task], nodes: &[FogNode], cfg: &PsoConfig, seed: u64) -> Schedule {
    if tasks.is_empty() || nodes.is_empty() {
        return list_schedule(tasks, nodes, &submit_order(tasks), |_, _, _| None);
    }
    let penalty = cfg.penalty.unwrap_or_else(|| default_penalty(tasks, nodes));
    let decoder = Decoder::new(tasks, nodes);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = tasks.len();
    let hi = (nodes.len() - 1) as f64;
    let v_max = (nodes.len() as f64 / 2.0).max(1.0);

    let mut pos: Vec<Vec<f64>> = (0..cfg.swarm_size)
        .map(|_| (0..n).map(|_| rng.gen_range(0.0..=hi)).collect())
        .collect();
    let mut vel: Vec<Vec<f64>> = (0..cfg.swarm_size)
        .map(|_| (0..n).map(|_| rng.gen_range(-v_max..=v_max)).collect())
        .collect();
    let mut best_pos = pos.clone();
    let mut best_fit: Vec<f64> = pos.iter().map(|p| decoder.fitness(p, penalty)).collect();
    let mut g = 0;
    for i in 1..cfg.swarm_size {
        if best_fit[i] < best_fit[g] {
            g = i;
        }
    }
    let mut g_pos = best_pos[g].clone();
    let mut g_fit = best_fit[g];

    for _ in 0..cfg.iterations {
        for i in 0..cfg.swarm_size {
            for d in 0..n {
                let r1: f64 = rng.gen();
                let r2: f64 = rng.gen();
                let v = cfg.inertia * vel[i][d]
                    + cfg.c1 * r1 * (best_pos[i][d] - pos[i][d])
                    + cfg.c2 * r2 * (g_pos[d] - pos[i][d]);
                vel[i][d] = v.clamp(-v_max, v_max);
                pos[i][d] = (pos[i][d] + vel[i][d]).clamp(0.0, hi);
            }
            let f = decoder.fitness(&pos[i], penalty);
            if f < best_fit[i] {
                best_fit[i] = f;
                best_pos[i].clone_from(&pos[i]);
                if f < g_fit {
                    g_fit = f;
                    g_pos.clone_from(&pos[i]);
                }
            }
        }
    }
    decoder.schedule(&g_pos)
}
