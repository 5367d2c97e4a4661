//! Exhaustive reference solver for small instances.
//!
//! Every assignment of tasks to nodes is tried at every DVFS level. Tasks sharing a node
//! run in EDF order, which is feasibility-optimal for one machine; energy does not depend
//! on the order, so the minimum found is exact.

use crate::error::{Error, Result};
use crate::gap::edf_order;
use crate::model::{DvfsConfig, FogNode, NodeId, Phase, Schedule, ScheduleEntry, Task};
use crate::numeric::CompensatedSum;
use crate::power;
use crate::slots::NodeSlots;

/// Largest search space [`exhaustive`] accepts.
pub const MAX_CANDIDATES: f64 = 1e7;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Minimum energy over feasible candidates, `None` when nothing is feasible.
    pub best_energy: Option<f64>,
    /// Node per task, in input task order.
    pub best_assignment: Option<Vec<NodeId>>,
    pub best_rho: Option<f64>,
    pub feasible_count: u64,
    pub enumerated: u64,
}

/// Energy of a candidate, or `None` when a task misses its deadline or fits nowhere.
fn evaluate(
    tasks: &[Task],
    nodes: &[FogNode],
    edf: &[usize],
    assign: &[usize],
    rho: f64,
    power: &[f64],
) -> Option<f64> {
    let mut slots: Vec<NodeSlots> = nodes.iter().map(NodeSlots::for_node).collect();
    let mut energy = CompensatedSum::new();
    for &ti in edf {
        let task = &tasks[ti];
        let j = assign[ti];
        let start = slots[j].earliest_start(task.npe, task.submit_time)?;
        let exec = task.length as f64 / (nodes[j].mips * rho);
        if start + exec > task.deadline {
            return None;
        }
        slots[j].reserve(task.npe, start, start + exec);
        energy.add(power[j] * exec);
    }
    Some(energy.value())
}

pub fn exhaustive(tasks: &[Task], nodes: &[FogNode], dvfs: &DvfsConfig) -> Result<OracleResult> {
    let n = tasks.len();
    let m = nodes.len();
    let size = (m as f64).powi(n as i32) * dvfs.levels.len() as f64;
    if size > MAX_CANDIDATES {
        return Err(Error::TooLarge {
            size,
            limit: MAX_CANDIDATES,
        });
    }
    let edf = edf_order(tasks);
    let mut result = OracleResult {
        best_energy: None,
        best_assignment: None,
        best_rho: None,
        feasible_count: 0,
        enumerated: 0,
    };
    if m == 0 && n > 0 {
        return Ok(result);
    }
    let mut best_assign: Option<Vec<usize>> = None;
    for &rho in &dvfs.levels {
        let power: Vec<f64> = nodes
            .iter()
            .map(|nd| power::active_power(nd, rho))
            .collect::<Result<_>>()?;
        let mut assign = vec![0usize; n];
        'candidates: loop {
            result.enumerated += 1;
            if let Some(e) = evaluate(tasks, nodes, &edf, &assign, rho, &power) {
                result.feasible_count += 1;
                if result.best_energy.is_none_or(|b| e < b) {
                    result.best_energy = Some(e);
                    result.best_rho = Some(rho);
                    best_assign = Some(assign.clone());
                }
            }
            // Odometer increment, first task most significant.
            let mut k = n;
            loop {
                if k == 0 {
                    break 'candidates;
                }
                k -= 1;
                assign[k] += 1;
                if assign[k] < m {
                    break;
                }
                assign[k] = 0;
            }
        }
    }
    result.best_assignment = best_assign.map(|a| a.into_iter().map(|j| nodes[j].id).collect());
    Ok(result)
}

/// The schedule the oracle evaluates for one assignment (node positions in task order).
pub fn candidate_schedule(
    tasks: &[Task],
    nodes: &[FogNode],
    assign: &[usize],
    rho: f64,
) -> Schedule {
    let mut slots: Vec<NodeSlots> = nodes.iter().map(NodeSlots::for_node).collect();
    let mut schedule = Schedule::empty(rho);
    for ti in edf_order(tasks) {
        let task = &tasks[ti];
        let j = assign[ti];
        let Some(start) = slots[j].earliest_start(task.npe, task.submit_time) else {
            schedule.failed.push(task.id);
            continue;
        };
        let exec = task.length as f64 / (nodes[j].mips * rho);
        slots[j].reserve(task.npe, start, start + exec);
        schedule.push(ScheduleEntry::new(
            task.id,
            nodes[j].id,
            start,
            exec,
            rho,
            Phase::Primary,
        ));
    }
    schedule.cb = schedule.failed.len();
    schedule
}
