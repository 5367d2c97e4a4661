//! The game-theoretic scheduler: EDF ordering, payoff-driven primary mapping, cold backup
//! mapping and the outer DVFS level selection.
//!
//! Each task is a player choosing a node. A choice pays
//! `slack_weight * (deadline - CT) / deadline - energy_weight * E / E_full`, where `E_full`
//! is the energy of the same execution at full speed; a choice that would miss the deadline
//! is [`Payoff::Infeasible`] and ranks below every finite payoff. Tasks with no finite choice
//! are deferred to the backup phase, and tasks the backup phase cannot place fail.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::model::{
    DvfsConfig, FaultModel, FogNode, NodeId, Phase, Schedule, ScheduleEntry, Task, TaskId,
};
use crate::numeric;
use crate::power;
use crate::slots::NodeSlots;

/// When a primary's fault becomes visible to the scheduler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Detection {
    /// At the instant the fault strikes.
    #[default]
    Immediate,
    /// At the primary's planned completion.
    AtCompletion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GapConfig {
    pub slack_weight: f64,
    pub energy_weight: f64,
    pub detection: Detection,
}

impl Default for GapConfig {
    fn default() -> Self {
        Self {
            slack_weight: 1.0,
            energy_weight: 1.0,
            detection: Detection::Immediate,
        }
    }
}

/// Value of a (task, node, scale factor) choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Payoff {
    Infeasible,
    Value {
        value: f64,
        slack_norm: f64,
        energy_norm: f64,
    },
}

impl Payoff {
    pub fn value(&self) -> Option<f64> {
        match self {
            Payoff::Infeasible => None,
            Payoff::Value { value, .. } => Some(*value),
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Payoff::Value { .. })
    }
}

impl PartialOrd for Payoff {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self.value(), other.value()) {
            (None, None) => Some(Ordering::Equal),
            (None, Some(_)) => Some(Ordering::Less),
            (Some(_), None) => Some(Ordering::Greater),
            (Some(a), Some(b)) => a.partial_cmp(&b),
        }
    }
}

/// `length / (mips * rho)` seconds.
pub fn exec_time(task: &Task, node: &FogNode, rho: f64) -> f64 {
    task.length as f64 / (node.mips * rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct EdfKey {
    deadline: OrdF64,
    submit: OrdF64,
    id: TaskId,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Task positions ordered by (deadline, submit_time, id), via heap sort.
pub fn edf_order(tasks: &[Task]) -> Vec<usize> {
    let heap: BinaryHeap<(EdfKey, usize)> = tasks
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let key = EdfKey {
                deadline: OrdF64(t.deadline),
                submit: OrdF64(t.submit_time),
                id: t.id,
            };
            (key, i)
        })
        .collect();
    heap.into_sorted_vec().into_iter().map(|(_, i)| i).collect()
}

/// Tasks in earliest-deadline-first order.
pub fn edf_sort(tasks: &[Task]) -> Vec<Task> {
    edf_order(tasks)
        .into_iter()
        .map(|i| tasks[i].clone())
        .collect()
}

/// Per-node constants for one scale factor.
#[derive(Debug, Clone, Copy)]
struct NodeProfile {
    id: NodeId,
    mips: f64,
    npe_slots: u32,
    power: f64,
    power_full: f64,
}

impl NodeProfile {
    fn new(node: &FogNode, rho: f64) -> Self {
        // Levels are validated to lie in (0, 1], which keeps these in range.
        let power = power::active_power(node, rho).expect("rho within (0, 1]");
        let power_full = power::active_power(node, 1.0).expect("full speed in range");
        Self {
            id: node.id,
            mips: node.mips,
            npe_slots: node.npe_slots,
            power,
            power_full,
        }
    }
}

/// A priced placement of one task on one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub node: usize,
    pub start: f64,
    pub exec_time: f64,
    pub completion: f64,
    pub energy: f64,
    pub payoff: Payoff,
}

fn evaluate(
    task: &Task,
    node_pos: usize,
    profile: &NodeProfile,
    slots: &NodeSlots,
    ready: f64,
    rho: f64,
    cfg: &GapConfig,
) -> Option<Candidate> {
    if task.npe > profile.npe_slots {
        return None;
    }
    let start = slots.earliest_start(task.npe, ready)?;
    let exec = task.length as f64 / (profile.mips * rho);
    let completion = start + exec;
    let energy = profile.power * exec;
    let payoff = if completion > task.deadline {
        Payoff::Infeasible
    } else {
        let energy_full = profile.power_full * (task.length as f64 / profile.mips);
        let energy_norm = if energy_full > 0.0 {
            energy / energy_full
        } else {
            0.0
        };
        let slack_norm = (task.deadline - completion) / task.deadline;
        Payoff::Value {
            value: cfg.slack_weight * slack_norm - cfg.energy_weight * energy_norm,
            slack_norm,
            energy_norm,
        }
    };
    Some(Candidate {
        node: node_pos,
        start,
        exec_time: exec,
        completion,
        energy,
        payoff,
    })
}

/// Whether `a` beats the incumbent `b`: higher payoff, then lower energy, then lower node id.
fn better(a: &Candidate, a_id: NodeId, b: &Candidate, b_id: NodeId) -> bool {
    match a.payoff.partial_cmp(&b.payoff) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Less) => false,
        _ => match a.energy.total_cmp(&b.energy) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => a_id < b_id,
        },
    }
}

/// Mutable bookkeeping of one candidate-schedule construction.
#[derive(Debug, Clone)]
pub struct GapState {
    /// Task positions in EDF order.
    pub lt: Vec<usize>,
    /// Best completion estimate per task position; infinite when unplaced.
    pub lct: Vec<f64>,
    /// Deferred task positions, ascending by remaining budget once sorted.
    pub backup_queue: Vec<usize>,
    /// Remaining budget per task position, seconds.
    pub remaining: Vec<f64>,
    /// Slot occupancy per node position.
    pub node_free: Vec<NodeSlots>,
    pub cp: usize,
    pub cb: usize,
    /// Number of (task, node) payoff evaluations performed.
    pub evaluations: usize,
}

impl GapState {
    pub fn new(tasks: &[Task], nodes: &[FogNode]) -> Self {
        Self {
            lt: edf_order(tasks),
            lct: vec![f64::INFINITY; tasks.len()],
            backup_queue: Vec::new(),
            remaining: tasks.iter().map(|t| t.deadline - t.submit_time).collect(),
            node_free: nodes.iter().map(NodeSlots::for_node).collect(),
            cp: 0,
            cb: 0,
            evaluations: 0,
        }
    }
}

/// Payoff of running `task` on `node` at `rho`, given the node occupancy in `state`.
pub fn payoff(
    task: &Task,
    node: &FogNode,
    node_pos: usize,
    rho: f64,
    state: &GapState,
    cfg: &GapConfig,
) -> Payoff {
    let profile = NodeProfile::new(node, rho);
    evaluate(
        task,
        node_pos,
        &profile,
        &state.node_free[node_pos],
        task.submit_time,
        rho,
        cfg,
    )
    .map_or(Payoff::Infeasible, |c| c.payoff)
}

fn to_entry(
    task: &Task,
    profile: &NodeProfile,
    c: &Candidate,
    rho: f64,
    phase: Phase,
) -> ScheduleEntry {
    ScheduleEntry {
        task_id: task.id,
        node_id: profile.id,
        start: c.start,
        exec_time: c.exec_time,
        completion: c.completion,
        rho,
        phase,
    }
}

/// Phase one: every task in EDF order takes its best finite-payoff node, or is deferred.
pub fn map_primaries(
    tasks: &[Task],
    nodes: &[FogNode],
    rho: f64,
    state: &mut GapState,
    schedule: &mut Schedule,
    cfg: &GapConfig,
) {
    let profiles: Vec<NodeProfile> = nodes.iter().map(|n| NodeProfile::new(n, rho)).collect();
    let order = state.lt.clone();
    for ti in order {
        let task = &tasks[ti];
        let mut best: Option<Candidate> = None;
        for (j, profile) in profiles.iter().enumerate() {
            state.evaluations += 1;
            let Some(c) = evaluate(
                task,
                j,
                profile,
                &state.node_free[j],
                task.submit_time,
                rho,
                cfg,
            ) else {
                continue;
            };
            if !c.payoff.is_feasible() {
                continue;
            }
            let replace = match &best {
                None => true,
                Some(b) => better(&c, profile.id, b, profiles[b.node].id),
            };
            if replace {
                best = Some(c);
            }
        }
        match best {
            Some(c) => {
                state.node_free[c.node].reserve(task.npe, c.start, c.completion);
                state.lct[ti] = c.completion;
                // Budget left for a backup if the fault surfaces at planned completion.
                state.remaining[ti] = task.deadline - c.completion;
                schedule.push(to_entry(task, &profiles[c.node], &c, rho, Phase::Primary));
            }
            None => {
                state.remaining[ti] = task.deadline - task.submit_time;
                state.backup_queue.push(ti);
                state.cp += 1;
            }
        }
    }
}

/// Best placement for a backup execution that becomes ready at `ready` with `remaining`
/// seconds of budget, never on `exclude`. Nodes are scanned by descending MIPS.
#[allow(clippy::too_many_arguments)]
pub fn place_backup(
    task: &Task,
    nodes: &[FogNode],
    rho: f64,
    node_free: &[NodeSlots],
    exclude: Option<usize>,
    ready: f64,
    remaining: f64,
    cfg: &GapConfig,
) -> Option<Candidate> {
    let mut order: Vec<usize> = (0..nodes.len()).filter(|&j| Some(j) != exclude).collect();
    order.sort_by(|&a, &b| {
        nodes[b]
            .mips
            .total_cmp(&nodes[a].mips)
            .then(nodes[a].id.cmp(&nodes[b].id))
    });
    let mut best: Option<Candidate> = None;
    for j in order {
        let profile = NodeProfile::new(&nodes[j], rho);
        let Some(c) = evaluate(task, j, &profile, &node_free[j], ready, rho, cfg) else {
            continue;
        };
        if !c.payoff.is_feasible() || remaining <= c.exec_time {
            continue;
        }
        let replace = match &best {
            None => true,
            Some(b) => better(&c, nodes[j].id, b, nodes[b.node].id),
        };
        if replace {
            best = Some(c);
        }
    }
    best
}

/// Phase two: deferred tasks, tightest budget first, go to a node other than their
/// primary's; what cannot be placed fails.
pub fn map_backups(
    tasks: &[Task],
    nodes: &[FogNode],
    rho: f64,
    state: &mut GapState,
    schedule: &mut Schedule,
    cfg: &GapConfig,
) {
    let mut queue = std::mem::take(&mut state.backup_queue);
    queue.sort_by(|&a, &b| {
        state.remaining[a]
            .total_cmp(&state.remaining[b])
            .then(tasks[a].id.cmp(&tasks[b].id))
    });
    schedule.backup_list = queue.iter().map(|&i| tasks[i].id).collect();
    let node_pos: HashMap<NodeId, usize> =
        nodes.iter().enumerate().map(|(j, n)| (n.id, j)).collect();
    // Only primaries are assigned at this point.
    let primary_node: HashMap<TaskId, usize> = schedule
        .assignment
        .iter()
        .filter_map(|(t, n)| node_pos.get(n).map(|&j| (*t, j)))
        .collect();
    for &ti in &queue {
        let task = &tasks[ti];
        let exclude = primary_node.get(&task.id).copied();
        state.evaluations += nodes.len() - usize::from(exclude.is_some());
        let placed = place_backup(
            task,
            nodes,
            rho,
            &state.node_free,
            exclude,
            task.submit_time,
            state.remaining[ti],
            cfg,
        );
        match placed {
            Some(c) => {
                state.node_free[c.node].reserve(task.npe, c.start, c.completion);
                state.lct[ti] = c.completion;
                let profile = NodeProfile::new(&nodes[c.node], rho);
                schedule.push(to_entry(task, &profile, &c, rho, Phase::Backup));
            }
            None => {
                schedule.failed.push(task.id);
                state.cb += 1;
            }
        }
    }
    state.backup_queue = queue;
}

/// One full two-phase construction at a fixed scale factor.
pub fn schedule_at_level(
    tasks: &[Task],
    nodes: &[FogNode],
    rho: f64,
    cfg: &GapConfig,
) -> (Schedule, GapState) {
    let mut state = GapState::new(tasks, nodes);
    let mut schedule = Schedule::empty(rho);
    map_primaries(tasks, nodes, rho, &mut state, &mut schedule, cfg);
    map_backups(tasks, nodes, rho, &mut state, &mut schedule, cfg);
    schedule.cp = state.cp;
    schedule.cb = state.cb;
    (schedule, state)
}

/// Planned energy of a schedule.
pub fn planned_energy(nodes: &[FogNode], schedule: &Schedule) -> f64 {
    let by_id: HashMap<NodeId, &FogNode> = nodes.iter().map(|n| (n.id, n)).collect();
    numeric::sum(
        schedule.entries.iter().map(|e| {
            power::entry_energy(by_id[&e.node_id], e).expect("entry within node envelope")
        }),
    )
}

/// Selection score: failures, then deferrals, then energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub failed: usize,
    pub cp: usize,
    pub energy: f64,
}

impl Score {
    pub fn of(nodes: &[FogNode], schedule: &Schedule) -> Self {
        Self {
            failed: schedule.failed.len(),
            cp: schedule.cp,
            energy: planned_energy(nodes, schedule),
        }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        self.failed
            .cmp(&other.failed)
            .then(self.cp.cmp(&other.cp))
            .then(self.energy.total_cmp(&other.energy))
    }
}

/// Counters describing how much work a DVFS sweep did.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SweepStats {
    pub constructions: usize,
    /// Payoff evaluations per construction.
    pub evaluations: Vec<usize>,
}

/// Runs the construction at every DVFS level and keeps the lexicographically best
/// (failures, deferrals, energy); ties go to the lowest level.
pub fn gap_schedule_with_stats(
    tasks: &[Task],
    nodes: &[FogNode],
    dvfs: &DvfsConfig,
    cfg: &GapConfig,
) -> (Schedule, SweepStats) {
    let mut stats = SweepStats::default();
    let mut best: Option<(Schedule, Score)> = None;
    for &rho in &dvfs.levels {
        let (schedule, state) = schedule_at_level(tasks, nodes, rho, cfg);
        stats.constructions += 1;
        stats.evaluations.push(state.evaluations);
        let score = Score::of(nodes, &schedule);
        let replace = match &best {
            None => true,
            Some((_, s)) => score.cmp(s) == Ordering::Less,
        };
        if replace {
            best = Some((schedule, score));
        }
    }
    let schedule = best
        .map(|(s, _)| s)
        .unwrap_or_else(|| Schedule::empty(dvfs.lowest()));
    (schedule, stats)
}

/// The full scheduler. The fault model does not influence planning; faults are realized by
/// the simulator.
pub fn gap_schedule(
    tasks: &[Task],
    nodes: &[FogNode],
    dvfs: &DvfsConfig,
    _fm: &FaultModel,
    cfg: &GapConfig,
) -> Schedule {
    gap_schedule_with_stats(tasks, nodes, dvfs, cfg).0
}

/// The scheduler without DVFS: full speed only.
pub fn wgap_schedule(
    tasks: &[Task],
    nodes: &[FogNode],
    fm: &FaultModel,
    cfg: &GapConfig,
) -> Schedule {
    gap_schedule(tasks, nodes, &DvfsConfig::full_only(), fm, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> GapConfig {
        GapConfig::default()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn exec_time_examples() {
        let t = Task::new(1, 1000, 0.0, 10.0);
        let n = FogNode::new(1, 1000.0);
        assert!(close(exec_time(&t, &n, 1.0), 1.0));
        assert!(close(exec_time(&t, &n, 0.5), 2.0));
        let t = Task::new(1, 2000, 0.0, 10.0);
        let n = FogNode::new(1, 2000.0);
        assert!(close(exec_time(&t, &n, 1.0), 1.0));
    }

    #[test]
    fn edf_sort_examples() {
        let tasks = vec![
            Task::new(1, 1000, 0.0, 3.0),
            Task::new(2, 1000, 0.0, 1.0),
            Task::new(3, 1000, 0.0, 2.0),
        ];
        let d: Vec<f64> = edf_sort(&tasks).iter().map(|t| t.deadline).collect();
        assert_eq!(d, vec![1.0, 2.0, 3.0]);

        let same = vec![
            Task::new(4, 1000, 0.5, 3.0),
            Task::new(2, 1000, 0.0, 3.0),
            Task::new(3, 1000, 0.0, 3.0),
        ];
        let ids: Vec<u32> = edf_sort(&same).iter().map(|t| t.id.0).collect();
        assert_eq!(ids, vec![2, 3, 4]);
        assert!(edf_sort(&[]).is_empty());
    }

    #[test]
    fn infeasible_ranks_below_everything() {
        let v = Payoff::Value {
            value: -1e9,
            slack_norm: 0.0,
            energy_norm: 1e9,
        };
        assert!(Payoff::Infeasible < v);
        assert!(v > Payoff::Infeasible);
    }

    #[test]
    fn payoff_examples() {
        let nodes = vec![FogNode::new(1, 1000.0)];
        let state = GapState::new(&[], &nodes);
        // CT = 1.0 with deadline 2 at full speed: 0.5 - 1
        let t = Task::new(1, 1000, 0.0, 2.0);
        match payoff(&t, &nodes[0], 0, 1.0, &state, &cfg()) {
            Payoff::Value {
                value,
                slack_norm,
                energy_norm,
            } => {
                assert!(close(value, -0.5));
                assert!(close(slack_norm, 0.5));
                assert!(close(energy_norm, 1.0));
            }
            p => panic!("{p:?}"),
        }
        let late = Task::new(2, 3000, 0.0, 2.0);
        assert_eq!(
            payoff(&late, &nodes[0], 0, 1.0, &state, &cfg()),
            Payoff::Infeasible
        );
    }

    #[test]
    fn faster_node_pays_more_at_equal_energy_ratio() {
        let nodes = vec![FogNode::new(1, 1000.0), FogNode::new(2, 1500.0)];
        let state = GapState::new(&[], &nodes);
        let t = Task::new(1, 1000, 0.0, 5.0);
        let slow = payoff(&t, &nodes[0], 0, 0.8, &state, &cfg());
        let fast = payoff(&t, &nodes[1], 1, 0.8, &state, &cfg());
        assert!(fast > slow);
    }

    #[test]
    fn two_task_example_maps_tight_task_to_fast_node() {
        let tasks = vec![Task::new(1, 1000, 0.0, 2.0), Task::new(2, 1500, 0.0, 1.0)];
        let nodes = vec![FogNode::new(1, 1000.0), FogNode::new(2, 2000.0)];
        let (s, state) = schedule_at_level(&tasks, &nodes, 1.0, &cfg());
        assert_eq!(state.lt, vec![1, 0]);
        assert_eq!(s.assignment[&TaskId(2)], NodeId(2));
        assert_eq!(s.assignment[&TaskId(1)], NodeId(1));
        let e2 = s.entry_for(TaskId(2), Phase::Primary).unwrap();
        let e1 = s.entry_for(TaskId(1), Phase::Primary).unwrap();
        assert!(close(e2.completion, 0.75));
        assert!(close(e1.completion, 1.0));
        assert!(s.backup_list.is_empty() && s.failed.is_empty());
        assert_eq!((s.cp, s.cb), (0, 0));
    }

    #[test]
    fn single_task_single_node() {
        let tasks = vec![Task::new(1, 1000, 0.0, 100.0)];
        let nodes = vec![FogNode::new(7, 1000.0)];
        let s = wgap_schedule(&tasks, &nodes, &FaultModel::default(), &cfg());
        assert_eq!(s.assignment[&TaskId(1)], NodeId(7));
    }

    #[test]
    fn hopeless_task_is_deferred_then_fails() {
        let tasks = vec![Task::new(1, 2000, 0.0, 1.0)];
        let nodes = vec![FogNode::new(1, 1000.0), FogNode::new(2, 1500.0)];
        let (s, _) = schedule_at_level(&tasks, &nodes, 1.0, &cfg());
        assert_eq!(s.cp, 1);
        assert_eq!(s.backup_list, vec![TaskId(1)]);
        assert_eq!(s.failed, vec![TaskId(1)]);
        assert_eq!(s.cb, 1);
        assert!(s.entries.is_empty());
    }

    #[test]
    fn backup_never_shares_the_primary_node() {
        let task = Task::new(1, 1000, 0.0, 10.0);
        let nodes = vec![FogNode::new(1, 2000.0), FogNode::new(2, 1000.0)];
        let free: Vec<NodeSlots> = nodes.iter().map(NodeSlots::for_node).collect();
        let c = place_backup(&task, &nodes, 1.0, &free, Some(0), 0.5, 9.5, &cfg()).unwrap();
        assert_eq!(c.node, 1);
        assert!(close(c.start, 0.5));

        let single = vec![FogNode::new(1, 2000.0)];
        let free: Vec<NodeSlots> = single.iter().map(NodeSlots::for_node).collect();
        assert!(place_backup(&task, &single, 1.0, &free, Some(0), 0.5, 9.5, &cfg()).is_none());
    }

    #[test]
    fn backup_must_fit_remaining_budget() {
        // ExT on the only other node is 0.6 s, budget 0.5 s.
        let task = Task::new(1, 600, 0.0, 10.0);
        let nodes = vec![FogNode::new(1, 1000.0), FogNode::new(2, 1000.0)];
        let free: Vec<NodeSlots> = nodes.iter().map(NodeSlots::for_node).collect();
        assert!(place_backup(&task, &nodes, 1.0, &free, Some(0), 0.0, 0.5, &cfg()).is_none());
        assert!(place_backup(&task, &nodes, 1.0, &free, Some(0), 0.0, 0.7, &cfg()).is_some());
    }

    #[test]
    fn lowest_feasible_level_wins() {
        let tasks = vec![Task::new(1, 1000, 0.0, 10.0)];
        let nodes = vec![FogNode::new(1, 1000.0)];
        let dvfs = DvfsConfig::new(vec![0.6, 1.0]);
        let (s, stats) = gap_schedule_with_stats(&tasks, &nodes, &dvfs, &cfg());
        assert_eq!(s.selected_rho, 0.6);
        assert_eq!(stats.constructions, 2);
        let full = wgap_schedule(&tasks, &nodes, &FaultModel::default(), &cfg());
        let e_gap = planned_energy(&nodes, &s);
        let e_full = planned_energy(&nodes, &full);
        assert!(close(e_gap, 0.36 * e_full));
        assert_eq!(full.selected_rho, 1.0);
    }

    #[test]
    fn tight_instance_keeps_full_speed() {
        // 1 s at full speed, 1.67 s at 0.6: only full speed meets 1.2 s.
        let tasks = vec![Task::new(1, 1000, 0.0, 1.2)];
        let nodes = vec![FogNode::new(1, 1000.0)];
        let dvfs = DvfsConfig::new(vec![0.6, 1.0]);
        let s = gap_schedule(&tasks, &nodes, &dvfs, &FaultModel::default(), &cfg());
        assert_eq!(s.selected_rho, 1.0);
        assert!(s.failed.is_empty());
    }

    #[test]
    fn empty_input_selects_lowest_level() {
        let nodes = vec![FogNode::new(1, 1000.0)];
        let s = gap_schedule(
            &[],
            &nodes,
            &DvfsConfig::default(),
            &FaultModel::default(),
            &cfg(),
        );
        assert!(s.entries.is_empty());
        assert_eq!(s.selected_rho, 0.6);
    }

    #[test]
    fn wgap_equals_gap_with_full_speed_only() {
        let tasks: Vec<Task> = (0..12)
            .map(|i| {
                Task::new(
                    i,
                    1000 + 80 * i as u64,
                    0.1 * i as f64,
                    2.0 + 0.7 * i as f64,
                )
            })
            .collect();
        let nodes = vec![
            FogNode::new(1, 1000.0),
            FogNode::new(2, 1700.0).with_slots(2),
        ];
        let fm = FaultModel::default();
        assert_eq!(
            wgap_schedule(&tasks, &nodes, &fm, &cfg()),
            gap_schedule(&tasks, &nodes, &DvfsConfig::full_only(), &fm, &cfg())
        );
    }

    #[test]
    fn node_too_small_is_never_chosen() {
        let tasks = vec![Task::new(1, 1000, 0.0, 10.0).with_npe(4)];
        let nodes = vec![
            FogNode::new(1, 2000.0).with_slots(2),
            FogNode::new(2, 1000.0).with_slots(4),
        ];
        let (s, _) = schedule_at_level(&tasks, &nodes, 1.0, &cfg());
        assert_eq!(s.assignment[&TaskId(1)], NodeId(2));
    }
}
