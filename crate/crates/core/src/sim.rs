//! Deterministic discrete-event execution of a [`Schedule`] under transient faults.
//!
//! Planned entries start at their planned times. Each execution draws one fault decision;
//! a faulted primary is re-executed as a cold backup on another node, placed after all
//! planned work on that node so the plan is never disturbed. Metrics are computed from the
//! resulting trace.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gap::{place_backup, Detection, GapConfig};
use crate::model::{
    FaultEvent, FaultModel, FogNode, Instance, MetricsReport, NodeId, Phase, Schedule,
    ScheduleEntry, Task, TaskId,
};
use crate::numeric;
use crate::power;
use crate::reliability::{execution_fault_probability, FaultSampler};
use crate::slots::NodeSlots;

/// What happens when an execution faults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Recovery {
    /// Dispatch a cold backup on a different node.
    #[default]
    Cpb,
    /// The task is lost.
    None,
}

/// Window used as the denominator of average power.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MakespanMode {
    /// Latest completion minus earliest submission.
    #[default]
    Span,
    /// A fixed number of seconds.
    Horizon(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub recovery: Recovery,
    pub makespan: MakespanMode,
    /// Payoff weights and fault-detection timing used for runtime backups.
    pub gap: GapConfig,
}

/// Event kinds in tie-breaking order for events at the same instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Completion,
    Fault,
    Arrival,
    Start,
    BackupDispatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    #[serde(rename = "task")]
    pub task_id: TaskId,
    #[serde(rename = "node")]
    pub node_id: Option<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskStatus {
    Completed,
    CompletedViaBackup,
    Failed,
}

/// One execution as it actually happened.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Execution {
    /// Actual start, run length and end. For a faulted execution `exec_time` is the time
    /// it ran before the fault was detected.
    pub entry: ScheduleEntry,
    pub npe: u32,
    pub faulted: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunTrace {
    pub events: Vec<Event>,
    pub status: BTreeMap<TaskId, TaskStatus>,
    pub faults: Vec<FaultEvent>,
    pub executions: Vec<Execution>,
    /// Faulted primaries handed to the backup path.
    pub backups_dispatched: usize,
    /// Tasks lost at runtime: backup unplaceable, backup faulted, or no recovery.
    pub runtime_failures: usize,
}

impl RunTrace {
    /// One JSON object per line: `{"time":..,"kind":..,"task":..,"node":..}`.
    pub fn write_events<W: Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Final completion time per non-failed task.
    pub fn completion_times(&self) -> BTreeMap<TaskId, f64> {
        let mut out = BTreeMap::new();
        for x in self.executions.iter().filter(|x| !x.faulted) {
            if matches!(
                self.status.get(&x.entry.task_id),
                Some(TaskStatus::Completed | TaskStatus::CompletedViaBackup)
            ) {
                out.insert(x.entry.task_id, completion_time(&x.entry));
            }
        }
        out
    }

    /// First start per task that executed at all.
    pub fn first_starts(&self) -> BTreeMap<TaskId, &ScheduleEntry> {
        let mut out: BTreeMap<TaskId, &ScheduleEntry> = BTreeMap::new();
        for x in &self.executions {
            out.entry(x.entry.task_id)
                .and_modify(|e| {
                    if x.entry.start < e.start {
                        *e = &x.entry;
                    }
                })
                .or_insert(&x.entry);
        }
        out
    }
}

/// Completion time of an execution: its start plus its run time.
pub fn completion_time(entry: &ScheduleEntry) -> f64 {
    entry.start + entry.exec_time
}

/// Seconds between submission and the start of service.
pub fn wait_time(entry: &ScheduleEntry, task: &Task) -> Result<f64> {
    if entry.start < task.submit_time {
        return Err(Error::StartBeforeSubmit {
            task: task.id,
            start: entry.start,
            submit: task.submit_time,
        });
    }
    Ok(entry.start - task.submit_time)
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| numeric::sum(xs.iter().copied()) / xs.len() as f64)
}

/// Average completion time and average wait over tasks that did not fail.
pub fn averages(trace: &RunTrace, tasks: &[Task]) -> Result<(Option<f64>, Option<f64>)> {
    let by_id: HashMap<TaskId, &Task> = tasks.iter().map(|t| (t.id, t)).collect();
    let cts = trace.completion_times();
    let firsts = trace.first_starts();
    let mut completions = Vec::with_capacity(cts.len());
    let mut waits = Vec::with_capacity(cts.len());
    for (id, ct) in &cts {
        let task = by_id.get(id).ok_or(Error::UnknownTask(*id))?;
        completions.push(*ct);
        waits.push(wait_time(firsts[id], task)?);
    }
    Ok((mean(&completions), mean(&waits)))
}

#[derive(Debug, Clone, Copy)]
enum Action {
    Arrival,
    Start(usize),
    Fault { exec: usize, detect: f64 },
    Completion(usize),
    BackupDispatch { exec: usize },
}

struct Queued {
    time: f64,
    kind: EventKind,
    task: TaskId,
    seq: u64,
    action: Action,
}

impl Queued {
    fn key(&self) -> (EventKind, TaskId, u64) {
        (self.kind, self.task, self.seq)
    }
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then_with(|| self.key().cmp(&other.key()))
    }
}

struct Engine<'a> {
    tasks: &'a [Task],
    nodes: &'a [FogNode],
    task_pos: HashMap<TaskId, usize>,
    node_pos: HashMap<NodeId, usize>,
    fm: &'a FaultModel,
    cfg: &'a SimConfig,
    queue: BinaryHeap<Reverse<Queued>>,
    seq: u64,
    /// Planned or dispatched executions; `faulted` and run time are filled in as they happen.
    runs: Vec<Execution>,
    tail: Vec<NodeSlots>,
    faulted: HashSet<TaskId>,
    trace: RunTrace,
}

impl<'a> Engine<'a> {
    fn push(&mut self, time: f64, kind: EventKind, task: TaskId, action: Action) {
        self.seq += 1;
        self.queue.push(Reverse(Queued {
            time,
            kind,
            task,
            seq: self.seq,
            action,
        }));
    }

    fn log(&mut self, time: f64, kind: EventKind, task: TaskId, node: Option<NodeId>) {
        self.trace.events.push(Event {
            time,
            kind,
            task_id: task,
            node_id: node,
        });
    }

    fn fail(&mut self, task: TaskId) {
        self.trace.status.insert(task, TaskStatus::Failed);
        self.trace.runtime_failures += 1;
    }

    fn step(&mut self, q: Queued, sampler: &mut FaultSampler) -> Result<()> {
        match q.action {
            Action::Arrival => self.log(q.time, EventKind::Arrival, q.task, None),
            Action::Start(x) => {
                let entry = self.runs[x].entry.clone();
                self.log(q.time, EventKind::Start, entry.task_id, Some(entry.node_id));
                let p = execution_fault_probability(self.fm, entry.rho, entry.exec_time)?;
                let draw = sampler.sample_fault(p)?;
                if draw.occurred {
                    let elapsed = draw.elapsed_fraction * entry.exec_time;
                    let detect = match self.cfg.gap.detection {
                        Detection::Immediate => entry.start + elapsed,
                        Detection::AtCompletion => entry.completion,
                    };
                    self.runs[x].faulted = true;
                    self.runs[x].entry.exec_time = detect - entry.start;
                    self.runs[x].entry.completion = detect;
                    self.faulted.insert(entry.task_id);
                    self.trace.faults.push(FaultEvent {
                        task_id: entry.task_id,
                        node_id: entry.node_id,
                        elapsed,
                    });
                    self.push(
                        entry.start + elapsed,
                        EventKind::Fault,
                        entry.task_id,
                        Action::Fault { exec: x, detect },
                    );
                } else {
                    self.push(
                        entry.completion,
                        EventKind::Completion,
                        entry.task_id,
                        Action::Completion(x),
                    );
                }
            }
            Action::Fault { exec, detect } => {
                let entry = &self.runs[exec].entry;
                let (task, node, phase) = (entry.task_id, entry.node_id, entry.phase);
                self.log(q.time, EventKind::Fault, task, Some(node));
                if phase == Phase::Primary && self.cfg.recovery == Recovery::Cpb {
                    self.trace.backups_dispatched += 1;
                    self.push(
                        detect,
                        EventKind::BackupDispatch,
                        task,
                        Action::BackupDispatch { exec },
                    );
                } else {
                    self.fail(task);
                }
            }
            Action::BackupDispatch { exec } => {
                let primary = self.runs[exec].entry.clone();
                let task = &self.tasks[self.task_pos[&primary.task_id]];
                let exclude = self.node_pos[&primary.node_id];
                let placed = place_backup(
                    task,
                    self.nodes,
                    primary.rho,
                    &self.tail,
                    Some(exclude),
                    q.time.max(task.submit_time),
                    task.deadline - q.time,
                    &self.cfg.gap,
                );
                match placed {
                    Some(c) => {
                        let node = &self.nodes[c.node];
                        self.log(q.time, EventKind::BackupDispatch, task.id, Some(node.id));
                        self.tail[c.node].reserve(task.npe, c.start, c.completion);
                        let entry = ScheduleEntry::new(
                            task.id,
                            node.id,
                            c.start,
                            c.exec_time,
                            primary.rho,
                            Phase::Backup,
                        );
                        self.runs.push(Execution {
                            entry,
                            npe: task.npe,
                            faulted: false,
                        });
                        let x = self.runs.len() - 1;
                        self.push(c.start, EventKind::Start, task.id, Action::Start(x));
                    }
                    None => {
                        self.log(q.time, EventKind::BackupDispatch, task.id, None);
                        self.fail(task.id);
                    }
                }
            }
            Action::Completion(x) => {
                let entry = &self.runs[x].entry;
                let (task, node) = (entry.task_id, entry.node_id);
                self.log(q.time, EventKind::Completion, task, Some(node));
                let status = if self.faulted.contains(&task) {
                    TaskStatus::CompletedViaBackup
                } else {
                    TaskStatus::Completed
                };
                self.trace.status.insert(task, status);
            }
        }
        Ok(())
    }
}

/// Executes `schedule` on `instance` with faults drawn from `sampler` at rates from `fm`.
pub fn run(
    schedule: &Schedule,
    instance: &Instance,
    fm: &FaultModel,
    sampler: &mut FaultSampler,
    cfg: &SimConfig,
) -> Result<(RunTrace, MetricsReport)> {
    let tasks = &instance.tasks;
    let nodes = &instance.nodes;
    let task_pos: HashMap<TaskId, usize> =
        tasks.iter().enumerate().map(|(i, t)| (t.id, i)).collect();
    let node_pos: HashMap<NodeId, usize> =
        nodes.iter().enumerate().map(|(j, n)| (n.id, j)).collect();

    let mut runs = Vec::with_capacity(schedule.entries.len());
    for e in &schedule.entries {
        let ti = *task_pos
            .get(&e.task_id)
            .ok_or(Error::UnknownTask(e.task_id))?;
        if !node_pos.contains_key(&e.node_id) {
            return Err(Error::UnknownNode(e.node_id));
        }
        let task = &tasks[ti];
        if e.start < task.submit_time {
            return Err(Error::StartBeforeSubmit {
                task: task.id,
                start: e.start,
                submit: task.submit_time,
            });
        }
        runs.push(Execution {
            entry: e.clone(),
            npe: task.npe,
            faulted: false,
        });
    }
    for id in schedule.failed.iter().chain(schedule.assignment.keys()) {
        if !task_pos.contains_key(id) {
            return Err(Error::UnknownTask(*id));
        }
    }

    let tail = crate::slots::replay(nodes, runs.iter().map(|x| (&x.entry, x.npe)), |e| {
        node_pos.get(&e.node_id).copied()
    });

    let mut engine = Engine {
        tasks,
        nodes,
        task_pos,
        node_pos,
        fm,
        cfg,
        queue: BinaryHeap::new(),
        seq: 0,
        runs,
        tail,
        faulted: HashSet::new(),
        trace: RunTrace::default(),
    };
    for t in tasks {
        engine.push(t.submit_time, EventKind::Arrival, t.id, Action::Arrival);
    }
    for x in 0..engine.runs.len() {
        let e = &engine.runs[x].entry;
        let (start, task) = (e.start, e.task_id);
        engine.push(start, EventKind::Start, task, Action::Start(x));
    }
    while let Some(Reverse(q)) = engine.queue.pop() {
        engine.step(q, sampler)?;
    }

    let mut trace = engine.trace;
    trace.executions = engine.runs;
    for t in tasks {
        trace.status.entry(t.id).or_insert(TaskStatus::Failed);
    }
    let metrics = report(&trace, instance, schedule, cfg)?;
    Ok((trace, metrics))
}

/// Aggregates a finished trace into run metrics.
pub fn report(
    trace: &RunTrace,
    instance: &Instance,
    schedule: &Schedule,
    cfg: &SimConfig,
) -> Result<MetricsReport> {
    let by_id: HashMap<NodeId, &FogNode> = instance.nodes.iter().map(|n| (n.id, n)).collect();
    let mut energy = Vec::with_capacity(trace.executions.len());
    for x in &trace.executions {
        let node = by_id
            .get(&x.entry.node_id)
            .ok_or(Error::UnknownNode(x.entry.node_id))?;
        energy.push(power::entry_energy(node, &x.entry)?);
    }
    let total_energy = numeric::sum(energy);

    let (avg_completion, avg_wait) = averages(trace, &instance.tasks)?;

    let makespan = match cfg.makespan {
        MakespanMode::Horizon(h) => h,
        MakespanMode::Span => {
            let last = trace
                .executions
                .iter()
                .map(|x| x.entry.completion)
                .fold(f64::NEG_INFINITY, f64::max);
            let first = instance
                .tasks
                .iter()
                .map(|t| t.submit_time)
                .fold(f64::INFINITY, f64::min);
            if last.is_finite() && first.is_finite() {
                (last - first).max(0.0)
            } else {
                0.0
            }
        }
    };
    let avg_power = if makespan > 0.0 {
        total_energy / makespan
    } else {
        0.0
    };

    let deadlines: HashMap<TaskId, f64> =
        instance.tasks.iter().map(|t| (t.id, t.deadline)).collect();
    let missed_deadlines = trace
        .completion_times()
        .iter()
        .filter(|(id, ct)| **ct > deadlines[*id])
        .count();

    let n = instance.tasks.len();
    let alive = trace
        .status
        .values()
        .filter(|s| **s != TaskStatus::Failed)
        .count();
    let reliability_estimate = if n == 0 { 1.0 } else { alive as f64 / n as f64 };

    Ok(MetricsReport {
        total_energy,
        avg_completion,
        avg_wait,
        avg_power,
        makespan,
        cp: schedule.cp + trace.backups_dispatched,
        cb: schedule.cb + trace.runtime_failures,
        missed_deadlines,
        reliability_estimate,
    })
}

/// Largest total processor-element demand running concurrently on each node, from the
/// executions in a trace.
pub fn peak_occupancy(trace: &RunTrace) -> BTreeMap<NodeId, u32> {
    let mut edges: BTreeMap<NodeId, Vec<(f64, i64)>> = BTreeMap::new();
    for x in &trace.executions {
        let v = edges.entry(x.entry.node_id).or_default();
        v.push((x.entry.start, x.npe as i64));
        v.push((x.entry.completion, -(x.npe as i64)));
    }
    edges
        .into_iter()
        .map(|(node, mut v)| {
            // Releases before acquisitions at the same instant.
            v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut cur = 0i64;
            let mut peak = 0i64;
            for (_, d) in v {
                cur += d;
                peak = peak.max(cur);
            }
            (node, peak as u32)
        })
        .collect()
}
