//! Domain records shared by every scheduler, the simulator and the experiment front end.
//!
//! Records are plain values. [`validate_instance`] is the single gate that checks every
//! invariant and reports all violations at once.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of a [`Task`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskId(pub u32);

/// Identifier of a [`FogNode`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

/// Largest processor-element demand a task may declare.
pub const MAX_TASK_NPE: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Primary,
    Backup,
}

/// A unit of work submitted by an end device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: TaskId,
    /// Work amount in million instructions.
    pub length: u64,
    /// Absolute deadline, seconds from the time origin.
    pub deadline: f64,
    /// Submission time, seconds.
    pub submit_time: f64,
    /// Processor elements occupied while running.
    pub npe: u32,
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backup_of: Option<TaskId>,
}

impl Task {
    /// A primary task with a single processor element.
    pub fn new(id: u32, length: u64, submit_time: f64, deadline: f64) -> Self {
        Self {
            id: TaskId(id),
            length,
            deadline,
            submit_time,
            npe: 1,
            role: Role::Primary,
            backup_of: None,
        }
    }

    pub fn with_npe(mut self, npe: u32) -> Self {
        self.npe = npe;
        self
    }
}

/// A fog resource (VM) with its DVFS envelope and power coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FogNode {
    pub id: NodeId,
    /// Processing rate at full frequency, MI/s.
    pub mips: f64,
    /// Bytes per second. Carried as configuration only.
    pub bandwidth: f64,
    /// Megabytes. Carried as configuration only.
    pub ram: f64,
    /// Concurrent processor elements.
    pub npe_slots: u32,
    pub v_max: f64,
    pub f_max: f64,
    /// Switching activity factor in [0, 1].
    pub activity: f64,
    /// Effective load capacitance in farads.
    pub load_cap: f64,
    /// Watts drawn per active second on top of the dynamic power.
    #[serde(default)]
    pub static_power: f64,
}

impl FogNode {
    /// Node with the default host profile: 1.2 V, 1 GHz, activity 0.5, 2 nF.
    pub fn new(id: u32, mips: f64) -> Self {
        Self {
            id: NodeId(id),
            mips,
            bandwidth: 1000.0,
            ram: 256.0,
            npe_slots: 1,
            v_max: 1.2,
            f_max: 1e9,
            activity: 0.5,
            load_cap: 2e-9,
            static_power: 0.0,
        }
    }

    pub fn with_slots(mut self, npe_slots: u32) -> Self {
        self.npe_slots = npe_slots;
        self
    }

    /// Whether a task of the given processor-element demand can ever run here.
    pub fn can_host(&self, npe: u32) -> bool {
        npe <= self.npe_slots
    }
}

/// The ordered list of DVFS scale factors a scheduler may choose from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DvfsConfig {
    pub levels: Vec<f64>,
}

impl DvfsConfig {
    pub fn new(levels: Vec<f64>) -> Self {
        Self { levels }
    }

    /// Full speed only.
    pub fn full_only() -> Self {
        Self { levels: vec![1.0] }
    }

    pub fn lowest(&self) -> f64 {
        self.levels.first().copied().unwrap_or(1.0)
    }

    pub fn contains(&self, rho: f64) -> bool {
        self.levels.contains(&rho)
    }
}

impl Default for DvfsConfig {
    fn default() -> Self {
        Self {
            levels: vec![0.6, 0.7, 0.8, 0.9, 1.0],
        }
    }
}

/// Transient fault-rate parameters.
///
/// `d` is the dimensionless sensitivity of the frequency-based rate; `d_volt` is the
/// voltage-based sensitivity in volts. The two rates agree for every scale factor when
/// `d_volt = v_max * (1 - f_min) / d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultModel {
    /// Faults per second at maximum frequency and voltage.
    pub lambda0: f64,
    pub d: f64,
    pub f_min: f64,
    #[serde(default = "default_d_volt")]
    pub d_volt: f64,
}

fn default_d_volt() -> f64 {
    0.2
}

impl FaultModel {
    pub fn new(lambda0: f64, d: f64, f_min: f64) -> Self {
        Self {
            lambda0,
            d,
            f_min,
            d_volt: default_d_volt(),
        }
    }

    /// A model that never injects faults.
    pub fn fault_free() -> Self {
        Self::new(0.0, 3.0, 0.5)
    }
}

impl Default for FaultModel {
    fn default() -> Self {
        Self::new(1e-5, 3.0, 0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    Primary,
    Backup,
}

/// One execution of a task on a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub task_id: TaskId,
    pub node_id: NodeId,
    pub start: f64,
    pub exec_time: f64,
    pub completion: f64,
    pub rho: f64,
    pub phase: Phase,
}

impl ScheduleEntry {
    pub fn new(
        task_id: TaskId,
        node_id: NodeId,
        start: f64,
        exec_time: f64,
        rho: f64,
        phase: Phase,
    ) -> Self {
        Self {
            task_id,
            node_id,
            start,
            exec_time,
            completion: start + exec_time,
            rho,
            phase,
        }
    }
}

/// A complete static plan: entries plus the bookkeeping lists of the two-phase mapper.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Schedule {
    /// Entries in the order they were reserved.
    pub entries: Vec<ScheduleEntry>,
    /// Task to node of its planned execution.
    pub assignment: BTreeMap<TaskId, NodeId>,
    pub selected_rho: f64,
    /// Tasks deferred to the backup phase.
    pub backup_list: Vec<TaskId>,
    /// Tasks that were never placed.
    pub failed: Vec<TaskId>,
    pub cp: usize,
    pub cb: usize,
}

impl Schedule {
    pub fn empty(rho: f64) -> Self {
        Self {
            selected_rho: rho,
            ..Self::default()
        }
    }

    pub fn entry_for(&self, task: TaskId, phase: Phase) -> Option<&ScheduleEntry> {
        self.entries
            .iter()
            .find(|e| e.task_id == task && e.phase == phase)
    }

    pub(crate) fn push(&mut self, entry: ScheduleEntry) {
        self.assignment.insert(entry.task_id, entry.node_id);
        self.entries.push(entry);
    }
}

/// A primary execution interrupted by a transient fault.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultEvent {
    pub task_id: TaskId,
    pub node_id: NodeId,
    /// Seconds the execution ran before the fault.
    pub elapsed: f64,
}

/// Aggregate metrics of one simulated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub total_energy: f64,
    /// Mean completion time; absent when no task executed to completion.
    pub avg_completion: Option<f64>,
    /// Mean wait time; absent when no task executed to completion.
    pub avg_wait: Option<f64>,
    pub avg_power: f64,
    pub makespan: f64,
    pub cp: usize,
    pub cb: usize,
    pub missed_deadlines: usize,
    pub reliability_estimate: f64,
}

/// A full problem instance. This is also the on-disk instance file layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub tasks: Vec<Task>,
    pub nodes: Vec<FogNode>,
    pub dvfs: DvfsConfig,
    pub fault_model: FaultModel,
}

impl Instance {
    pub fn new(tasks: Vec<Task>, nodes: Vec<FogNode>) -> Self {
        Self {
            tasks,
            nodes,
            dvfs: DvfsConfig::default(),
            fault_model: FaultModel::default(),
        }
    }

    pub fn task(&self, id: TaskId) -> Option<&Task> {
        self.tasks.iter().find(|t| t.id == id)
    }

    pub fn node(&self, id: NodeId) -> Option<&FogNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// The record a validation error points at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecordRef {
    Task(TaskId),
    Node(NodeId),
    Dvfs,
    FaultModel,
}

impl fmt::Display for RecordRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordRef::Task(id) => write!(f, "task {}", id.0),
            RecordRef::Node(id) => write!(f, "node {}", id.0),
            RecordRef::Dvfs => f.write_str("dvfs"),
            RecordRef::FaultModel => f.write_str("fault_model"),
        }
    }
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{record}.{field}: {message}")]
pub struct ValidationError {
    pub record: RecordRef,
    pub field: &'static str,
    pub message: String,
}

struct Collector(Vec<ValidationError>);

impl Collector {
    fn check(&mut self, ok: bool, record: RecordRef, field: &'static str, message: &str) {
        if !ok {
            self.0.push(ValidationError {
                record,
                field,
                message: message.to_string(),
            });
        }
    }
}

/// Checks every record invariant and returns the instance untouched, or all violations.
pub fn validate_instance(instance: Instance) -> Result<Instance, Vec<ValidationError>> {
    let errors = validation_errors(&instance);
    if errors.is_empty() {
        Ok(instance)
    } else {
        Err(errors)
    }
}

pub fn validation_errors(instance: &Instance) -> Vec<ValidationError> {
    let mut c = Collector(Vec::new());

    let mut task_ids = BTreeSet::new();
    for t in &instance.tasks {
        let r = RecordRef::Task(t.id);
        c.check(task_ids.insert(t.id), r, "id", "task id must be unique");
        c.check(t.length > 0, r, "length", "length must be positive");
        c.check(
            t.submit_time >= 0.0 && t.submit_time.is_finite(),
            r,
            "submit_time",
            "submit_time must be non-negative",
        );
        // NaN deadlines fail this comparison too.
        c.check(
            t.deadline > t.submit_time && t.deadline.is_finite(),
            r,
            "deadline",
            "deadline must exceed submit_time",
        );
        c.check(
            (1..=MAX_TASK_NPE).contains(&t.npe),
            r,
            "npe",
            "npe must lie in [1, 8]",
        );
        c.check(
            (t.role == Role::Backup) == t.backup_of.is_some(),
            r,
            "backup_of",
            "backup_of must be set iff role is Backup",
        );
    }
    for t in &instance.tasks {
        if let Some(of) = t.backup_of {
            c.check(
                task_ids.contains(&of),
                RecordRef::Task(t.id),
                "backup_of",
                "backup_of must name an existing task",
            );
        }
    }

    let mut node_ids = BTreeSet::new();
    for n in &instance.nodes {
        let r = RecordRef::Node(n.id);
        c.check(node_ids.insert(n.id), r, "id", "node id must be unique");
        c.check(
            n.mips > 0.0 && n.mips.is_finite(),
            r,
            "mips",
            "mips must be positive",
        );
        c.check(
            n.v_max > 0.0 && n.v_max.is_finite(),
            r,
            "v_max",
            "v_max must be positive",
        );
        c.check(
            n.f_max > 0.0 && n.f_max.is_finite(),
            r,
            "f_max",
            "f_max must be positive",
        );
        c.check(
            n.npe_slots >= 1,
            r,
            "npe_slots",
            "npe_slots must be at least 1",
        );
        c.check(
            (0.0..=1.0).contains(&n.activity),
            r,
            "activity",
            "activity must lie in [0, 1]",
        );
        c.check(
            n.load_cap >= 0.0,
            r,
            "load_cap",
            "load_cap must be non-negative",
        );
        c.check(
            n.static_power >= 0.0,
            r,
            "static_power",
            "static_power must be non-negative",
        );
    }

    let levels = &instance.dvfs.levels;
    let d = RecordRef::Dvfs;
    c.check(
        levels.iter().all(|&l| l > 0.0 && l <= 1.0),
        d,
        "levels",
        "levels must lie in (0, 1]",
    );
    c.check(
        levels.windows(2).all(|w| w[0] < w[1]),
        d,
        "levels",
        "levels must be strictly increasing",
    );
    c.check(
        levels.contains(&1.0),
        d,
        "levels",
        "levels must contain 1.0",
    );

    let fm = &instance.fault_model;
    let f = RecordRef::FaultModel;
    c.check(
        fm.lambda0 >= 0.0,
        f,
        "lambda0",
        "lambda0 must be non-negative",
    );
    c.check(fm.d > 0.0, f, "d", "d must be positive");
    c.check(
        fm.f_min > 0.0 && fm.f_min < 1.0,
        f,
        "f_min",
        "f_min must lie in (0, 1)",
    );
    c.check(fm.d_volt > 0.0, f, "d_volt", "d_volt must be positive");
    c.check(
        levels.iter().all(|&l| !(l > 0.0 && l < fm.f_min)),
        d,
        "levels",
        "levels must not fall below fault_model.f_min",
    );

    c.0
}
