//! Energy- and reliability-aware task scheduling for fog nodes.
//!
//! The crate provides the game-theoretic scheduler ([`gap`]) with DVFS level selection and
//! cold primary/backup fault tolerance, comparison schedulers ([`baselines`], [`pso`]), a
//! deterministic discrete-event simulator ([`sim`]), a seeded workload generator
//! ([`workload`]) and an exhaustive reference solver for small instances ([`oracle`]).
//!
//! ```
//! use gapsim_core::{gap_schedule, run, FaultSampler, GapConfig, Instance, FogNode, SimConfig, Task};
//!
//! let instance = Instance::new(
//!     vec![Task::new(1, 1000, 0.0, 2.0), Task::new(2, 1500, 0.0, 1.0)],
//!     vec![FogNode::new(1, 1000.0), FogNode::new(2, 2000.0)],
//! );
//! let schedule = gap_schedule(
//!     &instance.tasks,
//!     &instance.nodes,
//!     &instance.dvfs,
//!     &instance.fault_model,
//!     &GapConfig::default(),
//! );
//! let (_, report) = run(
//!     &schedule,
//!     &instance,
//!     &instance.fault_model,
//!     &mut FaultSampler::new(7),
//!     &SimConfig::default(),
//! )
//! .unwrap();
//! assert!(report.total_energy > 0.0);
//! ```

pub mod baselines;
pub mod error;
pub mod gap;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod power;
pub mod pso;
pub mod reliability;
pub mod sim;
pub mod slots;
pub mod workload;

pub use baselines::{fcfs_schedule, rr_schedule, sjf_schedule};
pub use error::{Error, Result};
pub use gap::{gap_schedule, wgap_schedule, Detection, GapConfig, Payoff};
pub use model::{
    validate_instance, DvfsConfig, FaultEvent, FaultModel, FogNode, Instance, MetricsReport,
    NodeId, Phase, Role, Schedule, ScheduleEntry, Task, TaskId, ValidationError,
};
pub use oracle::{exhaustive, OracleResult};
pub use pso::{pso_schedule, PsoConfig};
pub use reliability::FaultSampler;
pub use sim::{run, MakespanMode, Recovery, RunTrace, SimConfig, TaskStatus};
pub use workload::{generate, paper_sweep, WorkloadSpec};
