//! Experiment configuration: a JSON file, overridden field by field from the command line.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gapsim_core::model::validation_errors;
use gapsim_core::{
    DvfsConfig, FaultModel, GapConfig, Instance, MakespanMode, PsoConfig, WorkloadSpec,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Gap,
    Wgap,
    Fcfs,
    Sjf,
    Rr,
    Pso,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Gap,
        Algorithm::Wgap,
        Algorithm::Fcfs,
        Algorithm::Sjf,
        Algorithm::Rr,
        Algorithm::Pso,
    ];

    /// The four comparison schedulers.
    pub const BASELINES: [Algorithm; 4] = [
        Algorithm::Fcfs,
        Algorithm::Sjf,
        Algorithm::Rr,
        Algorithm::Pso,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Gap => "gap",
            Algorithm::Wgap => "wgap",
            Algorithm::Fcfs => "fcfs",
            Algorithm::Sjf => "sjf",
            Algorithm::Rr => "rr",
            Algorithm::Pso => "pso",
        }
    }

    /// Whether faulted primaries get a backup at runtime.
    pub fn recovers(self) -> bool {
        matches!(self, Algorithm::Gap | Algorithm::Wgap)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| CliError::Usage(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Csv,
    Svg,
    Trace,
}

impl FromStr for Emit {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Emit::Csv),
            "svg" => Ok(Emit::Svg),
            "trace" => Ok(Emit::Trace),
            _ => Err(CliError::Usage(format!("unknown emit target `{s}`"))),
        }
    }
}

/// Where instances come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Workload {
    /// Generated; `n_tasks`, `n_vms` and `seed` are replaced per sweep cell.
    Generated(WorkloadSpec),
    /// A fixed instance file, replayed once per seed with fresh fault draws.
    Instance(PathBuf),
}

impl Default for Workload {
    fn default() -> Self {
        Workload::Generated(WorkloadSpec::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sweep {
    /// Task counts at 100 VMs, then VM counts at 1000 tasks.
    Paper,
}

impl FromStr for Sweep {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "paper" => Ok(Sweep::Paper),
            _ => Err(CliError::Usage(format!("unknown sweep `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithms: Vec<Algorithm>,
    pub workload: Workload,
    pub sweep: Option<Sweep>,
    /// Replaces the fault model of every instance when set. Generated instances otherwise
    /// use the default model; instance files keep their own.
    pub fault_model: Option<FaultModel>,
    /// Replaces the DVFS levels of every instance when set.
    pub dvfs: Option<DvfsConfig>,
    pub seeds: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub emit: Vec<Emit>,
    /// Writes every generated instance under `instances/`.
    pub dump_instance: bool,
    pub gap: GapConfig,
    pub pso: PsoConfig,
    pub makespan: MakespanMode,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algorithms: Algorithm::ALL.to_vec(),
            workload: Workload::default(),
            sweep: None,
            fault_model: None,
            dvfs: None,
            seeds: 1,
            master_seed: 1,
            output_dir: PathBuf::from("out"),
            emit: vec![Emit::Csv],
            dump_instance: false,
            gap: GapConfig::default(),
            pso: PsoConfig::default(),
            makespan: MakespanMode::default(),
            threads: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn emits(&self, e: Emit) -> bool {
        self.emit.contains(&e)
    }

    /// Every violated configuration invariant, as `name: message`.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.algorithms.is_empty() {
            out.push("algorithms: at least one algorithm is required".to_string());
        }
        if self.seeds < 1 {
            out.push("seeds: at least one seed is required".to_string());
        }
        if let Workload::Generated(spec) = &self.workload {
            if let Err(errs) = spec.validate() {
                out.extend(errs.into_iter().map(|e| format!("workload: {e}")));
            }
        }
        if self.sweep.is_some() && matches!(self.workload, Workload::Instance(_)) {
            out.push("sweep: a sweep needs a generated workload".to_string());
        }
        if let Err(errs) = self.pso.validate() {
            out.extend(errs.into_iter().map(|e| format!("pso: {e}")));
        }
        if let MakespanMode::Horizon(h) = self.makespan {
            if h.is_nan() || h <= 0.0 {
                out.push("makespan: horizon must be positive".to_string());
            }
        }
        let probe = Instance {
            tasks: Vec::new(),
            nodes: Vec::new(),
            dvfs: self.dvfs.clone().unwrap_or_default(),
            fault_model: self.fault_model.clone().unwrap_or_default(),
        };
        out.extend(validation_errors(&probe).into_iter().map(|e| e.to_string()));
        out
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::Usage(problems.join("; ")))
        }
    }
}

/// Parses a comma-separated list, rejecting empty entries.
pub fn parse_list<T: FromStr<Err = CliError>>(s: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("gpa".parse::<Algorithm>().is_err());
        assert_eq!(
            parse_list::<Algorithm>("gap, rr").unwrap(),
            vec![Algorithm::Gap, Algorithm::Rr]
        );
    }

    #[test]
    fn default_config_is_valid() {
        assert!(ExperimentConfig::default().problems().is_empty());
    }

    #[test]
    fn broken_dvfs_is_named() {
        let cfg = ExperimentConfig {
            dvfs: Some(DvfsConfig::new(vec![0.9, 0.7])),
            ..ExperimentConfig::default()
        };
        let problems = cfg.problems();
        assert!(
            problems.iter().any(|p| p.contains("dvfs.levels")),
            "{problems:?}"
        );
    }

    #[test]
    fn empty_algorithms_and_zero_seeds_rejected() {
        let cfg = ExperimentConfig {
            algorithms: vec![],
            seeds: 0,
            ..ExperimentConfig::default()
        };
        assert_eq!(cfg.problems().len(), 2);
    }

    #[test]
    fn config_json_round_trips() {
        let cfg = ExperimentConfig {
            sweep: Some(Sweep::Paper),
            emit: vec![Emit::Csv, Emit::Svg],
            ..ExperimentConfig::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(
            serde_json::from_str::<ExperimentConfig>(&text).unwrap(),
            cfg
        );
        let partial: ExperimentConfig = serde_json::from_str(r#"{"seeds": 3}"#).unwrap();
        assert_eq!(partial.seeds, 3);
        assert_eq!(partial.algorithms.len(), 6);
    }
}
