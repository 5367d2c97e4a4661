//! Runs every (scenario, seed, algorithm) combination of a config and writes the artifacts.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gapsim_core::model::validation_errors;
use gapsim_core::reliability::derive_seed;
use gapsim_core::sim::peak_occupancy;
use gapsim_core::workload::paper_sweep;
use gapsim_core::{
    fcfs_schedule, gap_schedule, generate, pso_schedule, rr_schedule, run, sjf_schedule,
    wgap_schedule, FaultSampler, Instance, MetricsReport, Phase, Recovery, RunTrace, Schedule,
    SimConfig, WorkloadSpec,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::charts;
use crate::config::{Algorithm, Emit, ExperimentConfig, Sweep, Workload};
use crate::error::CliError;

/// Sub-stream of a cell seed that drives fault draws. Shared by all algorithms of a cell.
const FAULT_STREAM: u64 = 0xFA;
/// Sub-stream of a cell seed that drives the particle swarm.
const PSO_STREAM: u64 = 0x50;

/// Column order of `results.csv`.
pub const CSV_HEADER: [&str; 15] = [
    "scenario_id",
    "algorithm",
    "seed",
    "n_tasks",
    "n_vms",
    "selected_rho",
    "total_energy_j",
    "act_s",
    "awt_s",
    "avg_power_w",
    "cp",
    "cb",
    "missed_deadlines",
    "reliability_estimate",
    "wall_ms",
];

/// One line of `results.csv`. Averages are empty when no task completed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub scenario_id: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub n_tasks: usize,
    pub n_vms: usize,
    pub selected_rho: f64,
    pub total_energy_j: f64,
    pub act_s: Option<f64>,
    pub awt_s: Option<f64>,
    pub avg_power_w: f64,
    pub cp: usize,
    pub cb: usize,
    pub missed_deadlines: usize,
    pub reliability_estimate: f64,
    pub wall_ms: f64,
    #[serde(skip)]
    pub scenario_index: usize,
    #[serde(skip)]
    pub seed_index: usize,
}

impl Row {
    fn sort_key(&self) -> (usize, Algorithm, usize) {
        (self.scenario_index, self.algorithm, self.seed_index)
    }
}

/// Result of [`run_experiment`]: rows in canonical order and the files written.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub rows: Vec<Row>,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone)]
enum Source {
    Spec(WorkloadSpec),
    Fixed(Instance),
}

#[derive(Debug, Clone)]
struct Cell {
    scenario_id: String,
    scenario_index: usize,
    seed_index: usize,
    seed: u64,
    source: Source,
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
    Instance::from_json(&text)
        .map_err(|e| CliError::Usage(format!("invalid instance {}: {e}", path.display())))
}

fn cells(cfg: &ExperimentConfig) -> Result<Vec<Cell>, CliError> {
    match (&cfg.workload, cfg.sweep) {
        (Workload::Generated(spec), Some(Sweep::Paper)) => {
            Ok(paper_sweep(spec, cfg.master_seed, cfg.seeds)
                .into_iter()
                .map(|p| Cell {
                    scenario_id: p.scenario_id,
                    scenario_index: p.scenario_index,
                    seed_index: p.seed_index,
                    seed: p.spec.seed,
                    source: Source::Spec(p.spec),
                })
                .collect())
        }
        (Workload::Generated(spec), None) => Ok((0..cfg.seeds)
            .map(|k| {
                let seed = derive_seed(cfg.master_seed, &[k as u64]);
                Cell {
                    scenario_id: format!("tasks-{}-vms-{}", spec.n_tasks, spec.n_vms),
                    scenario_index: 0,
                    seed_index: k,
                    seed,
                    source: Source::Spec(WorkloadSpec {
                        seed,
                        ..spec.clone()
                    }),
                }
            })
            .collect()),
        (Workload::Instance(path), None) => {
            let instance = load_instance(path)?;
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "instance".to_string());
            Ok((0..cfg.seeds)
                .map(|k| Cell {
                    scenario_id: id.clone(),
                    scenario_index: 0,
                    seed_index: k,
                    seed: derive_seed(cfg.master_seed, &[k as u64]),
                    source: Source::Fixed(instance.clone()),
                })
                .collect())
        }
        (Workload::Instance(_), Some(_)) => Err(CliError::Usage(
            "a sweep needs a generated workload".to_string(),
        )),
    }
}

fn materialize(cfg: &ExperimentConfig, cell: &Cell) -> Result<Instance, CliError> {
    let mut instance = match &cell.source {
        Source::Spec(spec) => {
            let (tasks, nodes) = generate(spec);
            Instance::new(tasks, nodes)
        }
        Source::Fixed(instance) => instance.clone(),
    };
    if let Some(fm) = &cfg.fault_model {
        instance.fault_model = fm.clone();
    }
    if let Some(dvfs) = &cfg.dvfs {
        instance.dvfs = dvfs.clone();
    }
    let errors = validation_errors(&instance);
    if errors.is_empty() {
        Ok(instance)
    } else {
        let list: Vec<String> = errors.iter().map(ToString::to_string).collect();
        Err(CliError::Usage(format!(
            "instance for {} is invalid: {}",
            cell.scenario_id,
            list.join("; ")
        )))
    }
}

/// Builds the plan of `algorithm` for `instance`. `seed` only matters for the swarm.
pub fn schedule_for(
    algorithm: Algorithm,
    instance: &Instance,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Schedule {
    let (tasks, nodes, fm) = (&instance.tasks, &instance.nodes, &instance.fault_model);
    match algorithm {
        Algorithm::Gap => gap_schedule(tasks, nodes, &instance.dvfs, fm, &cfg.gap),
        Algorithm::Wgap => wgap_schedule(tasks, nodes, fm, &cfg.gap),
        Algorithm::Fcfs => fcfs_schedule(tasks, nodes),
        Algorithm::Sjf => sjf_schedule(tasks, nodes),
        Algorithm::Rr => rr_schedule(tasks, nodes),
        Algorithm::Pso => pso_schedule(tasks, nodes, &cfg.pso, derive_seed(seed, &[PSO_STREAM])),
    }
}

pub fn sim_config(algorithm: Algorithm, cfg: &ExperimentConfig) -> SimConfig {
    SimConfig {
        recovery: if algorithm.recovers() {
            Recovery::Cpb
        } else {
            Recovery::None
        },
        makespan: cfg.makespan,
        gap: cfg.gap,
    }
}

/// Fault sampler for one cell; every algorithm of the cell sees the same stream.
pub fn fault_sampler(seed: u64) -> FaultSampler {
    FaultSampler::new(derive_seed(seed, &[FAULT_STREAM]))
}

/// Structural checks every run must satisfy. Returns the name of the first violated one.
pub fn check_run(
    algorithm: Algorithm,
    instance: &Instance,
    schedule: &Schedule,
    trace: &RunTrace,
) -> Result<(), String> {
    let deadlines: HashMap<_, _> = instance.tasks.iter().map(|t| (t.id, t.deadline)).collect();
    if matches!(algorithm, Algorithm::Gap | Algorithm::Wgap) {
        if let Some(e) = schedule
            .entries
            .iter()
            .find(|e| e.completion > deadlines[&e.task_id])
        {
            return Err(format!(
                "deadline-safety: task {} planned to complete at {} after its deadline {}",
                e.task_id.0, e.completion, deadlines[&e.task_id]
            ));
        }
        if let Some(id) = schedule
            .failed
            .iter()
            .find(|id| schedule.assignment.contains_key(id))
        {
            return Err(format!(
                "deadline-safety: failed task {} also has a placement",
                id.0
            ));
        }
    }
    let mut primary_node = HashMap::new();
    for x in trace
        .executions
        .iter()
        .filter(|x| x.entry.phase == Phase::Primary)
    {
        primary_node.insert(x.entry.task_id, x.entry.node_id);
    }
    for x in trace
        .executions
        .iter()
        .filter(|x| x.entry.phase == Phase::Backup)
    {
        if primary_node.get(&x.entry.task_id) == Some(&x.entry.node_id) {
            return Err(format!(
                "backup-separation: task {} backed up on its primary's node {}",
                x.entry.task_id.0, x.entry.node_id.0
            ));
        }
    }
    let slots: HashMap<_, _> = instance.nodes.iter().map(|n| (n.id, n.npe_slots)).collect();
    for (node, peak) in peak_occupancy(trace) {
        if peak > slots[&node] {
            return Err(format!(
                "node-capacity: node {} ran {peak} processor elements on {} slots",
                node.0, slots[&node]
            ));
        }
    }
    Ok(())
}

fn row(
    cell: &Cell,
    algorithm: Algorithm,
    instance: &Instance,
    schedule: &Schedule,
    m: &MetricsReport,
    wall_ms: f64,
) -> Row {
    Row {
        scenario_id: cell.scenario_id.clone(),
        algorithm,
        seed: cell.seed,
        n_tasks: instance.tasks.len(),
        n_vms: instance.nodes.len(),
        selected_rho: schedule.selected_rho,
        total_energy_j: m.total_energy,
        act_s: m.avg_completion,
        awt_s: m.avg_wait,
        avg_power_w: m.avg_power,
        cp: m.cp,
        cb: m.cb,
        missed_deadlines: m.missed_deadlines,
        reliability_estimate: m.reliability_estimate,
        // Whole microseconds keep the column short.
        wall_ms: (wall_ms * 1000.0).round() / 1000.0,
        scenario_index: cell.scenario_index,
        seed_index: cell.seed_index,
    }
}

fn run_cell(cfg: &ExperimentConfig, cell: &Cell) -> Result<(Vec<Row>, Vec<PathBuf>), CliError> {
    let instance = materialize(cfg, cell)?;
    let mut files = Vec::new();
    let stem = format!("{}_seed{}", cell.scenario_id, cell.seed_index);
    if cfg.dump_instance {
        let path = cfg
            .output_dir
            .join("instances")
            .join(format!("{stem}.json"));
        fs::write(&path, instance.to_json() + "\n").map_err(|e| CliError::io(path.display(), e))?;
        files.push(path);
    }
    let mut rows = Vec::with_capacity(cfg.algorithms.len());
    for &algorithm in &cfg.algorithms {
        let t0 = Instant::now();
        let schedule = schedule_for(algorithm, &instance, cfg, cell.seed);
        let mut sampler = fault_sampler(cell.seed);
        let (trace, metrics) = run(
            &schedule,
            &instance,
            &instance.fault_model,
            &mut sampler,
            &sim_config(algorithm, cfg),
        )
        .map_err(|e| CliError::Invariant(format!("{algorithm} on {stem}: {e}")))?;
        let wall_ms = t0.elapsed().as_secs_f64() * 1e3;
        check_run(algorithm, &instance, &schedule, &trace)
            .map_err(|msg| CliError::Invariant(format!("{algorithm} on {stem}: {msg}")))?;
        if cfg.emits(Emit::Trace) {
            let path = cfg
                .output_dir
                .join("traces")
                .join(format!("{stem}_{algorithm}.jsonl"));
            let file = File::create(&path).map_err(|e| CliError::io(path.display(), e))?;
            trace
                .write_events(BufWriter::new(file))
                .map_err(|e| CliError::io(path.display(), e))?;
            files.push(path);
        }
        rows.push(row(
            cell, algorithm, &instance, &schedule, &metrics, wall_ms,
        ));
    }
    Ok((rows, files))
}

/// Serializes rows in the documented column order with LF line endings.
pub fn write_csv<W: std::io::Write>(rows: &[Row], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path.display(), e))
}

/// Runs the experiment described by `cfg` and writes its artifacts under `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let cells = cells(cfg)?;
    create_dir(&cfg.output_dir)?;
    if cfg.dump_instance {
        create_dir(&cfg.output_dir.join("instances"))?;
    }
    if cfg.emits(Emit::Trace) {
        create_dir(&cfg.output_dir.join("traces"))?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;
    let per_cell: Vec<(Vec<Row>, Vec<PathBuf>)> = pool.install(|| {
        cells
            .par_iter()
            .map(|c| run_cell(cfg, c))
            .collect::<Result<_, _>>()
    })?;

    let mut outcome = Outcome::default();
    for (rows, files) in per_cell {
        outcome.rows.extend(rows);
        outcome.files.extend(files);
    }
    outcome.rows.sort_by_key(Row::sort_key);
    outcome.files.sort();

    if cfg.emits(Emit::Csv) {
        let path = cfg.output_dir.join("results.csv");
        let file = File::create(&path).map_err(|e| CliError::io(path.display(), e))?;
        write_csv(&outcome.rows, BufWriter::new(file))
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        outcome.files.push(path);
    }
    if cfg.emits(Emit::Svg) {
        let dir = cfg.output_dir.join("charts");
        create_dir(&dir)?;
        for (name, svg) in charts::render_all(&outcome.rows) {
            let path = dir.join(name);
            fs::write(&path, svg).map_err(|e| CliError::io(path.display(), e))?;
            outcome.files.push(path);
        }
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(dir: &Path) -> ExperimentConfig {
        ExperimentConfig {
            workload: Workload::Generated(WorkloadSpec {
                n_tasks: 10,
                n_vms: 3,
                ..WorkloadSpec::default()
            }),
            output_dir: dir.to_path_buf(),
            threads: 1,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn single_algorithm_single_seed_gives_one_row() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            algorithms: vec![Algorithm::Gap],
            ..tiny(dir.path())
        };
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.rows.len(), 1);
        let text = fs::read_to_string(dir.path().join("results.csv")).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn rows_are_in_canonical_order() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            algorithms: vec![Algorithm::Rr, Algorithm::Gap],
            seeds: 3,
            ..tiny(dir.path())
        };
        let out = run_experiment(&cfg).unwrap();
        let keys: Vec<_> = out.rows.iter().map(Row::sort_key).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(out.rows[0].algorithm, Algorithm::Gap);
    }

    #[test]
    fn baselines_run_at_full_speed() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&tiny(dir.path())).unwrap();
        for r in out
            .rows
            .iter()
            .filter(|r| Algorithm::BASELINES.contains(&r.algorithm))
        {
            assert_eq!(r.selected_rho, 1.0);
        }
    }

    #[test]
    fn sweep_with_instance_file_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            workload: Workload::Instance(dir.path().join("x.json")),
            sweep: Some(Sweep::Paper),
            ..tiny(dir.path())
        };
        assert!(matches!(run_experiment(&cfg), Err(CliError::Usage(_))));
    }

    #[test]
    fn missing_instance_file_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            workload: Workload::Instance(dir.path().join("missing.json")),
            ..tiny(dir.path())
        };
        assert!(matches!(run_experiment(&cfg), Err(CliError::Io(_))));
    }
}
