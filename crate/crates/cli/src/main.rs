use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gapsim_cli::config::{parse_list, Workload};
use gapsim_cli::{run_experiment, verify, CliError, ExperimentConfig};

/// Runs scheduling experiments on generated or recorded fog workloads.
#[derive(Parser, Debug)]
#[command(name = "gapsim", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the experiment (the default).
    Run(RunArgs),
    /// Run the property and oracle suite and print a pass/fail table.
    Verify(RunArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// JSON experiment configuration; flags override its fields.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Seeds per scenario.
    #[arg(long, value_name = "N")]
    seeds: Option<usize>,
    /// Comma-separated subset of gap,wgap,fcfs,sjf,rr,pso.
    #[arg(long, value_name = "LIST")]
    algorithms: Option<String>,
    #[arg(long, value_name = "N")]
    tasks: Option<usize>,
    #[arg(long, value_name = "M")]
    vms: Option<usize>,
    /// Replay a recorded instance file instead of generating one.
    #[arg(long, value_name = "PATH", conflicts_with_all = ["tasks", "vms"])]
    instance: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Comma-separated subset of csv,svg,trace.
    #[arg(long, value_name = "LIST")]
    emit: Option<String>,
    /// Named scenario sweep; `paper` is the only one.
    #[arg(long, value_name = "NAME")]
    sweep: Option<String>,
    /// Write every generated instance as JSON under `instances/`.
    #[arg(long)]
    dump_instance: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

impl RunArgs {
    fn into_config(self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(seeds) = self.seeds {
            cfg.seeds = seeds;
        }
        if let Some(list) = &self.algorithms {
            cfg.algorithms = parse_list(list)?;
        }
        if let Some(path) = self.instance {
            cfg.workload = Workload::Instance(path);
        }
        if self.tasks.is_some() || self.vms.is_some() {
            let Workload::Generated(spec) = &mut cfg.workload else {
                return Err(CliError::Usage(
                    "--tasks/--vms need a generated workload".to_string(),
                ));
            };
            if let Some(n) = self.tasks {
                spec.n_tasks = n;
            }
            if let Some(m) = self.vms {
                spec.n_vms = m;
            }
        }
        if let Some(out) = self.out {
            cfg.output_dir = out;
        }
        if let Some(list) = &self.emit {
            cfg.emit = parse_list(list)?;
        }
        if let Some(name) = &self.sweep {
            cfg.sweep = Some(name.parse()?);
        }
        if self.dump_instance {
            cfg.dump_instance = true;
        }
        if let Some(t) = self.threads {
            cfg.threads = t;
        }
        Ok(cfg)
    }
}

fn run(args: RunArgs) -> Result<(), CliError> {
    let cfg = args.into_config()?;
    let outcome = run_experiment(&cfg)?;
    eprintln!(
        "{} runs, {} files written to {}",
        outcome.rows.len(),
        outcome.files.len(),
        cfg.output_dir.display()
    );
    Ok(())
}

fn verify(args: RunArgs) -> Result<(), CliError> {
    let cfg = args.into_config()?;
    let checks = verify::run_all(&cfg);
    print!("{}", verify::table(&checks));
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invariant(failed.join(", ")))
    }
}

/// Parses `args` and runs the selected command, returning the process exit code.
fn dispatch<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                eprint!("{}", e.render());
                return 1;
            }
            print!("{}", e.render());
            return 0;
        }
    };
    let result = match cli.command {
        Some(Command::Run(args)) => run(args),
        Some(Command::Verify(args)) => verify(args),
        None => run(cli.run),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gapsim: {e}");
            e.exit_code()
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(dispatch(std::env::args_os()))
}
