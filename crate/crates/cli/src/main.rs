use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qrep::config::{load_config, ExperimentSpec, PolicyChoice, ScenarioKind};
use qrep::output::{write_table, Format, Metadata};
use qrep::sweep::{bounds_table, oracle_table, run_sweep};
use qrep::Error;

#[derive(Parser)]
#[command(name = "qrep", version, about = "Balanced multiplexed quantum repeater simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a single balanced repeater.
    Simulate(Common),
    /// Simulate the sequential standard repeater.
    Standard(Common),
    /// Tabulate the analytical rate and fidelity bounds.
    Bounds(Common),
    /// Solve the exact stationary mismatch distribution (N <= 16).
    Oracle(Common),
    /// Simulate the two-repeater chain.
    Chain(Common),
    /// Run every scenario, policy and grid point of a config file.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment spec (TOML). Without it a one-point example is used.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Total rounds per run including warmup (cycles for the standard repeater).
    #[arg(long, value_name = "U64")]
    rounds: Option<u64>,
    #[arg(long, value_name = "U64")]
    warmup: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "csv|json")]
    format: Option<Format>,
}

fn spec_for(name: &str, want: Option<ScenarioKind>, args: &Common) -> Result<ExperimentSpec, Error> {
    let mut spec = match &args.config {
        Some(path) => load_config(path)?,
        None if want.is_none() => {
            return Err(Error::Config { path: "--config".into(), message: "sweep needs a config file".into() });
        }
        None => ExperimentSpec::example(want.unwrap_or(ScenarioKind::Single)),
    };
    let kind = spec.scenario.kind;
    match (want, kind) {
        (None, _) => {}
        (Some(ScenarioKind::Standard), ScenarioKind::Single) => {
            spec.scenario.kind = ScenarioKind::Standard;
            spec.scenario.policies = vec![PolicyChoice::Standard];
        }
        (Some(w), k) if w == k => {}
        (Some(ScenarioKind::Single), ScenarioKind::Standard) if matches!(name, "bounds" | "oracle") => {}
        (Some(w), k) => {
            return Err(Error::Config {
                path: "scenario.kind".into(),
                message: format!("`{name}` runs a {} scenario, the config describes `{}`", w.name(), k.name()),
            });
        }
    }
    if name == "oracle" && spec.scenario.policies.iter().all(|p| *p == PolicyChoice::Standard) {
        spec.scenario.policies = vec![PolicyChoice::Optimal];
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(rounds) = args.rounds {
        spec.rounds = rounds;
    }
    if let Some(warmup) = args.warmup {
        spec.warmup = Some(warmup);
    }
    if let Some(out) = &args.out {
        spec.output = Some(out.clone());
    }
    spec.validate()?;
    Ok(spec)
}

fn execute(cli: Cli) -> Result<(), Error> {
    let (name, want, args) = match &cli.command {
        Command::Simulate(a) => ("simulate", Some(ScenarioKind::Single), a),
        Command::Standard(a) => ("standard", Some(ScenarioKind::Standard), a),
        Command::Bounds(a) => ("bounds", Some(ScenarioKind::Single), a),
        Command::Oracle(a) => ("oracle", Some(ScenarioKind::Single), a),
        Command::Chain(a) => ("chain", Some(ScenarioKind::Chain), a),
        Command::Sweep(a) => ("sweep", None, a),
    };
    let spec = spec_for(name, want, args)?;
    let default_format = if name == "oracle" { Format::Json } else { Format::Csv };
    let format = args.format.unwrap_or(default_format);
    let meta = Metadata::new(name, &spec)?;

    let mut sink: Box<dyn Write> = match &spec.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match name {
        "bounds" => write_table(&mut sink, &meta, &bounds_table(&spec)?, format),
        "oracle" => write_table(&mut sink, &meta, &oracle_table(&spec)?, format),
        _ => write_table(&mut sink, &meta, &run_sweep(&spec)?, format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qrep: {e}");
            ExitCode::from(match e {
                Error::Config { .. } | Error::Parameter { .. } | Error::Size { .. } => 2,
                Error::Invariant(_) => 3,
                Error::Io(_) => 1,
            })
        }
    }
}
