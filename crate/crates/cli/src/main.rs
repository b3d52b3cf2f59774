use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use uplink_cli::config::{Engine, ExperimentConfig, SweepAxis};
use uplink_cli::{emit_report, load_config, run_sweep};
use uplink_core::Scheme;

#[derive(Parser)]
#[command(name = "uplink", version, about = "Analytic and simulated LoRaWAN uplink sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the analytic model only.
    Analyze(Options),
    /// Run the symbol-level simulator only.
    Simulate(Options),
    /// Run both engines and check the analytic lower bound.
    Compare(Options),
    /// Run whatever `engine` the config selects.
    Run(Options),
}

#[derive(Args)]
struct Options {
    /// TOML experiment file; defaults apply when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Allocation scheme; repeat to sweep several.
    #[arg(long = "scheme", value_name = "SCHEME")]
    schemes: Vec<Scheme>,
    /// Sweep axis: devices or rate.
    #[arg(long)]
    sweep: Option<SweepAxis>,
    /// Base seed for the replications.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    replications: Option<usize>,
    /// Simulated seconds per replication.
    #[arg(long)]
    duration: Option<f64>,
    /// Export the frame trace of the first replication per point.
    #[arg(long)]
    trace: bool,
    /// Skip the summary table.
    #[arg(long, short)]
    quiet: bool,
}

fn prepare(opts: &Options, engine: Option<Engine>) -> Result<ExperimentConfig> {
    let mut config = match &opts.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(engine) = engine {
        config.engine = engine;
    }
    if !opts.schemes.is_empty() {
        config.schemes = opts.schemes.clone();
    }
    if let Some(axis) = opts.sweep {
        config.traffic.sweep = axis;
    }
    if let Some(seed) = opts.seed {
        config.simulation.seed = seed;
    }
    if let Some(out) = &opts.out {
        config.output.dir = out.clone();
    }
    if let Some(n) = opts.replications {
        config.simulation.replications = n;
    }
    if let Some(d) = opts.duration {
        config.simulation.duration = d;
    }
    config.simulation.trace |= opts.trace;
    if opts.quiet {
        config.output.summary = false;
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<ExitCode> {
    let (opts, engine) = match &cli.command {
        Command::Analyze(o) => (o, Some(Engine::Analytic)),
        Command::Simulate(o) => (o, Some(Engine::Simulate)),
        Command::Compare(o) => (o, Some(Engine::Both)),
        Command::Run(o) => (o, None),
    };
    let config = prepare(opts, engine)?;
    let output = run_sweep(&config);
    let emitted = emit_report(&output, &config.output.dir).context("writing report")?;

    if config.output.summary {
        print!("{}", uplink_cli::report::summary_table(&output.rows));
    }
    for path in &emitted.files {
        eprintln!("wrote {}", path.display());
    }
    let failed_points = output.rows.iter().filter(|r| !r.ok()).count();
    let violations = emitted.comparison_failures();
    for c in emitted.comparison.iter().filter(|c| !c.holds) {
        eprintln!(
            "lower bound violated: {} value {} {}: analytic FCP {:.5} > simulated {:.5} + 3 x {:.5}",
            c.scheme, c.value, c.sf, c.analytic_fcp, c.simulated_fcp, c.simulated_se
        );
    }
    if failed_points > 0 {
        eprintln!("{failed_points} sweep point(s) failed");
    }
    Ok(if failed_points > 0 || violations > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
