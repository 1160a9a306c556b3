use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use memheat_cli::verify::{self, Suite};
use memheat_cli::{default_out, CliError, ConfigError, ExperimentConfig, ExperimentKind};

/// Heat equation with memory: resolvent kernels, three-route simulation,
/// null/approximate controllability and the obstruction experiment.
///
/// Experiments read a JSON config (see `crates/cli/configs/`). Every numerical
/// default can be overridden there:
///
///   horizon 1.0, n_steps 1000, mode_count 10, a = -M(0),
///   numerics.truncation_order 40, numerics.window_fraction 0.1,
///   numerics.cond_threshold 1e12, numerics.tikhonov_floor 1e-12,
///   domain.lengths [pi], kernel "zero",
///   simulate.xi 1/n, simulate.routes all three,
///   control.kind "distributed", control.target 1/n,
///   control.mode_counts [5, 10, 20, 40], control.route "maccamy",
///   control.shapes_per_face 4,
///   obstruct.center [2.4], obstruct.radius 0.3,
///   obstruct.mode_counts [10, 20, 40], obstruct.max_n 50,
///   audit.first 1, audit.last 50.
///
/// Exit codes: 0 success, 1 failed checks (verify), 2 invalid config or usage,
/// 3 numerical failure.
#[derive(Debug, Parser)]
#[command(name = "memheat", version, verbatim_doc_comment)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Resolvent R and L = R' + M(0)R of the configured kernel (resolvent.csv).
    Resolvent(RunArgs),
    /// Modal trajectories along the configured routes (trajectory_<route>.csv).
    Simulate(RunArgs),
    /// Reachability sweep and transferred control (residual_curve.csv, control.csv).
    Control(RunArgs),
    /// Rough-target cost blowup, H_n audit and threshold verdict. Runs the
    /// bundled default experiment when --config is omitted.
    Obstruct(RunArgs),
    /// lambda^2 sup|H_n| and the iterated-term profile (bound_audit.csv).
    Audit(RunArgs),
    /// Run a check suite and write verify_<suite>.csv.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: output_dir from the config, else ./memheat-out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override n_steps (time-grid steps on [0, T]).
    #[arg(long)]
    steps: Option<usize>,
    /// Override mode_count (spectral truncation).
    #[arg(long)]
    modes: Option<usize>,
    /// Override the random seed (control perturbation check).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// One of: volterra, spectral, routes, control, obstruction, all.
    suite: String,
    /// Output directory for verify_<suite>.csv.
    #[arg(long, default_value = "memheat-out")]
    out: PathBuf,
}

fn load(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&args.config, kind) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, ExperimentKind::Obstruct) => ExperimentConfig::bundled_obstruct(),
        (None, _) => return Err(ConfigError::new("--config", format!("required for '{}'", kind.name())).into()),
    };
    if cfg.experiment != kind {
        return Err(ConfigError::new("experiment", format!("config is for '{}', not '{}'", cfg.experiment.name(), kind.name())).into());
    }
    if let Some(n) = args.steps {
        cfg.n_steps = n;
    }
    if let Some(k) = args.modes {
        cfg.mode_count = k;
    }
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_experiment(kind: ExperimentKind, args: &RunArgs) -> Result<(), CliError> {
    let cfg = load(kind, args)?;
    let out = args.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(default_out);
    let result = memheat_cli::run(&cfg, &out)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    for (name, value) in &result.metrics {
        println!("{name:<28} {value:.10e}");
    }
    println!("wrote {} file(s) to {} in {:.2} s", result.files.len(), out.display(), result.wall_time_s);
    Ok(())
}

fn run_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let suite = Suite::parse(&args.suite)?;
    let report = verify::verify(suite, Path::new(&args.out))?;
    print!("{}", verify::render(&report.rows));
    println!("wrote {}", report.csv.display());
    match report.failures() {
        0 => Ok(()),
        n => Err(CliError::ChecksFailed(n)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Resolvent(a) => run_experiment(ExperimentKind::Resolvent, a),
        Command::Simulate(a) => run_experiment(ExperimentKind::Simulate, a),
        Command::Control(a) => run_experiment(ExperimentKind::Control, a),
        Command::Obstruct(a) => run_experiment(ExperimentKind::Obstruct, a),
        Command::Audit(a) => run_experiment(ExperimentKind::Audit, a),
        Command::Verify(a) => run_verify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
