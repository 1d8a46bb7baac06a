use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use lossy_consensus::harness::{self, ExperimentConfig, Mode, RunArtifact, RunContext};

#[derive(Parser)]
#[command(name = "lossy-consensus", version, about = "Robust push-sum consensus and dual averaging over lossy directed networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a consensus experiment.
    Consensus(RunArgs),
    /// Run distributed dual averaging and certify the optimality gap.
    Optimize(RunArgs),
    /// Audit iteration-matrix products over a window.
    MatrixAudit(RunArgs),
    /// Check that a schedule is B-bounded.
    VerifySchedule {
        #[command(flatten)]
        run: RunArgs,
        /// Window to check against; defaults to the schedule's own.
        #[arg(long)]
        window: Option<usize>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config. Repeat with --sweep to run several.
    #[arg(long, required = true)]
    config: Vec<PathBuf>,
    /// Overrides the schedule seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also print the trace CSV to stdout.
    #[arg(long)]
    tee_csv: bool,
    /// Run every --config concurrently, each into `<out>/<config stem>`.
    #[arg(long)]
    sweep: bool,
}

fn load(path: &Path, seed: Option<u64>, expected: Option<Mode>) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(seed) = seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(mode) = expected {
        if cfg.mode != mode {
            bail!("{}: config mode is {:?}, subcommand expects {:?}", path.display(), cfg.mode, mode);
        }
    }
    Ok(cfg)
}

fn run_one(
    path: &Path,
    out: PathBuf,
    seed: Option<u64>,
    expected: Option<Mode>,
    window: Option<usize>,
) -> anyhow::Result<RunArtifact> {
    let cfg = load(path, seed, expected)?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let ctx = RunContext::new(dir, out);
    let artifact = match expected {
        Some(_) => harness::run_experiment(&cfg, &ctx),
        None => harness::verify_schedule(&cfg, &ctx, window),
    };
    artifact.with_context(|| format!("running {}", path.display()))
}

fn report(artifact: &RunArtifact, tee_csv: bool) -> anyhow::Result<()> {
    if tee_csv {
        let csv = std::fs::read_to_string(&artifact.trace_path)
            .with_context(|| format!("reading {}", artifact.trace_path.display()))?;
        print!("{csv}");
    }
    for c in &artifact.summary.certifications {
        eprintln!(
            "{:<24} {}  measured {:.6e}  bound {:.6e}",
            c.name,
            if c.pass { "pass" } else { "FAIL" },
            c.measured,
            c.bound
        );
    }
    eprintln!(
        "{} in {:.3}s -> {}",
        if artifact.summary.pass { "pass" } else { "FAIL" },
        artifact.wall_clock.as_secs_f64(),
        artifact.summary_path.display()
    );
    Ok(())
}

fn execute(run: RunArgs, expected: Option<Mode>, window: Option<usize>) -> anyhow::Result<bool> {
    if !run.sweep {
        if run.config.len() != 1 {
            bail!("pass exactly one --config, or use --sweep");
        }
        let artifact = run_one(&run.config[0], run.out, run.seed, expected, window)?;
        report(&artifact, run.tee_csv)?;
        return Ok(artifact.summary.pass);
    }

    let mut dirs = Vec::new();
    for path in &run.config {
        let stem = path.file_stem().context("config path has no file name")?;
        let dir = run.out.join(stem);
        if dirs.contains(&dir) {
            bail!("two sweep configs share the output directory {}", dir.display());
        }
        dirs.push(dir);
    }
    let results: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = run
            .config
            .iter()
            .zip(dirs)
            .map(|(path, dir)| scope.spawn(move || run_one(path, dir, run.seed, expected, window)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let mut all_pass = true;
    for result in results {
        let artifact = result?;
        report(&artifact, run.tee_csv)?;
        all_pass &= artifact.summary.pass;
    }
    Ok(all_pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Consensus(run) => execute(run, Some(Mode::Consensus), None),
        Command::Optimize(run) => execute(run, Some(Mode::Optimize), None),
        Command::MatrixAudit(run) => execute(run, Some(Mode::MatrixAudit), None),
        Command::VerifySchedule { run, window } => execute(run, None, window),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
