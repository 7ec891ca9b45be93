use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use appec_bench::verify::{check, Expected};
use appec_bench::{execute, output_dir, Command, ExperimentSpec, OUT_DIR_ENV, THREADS_ENV};

/// Runs QAOA error-mitigation experiments described by spec files.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the spec's strategy.
    Run { spec: PathBuf },
    /// Scan the landscape described by the spec's landscape section.
    Landscape { spec: PathBuf },
    /// Adaptive runs for each stage count in cost.stages, plus the cost-model fit.
    Cost { spec: PathBuf },
    /// Cycle-benchmark a CNOT under the spec's noise and fit a sparse model.
    Learn { spec: PathBuf },
    /// Noisy, IPEC and ZNE output distributions at optimizer.x0.
    Distribution { spec: PathBuf },
    /// Run the spec and compare the record with expected values.
    Verify { spec: PathBuf, expected: PathBuf },
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.parse().with_context(|| format!("{THREADS_ENV}={v:?} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn run(spec_path: &Path, command: Command) -> Result<appec_bench::ResultRecord> {
    let spec = ExperimentSpec::load(spec_path)?;
    eprintln!("{}: {} ({})", spec.name, spec.strategy, &spec.hash()[..12]);
    let record = execute(&spec, command).with_context(|| format!("running {}", spec_path.display()))?;
    let env_root = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    let dir = output_dir(&spec, env_root.as_deref());
    let files = record.write(&dir).with_context(|| format!("writing {}", dir.display()))?;
    for f in files {
        eprintln!("  wrote {}", f.display());
    }
    let s = &record.summary;
    if let Some(v) = s.n_cut_ideal {
        eprintln!("  N_cut (ideal) {v:.4}");
    }
    if let Some(v) = s.eta {
        eprintln!("  eta {v:.3}");
    }
    if let Some(v) = s.fidelity {
        eprintln!("  fidelity {v:.4}");
    }
    Ok(record)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| match cli.command {
        Cmd::Run { spec } => run(&spec, Command::Run).map(|_| true),
        Cmd::Landscape { spec } => run(&spec, Command::Landscape).map(|_| true),
        Cmd::Cost { spec } => run(&spec, Command::Cost).map(|_| true),
        Cmd::Learn { spec } => run(&spec, Command::Learn).map(|_| true),
        Cmd::Distribution { spec } => run(&spec, Command::Distribution).map(|_| true),
        Cmd::Verify { spec, expected } => {
            let text = std::fs::read_to_string(&expected).with_context(|| format!("reading {}", expected.display()))?;
            let exp: Expected = serde_json::from_str(&text).with_context(|| format!("parsing {}", expected.display()))?;
            let command = match exp.command() {
                Ok(c) => c,
                Err(e) => bail!("{}: {e}", expected.display()),
            };
            let record = run(&spec, command)?;
            let results = check(&record, &exp);
            for r in &results {
                println!("{} {}: {}", if r.pass { "ok  " } else { "FAIL" }, r.path, r.detail);
            }
            Ok(results.iter().all(|r| r.pass))
        }
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
