//! Experiment runner for the `appec` command-line tool: spec parsing, strategy
//! execution, result files and expected-value checks.

pub mod record;
pub mod runner;
pub mod spec;
pub mod verify;

use std::path::{Path, PathBuf};

pub use record::{PlotKind, ResultRecord};
pub use runner::{execute, restart_loop, Command, RunError};
pub use spec::{ExperimentSpec, SpecError};

/// Overrides the output root; each run writes to `<root>/<name>`.
pub const OUT_DIR_ENV: &str = "APPEC_OUT_DIR";
/// Caps the worker threads used for sample-set evaluation.
pub const THREADS_ENV: &str = "APPEC_THREADS";

/// Output directory for a spec: `$APPEC_OUT_DIR/<name>` when set, else the spec's
/// `output.dir`, else `results/<name>`.
pub fn output_dir(spec: &ExperimentSpec, env_root: Option<&Path>) -> PathBuf {
    match (env_root, &spec.output) {
        (Some(root), _) => root.join(&spec.name),
        (None, Some(dir)) => dir.clone(),
        (None, None) => Path::new("results").join(&spec.name),
    }
}
