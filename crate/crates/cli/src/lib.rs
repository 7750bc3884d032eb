//! Driver for training, evaluating and plotting flashsac runs.

pub mod config;
pub mod metrics;
pub mod plot;
mod train;

use std::path::{Path, PathBuf};

use flashsac::envs::EnvKind;
use flashsac::nn::checkpoint;
use flashsac::trainer::{evaluate, load_actor};
use thiserror::Error;

pub use config::{parse_config, parse_config_text, parse_overrides, ConfigError, Precision, RunConfig};
pub use metrics::{read_metrics, MetricsRow, HEADER};
pub use train::{cmd_train, TrainOutcome, CHECKPOINT_FILE, DIAGNOSTICS_FILE, METRICS_FILE, RESOLVED_FILE};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("numerical abort: {message} (diagnostics in {})", .diagnostics.display())]
    Numerical { message: String, diagnostics: PathBuf },
    #[error(transparent)]
    Core(#[from] flashsac::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical { .. } => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_owned(), source }
    }
}

/// Mean and standard deviation of the deterministic policy stored in a
/// checkpoint.
pub fn cmd_eval(checkpoint_path: &Path, env: EnvKind, episodes: usize, seed: u64) -> Result<(f64, f64), CliError> {
    if episodes == 0 {
        return Err(CliError::Usage("--episodes must be positive".into()));
    }
    let tensors = checkpoint::load(checkpoint_path)?;
    let (s, a) = env.dims();
    let actor = load_actor::<f64>(tensors, s, a)?;
    Ok(evaluate(&actor, env, episodes, seed)?)
}

/// Writes an SVG of `eval_return_mean` against `env_step`, one line per file.
pub fn cmd_plot(csvs: &[PathBuf], out: &Path) -> Result<(), CliError> {
    if csvs.is_empty() {
        return Err(CliError::Usage("plot needs at least one metrics file".into()));
    }
    let mut series = Vec::with_capacity(csvs.len());
    for path in csvs {
        let rows = read_metrics(path).map_err(CliError::Usage)?;
        series.push(plot::Series {
            label: path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned()),
            points: rows.iter().map(|r| (r.env_step as f64, r.eval_return_mean)).collect(),
        });
    }
    std::fs::write(out, plot::render_svg(&series)).map_err(|e| CliError::io(out, e))
}
