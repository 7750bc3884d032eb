use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use flashsac::trainer::Trainer;
use flashsac::{Error, Scalar};

use crate::config::{Precision, RunConfig};
use crate::metrics::{MetricsRow, HEADER};
use crate::CliError;

pub const METRICS_FILE: &str = "metrics.csv";
pub const RESOLVED_FILE: &str = "resolved.cfg";
pub const CHECKPOINT_FILE: &str = "checkpoint.fsac";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.txt";
/// Evaluation episodes start from seeds disjoint from the training ones.
const EVAL_SEED_OFFSET: u64 = 1_000_003;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub rows: Vec<MetricsRow>,
    pub critic_updates: u64,
    pub actor_updates: u64,
}

/// Runs a full training job under `config.out_dir`: resolved config,
/// metrics CSV, checkpoints, and a one-line summary per evaluation on stdout.
pub fn cmd_train(config: &RunConfig) -> Result<TrainOutcome, CliError> {
    match config.precision {
        Precision::F32 => train_with::<f32>(config),
        Precision::F64 => train_with::<f64>(config),
    }
}

fn numerical(out_dir: &Path, err: Error, detail: &str) -> CliError {
    let path = out_dir.join(DIAGNOSTICS_FILE);
    let message = err.to_string();
    let body = format!("{message}\n{detail}\n");
    if let Err(e) = fs::write(&path, body) {
        return CliError::io(&path, e);
    }
    CliError::Numerical { message, diagnostics: path }
}

fn is_numerical(err: &Error) -> bool {
    matches!(err, Error::Diverged { .. } | Error::NonFinite { .. })
}

fn train_with<T: Scalar>(config: &RunConfig) -> Result<TrainOutcome, CliError> {
    let out = &config.out_dir;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let resolved = out.join(RESOLVED_FILE);
    fs::write(&resolved, config.to_text()).map_err(|e| CliError::io(&resolved, e))?;
    let metrics_path = out.join(METRICS_FILE);
    let file = File::create(&metrics_path).map_err(|e| CliError::io(&metrics_path, e))?;
    let mut csv = BufWriter::new(file);
    writeln!(csv, "{HEADER}").map_err(|e| CliError::io(&metrics_path, e))?;

    let mut trainer = Trainer::<T>::new(config.trainer.clone(), config.env)?;
    let eval_seed = config.trainer.seed.wrapping_add(EVAL_SEED_OFFSET);
    let checkpoint_path = out.join(CHECKPOINT_FILE);
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut next_log = config.log_interval;
    let mut next_eval = config.eval_interval;
    let mut next_checkpoint = config.checkpoint_interval;
    let mut eval = None;

    while !trainer.is_done() {
        if let Err(e) = trainer.step() {
            if is_numerical(&e) {
                return Err(numerical(out, e, &format!("env_step {}", trainer.env_steps())));
            }
            return Err(e.into());
        }
        let step = trainer.env_steps();
        let done = trainer.is_done();
        if config.checkpoint_interval > 0 && step >= next_checkpoint {
            trainer.save_checkpoint(&checkpoint_path)?;
            next_checkpoint = (step / config.checkpoint_interval + 1) * config.checkpoint_interval;
        }
        if step < next_log && !done {
            continue;
        }
        next_log = (step / config.log_interval + 1) * config.log_interval;
        if eval.is_none() || step >= next_eval || done {
            let (mean, std) = trainer.evaluate(config.eval_episodes, eval_seed)?;
            eval = Some((mean, std));
            next_eval = (step / config.eval_interval + 1) * config.eval_interval;
            println!(
                "step {step} eval {mean:.2} ± {std:.2} train {:.2} episodes {} alpha {:.4e}",
                trainer.train_return_mean(),
                trainer.episodes_done(),
                trainer.agent.alpha().as_f64()
            );
        }
        let (eval_mean, eval_std) = eval.expect("evaluated at the first row");
        let diag = match trainer.diagnostics(config.trainer.seed) {
            Ok(d) => d,
            Err(e) if is_numerical(&e) => return Err(numerical(out, e, &format!("env_step {step}"))),
            Err(e) => return Err(e.into()),
        };
        let latest = trainer.latest();
        let [c0, c1] = diag.param_norm_critic;
        let row = MetricsRow {
            env_step: step,
            wall_time_s: if config.wall_clock { start.elapsed().as_secs_f64() } else { 0.0 },
            episodes_done: trainer.episodes_done(),
            train_return_mean: trainer.train_return_mean(),
            eval_return_mean: eval_mean,
            eval_return_std: eval_std,
            critic_loss: latest.critic.loss,
            actor_loss: latest.actor.loss,
            alpha: trainer.agent.alpha().as_f64(),
            policy_entropy: trainer.entropy_running().unwrap_or(diag.policy_entropy),
            entropy_target: trainer.agent.entropy_target.as_f64(),
            lr: trainer.lr(),
            param_norm_actor: diag.param_norm_actor,
            param_norm_critic: (c0 * c0 + c1 * c1).sqrt(),
            grad_norm_critic: diag.grad_norm_critic,
            feature_norm_critic: diag.feature_norm_critic,
            reward_scale_denom: trainer.tracker.denominator().as_f64(),
        };
        if !row.is_finite() {
            let err = Error::Diverged { what: "metrics", norms: row.to_csv() };
            return Err(numerical(out, err, HEADER));
        }
        writeln!(csv, "{}", row.to_csv()).map_err(|e| CliError::io(&metrics_path, e))?;
        csv.flush().map_err(|e| CliError::io(&metrics_path, e))?;
        rows.push(row);
    }
    trainer.save_checkpoint(&checkpoint_path)?;
    Ok(TrainOutcome {
        rows,
        critic_updates: trainer.agent.critic_updates,
        actor_updates: trainer.agent.actor_updates,
    })
}
