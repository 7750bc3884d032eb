//! The metrics CSV: frozen header, row formatting and reading back.

use std::fs;
use std::path::Path;

pub const HEADER: &str = "env_step,wall_time_s,episodes_done,train_return_mean,eval_return_mean,eval_return_std,\
critic_loss,actor_loss,alpha,policy_entropy,entropy_target,lr,param_norm_actor,param_norm_critic,\
grad_norm_critic,feature_norm_critic,reward_scale_denom";

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricsRow {
    pub env_step: u64,
    pub wall_time_s: f64,
    pub episodes_done: u64,
    pub train_return_mean: f64,
    pub eval_return_mean: f64,
    pub eval_return_std: f64,
    pub critic_loss: f64,
    pub actor_loss: f64,
    pub alpha: f64,
    pub policy_entropy: f64,
    pub entropy_target: f64,
    pub lr: f64,
    pub param_norm_actor: f64,
    pub param_norm_critic: f64,
    pub grad_norm_critic: f64,
    pub feature_norm_critic: f64,
    pub reward_scale_denom: f64,
}

impl MetricsRow {
    fn reals(&self) -> [f64; 15] {
        [
            self.wall_time_s,
            self.train_return_mean,
            self.eval_return_mean,
            self.eval_return_std,
            self.critic_loss,
            self.actor_loss,
            self.alpha,
            self.policy_entropy,
            self.entropy_target,
            self.lr,
            self.param_norm_actor,
            self.param_norm_critic,
            self.grad_norm_critic,
            self.feature_norm_critic,
            self.reward_scale_denom,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.reals().iter().all(|v| v.is_finite())
    }

    /// One CSV line without the newline. Reals use the shortest text that
    /// parses back to the same value.
    pub fn to_csv(&self) -> String {
        let r = self.reals();
        let mut fields = vec![self.env_step.to_string(), r[0].to_string(), self.episodes_done.to_string()];
        fields.extend(r[1..].iter().map(|v| v.to_string()));
        fields.join(",")
    }

    pub fn from_csv(line: &str) -> Result<Self, String> {
        let f: Vec<&str> = line.trim_end().split(',').collect();
        if f.len() != 17 {
            return Err(format!("expected 17 fields, found {}", f.len()));
        }
        let real = |i: usize| f[i].parse::<f64>().map_err(|e| format!("field {i} ({:?}): {e}", f[i]));
        let int = |i: usize| f[i].parse::<u64>().map_err(|e| format!("field {i} ({:?}): {e}", f[i]));
        Ok(Self {
            env_step: int(0)?,
            wall_time_s: real(1)?,
            episodes_done: int(2)?,
            train_return_mean: real(3)?,
            eval_return_mean: real(4)?,
            eval_return_std: real(5)?,
            critic_loss: real(6)?,
            actor_loss: real(7)?,
            alpha: real(8)?,
            policy_entropy: real(9)?,
            entropy_target: real(10)?,
            lr: real(11)?,
            param_norm_actor: real(12)?,
            param_norm_critic: real(13)?,
            grad_norm_critic: real(14)?,
            feature_norm_critic: real(15)?,
            reward_scale_denom: real(16)?,
        })
    }
}

/// Reads a metrics file written by `train`. Fails on a foreign header or a
/// file without rows.
pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == HEADER => {}
        Some(_) => return Err(format!("{}: unexpected header", path.display())),
        None => return Err(format!("{}: empty file", path.display())),
    }
    let rows = lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| MetricsRow::from_csv(l).map_err(|e| format!("{}: row {}: {e}", path.display(), i + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    if rows.is_empty() {
        return Err(format!("{}: no rows", path.display()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_frozen() {
        assert_eq!(
            HEADER,
            "env_step,wall_time_s,episodes_done,train_return_mean,eval_return_mean,eval_return_std,critic_loss,\
             actor_loss,alpha,policy_entropy,entropy_target,lr,param_norm_actor,param_norm_critic,grad_norm_critic,\
             feature_norm_critic,reward_scale_denom"
        );
        assert_eq!(HEADER.split(',').count(), 17);
    }

    #[test]
    fn row_round_trip() {
        let row = MetricsRow {
            env_step: 12_000,
            wall_time_s: 3.25,
            episodes_done: 48,
            train_return_mean: -812.0625,
            eval_return_mean: -150.1,
            eval_return_std: 12.0 / 7.0,
            critic_loss: 4.1,
            actor_loss: -0.7,
            alpha: 0.0123,
            policy_entropy: -0.5,
            entropy_target: -0.478_140_4,
            lr: 2.9e-4,
            param_norm_actor: 31.6,
            param_norm_critic: 44.7,
            grad_norm_critic: 0.3,
            feature_norm_critic: 16.0,
            reward_scale_denom: 1e-4,
        };
        assert_eq!(MetricsRow::from_csv(&row.to_csv()).unwrap(), row);
        assert!(row.is_finite());
    }

    #[test]
    fn short_row_rejected() {
        assert!(MetricsRow::from_csv("1,2,3").is_err());
    }
}
