use crate::error::{Error, Result};

/// Every knob of a training run. Defaults follow the massively-parallel
/// hyperparameter table, except `n_envs` and `buffer_capacity` which are sized
/// for a single machine.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainerConfig {
    pub gamma: f64,
    pub n_envs: usize,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    pub utd_updates: u64,
    pub utd_per_transitions: u64,
    pub actor_update_delay: u64,
    pub tau: f64,
    pub lr_init: f64,
    pub lr_end: f64,
    pub total_env_steps: u64,
    /// Uniform-random transitions collected before the first update;
    /// `None` means ten batches.
    pub warmup_transitions: Option<u64>,
    pub sigma_tgt: f64,
    pub init_alpha: f64,
    pub zeta_s: f64,
    pub zeta_kmax: usize,
    pub g_min: f64,
    pub g_max: f64,
    pub n_atoms: usize,
    pub actor_width: usize,
    pub actor_blocks: usize,
    pub critic_width: usize,
    pub critic_blocks: usize,
    pub expansion: usize,
    /// Project weights back onto the unit sphere after every step.
    pub weight_norm: bool,
    pub batch_norm: bool,
    /// Multiplies environment rewards before they reach the agent.
    pub reward_multiplier: f64,
    pub seed: u64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            n_envs: 16,
            buffer_capacity: 1_000_000,
            batch_size: 2048,
            utd_updates: 2,
            utd_per_transitions: 1024,
            actor_update_delay: 2,
            tau: 0.01,
            lr_init: 3e-4,
            lr_end: 1.5e-4,
            total_env_steps: 1_000_000,
            warmup_transitions: None,
            sigma_tgt: 0.15,
            init_alpha: 0.01,
            zeta_s: 2.0,
            zeta_kmax: 16,
            g_min: -5.0,
            g_max: 5.0,
            n_atoms: 101,
            actor_width: 128,
            actor_blocks: 2,
            critic_width: 256,
            critic_blocks: 2,
            expansion: 4,
            weight_norm: true,
            batch_norm: true,
            reward_multiplier: 1.0,
            seed: 0,
        }
    }
}

impl TrainerConfig {
    pub fn warmup(&self) -> u64 {
        self.warmup_transitions.unwrap_or(10 * self.batch_size as u64)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return fail(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return fail(format!("tau must lie in (0, 1], got {}", self.tau));
        }
        let positive_counts = [
            ("n_envs", self.n_envs as u64),
            ("buffer_capacity", self.buffer_capacity as u64),
            ("batch_size", self.batch_size as u64),
            ("utd_updates", self.utd_updates),
            ("utd_per_transitions", self.utd_per_transitions),
            ("actor_update_delay", self.actor_update_delay),
            ("total_env_steps", self.total_env_steps),
            ("zeta_kmax", self.zeta_kmax as u64),
            ("actor_width", self.actor_width as u64),
            ("actor_blocks", self.actor_blocks as u64),
            ("critic_width", self.critic_width as u64),
            ("critic_blocks", self.critic_blocks as u64),
            ("expansion", self.expansion as u64),
        ];
        for (name, v) in positive_counts {
            if v == 0 {
                return fail(format!("{name} must be positive"));
            }
        }
        let positive_reals = [
            ("lr_init", self.lr_init),
            ("lr_end", self.lr_end),
            ("sigma_tgt", self.sigma_tgt),
            ("init_alpha", self.init_alpha),
            ("zeta_s", self.zeta_s),
            ("reward_multiplier", self.reward_multiplier),
        ];
        for (name, v) in positive_reals {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.batch_size > self.buffer_capacity {
            return fail(format!(
                "batch_size ({}) must not exceed buffer_capacity ({})",
                self.batch_size, self.buffer_capacity
            ));
        }
        if self.n_atoms < 2 {
            return fail(format!("n_atoms must be at least 2, got {}", self.n_atoms));
        }
        if !(self.g_min < self.g_max) || !self.g_min.is_finite() || !self.g_max.is_finite() {
            return fail(format!("need g_min < g_max, got [{}, {}]", self.g_min, self.g_max));
        }
        if self.g_max <= 0.0 {
            return fail(format!("g_max must be positive, got {}", self.g_max));
        }
        Ok(())
    }
}
