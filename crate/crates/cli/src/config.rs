//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use flashsac::envs::EnvKind;
use flashsac::trainer::TrainerConfig;

pub const SEED_ENV_VAR: &str = "FLASHSAC_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::F32 => "f32",
            Precision::F64 => "f64",
        })
    }
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "f32" => Ok(Precision::F32),
            "f64" => Ok(Precision::F64),
            _ => Err(format!("expected f32 or f64, got {s:?}")),
        }
    }
}

/// Trainer hyperparameters plus everything the driver needs around them.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub trainer: TrainerConfig,
    pub env: EnvKind,
    pub log_interval: u64,
    pub eval_interval: u64,
    pub eval_episodes: usize,
    pub out_dir: PathBuf,
    /// Zero means only at the end of the run.
    pub checkpoint_interval: u64,
    pub precision: Precision,
    /// When false the `wall_time_s` column is written as 0 so that metrics
    /// files of identical runs compare equal byte for byte.
    pub wall_clock: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            trainer: TrainerConfig::default(),
            env: EnvKind::Pendulum,
            log_interval: 1000,
            eval_interval: 5000,
            eval_episodes: 10,
            out_dir: PathBuf::from("runs/default"),
            checkpoint_interval: 0,
            precision: Precision::F64,
            wall_clock: true,
        }
    }
}

/// Where a value came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag,
    EnvVar,
    Default,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub origin: Origin,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.origin {
            Origin::Line(n) => write!(f, "line {n}: {}: {}", self.key, self.message),
            Origin::Flag => write!(f, "--{}: {}", self.key, self.message),
            Origin::EnvVar => write!(f, "{SEED_ENV_VAR}: {}", self.message),
            Origin::Default => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

pub const KEYS: &[&str] = &[
    "env",
    "gamma",
    "n_envs",
    "buffer_capacity",
    "batch_size",
    "utd_updates",
    "utd_per_transitions",
    "actor_update_delay",
    "tau",
    "lr_init",
    "lr_end",
    "total_env_steps",
    "warmup_transitions",
    "sigma_tgt",
    "init_alpha",
    "zeta_s",
    "zeta_kmax",
    "g_min",
    "g_max",
    "n_atoms",
    "actor_width",
    "actor_blocks",
    "critic_width",
    "critic_blocks",
    "expansion",
    "weight_norm",
    "batch_norm",
    "reward_multiplier",
    "seed",
    "log_interval",
    "eval_interval",
    "eval_episodes",
    "out_dir",
    "checkpoint_interval",
    "precision",
    "wall_clock",
];

fn parse<V: FromStr>(value: &str) -> Result<V, String>
where
    V::Err: fmt::Display,
{
    value.parse::<V>().map_err(|e| format!("cannot parse {value:?}: {e}"))
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let t = &mut self.trainer;
        match key {
            "env" => self.env = parse(value)?,
            "gamma" => t.gamma = parse(value)?,
            "n_envs" => t.n_envs = parse(value)?,
            "buffer_capacity" => t.buffer_capacity = parse(value)?,
            "batch_size" => t.batch_size = parse(value)?,
            "utd_updates" => t.utd_updates = parse(value)?,
            "utd_per_transitions" => t.utd_per_transitions = parse(value)?,
            "actor_update_delay" => t.actor_update_delay = parse(value)?,
            "tau" => t.tau = parse(value)?,
            "lr_init" => t.lr_init = parse(value)?,
            "lr_end" => t.lr_end = parse(value)?,
            "total_env_steps" => t.total_env_steps = parse(value)?,
            "warmup_transitions" => {
                t.warmup_transitions = if value == "auto" { None } else { Some(parse(value)?) }
            }
            "sigma_tgt" => t.sigma_tgt = parse(value)?,
            "init_alpha" => t.init_alpha = parse(value)?,
            "zeta_s" => t.zeta_s = parse(value)?,
            "zeta_kmax" => t.zeta_kmax = parse(value)?,
            "g_min" => t.g_min = parse(value)?,
            "g_max" => t.g_max = parse(value)?,
            "n_atoms" => t.n_atoms = parse(value)?,
            "actor_width" => t.actor_width = parse(value)?,
            "actor_blocks" => t.actor_blocks = parse(value)?,
            "critic_width" => t.critic_width = parse(value)?,
            "critic_blocks" => t.critic_blocks = parse(value)?,
            "expansion" => t.expansion = parse(value)?,
            "weight_norm" => t.weight_norm = parse(value)?,
            "batch_norm" => t.batch_norm = parse(value)?,
            "reward_multiplier" => t.reward_multiplier = parse(value)?,
            "seed" => t.seed = parse(value)?,
            "log_interval" => self.log_interval = parse(value)?,
            "eval_interval" => self.eval_interval = parse(value)?,
            "eval_episodes" => self.eval_episodes = parse(value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "checkpoint_interval" => self.checkpoint_interval = parse(value)?,
            "precision" => self.precision = parse(value)?,
            "wall_clock" => self.wall_clock = parse(value)?,
            _ => return Err("unknown key".to_owned()),
        }
        Ok(())
    }

    /// Textual value of one key, in a form [`set`](Self::set) accepts.
    pub fn get(&self, key: &str) -> Option<String> {
        let t = &self.trainer;
        Some(match key {
            "env" => self.env.to_string(),
            "gamma" => t.gamma.to_string(),
            "n_envs" => t.n_envs.to_string(),
            "buffer_capacity" => t.buffer_capacity.to_string(),
            "batch_size" => t.batch_size.to_string(),
            "utd_updates" => t.utd_updates.to_string(),
            "utd_per_transitions" => t.utd_per_transitions.to_string(),
            "actor_update_delay" => t.actor_update_delay.to_string(),
            "tau" => t.tau.to_string(),
            "lr_init" => t.lr_init.to_string(),
            "lr_end" => t.lr_end.to_string(),
            "total_env_steps" => t.total_env_steps.to_string(),
            "warmup_transitions" => t.warmup_transitions.map_or_else(|| "auto".to_owned(), |w| w.to_string()),
            "sigma_tgt" => t.sigma_tgt.to_string(),
            "init_alpha" => t.init_alpha.to_string(),
            "zeta_s" => t.zeta_s.to_string(),
            "zeta_kmax" => t.zeta_kmax.to_string(),
            "g_min" => t.g_min.to_string(),
            "g_max" => t.g_max.to_string(),
            "n_atoms" => t.n_atoms.to_string(),
            "actor_width" => t.actor_width.to_string(),
            "actor_blocks" => t.actor_blocks.to_string(),
            "critic_width" => t.critic_width.to_string(),
            "critic_blocks" => t.critic_blocks.to_string(),
            "expansion" => t.expansion.to_string(),
            "weight_norm" => t.weight_norm.to_string(),
            "batch_norm" => t.batch_norm.to_string(),
            "reward_multiplier" => t.reward_multiplier.to_string(),
            "seed" => t.seed.to_string(),
            "log_interval" => self.log_interval.to_string(),
            "eval_interval" => self.eval_interval.to_string(),
            "eval_episodes" => self.eval_episodes.to_string(),
            "out_dir" => self.out_dir.display().to_string(),
            "checkpoint_interval" => self.checkpoint_interval.to_string(),
            "precision" => self.precision.to_string(),
            "wall_clock" => self.wall_clock.to_string(),
            _ => return None,
        })
    }

    /// Every key in canonical order, one `key = value` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let value = self.get(key).expect("every listed key has a value");
            out.push_str(&format!("{key} = {value}\n"));
        }
        out
    }

    fn check(&self, origins: &BTreeMap<String, Origin>) -> Result<(), ConfigError> {
        let located = |key: &str, message: String| ConfigError {
            key: key.to_owned(),
            origin: origins.get(key).cloned().unwrap_or(Origin::Default),
            message,
        };
        if let Err(e) = self.trainer.validate() {
            let message = e.to_string();
            let key = KEYS
                .iter()
                .filter_map(|k| find_word(&message, k).map(|pos| (pos, *k)))
                .min()
                .map_or("config", |(_, k)| k);
            return Err(located(key, message));
        }
        for (key, v) in [("log_interval", self.log_interval), ("eval_interval", self.eval_interval)] {
            if v == 0 {
                return Err(located(key, format!("{key} must be positive")));
            }
        }
        if self.eval_episodes == 0 {
            return Err(located("eval_episodes", "eval_episodes must be positive".to_owned()));
        }
        Ok(())
    }
}

fn find_word(haystack: &str, word: &str) -> Option<usize> {
    let is_ident = |c: char| c.is_ascii_alphanumeric() || c == '_';
    haystack.match_indices(word).map(|(i, _)| i).find(|&i| {
        let before = haystack[..i].chars().next_back();
        let after = haystack[i + word.len()..].chars().next();
        !before.is_some_and(is_ident) && !after.is_some_and(is_ident)
    })
}

/// Parses config text, then applies `--key value` overrides and the seed
/// environment variable, and validates the result.
pub fn parse_config_text(
    text: &str,
    overrides: &[(String, String)],
    seed_env: Option<&str>,
) -> Result<RunConfig, ConfigError> {
    let mut config = RunConfig::default();
    let mut origins = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError {
                key: line.to_owned(),
                origin: Origin::Line(line_no),
                message: "expected `key = value`".to_owned(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        config.set(key, value).map_err(|message| ConfigError {
            key: key.to_owned(),
            origin: Origin::Line(line_no),
            message,
        })?;
        origins.insert(key.to_owned(), Origin::Line(line_no));
    }
    for (key, value) in overrides {
        config.set(key, value).map_err(|message| ConfigError {
            key: key.clone(),
            origin: Origin::Flag,
            message,
        })?;
        origins.insert(key.clone(), Origin::Flag);
    }
    if let Some(seed) = seed_env {
        config.trainer.seed = parse(seed.trim()).map_err(|message| ConfigError {
            key: "seed".to_owned(),
            origin: Origin::EnvVar,
            message,
        })?;
        origins.insert("seed".to_owned(), Origin::EnvVar);
    }
    config.check(&origins)?;
    Ok(config)
}

/// Reads `path` (when given) and resolves it as [`parse_config_text`] does,
/// taking the seed override from the process environment.
pub fn parse_config(path: Option<&Path>, overrides: &[(String, String)]) -> Result<RunConfig, ConfigError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| ConfigError {
            key: p.display().to_string(),
            origin: Origin::Default,
            message: format!("cannot read config: {e}"),
        })?,
        None => String::new(),
    };
    let seed = std::env::var(SEED_ENV_VAR).ok();
    parse_config_text(&text, overrides, seed.as_deref())
}

/// Pairs up `--key value` arguments.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(flag) = it.next() {
        let Some(key) = flag.strip_prefix("--") else {
            return Err(ConfigError {
                key: flag.clone(),
                origin: Origin::Flag,
                message: "expected --key value".to_owned(),
            });
        };
        let (key, value) = match key.split_once('=') {
            Some((k, v)) => (k.to_owned(), v.to_owned()),
            None => {
                let value = it.next().ok_or_else(|| ConfigError {
                    key: key.to_owned(),
                    origin: Origin::Flag,
                    message: "missing value".to_owned(),
                })?;
                (key.to_owned(), value.clone())
            }
        };
        out.push((key, value));
    }
    Ok(out)
}
