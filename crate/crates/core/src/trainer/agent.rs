use std::collections::BTreeMap;

use crate::distributional::AtomGrid;
use crate::error::{Error, Result};
use crate::nn::checkpoint::{load_network, network_tensors, NamedTensor};
use crate::nn::{Adam, AdamConfig, NetworkConfig, NetworkParams};
use crate::policy::{entropy_target, Temperature};
use crate::Scalar;

use super::TrainerConfig;

/// Actor, twin critics with their targets, temperature and optimizer state.
#[derive(Debug, Clone)]
pub struct AgentState<T> {
    pub actor: NetworkParams<T>,
    pub critics: [NetworkParams<T>; 2],
    pub target_critics: [NetworkParams<T>; 2],
    pub temperature: Temperature<T>,
    pub actor_opt: Adam<T>,
    pub critic_opts: [Adam<T>; 2],
    pub grid: AtomGrid<T>,
    pub entropy_target: T,
    pub gamma: T,
    pub tau: T,
    pub weight_norm: bool,
    pub state_dim: usize,
    pub action_dim: usize,
    pub critic_updates: u64,
    pub actor_updates: u64,
    pub env_steps: u64,
}

pub fn actor_config(c: &TrainerConfig, state_dim: usize, action_dim: usize) -> NetworkConfig {
    NetworkConfig {
        input_dim: state_dim,
        hidden_dim: c.actor_width,
        num_blocks: c.actor_blocks,
        expansion: c.expansion,
        head_dim: 2 * action_dim,
        batch_norm: c.batch_norm,
    }
}

pub fn critic_config(c: &TrainerConfig, state_dim: usize, action_dim: usize) -> NetworkConfig {
    NetworkConfig {
        input_dim: state_dim + action_dim,
        hidden_dim: c.critic_width,
        num_blocks: c.critic_blocks,
        expansion: c.expansion,
        head_dim: c.n_atoms,
        batch_norm: c.batch_norm,
    }
}

fn scalar_of(map: &BTreeMap<String, NamedTensor>, name: &str) -> Result<f64> {
    map.get(name)
        .and_then(|t| t.data.first().copied())
        .ok_or_else(|| Error::Schema(format!("{name}: expected [], found <missing>")))
}

impl<T: Scalar> AgentState<T> {
    pub fn new(config: &TrainerConfig, state_dim: usize, action_dim: usize) -> Result<Self> {
        config.validate()?;
        let actor = NetworkParams::init(&actor_config(config, state_dim, action_dim), config.seed.wrapping_mul(4) + 1)?;
        let cc = critic_config(config, state_dim, action_dim);
        let critics = [
            NetworkParams::init(&cc, config.seed.wrapping_mul(4) + 2)?,
            NetworkParams::init(&cc, config.seed.wrapping_mul(4) + 3)?,
        ];
        Ok(Self::from_networks(config, actor, critics)?)
    }

    /// Builds an agent around given networks; targets start as exact copies.
    pub fn from_networks(config: &TrainerConfig, actor: NetworkParams<T>, critics: [NetworkParams<T>; 2]) -> Result<Self> {
        let adam = AdamConfig::default();
        let state_dim = actor.embed.in_dim();
        let action_dim = actor.head.out_dim() / 2;
        if critics.iter().any(|c| c.embed.in_dim() != state_dim + action_dim) {
            return Err(Error::shape("critic input", state_dim + action_dim, critics[0].embed.in_dim()));
        }
        Ok(Self {
            actor_opt: Adam::for_network(adam, &actor),
            critic_opts: [Adam::for_network(adam, &critics[0]), Adam::for_network(adam, &critics[1])],
            target_critics: critics.clone(),
            actor,
            critics,
            temperature: Temperature::new(config.init_alpha, adam),
            grid: AtomGrid::new(T::lit(config.g_min), T::lit(config.g_max), config.n_atoms)?,
            entropy_target: T::lit(entropy_target(action_dim, config.sigma_tgt)),
            gamma: T::lit(config.gamma),
            tau: T::lit(config.tau),
            weight_norm: config.weight_norm,
            state_dim,
            action_dim,
            critic_updates: 0,
            actor_updates: 0,
            env_steps: 0,
        })
    }

    pub fn alpha(&self) -> T {
        self.temperature.alpha()
    }

    /// Every network plus the scalars needed to resume evaluation.
    pub fn checkpoint_tensors(&self) -> Vec<NamedTensor> {
        let mut out = network_tensors("actor", &self.actor);
        for (i, c) in self.critics.iter().enumerate() {
            out.extend(network_tensors(&format!("critic{i}"), c));
        }
        for (i, c) in self.target_critics.iter().enumerate() {
            out.extend(network_tensors(&format!("target{i}"), c));
        }
        let ac = self.actor.config();
        out.extend([
            NamedTensor::scalar("temperature.log_alpha", self.temperature.log_alpha.as_f64()),
            NamedTensor::scalar("meta.state_dim", self.state_dim as f64),
            NamedTensor::scalar("meta.action_dim", self.action_dim as f64),
            NamedTensor::scalar("meta.actor_width", ac.hidden_dim as f64),
            NamedTensor::scalar("meta.actor_blocks", ac.num_blocks as f64),
            NamedTensor::scalar("meta.expansion", ac.expansion as f64),
            NamedTensor::scalar("meta.batch_norm", if ac.batch_norm { 1.0 } else { 0.0 }),
            NamedTensor::scalar("meta.critic_updates", self.critic_updates as f64),
            NamedTensor::scalar("meta.actor_updates", self.actor_updates as f64),
            NamedTensor::scalar("meta.env_steps", self.env_steps as f64),
        ]);
        out
    }

    /// Restores networks, temperature and counters from a checkpoint written
    /// for the same configuration. Optimizer moments restart from zero.
    pub fn restore(&mut self, tensors: Vec<NamedTensor>) -> Result<()> {
        let map = crate::nn::checkpoint::by_name(tensors);
        load_network("actor", &mut self.actor, &map)?;
        for i in 0..2 {
            load_network(&format!("critic{i}"), &mut self.critics[i], &map)?;
            load_network(&format!("target{i}"), &mut self.target_critics[i], &map)?;
        }
        self.temperature.log_alpha = T::lit(scalar_of(&map, "temperature.log_alpha")?);
        self.critic_updates = scalar_of(&map, "meta.critic_updates")? as u64;
        self.actor_updates = scalar_of(&map, "meta.actor_updates")? as u64;
        self.env_steps = scalar_of(&map, "meta.env_steps")? as u64;
        Ok(())
    }
}

/// Rebuilds the actor stored in a checkpoint for an environment with the
/// given dimensions. Fails with a schema error listing every mismatching
/// tensor when the checkpoint was written for a different task.
pub fn load_actor<T: Scalar>(tensors: Vec<NamedTensor>, state_dim: usize, action_dim: usize) -> Result<NetworkParams<T>> {
    let map = crate::nn::checkpoint::by_name(tensors);
    let config = NetworkConfig {
        input_dim: state_dim,
        hidden_dim: scalar_of(&map, "meta.actor_width")? as usize,
        num_blocks: scalar_of(&map, "meta.actor_blocks")? as usize,
        expansion: scalar_of(&map, "meta.expansion")? as usize,
        head_dim: 2 * action_dim,
        batch_norm: scalar_of(&map, "meta.batch_norm")? != 0.0,
    };
    let mut actor = NetworkParams::init(&config, 0)?;
    load_network("actor", &mut actor, &map)?;
    Ok(actor)
}
