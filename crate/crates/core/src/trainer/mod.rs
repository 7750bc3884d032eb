//! The training loop: vectorized interaction with noise repetition, replay,
//! return tracking, update-to-data scheduling, critic/actor/temperature
//! updates and evaluation.

mod agent;
mod config;
mod eval;
mod schedule;
mod update;

use std::collections::VecDeque;

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::envs::{EnvKind, VecEnv};
use crate::error::Result;
use crate::exploration::{NoiseRepeatState, ZetaSampler};
use crate::nn::checkpoint::{self, NamedTensor};
use crate::nn::Mode;
use crate::policy::{sample_action, GaussianHead};
use crate::replay::ReplayBuffer;
use crate::reward_norm::ReturnTracker;
use crate::Scalar;

pub use agent::{actor_config, critic_config, load_actor, AgentState};
pub use config::TrainerConfig;
pub use eval::{actor_action, episode_returns, evaluate, DeterministicPolicy, FnPolicy};
pub use schedule::{cosine_lr, UtdCounter};
pub use update::{
    actor_pass, actor_update, apply_actor_pass, apply_critic_pass, critic_pass, critic_update, diagnostics,
    min_q_and_action_grad, standard_normal, ActorMetrics, ActorPass, CriticMetrics, CriticPass, Diagnostics,
};

/// Completed episodes kept for the training-return average.
const RETURN_WINDOW: usize = 32;
/// Weight of the newest actor update in the running entropy estimate.
const ENTROPY_EMA_RATE: f64 = 0.01;

/// What happened during one call to [`Trainer::step`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    pub transitions: u64,
    pub critic_updates: u64,
    pub actor_updates: u64,
    pub episodes_finished: u64,
}

/// Latest values of the quantities reported in metrics rows.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LatestMetrics {
    pub critic: CriticMetrics,
    pub actor: ActorMetrics,
}

type UpdateObserver<T> = Box<dyn FnMut(&AgentState<T>) + Send>;

pub struct Trainer<T: Scalar> {
    pub config: TrainerConfig,
    pub agent: AgentState<T>,
    pub buffer: ReplayBuffer,
    pub tracker: ReturnTracker<T>,
    env: VecEnv,
    zeta: ZetaSampler,
    noise: Vec<NoiseRepeatState<T>>,
    obs: Array2<f64>,
    explore_rng: ChaCha8Rng,
    replay_rng: ChaCha8Rng,
    update_rng: ChaCha8Rng,
    utd: UtdCounter,
    running_returns: Vec<f64>,
    recent_returns: VecDeque<f64>,
    episodes_done: u64,
    latest: LatestMetrics,
    entropy_running: Option<f64>,
    observer: Option<UpdateObserver<T>>,
}

impl<T: Scalar> std::fmt::Debug for Trainer<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Trainer")
            .field("env", &self.env.kind())
            .field("env_steps", &self.agent.env_steps)
            .field("critic_updates", &self.agent.critic_updates)
            .field("actor_updates", &self.agent.actor_updates)
            .finish_non_exhaustive()
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

impl<T: Scalar> Trainer<T> {
    pub fn new(config: TrainerConfig, env: EnvKind) -> Result<Self> {
        config.validate()?;
        let mut vec_env = VecEnv::new(env, config.n_envs)?.with_reward_multiplier(config.reward_multiplier);
        let (s, a) = (vec_env.state_dim(), vec_env.action_dim());
        let obs = vec_env.reset(config.seed);
        Ok(Self {
            agent: AgentState::new(&config, s, a)?,
            buffer: ReplayBuffer::new(config.buffer_capacity, s, a)?,
            tracker: ReturnTracker::new(T::lit(config.gamma), config.n_envs, T::lit(config.g_max)),
            zeta: ZetaSampler::new(config.zeta_s, config.zeta_kmax)?,
            noise: (0..config.n_envs).map(|_| NoiseRepeatState::new(a)).collect(),
            obs,
            explore_rng: stream(config.seed, 1),
            replay_rng: stream(config.seed, 2),
            update_rng: stream(config.seed, 3),
            utd: UtdCounter::new(config.utd_updates, config.utd_per_transitions),
            running_returns: vec![0.0; config.n_envs],
            recent_returns: VecDeque::with_capacity(RETURN_WINDOW),
            episodes_done: 0,
            latest: LatestMetrics::default(),
            entropy_running: None,
            observer: None,
            env: vec_env,
            config,
        })
    }

    pub fn env_kind(&self) -> EnvKind {
        self.env.kind()
    }

    pub fn env_steps(&self) -> u64 {
        self.agent.env_steps
    }

    pub fn is_done(&self) -> bool {
        self.agent.env_steps >= self.config.total_env_steps
    }

    pub fn episodes_done(&self) -> u64 {
        self.episodes_done
    }

    pub fn latest(&self) -> LatestMetrics {
        self.latest
    }

    /// Exponential moving average of the per-update entropy estimate
    /// `mean(−log π)`; `None` before the first actor update.
    pub fn entropy_running(&self) -> Option<f64> {
        self.entropy_running
    }

    pub fn utd_counter(&self) -> &UtdCounter {
        &self.utd
    }

    /// Learning rate at the current environment step.
    pub fn lr(&self) -> f64 {
        cosine_lr(self.config.lr_init, self.config.lr_end, self.agent.env_steps, self.config.total_env_steps)
    }

    /// Mean of the most recently completed training episodes (raw rewards,
    /// including the reward multiplier); zero before the first one ends.
    pub fn train_return_mean(&self) -> f64 {
        if self.recent_returns.is_empty() {
            0.0
        } else {
            self.recent_returns.iter().sum::<f64>() / self.recent_returns.len() as f64
        }
    }

    /// Called with the agent after every critic update and after every actor
    /// update.
    pub fn set_update_observer(&mut self, f: impl FnMut(&AgentState<T>) + Send + 'static) {
        self.observer = Some(Box::new(f));
    }

    fn explore_actions(&mut self) -> Result<Array2<f64>> {
        let (n, a) = (self.config.n_envs, self.agent.action_dim);
        if self.buffer.total_inserted() < self.config.warmup() {
            let rng = &mut self.explore_rng;
            return Ok(Array2::from_shape_simple_fn((n, a), || rng.random_range(-1.0..1.0)));
        }
        let x = self.obs.mapv(T::lit);
        let out = self.agent.actor.forward(x.view(), Mode::Eval)?;
        let head = GaussianHead::from_head_output(out.head_out.view())?;
        let mut eps = Array2::zeros((n, a));
        for (i, state) in self.noise.iter_mut().enumerate() {
            let e = state.next_noise(&self.zeta, &mut self.explore_rng);
            eps.row_mut(i).assign(&ndarray::aview1(e));
        }
        Ok(sample_action(&head, eps.view())?.action.mapv(|v| v.as_f64()))
    }

    /// One step of every environment followed by whatever updates the
    /// update-to-data ratio makes due.
    pub fn step(&mut self) -> Result<StepReport> {
        let actions = self.explore_actions()?;
        let result = self.env.step(actions.view())?;
        let n = self.config.n_envs;
        let rewards: Vec<T> = result.reward.iter().map(|&r| T::lit(r)).collect();
        self.tracker.update(&rewards, &result.terminated, &result.truncated);
        let mut report = StepReport { transitions: n as u64, ..Default::default() };
        for i in 0..n {
            self.buffer.push(
                self.obs.row(i).as_slice().expect("row-major observations"),
                actions.row(i).as_slice().expect("row-major actions"),
                result.reward[i],
                result.final_obs.row(i).as_slice().expect("row-major observations"),
                result.terminated[i],
                result.truncated[i],
            )?;
            self.running_returns[i] += result.reward[i];
            if result.terminated[i] || result.truncated[i] {
                if self.recent_returns.len() == RETURN_WINDOW {
                    self.recent_returns.pop_front();
                }
                self.recent_returns.push_back(self.running_returns[i]);
                self.running_returns[i] = 0.0;
                self.noise[i].reset();
                self.episodes_done += 1;
                report.episodes_finished += 1;
            }
        }
        self.obs = result.obs;
        self.agent.env_steps += n as u64;

        if self.buffer.total_inserted() >= self.config.warmup() {
            let due = self.utd.add(n as u64);
            for _ in 0..due {
                self.update_once(&mut report)?;
            }
        }
        Ok(report)
    }

    fn update_once(&mut self, report: &mut StepReport) -> Result<()> {
        let lr = T::lit(self.lr());
        let batch = self.buffer.sample::<T, _>(self.config.batch_size, &mut self.replay_rng)?;
        self.latest.critic = critic_update(&mut self.agent, &batch, &self.tracker, lr, &mut self.update_rng)?;
        report.critic_updates += 1;
        if let Some(f) = self.observer.as_mut() {
            f(&self.agent);
        }
        if self.agent.critic_updates % self.config.actor_update_delay == 0 {
            self.latest.actor = actor_update(&mut self.agent, batch.states.view(), lr, &mut self.update_rng)?;
            let h = self.latest.actor.entropy;
            self.entropy_running = Some(match self.entropy_running {
                Some(prev) => prev + ENTROPY_EMA_RATE * (h - prev),
                None => h,
            });
            report.actor_updates += 1;
            if let Some(f) = self.observer.as_mut() {
                f(&self.agent);
            }
        }
        Ok(())
    }

    /// Steps until the configured number of environment steps is reached.
    pub fn run(&mut self) -> Result<()> {
        while !self.is_done() {
            self.step()?;
        }
        Ok(())
    }

    /// Steps until `env_steps` reaches at least `target` (or the run ends).
    pub fn run_until(&mut self, target: u64) -> Result<()> {
        while self.agent.env_steps < target && !self.is_done() {
            self.step()?;
        }
        Ok(())
    }

    pub fn evaluate(&self, episodes: usize, seed: u64) -> Result<(f64, f64)> {
        evaluate(&self.agent, self.env.kind(), episodes, seed)
    }

    /// Norm diagnostics on a fresh replay sample, drawn from a dedicated
    /// generator so training is unaffected.
    pub fn diagnostics(&self, seed: u64) -> Result<Diagnostics> {
        let mut rng = stream(seed, 4);
        let batch = self.buffer.sample::<T, _>(self.config.batch_size.min(256), &mut rng)?;
        diagnostics(&self.agent, &batch, &self.tracker, &mut rng)
    }

    /// Deterministic actions for the current observations.
    pub fn act(&self, obs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.agent.act(obs)
    }

    pub fn checkpoint_tensors(&self) -> Vec<NamedTensor> {
        let mut t = self.agent.checkpoint_tensors();
        t.push(NamedTensor::scalar("meta.reward_scale_denom", self.tracker.denominator().as_f64()));
        t
    }

    pub fn save_checkpoint(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        checkpoint::save(path, &self.checkpoint_tensors())
    }
}
