//! Deterministic, vectorized analytic control tasks. Every task takes actions
//! in `[−1, 1]^A` and maps them to its physical range internally.

mod cartpole;
mod lqr;
mod pendulum;
mod reacher;

use std::fmt::Debug;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use cartpole::{cartpole_step, CartPole, CartPoleState};
pub use lqr::{lqr_step, Lqr, LQR_A, LQR_B, LQR_CONTROL_SCALE, LQR_NOISE_STD, LQR_Q, LQR_R};
pub use pendulum::{pendulum_energy, pendulum_step, wrap_angle, Pendulum, PendulumState};
pub use reacher::{fingertip, reacher_step, Reacher, ReacherState, LINK_LENGTH};

/// Outcome of one step of a single environment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvStep {
    pub obs: Vec<f64>,
    pub reward: f64,
    pub terminated: bool,
}

pub trait Env: Debug + Send {
    fn state_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    /// Episode length after which the episode is truncated.
    fn max_steps(&self) -> usize;
    fn reset(&mut self, rng: &mut ChaCha8Rng) -> Vec<f64>;
    /// `action` is already clipped to `[−1, 1]` and finite.
    fn step(&mut self, action: &[f64], rng: &mut ChaCha8Rng) -> EnvStep;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    Pendulum,
    CartPole,
    Reacher,
    Lqr,
}

impl EnvKind {
    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Pendulum => "pendulum",
            EnvKind::CartPole => "cartpole",
            EnvKind::Reacher => "reacher",
            EnvKind::Lqr => "lqr",
        }
    }

    pub fn make(self) -> Box<dyn Env> {
        match self {
            EnvKind::Pendulum => Box::new(Pendulum::default()),
            EnvKind::CartPole => Box::new(CartPole::default()),
            EnvKind::Reacher => Box::new(Reacher::default()),
            EnvKind::Lqr => Box::new(Lqr::default()),
        }
    }

    pub fn dims(self) -> (usize, usize) {
        let e = self.make();
        (e.state_dim(), e.action_dim())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pendulum" => Ok(EnvKind::Pendulum),
            "cartpole" => Ok(EnvKind::CartPole),
            "reacher" => Ok(EnvKind::Reacher),
            "lqr" => Ok(EnvKind::Lqr),
            other => Err(Error::UnknownEnv(other.to_owned())),
        }
    }
}

impl std::fmt::Display for EnvKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of stepping every environment once.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    /// Observation to act on next: the fresh episode's first observation where
    /// an episode ended.
    pub obs: Array2<f64>,
    /// Observation reached by the action (pre-reset), for replay.
    pub final_obs: Array2<f64>,
    pub reward: Array1<f64>,
    pub terminated: Vec<bool>,
    pub truncated: Vec<bool>,
}

/// `n_envs` copies of one task with auto-reset. Environment `i` draws from
/// its own ChaCha stream `i` of the reset seed.
#[derive(Debug)]
pub struct VecEnv {
    kind: EnvKind,
    envs: Vec<Box<dyn Env>>,
    rngs: Vec<ChaCha8Rng>,
    steps: Vec<usize>,
    reward_multiplier: f64,
}

impl VecEnv {
    pub fn new(kind: EnvKind, n_envs: usize) -> Result<Self> {
        if n_envs == 0 {
            return Err(Error::Config("n_envs must be positive".into()));
        }
        Ok(Self {
            kind,
            envs: (0..n_envs).map(|_| kind.make()).collect(),
            rngs: (0..n_envs).map(|_| ChaCha8Rng::seed_from_u64(0)).collect(),
            steps: vec![0; n_envs],
            reward_multiplier: 1.0,
        })
    }

    /// Multiplies every emitted reward (reward-scale experiments).
    pub fn with_reward_multiplier(mut self, m: f64) -> Self {
        self.reward_multiplier = m;
        self
    }

    pub fn kind(&self) -> EnvKind {
        self.kind
    }

    pub fn n_envs(&self) -> usize {
        self.envs.len()
    }

    pub fn state_dim(&self) -> usize {
        self.envs[0].state_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.envs[0].action_dim()
    }

    pub fn max_steps(&self) -> usize {
        self.envs[0].max_steps()
    }

    pub fn envs(&self) -> &[Box<dyn Env>] {
        &self.envs
    }

    pub fn reset(&mut self, seed: u64) -> Array2<f64> {
        let s = self.state_dim();
        let mut obs = Array2::zeros((self.n_envs(), s));
        for (i, (env, rng)) in self.envs.iter_mut().zip(&mut self.rngs).enumerate() {
            *rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let o = env.reset(rng);
            obs.row_mut(i).assign(&ndarray::aview1(&o));
        }
        self.steps.iter_mut().for_each(|c| *c = 0);
        obs
    }

    pub fn step(&mut self, actions: ArrayView2<'_, f64>) -> Result<StepResult> {
        let (n, s, a) = (self.n_envs(), self.state_dim(), self.action_dim());
        if actions.dim() != (n, a) {
            return Err(Error::shape("VecEnv::step", format!("({n}, {a})"), format!("{:?}", actions.dim())));
        }
        let mut out = StepResult {
            obs: Array2::zeros((n, s)),
            final_obs: Array2::zeros((n, s)),
            reward: Array1::zeros(n),
            terminated: vec![false; n],
            truncated: vec![false; n],
        };
        let limit = self.max_steps();
        let mut act = vec![0.0; a];
        for i in 0..n {
            for (dst, &v) in act.iter_mut().zip(actions.row(i)) {
                *dst = if v.is_finite() { v.clamp(-1.0, 1.0) } else { 0.0 };
            }
            let step = self.envs[i].step(&act, &mut self.rngs[i]);
            self.steps[i] += 1;
            let truncated = !step.terminated && self.steps[i] >= limit;
            out.final_obs.row_mut(i).assign(&ndarray::aview1(&step.obs));
            out.reward[i] = step.reward * self.reward_multiplier;
            out.terminated[i] = step.terminated;
            out.truncated[i] = truncated;
            if step.terminated || truncated {
                let fresh = self.envs[i].reset(&mut self.rngs[i]);
                self.steps[i] = 0;
                out.obs.row_mut(i).assign(&ndarray::aview1(&fresh));
            } else {
                out.obs.row_mut(i).assign(&ndarray::aview1(&step.obs));
            }
        }
        Ok(out)
    }
}
