use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Env, EnvStep};

const GRAVITY: f64 = 9.81;
const MASS: f64 = 1.0;
const LENGTH: f64 = 1.0;
const DT: f64 = 0.05;
const MAX_SPEED: f64 = 8.0;
const MAX_TORQUE: f64 = 2.0;

/// Angle measured from upright.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PendulumState {
    pub theta: f64,
    pub theta_dot: f64,
}

impl PendulumState {
    pub fn obs(&self) -> Vec<f64> {
        vec![self.theta.cos(), self.theta.sin(), self.theta_dot]
    }
}

/// Angle wrapped into `[−π, π]`; odd in its argument.
pub fn wrap_angle(theta: f64) -> f64 {
    theta.sin().atan2(theta.cos())
}

/// Conserved quantity of the unforced, unclipped dynamics.
pub fn pendulum_energy(s: &PendulumState) -> f64 {
    0.5 * s.theta_dot * s.theta_dot + 1.5 * GRAVITY / LENGTH * s.theta.cos()
}

/// Semi-implicit Euler step; returns the next state and the reward for
/// the current state and torque.
pub fn pendulum_step(s: &PendulumState, action: f64) -> (PendulumState, f64) {
    let u = (MAX_TORQUE * action).clamp(-MAX_TORQUE, MAX_TORQUE);
    let th = wrap_angle(s.theta);
    let reward = -(th * th + 0.1 * s.theta_dot * s.theta_dot + 0.001 * u * u);
    let accel = 1.5 * GRAVITY / LENGTH * s.theta.sin() + 3.0 * u / (MASS * LENGTH * LENGTH);
    let theta_dot = (s.theta_dot + accel * DT).clamp(-MAX_SPEED, MAX_SPEED);
    let theta = s.theta + theta_dot * DT;
    (PendulumState { theta, theta_dot }, reward)
}

#[derive(Debug, Clone, Default)]
pub struct Pendulum {
    pub state: PendulumState,
}

impl Env for Pendulum {
    fn state_dim(&self) -> usize {
        3
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn max_steps(&self) -> usize {
        200
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.state = PendulumState {
            theta: rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
            theta_dot: rng.random_range(-1.0..1.0),
        };
        self.state.obs()
    }

    fn step(&mut self, action: &[f64], _rng: &mut ChaCha8Rng) -> EnvStep {
        let (next, reward) = pendulum_step(&self.state, action[0]);
        // keep the angle bounded without touching the dynamics
        self.state = PendulumState {
            theta: if next.theta.abs() > 64.0 { wrap_angle(next.theta) } else { next.theta },
            theta_dot: next.theta_dot,
        };
        EnvStep {
            obs: self.state.obs(),
            reward,
            terminated: false,
        }
    }
}
