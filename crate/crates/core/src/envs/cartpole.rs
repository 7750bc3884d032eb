use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Env, EnvStep};

const GRAVITY: f64 = 9.81;
const CART_MASS: f64 = 1.0;
const POLE_MASS: f64 = 0.1;
const HALF_LENGTH: f64 = 0.5;
const FORCE_MAG: f64 = 10.0;
const DT: f64 = 0.02;
const THETA_LIMIT: f64 = 0.21;
const X_LIMIT: f64 = 2.4;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CartPoleState {
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
}

impl CartPoleState {
    pub fn obs(&self) -> Vec<f64> {
        vec![self.x, self.x_dot, self.theta, self.theta_dot]
    }

    pub fn in_bounds(&self) -> bool {
        self.theta.abs() < THETA_LIMIT && self.x.abs() < X_LIMIT
    }
}

/// Explicit Euler step. Returns the next state, reward and termination flag.
pub fn cartpole_step(s: &CartPoleState, action: f64) -> (CartPoleState, f64, bool) {
    let force = FORCE_MAG * action.clamp(-1.0, 1.0);
    let total = CART_MASS + POLE_MASS;
    let pml = POLE_MASS * HALF_LENGTH;
    let (sin, cos) = s.theta.sin_cos();
    let temp = (force + pml * s.theta_dot * s.theta_dot * sin) / total;
    let theta_acc = (GRAVITY * sin - cos * temp) / (HALF_LENGTH * (4.0 / 3.0 - POLE_MASS * cos * cos / total));
    let x_acc = temp - pml * theta_acc * cos / total;
    let next = CartPoleState {
        x: s.x + DT * s.x_dot,
        x_dot: s.x_dot + DT * x_acc,
        theta: s.theta + DT * s.theta_dot,
        theta_dot: s.theta_dot + DT * theta_acc,
    };
    let alive = next.in_bounds();
    (next, if alive { 1.0 } else { 0.0 }, !alive)
}

#[derive(Debug, Clone, Default)]
pub struct CartPole {
    pub state: CartPoleState,
}

impl Env for CartPole {
    fn state_dim(&self) -> usize {
        4
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn max_steps(&self) -> usize {
        500
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut u = || rng.random_range(-0.05..0.05);
        self.state = CartPoleState { x: u(), x_dot: u(), theta: u(), theta_dot: u() };
        self.state.obs()
    }

    fn step(&mut self, action: &[f64], _rng: &mut ChaCha8Rng) -> EnvStep {
        let (next, reward, terminated) = cartpole_step(&self.state, action[0]);
        self.state = next;
        EnvStep { obs: next.obs(), reward, terminated }
    }
}
