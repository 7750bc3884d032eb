use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use super::{Env, EnvStep};

pub const LINK_LENGTH: f64 = 0.1;
const DT: f64 = 0.02;
const MAX_JOINT_SPEED: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReacherState {
    pub theta: [f64; 2],
    pub theta_dot: [f64; 2],
    pub target: [f64; 2],
}

/// Forward kinematics of the two-link arm.
pub fn fingertip(theta: [f64; 2]) -> [f64; 2] {
    let (s1, c1) = theta[0].sin_cos();
    let (s12, c12) = (theta[0] + theta[1]).sin_cos();
    [LINK_LENGTH * (c1 + c12), LINK_LENGTH * (s1 + s12)]
}

impl ReacherState {
    pub fn obs(&self) -> Vec<f64> {
        let tip = fingertip(self.theta);
        vec![
            self.theta[0].cos(),
            self.theta[1].cos(),
            self.theta[0].sin(),
            self.theta[1].sin(),
            self.theta_dot[0],
            self.theta_dot[1],
            self.target[0],
            self.target[1],
            tip[0] - self.target[0],
            tip[1] - self.target[1],
        ]
    }

    pub fn distance(&self) -> f64 {
        let tip = fingertip(self.theta);
        (tip[0] - self.target[0]).hypot(tip[1] - self.target[1])
    }
}

/// Velocity-controlled step; the reward is taken at the reached configuration.
pub fn reacher_step(s: &ReacherState, action: [f64; 2]) -> (ReacherState, f64) {
    let a = action.map(|v| v.clamp(-1.0, 1.0));
    let theta_dot = a.map(|v| MAX_JOINT_SPEED * v);
    let theta = [
        wrap(s.theta[0] + theta_dot[0] * DT),
        wrap(s.theta[1] + theta_dot[1] * DT),
    ];
    let next = ReacherState { theta, theta_dot, target: s.target };
    let reward = -next.distance() - 0.01 * (a[0] * a[0] + a[1] * a[1]);
    (next, reward)
}

fn wrap(theta: f64) -> f64 {
    if theta.abs() > 64.0 {
        super::wrap_angle(theta)
    } else {
        theta
    }
}

#[derive(Debug, Clone, Default)]
pub struct Reacher {
    pub state: ReacherState,
}

impl Env for Reacher {
    fn state_dim(&self) -> usize {
        10
    }

    fn action_dim(&self) -> usize {
        2
    }

    fn max_steps(&self) -> usize {
        150
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let theta = [rng.random_range(-PI..PI), rng.random_range(-PI..PI)];
        let radius = 2.0 * LINK_LENGTH * rng.random::<f64>().sqrt();
        let phi = rng.random_range(0.0..2.0 * PI);
        self.state = ReacherState {
            theta,
            theta_dot: [0.0; 2],
            target: [radius * phi.cos(), radius * phi.sin()],
        };
        self.state.obs()
    }

    fn step(&mut self, action: &[f64], _rng: &mut ChaCha8Rng) -> EnvStep {
        let (next, reward) = reacher_step(&self.state, [action[0], action[1]]);
        self.state = next;
        EnvStep { obs: next.obs(), reward, terminated: false }
    }
}
