use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Env, EnvStep};

pub const LQR_A: f64 = 1.0;
pub const LQR_B: f64 = 1.0;
pub const LQR_Q: f64 = 1.0;
pub const LQR_R: f64 = 1.0;
pub const LQR_NOISE_STD: f64 = 0.01;
/// Physical control per unit action.
pub const LQR_CONTROL_SCALE: f64 = 2.0;
const BLOW_UP: f64 = 10.0;

/// One step of the scalar system given the disturbance `w`. Returns the next
/// state, the reward for the current state and control, and termination.
pub fn lqr_step(x: f64, action: f64, w: f64) -> (f64, f64, bool) {
    let u = LQR_CONTROL_SCALE * action.clamp(-1.0, 1.0);
    let reward = -(LQR_Q * x * x + LQR_R * u * u);
    let next = LQR_A * x + LQR_B * u + w;
    (next, reward, next.abs() > BLOW_UP)
}

#[derive(Debug, Clone, Default)]
pub struct Lqr {
    pub x: f64,
}

impl Env for Lqr {
    fn state_dim(&self) -> usize {
        1
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn max_steps(&self) -> usize {
        100
    }

    fn reset(&mut self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.x = rng.random_range(-1.0..1.0);
        vec![self.x]
    }

    fn step(&mut self, action: &[f64], rng: &mut ChaCha8Rng) -> EnvStep {
        let w: f64 = rng.sample(StandardNormal);
        let (next, reward, terminated) = lqr_step(self.x, action[0], LQR_NOISE_STD * w);
        // terminated episodes are reset by the caller; the clamp only guards
        // against unbounded growth for callers stepping past termination
        self.x = next.clamp(-1e6, 1e6);
        EnvStep { obs: vec![self.x], reward, terminated }
    }
}
