#![allow(dead_code)]

use flashsac::replay::Batch;
use flashsac::trainer::{AgentState, TrainerConfig};
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const RTOL: f64 = 1e-4;
/// Denominator floor for relative errors of near-zero gradient entries.
pub const FLOOR: f64 = 1e-6;

pub fn normal(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || scale * rng.sample::<f64, _>(StandardNormal))
}

pub fn normal_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn tiny_config(seed: u64) -> TrainerConfig {
    TrainerConfig {
        actor_width: 4,
        actor_blocks: 1,
        critic_width: 4,
        critic_blocks: 1,
        expansion: 2,
        n_atoms: 5,
        batch_size: 4,
        buffer_capacity: 64,
        seed,
        ..Default::default()
    }
}

/// Agent with every learnable parameter redrawn from a normal distribution,
/// so gradients are checked away from the structured initialization.
pub fn random_agent(config: &TrainerConfig, s: usize, a: usize, rng: &mut ChaCha8Rng) -> AgentState<f64> {
    let mut agent = AgentState::<f64>::new(config, s, a).unwrap();
    let scramble = |net: &mut flashsac::NetworkParams64, rng: &mut ChaCha8Rng| {
        let n = net.num_learnable();
        net.set_learnable(&normal_vec(rng, n, 0.7)).unwrap();
    };
    scramble(&mut agent.actor, rng);
    for c in agent.critics.iter_mut().chain(agent.target_critics.iter_mut()) {
        scramble(c, rng);
    }
    agent
}

pub fn random_batch(rng: &mut ChaCha8Rng, b: usize, s: usize, a: usize) -> Batch<f64> {
    Batch {
        states: normal(rng, b, s, 1.0),
        actions: Array2::from_shape_simple_fn((b, a), || rng.random_range(-0.9..0.9)),
        rewards: Array1::from_shape_simple_fn(b, || rng.random_range(-2.0..1.0)),
        next_states: normal(rng, b, s, 1.0),
        terminated: Array1::from_shape_simple_fn(b, || rng.random_bool(0.3)),
        truncated: Array1::from_elem(b, false),
    }
}
