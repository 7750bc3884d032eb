use ndarray::{Array2, ArrayView2};

use crate::envs::{EnvKind, VecEnv};
use crate::error::Result;
use crate::nn::{Mode, NetworkParams};
use crate::policy::GaussianHead;
use crate::Scalar;

use super::AgentState;

/// Maps a batch of observations to actions in `[−1, 1]`.
pub trait DeterministicPolicy {
    fn act(&self, obs: ArrayView2<'_, f64>) -> Result<Array2<f64>>;
}

/// `tanh(mean)` of an actor network, batch norm in eval mode.
pub fn actor_action<T: Scalar>(actor: &NetworkParams<T>, obs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let x = obs.mapv(T::lit);
    let out = actor.forward(x.view(), Mode::Eval)?;
    let head = GaussianHead::from_head_output(out.head_out.view())?;
    Ok(head.deterministic_action().mapv(|v| v.as_f64()))
}

impl<T: Scalar> DeterministicPolicy for NetworkParams<T> {
    fn act(&self, obs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        actor_action(self, obs)
    }
}

impl<T: Scalar> DeterministicPolicy for AgentState<T> {
    fn act(&self, obs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        actor_action(&self.actor, obs)
    }
}

/// Wraps a closure as a policy.
pub struct FnPolicy<F>(pub F);

impl<F> DeterministicPolicy for FnPolicy<F>
where
    F: Fn(ArrayView2<'_, f64>) -> Array2<f64>,
{
    fn act(&self, obs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        Ok((self.0)(obs))
    }
}

/// Mean and population standard deviation of the undiscounted return of
/// `episodes` episodes, all run in parallel from `seed`.
pub fn evaluate(policy: &impl DeterministicPolicy, env: EnvKind, episodes: usize, seed: u64) -> Result<(f64, f64)> {
    let returns = episode_returns(policy, env, episodes, seed)?;
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

/// Undiscounted return of the first episode of each of `episodes` parallel
/// environments.
pub fn episode_returns(policy: &impl DeterministicPolicy, env: EnvKind, episodes: usize, seed: u64) -> Result<Vec<f64>> {
    let mut vec_env = VecEnv::new(env, episodes)?;
    let mut obs = vec_env.reset(seed);
    let mut returns = vec![0.0; episodes];
    let mut done = vec![false; episodes];
    while done.iter().any(|d| !d) {
        let actions = policy.act(obs.view())?;
        let step = vec_env.step(actions.view())?;
        for i in 0..episodes {
            if done[i] {
                continue;
            }
            returns[i] += step.reward[i];
            if step.terminated[i] || step.truncated[i] {
                done[i] = true;
            }
        }
        obs = step.obs;
    }
    Ok(returns)
}
