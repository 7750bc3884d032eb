use ndarray::{concatenate, s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::distributional::{cross_entropy, mean_logit_jacobian, softmax};
use crate::error::{Error, Result};
use crate::nn::{BatchStats, Mode, NetworkGrads};
use crate::policy::{sample_action, GaussianHead};
use crate::replay::Batch;
use crate::reward_norm::ReturnTracker;
use crate::Scalar;

use super::AgentState;

/// Scalars produced by one critic update.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CriticMetrics {
    pub loss: f64,
    pub grad_norm: f64,
    /// Mean post-RMSNorm row norm of the first critic over the joint batch.
    pub feature_norm: f64,
}

/// Scalars produced by one actor and temperature update.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActorMetrics {
    pub loss: f64,
    pub grad_norm: f64,
    pub alpha: f64,
    /// `mean(−log π)` over the fresh samples of the update.
    pub entropy: f64,
    pub temperature_loss: f64,
}

/// Everything a critic step needs, computed without touching the agent.
#[derive(Debug, Clone)]
pub struct CriticPass<T> {
    pub loss: T,
    pub losses: [T; 2],
    pub grads: [NetworkGrads<T>; 2],
    /// Projected target distribution `[B × atoms]`.
    pub target: Array2<T>,
    /// Which target critic supplied each sample's distribution.
    pub selected: Vec<usize>,
    /// Batch-norm statistics of each online critic, one entry per block.
    pub stats: [Vec<Option<BatchStats<T>>>; 2],
    /// Batch-norm statistics seen by each target critic.
    pub target_stats: [Vec<Option<BatchStats<T>>>; 2],
    pub feature_norm: T,
}

/// Everything an actor step needs, computed without touching the agent.
#[derive(Debug, Clone)]
pub struct ActorPass<T> {
    pub loss: T,
    pub grads: NetworkGrads<T>,
    pub log_probs: Array1<T>,
    pub stats: Vec<Option<BatchStats<T>>>,
}

pub fn standard_normal<T: Scalar, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<T> {
    Array2::from_shape_simple_fn((rows, cols), || T::lit(rng.sample::<f64, _>(StandardNormal)))
}

fn critic_input<T: Scalar>(s: ArrayView2<'_, T>, a: ArrayView2<'_, T>) -> Result<Array2<T>> {
    concatenate(Axis(1), &[s, a]).map_err(|_| Error::shape("critic input", s.nrows(), a.nrows()))
}

fn mean_row_norm<T: Scalar>(x: &Array2<T>) -> T {
    let total = x.rows().into_iter().fold(T::zero(), |acc, r| acc + r.dot(&r).sqrt());
    total / T::lit(x.nrows().max(1) as f64)
}

fn norms_dump<T: Scalar>(agent: &AgentState<T>) -> String {
    format!(
        "actor={:.6e} critic0={:.6e} critic1={:.6e} target0={:.6e} target1={:.6e} log_alpha={:.6e}",
        agent.actor.learnable_norm().as_f64(),
        agent.critics[0].learnable_norm().as_f64(),
        agent.critics[1].learnable_norm().as_f64(),
        agent.target_critics[0].learnable_norm().as_f64(),
        agent.target_critics[1].learnable_norm().as_f64(),
        agent.temperature.log_alpha.as_f64(),
    )
}

/// Distributional critic loss on `batch` with next actions drawn from
/// `next_eps`. Online and target critics see the joint batch
/// `[(s, a); (s′, a′)]` in train mode so both halves share batch statistics.
pub fn critic_pass<T: Scalar>(
    agent: &AgentState<T>,
    batch: &Batch<T>,
    tracker: &ReturnTracker<T>,
    next_eps: ArrayView2<'_, T>,
) -> Result<CriticPass<T>> {
    let b = batch.len();
    let n = agent.grid.n_atoms();

    let actor_out = agent.actor.forward(batch.next_states.view(), Mode::Eval)?;
    let head = GaussianHead::from_head_output(actor_out.head_out.view())?;
    let next = sample_action(&head, next_eps)?;

    let x = concatenate(
        Axis(0),
        &[
            critic_input(batch.states.view(), batch.actions.view())?.view(),
            critic_input(batch.next_states.view(), next.action.view())?.view(),
        ],
    )
    .map_err(|_| Error::shape("joint critic batch", 2 * b, 0))?;

    let mut target_probs = Vec::with_capacity(2);
    let mut target_stats: [Vec<Option<BatchStats<T>>>; 2] = [Vec::new(), Vec::new()];
    for (k, tc) in agent.target_critics.iter().enumerate() {
        let out = tc.forward(x.view(), Mode::Train)?;
        target_stats[k] = out.tape.owned_batch_stats();
        target_probs.push(softmax(out.head_out.slice(s![b.., ..])));
    }
    let means = [agent.grid.mean(target_probs[0].view()), agent.grid.mean(target_probs[1].view())];
    let selected: Vec<usize> = (0..b).map(|i| usize::from(means[1][i] < means[0][i])).collect();
    let mut source = Array2::zeros((b, n));
    for (i, &k) in selected.iter().enumerate() {
        source.row_mut(i).assign(&target_probs[k].row(i));
    }

    let rewards: Vec<T> = batch.rewards.to_vec();
    let scaled = tracker.scale(&rewards);
    let alpha = agent.alpha();
    let mut tz = Array2::zeros((b, n));
    for i in 0..b {
        let mask = if batch.terminated[i] { T::zero() } else { T::one() };
        let entropy_shift = alpha * next.log_prob[i];
        for (j, &z) in agent.grid.atoms.iter().enumerate() {
            tz[[i, j]] = scaled[i] + agent.gamma * mask * (z - entropy_shift);
        }
    }
    let target = agent.grid.project(tz.view(), source.view())?;

    let mut losses = [T::zero(); 2];
    let mut stats: [Vec<Option<BatchStats<T>>>; 2] = [Vec::new(), Vec::new()];
    let mut grads = Vec::with_capacity(2);
    let mut feature_norm = T::zero();
    for (k, c) in agent.critics.iter().enumerate() {
        let out = c.forward(x.view(), Mode::Train)?;
        if k == 0 {
            feature_norm = mean_row_norm(&out.features);
        }
        let (loss, g) = cross_entropy(out.head_out.slice(s![..b, ..]), target.view())?;
        losses[k] = loss;
        let mut d_head = Array2::zeros((2 * b, n));
        d_head.slice_mut(s![..b, ..]).assign(&g);
        stats[k] = out.tape.owned_batch_stats();
        grads.push(out.tape.backward(c, d_head.view())?.params);
    }
    let loss = losses[0] + losses[1];
    if !loss.is_finite() {
        return Err(Error::Diverged { what: "critic loss", norms: norms_dump(agent) });
    }
    let g1 = grads.pop().expect("two critics");
    let g0 = grads.pop().expect("two critics");
    Ok(CriticPass {
        loss,
        losses,
        grads: [g0, g1],
        target,
        selected,
        stats,
        target_stats,
        feature_norm,
    })
}

/// One critic step: Adam on both critics, running statistics, weight
/// projection, then the target moving average.
pub fn critic_update<T: Scalar, R: Rng + ?Sized>(
    agent: &mut AgentState<T>,
    batch: &Batch<T>,
    tracker: &ReturnTracker<T>,
    lr: T,
    rng: &mut R,
) -> Result<CriticMetrics> {
    let eps = standard_normal(batch.len(), agent.action_dim, rng);
    let pass = critic_pass(agent, batch, tracker, eps.view())?;
    apply_critic_pass(agent, pass, lr)
}

pub fn apply_critic_pass<T: Scalar>(agent: &mut AgentState<T>, pass: CriticPass<T>, lr: T) -> Result<CriticMetrics> {
    let grad_sq: T = pass.grads.iter().map(|g| g.learnable_norm().powi(2)).sum();
    for k in 0..2 {
        agent.critic_opts[k].step_network(&mut agent.critics[k], &pass.grads[k], lr);
        agent.critics[k].absorb_stats(&pass.stats[k]);
        if agent.weight_norm {
            agent.critics[k].project_weights();
        }
        agent.target_critics[k].ema_from(&agent.critics[k], agent.tau);
    }
    agent.critic_updates += 1;
    let grad_norm = grad_sq.sqrt();
    if !grad_norm.is_finite() || agent.critics.iter().any(|c| !c.learnable_norm().is_finite()) {
        return Err(Error::Diverged { what: "critic parameters", norms: norms_dump(agent) });
    }
    Ok(CriticMetrics {
        loss: pass.loss.as_f64(),
        grad_norm: grad_norm.as_f64(),
        feature_norm: pass.feature_norm.as_f64(),
    })
}

/// Min-over-critics value of `(s, a)` with critics in eval mode, and the
/// gradient of `−mean(min Q)` with respect to the actions.
pub fn min_q_and_action_grad<T: Scalar>(
    agent: &AgentState<T>,
    states: ArrayView2<'_, T>,
    actions: ArrayView2<'_, T>,
) -> Result<(Array1<T>, Array2<T>)> {
    let b = states.nrows();
    let x = critic_input(states, actions)?;
    let mut outs = Vec::with_capacity(2);
    for c in &agent.critics {
        let out = c.forward(x.view(), Mode::Eval)?;
        let probs = softmax(out.head_out.view());
        let q = agent.grid.mean(probs.view());
        outs.push((out.tape, probs, q));
    }
    let take_second: Vec<bool> = (0..b).map(|i| outs[1].2[i] < outs[0].2[i]).collect();
    let q_min = Array1::from_shape_fn(b, |i| outs[usize::from(take_second[i])].2[i]);
    let scale = -T::one() / T::lit(b as f64);
    let mut d_action = Array2::zeros(actions.raw_dim());
    for (k, (tape, probs, _)) in outs.into_iter().enumerate() {
        let mut d_head = mean_logit_jacobian(&agent.grid, probs.view());
        for (i, mut row) in d_head.rows_mut().into_iter().enumerate() {
            if usize::from(take_second[i]) == k {
                row.mapv_inplace(|v| v * scale);
            } else {
                row.fill(T::zero());
            }
        }
        let d_in = tape.backward_input(&agent.critics[k], d_head.view())?;
        d_action += &d_in.slice(s![.., agent.state_dim..]);
    }
    Ok((q_min, d_action))
}

/// Actor loss `mean(α·log π(a|s) − min Q(s, a))` with reparameterized
/// actions `a = tanh(μ + σ·eps)`, and its gradient for the actor.
pub fn actor_pass<T: Scalar>(agent: &AgentState<T>, states: ArrayView2<'_, T>, eps: ArrayView2<'_, T>) -> Result<ActorPass<T>> {
    let b = states.nrows();
    let out = agent.actor.forward(states, Mode::Train)?;
    let head = GaussianHead::from_head_output(out.head_out.view())?;
    let sampled = sample_action(&head, eps)?;
    let (q_min, d_action) = min_q_and_action_grad(agent, states, sampled.action.view())?;
    let alpha = agent.alpha();
    let inv_b = T::one() / T::lit(b as f64);
    let loss = (&sampled.log_prob.mapv(|lp| alpha * lp) - &q_min).sum() * inv_b;
    if !loss.is_finite() {
        return Err(Error::Diverged { what: "actor loss", norms: norms_dump(agent) });
    }
    let d_log_prob = Array1::from_elem(b, alpha * inv_b);
    let d_head = sampled.backward(&head, Some(d_action.view()), d_log_prob.view());
    let stats = out.tape.owned_batch_stats();
    let grads = out.tape.backward(&agent.actor, d_head.view())?.params;
    Ok(ActorPass { loss, grads, log_probs: sampled.log_prob, stats })
}

/// One actor step followed by one temperature step on the same samples.
pub fn actor_update<T: Scalar, R: Rng + ?Sized>(
    agent: &mut AgentState<T>,
    states: ArrayView2<'_, T>,
    lr: T,
    rng: &mut R,
) -> Result<ActorMetrics> {
    let eps = standard_normal(states.nrows(), agent.action_dim, rng);
    let pass = actor_pass(agent, states, eps.view())?;
    Ok(apply_actor_pass(agent, pass, lr))
}

pub fn apply_actor_pass<T: Scalar>(agent: &mut AgentState<T>, pass: ActorPass<T>, lr: T) -> ActorMetrics {
    agent.actor_opt.step_network(&mut agent.actor, &pass.grads, lr);
    agent.actor.absorb_stats(&pass.stats);
    if agent.weight_norm {
        agent.actor.project_weights();
    }
    let temperature_loss = agent.temperature.update(pass.log_probs.view(), agent.entropy_target, lr);
    agent.actor_updates += 1;
    ActorMetrics {
        loss: pass.loss.as_f64(),
        grad_norm: pass.grads.learnable_norm().as_f64(),
        alpha: agent.alpha().as_f64(),
        entropy: -mean_of(pass.log_probs.view()).as_f64(),
        temperature_loss: temperature_loss.as_f64(),
    }
}

fn mean_of<T: Scalar>(v: ArrayView1<'_, T>) -> T {
    v.mean().unwrap_or_else(T::zero)
}

/// Norm diagnostics of the current agent on `batch`, computed without any
/// state change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub param_norm_actor: f64,
    pub param_norm_critic: [f64; 2],
    pub feature_norm_critic: f64,
    pub grad_norm_critic: f64,
    pub alpha: f64,
    pub policy_entropy: f64,
}

pub fn diagnostics<T: Scalar, R: Rng + ?Sized>(
    agent: &AgentState<T>,
    batch: &Batch<T>,
    tracker: &ReturnTracker<T>,
    rng: &mut R,
) -> Result<Diagnostics> {
    let eps = standard_normal(batch.len(), agent.action_dim, rng);
    let pass = critic_pass(agent, batch, tracker, eps.view())?;
    let grad_sq: T = pass.grads.iter().map(|g| g.learnable_norm().powi(2)).sum();
    let out = agent.actor.forward(batch.states.view(), Mode::Eval)?;
    let head = GaussianHead::from_head_output(out.head_out.view())?;
    let eps = standard_normal(batch.len(), agent.action_dim, rng);
    let sampled = sample_action(&head, eps.view())?;
    Ok(Diagnostics {
        param_norm_actor: agent.actor.learnable_norm().as_f64(),
        param_norm_critic: [agent.critics[0].learnable_norm().as_f64(), agent.critics[1].learnable_norm().as_f64()],
        feature_norm_critic: pass.feature_norm.as_f64(),
        grad_norm_critic: grad_sq.sqrt().as_f64(),
        alpha: agent.alpha().as_f64(),
        policy_entropy: -mean_of(sampled.log_prob.view()).as_f64(),
    })
}
