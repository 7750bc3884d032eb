//! Tanh-squashed Gaussian policy head, reparameterized sampling, the entropy
//! target and the learned temperature.

use std::f64::consts::{E, PI};

use ndarray::{concatenate, s, Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};

use crate::error::{Error, Result};
use crate::nn::{Adam, AdamConfig};
use crate::Scalar;

pub const LOG_STD_MIN: f64 = -10.0;
pub const LOG_STD_MAX: f64 = 2.0;
/// Added inside `log(1 − tanh²(u) + ε)`.
pub const SQUASH_EPS: f64 = 1e-6;
/// Largest action magnitude handed out; keeps actions strictly inside (−1, 1)
/// even where `tanh` rounds to ±1.
pub const ACTION_BOUND: f64 = 1.0 - 1e-7;

/// Mean and clamped log standard deviation of a diagonal Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianHead<T> {
    pub mean: Array2<T>,
    pub log_std: Array2<T>,
    /// `false` where the raw log-std was clamped (zero gradient there).
    unclamped: Array2<bool>,
}

impl<T: Scalar> GaussianHead<T> {
    /// Splits a `[B × 2A]` actor output into mean and log-std halves.
    pub fn from_head_output(out: ArrayView2<'_, T>) -> Result<Self> {
        if out.ncols() % 2 != 0 || out.ncols() == 0 {
            return Err(Error::shape("policy head", "an even, non-zero width", out.ncols()));
        }
        let a = out.ncols() / 2;
        let raw = out.slice(s![.., a..]);
        let (lo, hi) = (T::lit(LOG_STD_MIN), T::lit(LOG_STD_MAX));
        Ok(Self {
            mean: out.slice(s![.., ..a]).to_owned(),
            log_std: raw.mapv(|v| v.max(lo).min(hi)),
            unclamped: raw.mapv(|v| v >= lo && v <= hi),
        })
    }

    pub fn new(mean: Array2<T>, log_std: Array2<T>) -> Self {
        let (lo, hi) = (T::lit(LOG_STD_MIN), T::lit(LOG_STD_MAX));
        let unclamped = log_std.mapv(|v| v >= lo && v <= hi);
        Self {
            mean,
            log_std: log_std.mapv(|v| v.max(lo).min(hi)),
            unclamped,
        }
    }

    pub fn action_dim(&self) -> usize {
        self.mean.ncols()
    }

    /// Evaluation action `tanh(mean)`.
    pub fn deterministic_action(&self) -> Array2<T> {
        squash(&self.mean)
    }
}

fn squash<T: Scalar>(u: &Array2<T>) -> Array2<T> {
    let bound = T::lit(ACTION_BOUND);
    u.mapv(|v| v.tanh().max(-bound).min(bound))
}

/// Result of a reparameterized draw, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct SampledAction<T> {
    pub action: Array2<T>,
    pub log_prob: Array1<T>,
    eps: Array2<T>,
    std: Array2<T>,
    /// `tanh(u)` before the clamp to `ACTION_BOUND`.
    tanh_u: Array2<T>,
}

/// `u = mean + exp(log_std)·eps`, `action = tanh(u)`, and the exact
/// log-density of the squashed sample.
pub fn sample_action<T: Scalar>(head: &GaussianHead<T>, eps: ArrayView2<'_, T>) -> Result<SampledAction<T>> {
    if eps.dim() != head.mean.dim() {
        return Err(Error::shape(
            "sample_action",
            format!("{:?}", head.mean.dim()),
            format!("{:?}", eps.dim()),
        ));
    }
    let std = head.log_std.mapv(|v| v.exp());
    let u = &head.mean + &(&std * &eps);
    let tanh_u = u.mapv(|v| v.tanh());
    let action = squash(&u);
    let half_ln_2pi = T::lit(0.5 * (2.0 * PI).ln());
    let half = T::lit(0.5);
    let squash_eps = T::lit(SQUASH_EPS);
    let mut per_dim = Array2::zeros(u.raw_dim());
    Zip::from(&mut per_dim)
        .and(&eps)
        .and(&head.log_std)
        .and(&tanh_u)
        .for_each(|out, &e, &ls, &t| {
            *out = -half * e * e - ls - half_ln_2pi - (T::one() - t * t + squash_eps).ln();
        });
    Ok(SampledAction {
        log_prob: per_dim.sum_axis(Axis(1)),
        action,
        eps: eps.to_owned(),
        std,
        tanh_u,
    })
}

impl<T: Scalar> SampledAction<T> {
    /// Gradient with respect to the raw `[B × 2A]` head output given
    /// `dL/d(action)` (optional) and `dL/d(log_prob)`.
    pub fn backward(
        &self,
        head: &GaussianHead<T>,
        d_action: Option<ArrayView2<'_, T>>,
        d_log_prob: ArrayView1<'_, T>,
    ) -> Array2<T> {
        let two = T::lit(2.0);
        let squash_eps = T::lit(SQUASH_EPS);
        let dlp = d_log_prob.insert_axis(Axis(1));
        // with t = tanh(u): d log_prob / du = 2t(1 − t²)/(1 − t² + ε), da/du = 1 − t²
        // unless the action was clamped
        let mut d_u = Zip::from(&self.tanh_u)
            .and_broadcast(&dlp)
            .map_collect(|&t, &g| {
                let one_m = T::one() - t * t;
                g * two * t * one_m / (one_m + squash_eps)
            });
        if let Some(da) = d_action {
            let bound = T::lit(ACTION_BOUND);
            Zip::from(&mut d_u)
                .and(&da)
                .and(&self.tanh_u)
                .for_each(|du, &g, &t| {
                    if t.abs() < bound {
                        *du = *du + g * (T::one() - t * t);
                    }
                });
        }
        let mut d_log_std = &d_u * &self.std * &self.eps;
        d_log_std -= &dlp;
        Zip::from(&mut d_log_std)
            .and(&head.unclamped)
            .for_each(|g, &free| {
                if !free {
                    *g = T::zero();
                }
            });
        concatenate![Axis(1), d_u, d_log_std]
    }
}

/// Target entropy `½·|A|·ln(2πe·σ²)` of a diagonal Gaussian with per-dimension
/// standard deviation `sigma_tgt`.
pub fn entropy_target(action_dim: usize, sigma_tgt: f64) -> f64 {
    0.5 * action_dim as f64 * (2.0 * PI * E * sigma_tgt * sigma_tgt).ln()
}

/// Entropy temperature `alpha = exp(log_alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Temperature<T> {
    pub log_alpha: T,
    optimizer: Adam<T>,
}

impl<T: Scalar> Temperature<T> {
    pub fn new(initial_alpha: f64, optimizer: AdamConfig) -> Self {
        Self {
            log_alpha: T::lit(initial_alpha.ln()),
            optimizer: Adam::new(optimizer, [1]),
        }
    }

    pub fn alpha(&self) -> T {
        self.log_alpha.exp()
    }

    /// One optimizer step on `−log_alpha · mean(log_probs + target)`.
    /// Returns the loss before the step.
    pub fn update(&mut self, log_probs: ArrayView1<'_, T>, target: T, lr: T) -> T {
        let gap = log_probs.mean().unwrap_or_else(T::zero) + target;
        let loss = -self.log_alpha * gap;
        self.optimizer.step_scalar(&mut self.log_alpha, -gap, lr);
        loss
    }
}

/// Free-function form of [`Temperature::update`].
pub fn temperature_update<T: Scalar>(mut t: Temperature<T>, log_probs: ArrayView1<'_, T>, target: T, lr: T) -> Temperature<T> {
    t.update(log_probs, target, lr);
    t
}
