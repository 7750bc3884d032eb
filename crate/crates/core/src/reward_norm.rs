//! Adaptive reward scaling driven by running discounted-return statistics.

use crate::Scalar;

pub const RETURN_VAR_EPS: f64 = 1e-8;

/// Tracks per-environment discounted returns `G ← r + γ·G`, their pooled
/// running variance (Welford) and running maximum magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnTracker<T> {
    pub gamma: T,
    pub per_env_return: Vec<T>,
    pub count: u64,
    pub mean: T,
    pub m2: T,
    pub abs_max: T,
    pub eps: T,
    /// Upper edge of the critic support.
    pub g_max: T,
}

impl<T: Scalar> ReturnTracker<T> {
    pub fn new(gamma: T, n_envs: usize, g_max: T) -> Self {
        Self {
            gamma,
            per_env_return: vec![T::zero(); n_envs],
            count: 0,
            mean: T::zero(),
            m2: T::zero(),
            abs_max: T::zero(),
            eps: T::lit(RETURN_VAR_EPS),
            g_max,
        }
    }

    /// Accumulates one step of every environment, then zeroes the running
    /// return of environments whose episode ended.
    ///
    /// # Panics
    /// If the slices do not all have one entry per environment.
    pub fn update(&mut self, rewards: &[T], terminated: &[bool], truncated: &[bool]) {
        let n = self.per_env_return.len();
        assert!(
            rewards.len() == n && terminated.len() == n && truncated.len() == n,
            "return tracker expects {n} entries per step"
        );
        for e in 0..n {
            let g = rewards[e] + self.gamma * self.per_env_return[e];
            self.per_env_return[e] = g;
            self.count += 1;
            let delta = g - self.mean;
            self.mean = self.mean + delta / T::lit(self.count as f64);
            self.m2 = self.m2 + delta * (g - self.mean);
            self.abs_max = self.abs_max.max(g.abs());
            if terminated[e] || truncated[e] {
                self.per_env_return[e] = T::zero();
            }
        }
    }

    pub fn variance(&self) -> T {
        (self.m2 / T::lit(self.count.max(1) as f64)).max(T::zero())
    }

    /// `max(sqrt(σ² + ε), |G|max / G_max)`.
    pub fn denominator(&self) -> T {
        (self.variance() + self.eps).sqrt().max(self.abs_max / self.g_max)
    }

    pub fn scale(&self, rewards: &[T]) -> Vec<T> {
        let d = self.denominator();
        rewards.iter().map(|&r| r / d).collect()
    }
}
