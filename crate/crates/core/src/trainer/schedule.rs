/// Cosine decay from `lr_init` at step 0 to `lr_end` at `horizon`, flat after.
pub fn cosine_lr(lr_init: f64, lr_end: f64, step: u64, horizon: u64) -> f64 {
    let progress = if horizon == 0 { 1.0 } else { (step.min(horizon) as f64) / horizon as f64 };
    lr_end + 0.5 * (lr_init - lr_end) * (1.0 + (std::f64::consts::PI * progress).cos())
}

/// Integer carry accumulator turning transitions into update counts at the
/// ratio `updates / per_transitions` without drift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtdCounter {
    pub updates: u64,
    pub per_transitions: u64,
    carry: u64,
}

impl UtdCounter {
    pub fn new(updates: u64, per_transitions: u64) -> Self {
        Self { updates, per_transitions, carry: 0 }
    }

    /// Registers `transitions` new transitions; returns how many updates are
    /// now due.
    pub fn add(&mut self, transitions: u64) -> u64 {
        self.carry += transitions * self.updates;
        let due = self.carry / self.per_transitions;
        self.carry %= self.per_transitions;
        due
    }

    /// Pending fraction, in units of `1 / per_transitions` updates.
    pub fn carry(&self) -> u64 {
        self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_endpoints_and_midpoint() {
        assert_eq!(cosine_lr(3e-4, 1.5e-4, 0, 100), 3e-4);
        assert!((cosine_lr(3e-4, 1.5e-4, 50, 100) - 2.25e-4).abs() < 1e-15);
        assert!((cosine_lr(3e-4, 1.5e-4, 100, 100) - 1.5e-4).abs() < 1e-15);
        assert!((cosine_lr(3e-4, 1.5e-4, 500, 100) - 1.5e-4).abs() < 1e-15);
    }

    #[test]
    fn cosine_is_monotone() {
        let lrs: Vec<f64> = (0..=1000).map(|t| cosine_lr(3e-4, 1.5e-4, t, 1000)).collect();
        assert!(lrs.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn two_per_1024_with_1024_envs() {
        let mut c = UtdCounter::new(2, 1024);
        for _ in 0..100 {
            assert_eq!(c.add(1024), 2);
        }
    }

    #[test]
    fn fractional_ratio_carries() {
        let mut c = UtdCounter::new(2, 1024);
        let total: u64 = (0..64).map(|_| c.add(16)).sum();
        assert_eq!(total, 2);
        assert_eq!(c.carry(), 0);
    }

    #[test]
    fn one_per_transition() {
        let mut c = UtdCounter::new(1, 1);
        assert!((0..1000).all(|_| c.add(1) == 1));
    }
}
