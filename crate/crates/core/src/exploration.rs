//! Noise repetition: a standard-normal noise vector is held for a
//! Zeta-distributed number of consecutive steps.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::Scalar;

/// Truncated Zeta law `P(k) ∝ k^(−s)` on `1..=k_max`, sampled by inverse CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaSampler {
    pub s: f64,
    pub k_max: usize,
    cdf: Vec<f64>,
}

impl ZetaSampler {
    pub fn new(s: f64, k_max: usize) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::Config("zeta_kmax must be at least 1".into()));
        }
        if !s.is_finite() || s <= 0.0 {
            return Err(Error::Config(format!("zeta_s must be positive, got {s}")));
        }
        let weights: Vec<f64> = (1..=k_max).map(|k| (k as f64).powf(-s)).collect();
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc / total
            })
            .collect();
        *cdf.last_mut().expect("k_max >= 1") = 1.0;
        Ok(Self { s, k_max, cdf })
    }

    pub fn pmf(&self, k: usize) -> f64 {
        match k {
            0 => 0.0,
            1 => self.cdf[0],
            k if k <= self.k_max => self.cdf[k - 1] - self.cdf[k - 2],
            _ => 0.0,
        }
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u).min(self.k_max - 1) + 1
    }
}

pub fn sample_repeat_length<R: Rng + ?Sized>(z: &ZetaSampler, rng: &mut R) -> usize {
    z.sample(rng)
}

/// Held noise of one environment.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRepeatState<T> {
    pub eps: Vec<T>,
    pub remaining: usize,
}

impl<T: Scalar> NoiseRepeatState<T> {
    pub fn new(action_dim: usize) -> Self {
        Self {
            eps: vec![T::zero(); action_dim],
            remaining: 0,
        }
    }

    /// Returns the held vector while the countdown runs, otherwise draws a
    /// fresh `N(0, I)` vector and a new repeat length.
    pub fn next_noise<R: Rng + ?Sized>(&mut self, z: &ZetaSampler, rng: &mut R) -> &[T] {
        if self.remaining > 0 {
            self.remaining -= 1;
        } else {
            for e in &mut self.eps {
                *e = T::lit(rng.sample::<f64, _>(StandardNormal));
            }
            self.remaining = z.sample(rng) - 1;
        }
        &self.eps
    }

    /// Forces fresh noise on the next call (episode boundary).
    pub fn reset(&mut self) {
        self.remaining = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn truncated_pmf_values() {
        let z = ZetaSampler::new(2.0, 16).unwrap();
        assert!((z.pmf(1) - 1.0 / 1.584346533444987).abs() < 1e-12);
        assert!((z.pmf(1) - 0.63118).abs() < 1e-5);
        assert!((z.pmf(2) - 0.15779).abs() < 1e-5);
        assert!((z.cdf().last().unwrap() - 1.0).abs() < 1e-12);
        assert!(z.cdf().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn degenerate_truncation_always_one() {
        let z = ZetaSampler::new(2.0, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!((0..1000).all(|_| z.sample(&mut rng) == 1));
    }

    #[test]
    fn samples_in_range() {
        let z = ZetaSampler::new(1.1, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..10_000).map(|_| z.sample(&mut rng)).all(|k| (1..=5).contains(&k)));
    }

    #[test]
    fn countdown_returns_held_vector() {
        let z = ZetaSampler::new(2.0, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut st = NoiseRepeatState {
            eps: vec![0.25f64, -1.0],
            remaining: 3,
        };
        assert_eq!(st.next_noise(&z, &mut rng), &[0.25, -1.0]);
        assert_eq!(st.remaining, 2);
    }

    #[test]
    fn refresh_draws_new_noise_and_length() {
        let z = ZetaSampler::new(2.0, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut st = NoiseRepeatState::<f64>::new(3);
        let first = st.next_noise(&z, &mut rng).to_vec();
        assert!(first.iter().any(|&e| e != 0.0));
        assert!(st.remaining < 16);
        st.reset();
        let second = st.next_noise(&z, &mut rng).to_vec();
        assert_ne!(first, second);
    }

    #[test]
    fn bad_parameters() {
        assert!(ZetaSampler::new(2.0, 0).is_err());
        assert!(ZetaSampler::new(0.0, 4).is_err());
    }
}
