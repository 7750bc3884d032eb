//! Statistical checks of the repeat-length sampler and held noise.

use flashsac::exploration::ZetaSampler;
use flashsac_oracles::{chi_square, truncated_zeta_pmf};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Upper 1% point of the chi-square law with 15 degrees of freedom.
pub const CHI2_15_CRIT_01: f64 = 30.578;

#[derive(Debug, Clone, Copy)]
pub struct ZetaReport {
    pub draws: usize,
    pub p1_empirical: f64,
    pub max_abs_dev: f64,
    pub chi2: f64,
}

pub fn zeta_suite(draws: usize, seed: u64) -> ZetaReport {
    let (s, k_max) = (2.0, 16);
    let z = ZetaSampler::new(s, k_max).expect("valid sampler");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; k_max];
    for _ in 0..draws {
        counts[z.sample(&mut rng) - 1] += 1;
    }
    let pmf = truncated_zeta_pmf(s, k_max);
    let max_abs_dev = counts
        .iter()
        .zip(&pmf)
        .map(|(&c, p)| (c as f64 / draws as f64 - p).abs())
        .fold(0.0, f64::max);
    ZetaReport {
        draws,
        p1_empirical: counts[0] as f64 / draws as f64,
        max_abs_dev,
        chi2: chi_square(&counts, &pmf),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use flashsac::exploration::NoiseRepeatState;

    #[test]
    fn empirical_pmf_matches_truncated_zeta() {
        let r = zeta_suite(1_000_000, 11);
        assert!(r.max_abs_dev < 0.005, "{r:?}");
        assert!(r.chi2 < CHI2_15_CRIT_01, "{r:?}");
        assert!((r.p1_empirical - 0.63118).abs() < 0.005, "{r:?}");
    }

    #[test]
    fn analytic_pmf_agrees_with_reference() {
        let z = ZetaSampler::new(2.0, 16).unwrap();
        for (k, p) in truncated_zeta_pmf(2.0, 16).iter().enumerate() {
            assert!((z.pmf(k + 1) - p).abs() < 1e-12);
        }
    }

    #[test]
    fn held_noise_refresh_rate_and_marginals() {
        let z = ZetaSampler::new(2.0, 16).unwrap();
        let mean_len: f64 = truncated_zeta_pmf(2.0, 16).iter().enumerate().map(|(k, p)| (k + 1) as f64 * p).sum();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut st = NoiseRepeatState::<f64>::new(2);
        let steps = 400_000;
        let mut prev = vec![f64::NAN; 2];
        let (mut refreshes, mut sum, mut sum_sq) = (0usize, 0.0, 0.0);
        for _ in 0..steps {
            let e = st.next_noise(&z, &mut rng).to_vec();
            if e != prev {
                refreshes += 1;
            }
            sum += e[0];
            sum_sq += e[0] * e[0];
            prev = e;
        }
        let rate = refreshes as f64 / steps as f64;
        assert!((rate * mean_len - 1.0).abs() < 0.02, "rate {rate}, mean length {mean_len}");
        let mean = sum / steps as f64;
        let var = sum_sq / steps as f64 - mean * mean;
        // Held values are correlated, so the effective sample is steps / mean_len.
        assert!(mean.abs() < 0.02, "{mean}");
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn episode_reset_breaks_the_hold() {
        let z = ZetaSampler::new(2.0, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut st = NoiseRepeatState::<f64>::new(1);
        for _ in 0..100 {
            let a = st.next_noise(&z, &mut rng).to_vec();
            st.reset();
            let b = st.next_noise(&z, &mut rng).to_vec();
            assert_ne!(a, b);
        }
    }
}
