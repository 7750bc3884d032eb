//! Deliberately naive reference computations for tests. Nothing here depends
//! on the production crate, so a bug there cannot hide in both places.

/// Central finite-difference settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSpec {
    pub step: f64,
}

impl Default for FdSpec {
    fn default() -> Self {
        Self { step: 1e-4 }
    }
}

/// Central-difference gradient of `f` at `params`, one coordinate at a time.
pub fn fd_gradient(mut f: impl FnMut(&[f64]) -> f64, params: &[f64], spec: FdSpec) -> Vec<f64> {
    assert!(spec.step > 0.0, "finite-difference step must be positive");
    let mut p = params.to_vec();
    (0..p.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + spec.step;
            let up = f(&p);
            p[i] = orig - spec.step;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * spec.step)
        })
        .collect()
}

/// `max_i |a_i − b_i| / max(|a_i|, |b_i|, floor)`.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// Mass of point masses at `values` redistributed onto the evenly spaced
/// grid `[g_min, g_max]` with `n_atoms` atoms by linear interpolation
/// between the two bracketing atoms. Out-of-range values are clipped.
pub fn brute_projection(g_min: f64, g_max: f64, n_atoms: usize, values: &[f64], masses: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), masses.len());
    let atoms: Vec<f64> = (0..n_atoms)
        .map(|i| g_min + (g_max - g_min) * i as f64 / (n_atoms - 1) as f64)
        .collect();
    let mut out = vec![0.0; n_atoms];
    for (&v, &m) in values.iter().zip(masses) {
        let v = if v < g_min {
            g_min
        } else if v > g_max {
            g_max
        } else {
            v
        };
        let mut placed = false;
        for i in 0..n_atoms - 1 {
            let (lo, hi) = (atoms[i], atoms[i + 1]);
            if v >= lo && v <= hi {
                let w_hi = (v - lo) / (hi - lo);
                out[i] += m * (1.0 - w_hi);
                out[i + 1] += m * w_hi;
                placed = true;
                break;
            }
        }
        if !placed {
            // rounding pushed v just past the last atom
            out[n_atoms - 1] += m;
        }
    }
    out
}

/// Fixed point of `P ← q + a²P − (abP)²/(r + b²P)` and the gain
/// `K = abP/(r + b²P)` of the optimal control `u = −Kx`.
pub fn riccati_scalar(a: f64, b: f64, q: f64, r: f64, tol: f64) -> Result<(f64, f64), String> {
    if !(q > 0.0 && r > 0.0) {
        return Err(format!("riccati_scalar needs q, r > 0 (got q={q}, r={r})"));
    }
    let mut p = q;
    for _ in 0..1_000_000 {
        let next = q + a * a * p - (a * b * p).powi(2) / (r + b * b * p);
        if !next.is_finite() {
            break;
        }
        if (next - p).abs() < tol {
            return Ok((next, a * b * next / (r + b * b * next)));
        }
        p = next;
    }
    Err("riccati iteration did not converge".to_owned())
}

/// Scalar linear system `x′ = a·x + b·u + w`, `w ~ N(0, noise_std²)`, with
/// per-step cost `q·x² + r·u²`, episodes of `horizon` steps from
/// `x₀ ~ U(−x0_bound, x0_bound)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarLqr {
    pub a: f64,
    pub b: f64,
    pub q: f64,
    pub r: f64,
    pub noise_std: f64,
    pub horizon: usize,
    pub x0_bound: f64,
}

impl ScalarLqr {
    /// Expected episode cost of the linear policy `u = −k·x`, by propagating
    /// the second moment `E[x²]` exactly.
    pub fn linear_policy_cost(&self, k: f64) -> f64 {
        let closed = self.a - self.b * k;
        let mut second = self.x0_bound * self.x0_bound / 3.0;
        let mut cost = 0.0;
        for _ in 0..self.horizon {
            cost += (self.q + self.r * k * k) * second;
            second = closed * closed * second + self.noise_std * self.noise_std;
        }
        cost
    }

    /// Monte Carlo mean episode cost of `policy(x) = u` over `episodes`
    /// episodes. Episodes ending with `|x| > blow_up` stop early.
    pub fn mc_policy_cost(&self, policy: impl Fn(f64) -> f64, episodes: usize, seed: u64, blow_up: f64) -> f64 {
        let mut rng = SplitMix64(seed);
        let mut total = 0.0;
        for _ in 0..episodes {
            let mut x = (2.0 * rng.uniform() - 1.0) * self.x0_bound;
            for _ in 0..self.horizon {
                let u = policy(x);
                total += self.q * x * x + self.r * u * u;
                x = self.a * x + self.b * u + self.noise_std * rng.normal();
                if x.abs() > blow_up {
                    break;
                }
            }
        }
        total / episodes as f64
    }
}

/// Minimal generator for the Monte Carlo oracle.
#[derive(Debug, Clone)]
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// Truncated zeta probabilities `k^{−s} / Σ_{j≤k_max} j^{−s}` for `k = 1..=k_max`.
pub fn truncated_zeta_pmf(s: f64, k_max: usize) -> Vec<f64> {
    let weights: Vec<f64> = (1..=k_max).map(|k| (k as f64).powf(-s)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

/// Pearson chi-square statistic of observed counts against probabilities.
pub fn chi_square(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = p * n as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum()
}

/// Row-wise softmax written out with plain loops.
pub fn naive_softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}
