//! Categorical return distributions on a fixed, uniformly spaced atom grid.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};

use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct AtomGrid<T> {
    pub g_min: T,
    pub g_max: T,
    pub atoms: Array1<T>,
    pub delta: T,
}

impl<T: Scalar> AtomGrid<T> {
    pub fn new(g_min: T, g_max: T, n_atoms: usize) -> Result<Self> {
        if !(g_min < g_max) || !g_min.is_finite() || !g_max.is_finite() {
            return Err(Error::Config(format!("atom grid needs g_min < g_max, got [{g_min}, {g_max}]")));
        }
        if n_atoms < 2 {
            return Err(Error::Config(format!("atom grid needs at least 2 atoms, got {n_atoms}")));
        }
        let delta = (g_max - g_min) / T::lit((n_atoms - 1) as f64);
        let atoms = (0..n_atoms).map(|i| g_min + T::lit(i as f64) * delta).collect();
        Ok(Self { g_min, g_max, atoms, delta })
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    /// Per-row expectation `Σ_i probs[b,i]·atoms[i]`.
    pub fn mean(&self, probs: ArrayView2<'_, T>) -> Array1<T> {
        probs.dot(&self.atoms)
    }

    /// C51 projection: each `target_values[b,j]` carrying mass
    /// `source_probs[b,j]` is clipped into the support and split linearly
    /// between its two neighbouring atoms.
    pub fn project(&self, target_values: ArrayView2<'_, T>, source_probs: ArrayView2<'_, T>) -> Result<Array2<T>> {
        if target_values.dim() != source_probs.dim() {
            return Err(Error::shape(
                "project_target",
                format!("{:?}", target_values.dim()),
                format!("{:?}", source_probs.dim()),
            ));
        }
        let n = self.n_atoms();
        let last = T::lit((n - 1) as f64);
        let mut out = Array2::zeros((target_values.nrows(), n));
        Zip::from(out.rows_mut())
            .and(target_values.rows())
            .and(source_probs.rows())
            .for_each(|mut dst, values, masses| {
                for (&v, &m) in values.iter().zip(masses.iter()) {
                    let v = v.max(self.g_min).min(self.g_max);
                    let pos = ((v - self.g_min) / self.delta).max(T::zero()).min(last);
                    let lower = pos.floor().to_usize().unwrap_or(0).min(n - 2);
                    let frac = pos - T::lit(lower as f64);
                    dst[lower] = dst[lower] + m * (T::one() - frac);
                    dst[lower + 1] = dst[lower + 1] + m * frac;
                }
            });
        Ok(out)
    }
}

/// Free-function form of [`AtomGrid::new`].
pub fn make_grid<T: Scalar>(g_min: T, g_max: T, n_atoms: usize) -> Result<AtomGrid<T>> {
    AtomGrid::new(g_min, g_max, n_atoms)
}

/// Free-function form of [`AtomGrid::project`].
pub fn project_target<T: Scalar>(
    grid: &AtomGrid<T>,
    target_values: ArrayView2<'_, T>,
    source_probs: ArrayView2<'_, T>,
) -> Result<Array2<T>> {
    grid.project(target_values, source_probs)
}

/// A batch of categorical distributions over `grid`.
#[derive(Debug, Clone)]
pub struct CategoricalValue<'g, T> {
    pub grid: &'g AtomGrid<T>,
    pub probs: Array2<T>,
}

impl<'g, T: Scalar> CategoricalValue<'g, T> {
    pub fn from_logits(grid: &'g AtomGrid<T>, logits: ArrayView2<'_, T>) -> Self {
        Self {
            grid,
            probs: softmax(logits),
        }
    }

    pub fn mean(&self) -> Array1<T> {
        self.grid.mean(self.probs.view())
    }
}

pub fn mean<T: Scalar>(cv: &CategoricalValue<'_, T>) -> Array1<T> {
    cv.mean()
}

fn log_softmax_row<T: Scalar>(row: ArrayView1<'_, T>) -> Array1<T> {
    let max = row.fold(T::neg_infinity(), |m, &v| m.max(v));
    let lse = row.iter().map(|&v| (v - max).exp()).sum::<T>().ln() + max;
    row.mapv(|v| v - lse)
}

/// Row-wise log-softmax with max subtraction.
pub fn log_softmax<T: Scalar>(logits: ArrayView2<'_, T>) -> Array2<T> {
    let mut out = Array2::zeros(logits.raw_dim());
    for (mut dst, src) in out.rows_mut().into_iter().zip(logits.rows()) {
        dst.assign(&log_softmax_row(src));
    }
    out
}

pub fn softmax<T: Scalar>(logits: ArrayView2<'_, T>) -> Array2<T> {
    log_softmax(logits).mapv(|v| v.exp())
}

/// Batch-mean cross-entropy `−Σ_i target_i·log softmax(logits)_i` together
/// with its gradient with respect to the logits, `(softmax − target)/B`.
pub fn cross_entropy<T: Scalar>(logits: ArrayView2<'_, T>, target: ArrayView2<'_, T>) -> Result<(T, Array2<T>)> {
    if logits.dim() != target.dim() {
        return Err(Error::shape(
            "cross_entropy",
            format!("{:?}", logits.dim()),
            format!("{:?}", target.dim()),
        ));
    }
    let b = T::lit(logits.nrows() as f64);
    let logp = log_softmax(logits);
    let loss = -(&logp * &target).sum() / b;
    let grad = (logp.mapv(|v| v.exp()) - &target) / b;
    Ok((loss, grad))
}

/// `d mean / d logits` for a softmax-parameterised categorical:
/// `p_i·(z_i − mean)` per row.
pub fn mean_logit_jacobian<T: Scalar>(grid: &AtomGrid<T>, probs: ArrayView2<'_, T>) -> Array2<T> {
    let means = grid.mean(probs);
    let centered = &grid.atoms.view().insert_axis(Axis(0)) - &means.view().insert_axis(Axis(1));
    &probs * &centered
}
