use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::Scalar;

/// Affine map `y = x·Wᵀ + b` applied row-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearParams<T> {
    /// `[out_dim × in_dim]`
    pub weight: Array2<T>,
    pub bias: Array1<T>,
}

impl<T: Scalar> LinearParams<T> {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            weight: Array2::zeros((out_dim, in_dim)),
            bias: Array1::zeros(out_dim),
        }
    }

    /// Gaussian rows rescaled to unit norm, zero bias.
    pub fn init<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        let mut weight = Array2::from_shape_simple_fn((out_dim, in_dim), || {
            T::lit(rng.sample::<f64, _>(StandardNormal))
        });
        normalize_rows(&mut weight);
        Self {
            weight,
            bias: Array1::zeros(out_dim),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.nrows()
    }

    pub fn forward(&self, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
        if x.ncols() != self.in_dim() {
            return Err(Error::shape(
                "linear_forward",
                format!("{} input columns", self.in_dim()),
                format!("{} input columns", x.ncols()),
            ));
        }
        let mut y = x.dot(&self.weight.t());
        y += &self.bias;
        Ok(y)
    }

    /// Accumulates parameter gradients into `grad` and returns `dL/dx`.
    pub fn backward(
        &self,
        x: ArrayView2<'_, T>,
        dy: ArrayView2<'_, T>,
        grad: &mut LinearParams<T>,
    ) -> Array2<T> {
        grad.weight += &dy.t().dot(&x);
        grad.bias += &dy.sum_axis(Axis(0));
        dy.dot(&self.weight)
    }

    /// Same as [`backward`](Self::backward) but skips the parameter gradients.
    pub fn backward_input(&self, dy: ArrayView2<'_, T>) -> Array2<T> {
        dy.dot(&self.weight)
    }
}

/// Rescales every row to unit L2 norm. All-zero rows are left untouched.
pub fn normalize_rows<T: Scalar>(w: &mut Array2<T>) {
    for mut row in w.rows_mut() {
        let norm = row.iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm > T::zero() {
            row.mapv_inplace(|v| v / norm);
        }
    }
}
