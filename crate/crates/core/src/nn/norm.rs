use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};

use crate::error::{Error, Result};
use crate::nn::Mode;
use crate::Scalar;

pub const BATCH_NORM_EPS: f64 = 1e-5;
pub const BATCH_NORM_MOMENTUM: f64 = 0.01;
pub const RMS_NORM_EPS: f64 = 1e-8;

/// Learnable scale and shift of a normalization layer.
#[derive(Debug, Clone, PartialEq)]
pub struct NormParams<T> {
    pub gamma: Array1<T>,
    pub beta: Array1<T>,
}

impl<T: Scalar> NormParams<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            gamma: Array1::ones(dim),
            beta: Array1::zeros(dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            gamma: Array1::zeros(dim),
            beta: Array1::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }
}

/// Per-column statistics of one train-mode batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchStats<T> {
    pub mean: Array1<T>,
    /// Biased (population) variance, as used for standardization.
    pub var: Array1<T>,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchNormParams<T> {
    pub affine: NormParams<T>,
    pub running_mean: Array1<T>,
    pub running_var: Array1<T>,
    pub momentum: T,
}

#[derive(Debug, Clone)]
pub struct BatchNormCache<T> {
    xhat: Array2<T>,
    inv_std: Array1<T>,
    mode: Mode,
    pub(crate) stats: Option<BatchStats<T>>,
}

impl<T: Scalar> BatchNormParams<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            affine: NormParams::new(dim),
            running_mean: Array1::zeros(dim),
            running_var: Array1::ones(dim),
            momentum: T::lit(BATCH_NORM_MOMENTUM),
        }
    }

    pub fn dim(&self) -> usize {
        self.affine.dim()
    }

    /// Forward pass. Train mode standardizes with the batch statistics, eval
    /// mode with the running statistics. Neither mode mutates `self`; fold the
    /// returned statistics in with [`update_running`](Self::update_running).
    pub fn forward(&self, x: ArrayView2<'_, T>, mode: Mode) -> Result<(Array2<T>, Option<BatchStats<T>>)> {
        let (y, cache) = self.forward_cached(x, mode)?;
        Ok((y, cache.stats))
    }

    pub fn forward_cached(&self, x: ArrayView2<'_, T>, mode: Mode) -> Result<(Array2<T>, BatchNormCache<T>)> {
        if x.ncols() != self.dim() {
            return Err(Error::shape("batchnorm_forward", self.dim(), x.ncols()));
        }
        let eps = T::lit(BATCH_NORM_EPS);
        let (xhat, inv_std, stats) = match mode {
            Mode::Train => {
                let rows = x.nrows();
                if rows < 2 {
                    return Err(Error::DegenerateBatch(rows));
                }
                let mean = x.mean_axis(Axis(0)).expect("non-empty batch");
                let centered = &x - &mean;
                let var = centered.mapv(|v| v * v).mean_axis(Axis(0)).expect("non-empty batch");
                let inv_std = var.mapv(|v| (v + eps).sqrt().recip());
                let xhat = centered * &inv_std;
                (xhat, inv_std, Some(BatchStats { mean, var, rows }))
            }
            Mode::Eval => {
                let inv_std = self.running_var.mapv(|v| (v + eps).sqrt().recip());
                let xhat = (&x - &self.running_mean) * &inv_std;
                (xhat, inv_std, None)
            }
        };
        let y = &xhat * &self.affine.gamma + &self.affine.beta;
        Ok((y, BatchNormCache { xhat, inv_std, mode, stats }))
    }

    /// Momentum update of the running statistics (unbiased variance).
    pub fn update_running(&mut self, stats: &BatchStats<T>) {
        let m = self.momentum;
        let keep = T::one() - m;
        let n = T::lit(stats.rows as f64);
        let bessel = n / (n - T::one());
        Zip::from(&mut self.running_mean)
            .and(&stats.mean)
            .for_each(|r, &b| *r = keep * *r + m * b);
        Zip::from(&mut self.running_var)
            .and(&stats.var)
            .for_each(|r, &b| *r = keep * *r + m * b * bessel);
    }

    /// Returns `dL/dx`, accumulating into `grad` when given. In train mode the
    /// gradient flows through the batch mean and variance.
    pub fn backward(
        &self,
        cache: &BatchNormCache<T>,
        dy: ArrayView2<'_, T>,
        grad: Option<&mut NormParams<T>>,
    ) -> Array2<T> {
        if let Some(g) = grad {
            g.gamma += &(&dy * &cache.xhat).sum_axis(Axis(0));
            g.beta += &dy.sum_axis(Axis(0));
        }
        let dxhat = &dy * &self.affine.gamma;
        match cache.mode {
            Mode::Eval => dxhat * &cache.inv_std,
            Mode::Train => {
                let n = T::lit(dy.nrows() as f64);
                let sum_dxhat = dxhat.sum_axis(Axis(0));
                let sum_dxhat_xhat = (&dxhat * &cache.xhat).sum_axis(Axis(0));
                let mut dx = dxhat * n - &sum_dxhat - &cache.xhat * &sum_dxhat_xhat;
                let scale = cache.inv_std.mapv(|s| s / n);
                dx *= &scale;
                dx
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RmsNormCache<T> {
    x: Array2<T>,
    inv_rms: Array1<T>,
}

/// `y = gamma ⊙ x / sqrt(mean(x²) + eps)` per row. The shift vector of the
/// parameters is not used.
pub fn rmsnorm_forward<T: Scalar>(x: ArrayView2<'_, T>, p: &NormParams<T>) -> Result<Array2<T>> {
    rmsnorm_forward_cached(x, p).map(|(y, _)| y)
}

pub fn rmsnorm_forward_cached<T: Scalar>(
    x: ArrayView2<'_, T>,
    p: &NormParams<T>,
) -> Result<(Array2<T>, RmsNormCache<T>)> {
    let d = x.ncols();
    if d == 0 || d != p.dim() {
        return Err(Error::shape("rmsnorm_forward", p.dim(), d));
    }
    let eps = T::lit(RMS_NORM_EPS);
    let inv_d = T::lit(1.0 / d as f64);
    let inv_rms: Array1<T> = x
        .rows()
        .into_iter()
        .map(|r| (r.iter().map(|&v| v * v).sum::<T>() * inv_d + eps).sqrt().recip())
        .collect();
    let mut y = &x * &inv_rms.view().insert_axis(Axis(1));
    y *= &p.gamma;
    Ok((
        y,
        RmsNormCache {
            x: x.to_owned(),
            inv_rms,
        },
    ))
}

pub fn rmsnorm_backward<T: Scalar>(
    p: &NormParams<T>,
    cache: &RmsNormCache<T>,
    dy: ArrayView2<'_, T>,
    grad: Option<&mut NormParams<T>>,
) -> Array2<T> {
    let inv_rms = cache.inv_rms.view().insert_axis(Axis(1));
    let normalized = &cache.x * &inv_rms;
    if let Some(g) = grad {
        g.gamma += &(&dy * &normalized).sum_axis(Axis(0));
    }
    let g = &dy * &p.gamma;
    let inv_d = T::lit(1.0 / cache.x.ncols() as f64);
    // dx = g/r - x (g·x) / (d r³)
    let gx = (&g * &cache.x).sum_axis(Axis(1));
    let coef = Zip::from(&gx)
        .and(&cache.inv_rms)
        .map_collect(|&s, &r| s * r * r * r * inv_d)
        .insert_axis(Axis(1));
    g * &inv_rms - &cache.x * &coef
}
