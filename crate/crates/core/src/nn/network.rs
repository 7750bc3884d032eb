use ndarray::{Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::block::{BlockCache, BlockParams};
use crate::nn::linear::{normalize_rows, LinearParams};
use crate::nn::norm::{
    rmsnorm_backward, rmsnorm_forward_cached, BatchNormParams, BatchStats, NormParams, RmsNormCache,
};
use crate::nn::Mode;
use crate::Scalar;

/// Shape of one actor or critic network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub num_blocks: usize,
    pub expansion: usize,
    pub head_dim: usize,
    pub batch_norm: bool,
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("input_dim", self.input_dim),
            ("hidden_dim", self.hidden_dim),
            ("expansion", self.expansion),
            ("head_dim", self.head_dim),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(Error::Config(format!("network {name} must be positive")));
            }
        }
        Ok(())
    }
}

/// embed → blocks → RMSNorm → head.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams<T> {
    pub embed: LinearParams<T>,
    pub blocks: Vec<BlockParams<T>>,
    pub final_norm: NormParams<T>,
    pub head: LinearParams<T>,
}

/// Gradients share the parameter layout; running statistics stay zero.
pub type NetworkGrads<T> = NetworkParams<T>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorRole {
    Weight,
    Bias,
    Gamma,
    Beta,
    RunningMean,
    RunningVar,
    /// Scale of the final RMSNorm.
    RmsGamma,
    /// Present for layout uniformity; never read and never trained.
    RmsBeta,
}

impl TensorRole {
    pub fn is_learnable(self) -> bool {
        !matches!(self, TensorRole::RunningMean | TensorRole::RunningVar | TensorRole::RmsBeta)
    }
}

#[derive(Debug)]
pub struct TensorRef<'a, T> {
    pub name: String,
    pub role: TensorRole,
    pub shape: Vec<usize>,
    pub data: &'a [T],
}

#[derive(Debug)]
pub struct TensorMut<'a, T> {
    pub name: String,
    pub role: TensorRole,
    pub shape: Vec<usize>,
    pub data: &'a mut [T],
}

fn slice<T, D: ndarray::Dimension>(a: &ndarray::Array<T, D>) -> &[T] {
    a.as_slice().expect("parameter tensors are contiguous")
}

fn slice_mut<T, D: ndarray::Dimension>(a: &mut ndarray::Array<T, D>) -> &mut [T] {
    a.as_slice_mut().expect("parameter tensors are contiguous")
}

/// Record of one forward pass, consumed by exactly one backward pass.
#[derive(Debug, Clone)]
pub struct Tape<T> {
    mode: Mode,
    input: Array2<T>,
    blocks: Vec<BlockCache<T>>,
    rms: RmsNormCache<T>,
    features: Array2<T>,
}

#[derive(Debug, Clone)]
pub struct ForwardOutput<T> {
    /// Post-RMSNorm features `[B × h]`.
    pub features: Array2<T>,
    pub head_out: Array2<T>,
    pub tape: Tape<T>,
}

#[derive(Debug, Clone)]
pub struct Gradients<T> {
    pub params: NetworkGrads<T>,
    pub input: Array2<T>,
}

fn check_finite<T: Scalar>(a: &Array2<T>, layer: usize, name: &'static str) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { layer, name })
    }
}

impl<T: Scalar> Tape<T> {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn rows(&self) -> usize {
        self.input.nrows()
    }

    /// Batch statistics of each block's norm layer (train mode only).
    pub fn batch_stats(&self) -> Vec<Option<&BatchStats<T>>> {
        self.blocks
            .iter()
            .map(|b| b.bn.as_ref().and_then(|c| c.stats.as_ref()))
            .collect()
    }

    pub fn owned_batch_stats(&self) -> Vec<Option<BatchStats<T>>> {
        self.batch_stats().into_iter().map(|s| s.cloned()).collect()
    }

    /// Smallest |pre-activation| over every ReLU input in the pass.
    pub fn min_abs_preactivation(&self) -> T {
        self.blocks
            .iter()
            .flat_map(|b| b.pre_activations().iter())
            .fold(T::infinity(), |m, &v| m.min(v.abs()))
    }

    /// Reverse pass from `d_head = dL/d(head_out)`.
    pub fn backward(
        self,
        params: &NetworkParams<T>,
        d_head: ArrayView2<'_, T>,
    ) -> Result<Gradients<T>> {
        let mut grads = params.zeros_like();
        let input = self.run_backward(params, d_head, Some(&mut grads))?;
        Ok(Gradients { params: grads, input })
    }

    /// Reverse pass that only produces `dL/d(input)`.
    pub fn backward_input(self, params: &NetworkParams<T>, d_head: ArrayView2<'_, T>) -> Result<Array2<T>> {
        self.run_backward(params, d_head, None)
    }

    fn run_backward(
        self,
        params: &NetworkParams<T>,
        d_head: ArrayView2<'_, T>,
        mut grads: Option<&mut NetworkGrads<T>>,
    ) -> Result<Array2<T>> {
        let expected = (self.rows(), params.head.out_dim());
        if d_head.dim() != expected {
            return Err(Error::shape("backward", format!("{expected:?}"), format!("{:?}", d_head.dim())));
        }
        let d_features = match grads.as_deref_mut() {
            Some(g) => params.head.backward(self.features.view(), d_head, &mut g.head),
            None => params.head.backward_input(d_head),
        };
        let mut d = rmsnorm_backward(
            &params.final_norm,
            &self.rms,
            d_features.view(),
            grads.as_deref_mut().map(|g| &mut g.final_norm),
        );
        for (i, (block, cache)) in params.blocks.iter().zip(&self.blocks).enumerate().rev() {
            let g = grads.as_deref_mut().map(|g| &mut g.blocks[i]);
            d = block.backward(cache, d.view(), g);
        }
        Ok(match grads {
            Some(g) => params.embed.backward(self.input.view(), d.view(), &mut g.embed),
            None => params.embed.backward_input(d.view()),
        })
    }
}

impl<T: Scalar> NetworkParams<T> {
    /// Unit-norm Gaussian rows, zero biases, unit gammas and zero betas.
    pub fn init(config: &NetworkConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = config.hidden_dim;
        let embed = LinearParams::init(config.input_dim, h, &mut rng);
        let blocks = (0..config.num_blocks)
            .map(|_| BlockParams::init(h, config.expansion, config.batch_norm, &mut rng))
            .collect();
        let head = LinearParams::init(h, config.head_dim, &mut rng);
        let mut p = Self {
            embed,
            blocks,
            final_norm: NormParams::new(h),
            head,
        };
        p.project_weights();
        Ok(p)
    }

    pub fn config(&self) -> NetworkConfig {
        NetworkConfig {
            input_dim: self.embed.in_dim(),
            hidden_dim: self.embed.out_dim(),
            num_blocks: self.blocks.len(),
            expansion: self.blocks.first().map_or(1, |b| b.expansion),
            head_dim: self.head.out_dim(),
            batch_norm: self.blocks.first().is_none_or(|b| b.bn.is_some()),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.data.iter_mut().for_each(|v| *v = T::zero());
        }
        z
    }

    pub fn forward(&self, x: ArrayView2<'_, T>, mode: Mode) -> Result<ForwardOutput<T>> {
        if x.ncols() != self.embed.in_dim() {
            return Err(Error::shape("network_forward", self.embed.in_dim(), x.ncols()));
        }
        let embedded = self.embed.forward(x)?;
        check_finite(&embedded, 0, "embed")?;
        let mut caches = Vec::with_capacity(self.blocks.len());
        let mut h = embedded;
        for (i, block) in self.blocks.iter().enumerate() {
            let (y, cache) = block.forward_cached(h.view(), mode)?;
            check_finite(&y, i + 1, "block")?;
            caches.push(cache);
            h = y;
        }
        let n = self.blocks.len();
        let (features, rms) = rmsnorm_forward_cached(h.view(), &self.final_norm)?;
        check_finite(&features, n + 1, "rmsnorm")?;
        let head_out = self.head.forward(features.view())?;
        check_finite(&head_out, n + 2, "head")?;
        Ok(ForwardOutput {
            head_out,
            tape: Tape {
                mode,
                input: x.to_owned(),
                blocks: caches,
                rms,
                features: features.clone(),
            },
            features,
        })
    }

    /// Folds the batch statistics recorded on a train-mode tape into the
    /// running statistics of every batch-norm layer.
    pub fn absorb_batch_stats(&mut self, tape: &Tape<T>) {
        for (block, stats) in self.blocks.iter_mut().zip(tape.batch_stats()) {
            if let (Some(bn), Some(s)) = (block.bn.as_mut(), stats) {
                bn.update_running(s);
            }
        }
    }

    /// Same as [`absorb_batch_stats`](Self::absorb_batch_stats) for statistics
    /// copied off a tape, one entry per block.
    pub fn absorb_stats(&mut self, stats: &[Option<BatchStats<T>>]) {
        for (block, s) in self.blocks.iter_mut().zip(stats) {
            if let (Some(bn), Some(s)) = (block.bn.as_mut(), s) {
                bn.update_running(s);
            }
        }
    }

    /// Rescales every weight row to unit norm and every gamma/beta vector to
    /// norm `sqrt(d)`. Biases are untouched; all-zero vectors stay zero.
    pub fn project_weights(&mut self) {
        let project_vec = |v: &mut ndarray::Array1<T>| {
            let norm = v.dot(v).sqrt();
            if norm > T::zero() {
                let target = T::lit(v.len() as f64).sqrt();
                v.mapv_inplace(|x| x * target / norm);
            }
        };
        normalize_rows(&mut self.embed.weight);
        for b in &mut self.blocks {
            normalize_rows(&mut b.expand.weight);
            normalize_rows(&mut b.project.weight);
            if let Some(bn) = b.bn.as_mut() {
                project_vec(&mut bn.affine.gamma);
                project_vec(&mut bn.affine.beta);
            }
        }
        project_vec(&mut self.final_norm.gamma);
        normalize_rows(&mut self.head.weight);
    }

    /// Every tensor in a fixed order, including running statistics.
    pub fn tensors(&self) -> Vec<TensorRef<'_, T>> {
        let mut out = Vec::new();
        linear_ref("embed", &self.embed, &mut out);
        for (i, b) in self.blocks.iter().enumerate() {
            linear_ref(&format!("blocks.{i}.expand"), &b.expand, &mut out);
            if let Some(bn) = &b.bn {
                let shape = vec![bn.dim()];
                for (suffix, role, data) in [
                    ("gamma", TensorRole::Gamma, &bn.affine.gamma),
                    ("beta", TensorRole::Beta, &bn.affine.beta),
                    ("running_mean", TensorRole::RunningMean, &bn.running_mean),
                    ("running_var", TensorRole::RunningVar, &bn.running_var),
                ] {
                    out.push(TensorRef {
                        name: format!("blocks.{i}.bn.{suffix}"),
                        role,
                        shape: shape.clone(),
                        data: slice(data),
                    });
                }
            }
            linear_ref(&format!("blocks.{i}.project"), &b.project, &mut out);
        }
        let shape = vec![self.final_norm.dim()];
        out.push(TensorRef {
            name: "final_norm.gamma".into(),
            role: TensorRole::RmsGamma,
            shape: shape.clone(),
            data: slice(&self.final_norm.gamma),
        });
        out.push(TensorRef {
            name: "final_norm.beta".into(),
            role: TensorRole::RmsBeta,
            shape,
            data: slice(&self.final_norm.beta),
        });
        linear_ref("head", &self.head, &mut out);
        out
    }

    /// Mutable counterpart of [`tensors`](Self::tensors), same order.
    pub fn tensors_mut(&mut self) -> Vec<TensorMut<'_, T>> {
        let mut out = Vec::new();
        linear_mut("embed", &mut self.embed, &mut out);
        for (i, b) in self.blocks.iter_mut().enumerate() {
            linear_mut(&format!("blocks.{i}.expand"), &mut b.expand, &mut out);
            if let Some(bn) = b.bn.as_mut() {
                let shape = vec![bn.affine.gamma.len()];
                let BatchNormParams { affine, running_mean, running_var, .. } = bn;
                for (suffix, role, data) in [
                    ("gamma", TensorRole::Gamma, &mut affine.gamma),
                    ("beta", TensorRole::Beta, &mut affine.beta),
                    ("running_mean", TensorRole::RunningMean, running_mean),
                    ("running_var", TensorRole::RunningVar, running_var),
                ] {
                    out.push(TensorMut {
                        name: format!("blocks.{i}.bn.{suffix}"),
                        role,
                        shape: shape.clone(),
                        data: slice_mut(data),
                    });
                }
            }
            linear_mut(&format!("blocks.{i}.project"), &mut b.project, &mut out);
        }
        let shape = vec![self.final_norm.dim()];
        let NormParams { gamma, beta } = &mut self.final_norm;
        out.push(TensorMut {
            name: "final_norm.gamma".into(),
            role: TensorRole::RmsGamma,
            shape: shape.clone(),
            data: slice_mut(gamma),
        });
        out.push(TensorMut {
            name: "final_norm.beta".into(),
            role: TensorRole::RmsBeta,
            shape,
            data: slice_mut(beta),
        });
        linear_mut("head", &mut self.head, &mut out);
        out
    }

    /// Learnable tensors flattened into one vector (running statistics and
    /// the unused RMS shift excluded).
    pub fn flatten_learnable(&self) -> Vec<T> {
        self.tensors()
            .into_iter()
            .filter(|t| t.role.is_learnable())
            .flat_map(|t| t.data.iter().copied())
            .collect()
    }

    /// Inverse of [`flatten_learnable`](Self::flatten_learnable).
    pub fn set_learnable(&mut self, flat: &[T]) -> Result<()> {
        let expected = self.num_learnable();
        if flat.len() != expected {
            return Err(Error::shape("set_learnable", expected, flat.len()));
        }
        let mut offset = 0;
        for t in self.tensors_mut().into_iter().filter(|t| t.role.is_learnable()) {
            let n = t.data.len();
            t.data.copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    pub fn num_learnable(&self) -> usize {
        self.tensors()
            .iter()
            .filter(|t| t.role.is_learnable())
            .map(|t| t.data.len())
            .sum()
    }

    /// Global L2 norm over the learnable tensors.
    pub fn learnable_norm(&self) -> T {
        self.tensors()
            .iter()
            .filter(|t| t.role.is_learnable())
            .flat_map(|t| t.data.iter())
            .map(|&v| v * v)
            .sum::<T>()
            .sqrt()
    }

    /// `self ← tau·online + (1 − tau)·self` over every tensor, running
    /// statistics included.
    pub fn ema_from(&mut self, online: &NetworkParams<T>, tau: T) {
        let keep = T::one() - tau;
        for (dst, src) in self.tensors_mut().into_iter().zip(online.tensors()) {
            debug_assert_eq!(dst.shape, src.shape);
            for (d, &s) in dst.data.iter_mut().zip(src.data) {
                *d = tau * s + keep * *d;
            }
        }
    }
}

fn linear_ref<'a, T>(prefix: &str, l: &'a LinearParams<T>, out: &mut Vec<TensorRef<'a, T>>) {
    out.push(TensorRef {
        name: format!("{prefix}.weight"),
        role: TensorRole::Weight,
        shape: vec![l.weight.nrows(), l.weight.ncols()],
        data: slice(&l.weight),
    });
    out.push(TensorRef {
        name: format!("{prefix}.bias"),
        role: TensorRole::Bias,
        shape: vec![l.bias.len()],
        data: slice(&l.bias),
    });
}

fn linear_mut<'a, T>(prefix: &str, l: &'a mut LinearParams<T>, out: &mut Vec<TensorMut<'a, T>>) {
    let LinearParams { weight, bias } = l;
    out.push(TensorMut {
        name: format!("{prefix}.weight"),
        role: TensorRole::Weight,
        shape: vec![weight.nrows(), weight.ncols()],
        data: slice_mut(weight),
    });
    out.push(TensorMut {
        name: format!("{prefix}.bias"),
        role: TensorRole::Bias,
        shape: vec![bias.len()],
        data: slice_mut(bias),
    });
}
