use ndarray::{Array2, ArrayView2};
use rand::Rng;

use crate::error::Result;
use crate::nn::linear::LinearParams;
use crate::nn::norm::{BatchNormCache, BatchNormParams};
use crate::nn::Mode;
use crate::Scalar;

/// Inverted residual block: `y = x + project(relu(bn(expand(x))))`.
///
/// `bn` is `None` only in the no-batch-norm ablation.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockParams<T> {
    pub expand: LinearParams<T>,
    pub project: LinearParams<T>,
    pub bn: Option<BatchNormParams<T>>,
    pub expansion: usize,
}

#[derive(Debug, Clone)]
pub struct BlockCache<T> {
    x: Array2<T>,
    pre_act: Array2<T>,
    act: Array2<T>,
    pub(crate) bn: Option<BatchNormCache<T>>,
}

impl<T> BlockCache<T> {
    pub fn pre_activations(&self) -> &Array2<T> {
        &self.pre_act
    }
}

impl<T: Scalar> BlockParams<T> {
    pub fn init<R: Rng + ?Sized>(hidden: usize, expansion: usize, batch_norm: bool, rng: &mut R) -> Self {
        let inner = hidden * expansion;
        Self {
            expand: LinearParams::init(hidden, inner, rng),
            project: LinearParams::init(inner, hidden, rng),
            bn: batch_norm.then(|| BatchNormParams::new(inner)),
            expansion,
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.expand.in_dim()
    }

    pub fn forward(&self, x: ArrayView2<'_, T>, mode: Mode) -> Result<Array2<T>> {
        self.forward_cached(x, mode).map(|(y, _)| y)
    }

    pub fn forward_cached(&self, x: ArrayView2<'_, T>, mode: Mode) -> Result<(Array2<T>, BlockCache<T>)> {
        let expanded = self.expand.forward(x)?;
        let (pre_act, bn) = match &self.bn {
            Some(bn) => {
                let (z, cache) = bn.forward_cached(expanded.view(), mode)?;
                (z, Some(cache))
            }
            None => (expanded, None),
        };
        let act = pre_act.mapv(|v| v.max(T::zero()));
        let mut y = self.project.forward(act.view())?;
        y += &x;
        Ok((
            y,
            BlockCache {
                x: x.to_owned(),
                pre_act,
                act,
                bn,
            },
        ))
    }

    pub fn backward(
        &self,
        cache: &BlockCache<T>,
        dy: ArrayView2<'_, T>,
        grad: Option<&mut BlockParams<T>>,
    ) -> Array2<T> {
        let (g_project, g_expand, g_bn) = match grad {
            Some(g) => (Some(&mut g.project), Some(&mut g.expand), g.bn.as_mut().map(|b| &mut b.affine)),
            None => (None, None, None),
        };
        let d_act = match g_project {
            Some(g) => self.project.backward(cache.act.view(), dy, g),
            None => self.project.backward_input(dy),
        };
        let mut d_pre = d_act;
        ndarray::Zip::from(&mut d_pre)
            .and(&cache.pre_act)
            .for_each(|d, &z| {
                if z <= T::zero() {
                    *d = T::zero();
                }
            });
        let d_expanded = match (&self.bn, &cache.bn) {
            (Some(bn), Some(bc)) => bn.backward(bc, d_pre.view(), g_bn),
            _ => d_pre,
        };
        let d_x = match g_expand {
            Some(g) => self.expand.backward(cache.x.view(), d_expanded.view(), g),
            None => self.expand.backward_input(d_expanded.view()),
        };
        d_x + &dy
    }
}
