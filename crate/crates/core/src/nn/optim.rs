use crate::nn::network::NetworkParams;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam with bias correction over a flat list of parameter slices.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam<T> {
    pub config: AdamConfig,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
    steps: u64,
}

impl<T: Scalar> Adam<T> {
    pub fn new(config: AdamConfig, sizes: impl IntoIterator<Item = usize>) -> Self {
        let sizes: Vec<usize> = sizes.into_iter().collect();
        Self {
            config,
            m: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
            v: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
            steps: 0,
        }
    }

    /// Optimizer sized for the learnable tensors of `net`.
    pub fn for_network(config: AdamConfig, net: &NetworkParams<T>) -> Self {
        let sizes = net
            .tensors()
            .into_iter()
            .filter(|t| t.role.is_learnable())
            .map(|t| t.data.len())
            .collect::<Vec<_>>();
        Self::new(config, sizes)
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// One step over matching parameter/gradient slices.
    pub fn step_slices(&mut self, params: Vec<&mut [T]>, grads: Vec<&[T]>, lr: T) {
        assert_eq!(params.len(), self.m.len(), "optimizer/parameter layout mismatch");
        assert_eq!(grads.len(), self.m.len(), "optimizer/gradient layout mismatch");
        self.steps += 1;
        let b1 = T::lit(self.config.beta1);
        let b2 = T::lit(self.config.beta2);
        let eps = T::lit(self.config.eps);
        let t = self.steps as i32;
        let bc1 = T::one() - b1.powi(t);
        let bc2 = T::one() - b2.powi(t);
        let step_size = lr / bc1;
        for (((p, g), m), v) in params.into_iter().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (T::one() - b1) * g[i];
                v[i] = b2 * v[i] + (T::one() - b2) * g[i] * g[i];
                p[i] = p[i] - step_size * m[i] / ((v[i] / bc2).sqrt() + eps);
            }
        }
    }

    pub fn step_network(&mut self, net: &mut NetworkParams<T>, grads: &NetworkParams<T>, lr: T) {
        let params: Vec<&mut [T]> = net
            .tensors_mut()
            .into_iter()
            .filter(|t| t.role.is_learnable())
            .map(|t| t.data)
            .collect();
        let grads: Vec<&[T]> = grads
            .tensors()
            .into_iter()
            .filter(|t| t.role.is_learnable())
            .map(|t| t.data)
            .collect();
        self.step_slices(params, grads, lr);
    }

    pub fn step_scalar(&mut self, param: &mut T, grad: T, lr: T) {
        let mut p = [*param];
        self.step_slices(vec![&mut p[..]], vec![&[grad][..]], lr);
        *param = p[0];
    }

    /// Moment buffers, for checkpointing.
    pub fn moments(&self) -> (&[Vec<T>], &[Vec<T>]) {
        (&self.m, &self.v)
    }
}
