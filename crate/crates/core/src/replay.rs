//! Fixed-capacity FIFO replay storage with uniform sampling.

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::checkpoint::NamedTensor;
use crate::Scalar;

/// One environment step. `next_state` is the observation reached by the
/// action, even when the environment auto-reset afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward_raw: f64,
    pub next_state: Vec<f64>,
    pub terminated: bool,
    pub truncated: bool,
}

/// Columnar sample of transitions, promoted to the training scalar type.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch<T> {
    pub states: Array2<T>,
    pub actions: Array2<T>,
    pub rewards: Array1<T>,
    pub next_states: Array2<T>,
    pub terminated: Array1<bool>,
    pub truncated: Array1<bool>,
}

impl<T> Batch<T> {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }
}

/// States and actions are stored in single precision, rewards in double.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    state_dim: usize,
    action_dim: usize,
    cursor: usize,
    size: usize,
    total_inserted: u64,
    states: Vec<f32>,
    next_states: Vec<f32>,
    actions: Vec<f32>,
    rewards: Vec<f64>,
    terminated: Vec<bool>,
    truncated: Vec<bool>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, state_dim: usize, action_dim: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("buffer_capacity must be positive".into()));
        }
        Ok(Self {
            capacity,
            state_dim,
            action_dim,
            cursor: 0,
            size: 0,
            total_inserted: 0,
            states: vec![0.0; capacity * state_dim],
            next_states: vec![0.0; capacity * state_dim],
            actions: vec![0.0; capacity * action_dim],
            rewards: vec![0.0; capacity],
            terminated: vec![false; capacity],
            truncated: vec![false; capacity],
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn total_inserted(&self) -> u64 {
        self.total_inserted
    }

    /// Scalar slots reserved for transition data.
    pub fn storage_slots(&self) -> usize {
        self.states.len() + self.next_states.len() + self.actions.len() + self.rewards.len() + self.terminated.len() + self.truncated.len()
    }

    /// Writes one transition at the cursor. When both flags are set,
    /// termination wins and `truncated` is stored as false.
    pub fn push(
        &mut self,
        state: &[f64],
        action: &[f64],
        reward_raw: f64,
        next_state: &[f64],
        terminated: bool,
        truncated: bool,
    ) -> Result<()> {
        let (s, a) = (self.state_dim, self.action_dim);
        if state.len() != s || next_state.len() != s {
            return Err(Error::shape("replay push (state)", s, state.len().max(next_state.len())));
        }
        if action.len() != a {
            return Err(Error::shape("replay push (action)", a, action.len()));
        }
        let i = self.cursor;
        for (dst, &v) in self.states[i * s..(i + 1) * s].iter_mut().zip(state) {
            *dst = v as f32;
        }
        for (dst, &v) in self.next_states[i * s..(i + 1) * s].iter_mut().zip(next_state) {
            *dst = v as f32;
        }
        for (dst, &v) in self.actions[i * a..(i + 1) * a].iter_mut().zip(action) {
            *dst = v as f32;
        }
        self.rewards[i] = reward_raw;
        self.terminated[i] = terminated;
        self.truncated[i] = truncated && !terminated;
        self.cursor = (self.cursor + 1) % self.capacity;
        self.size = (self.size + 1).min(self.capacity);
        self.total_inserted += 1;
        Ok(())
    }

    /// Writes the transitions in order. The batch is validated first so a
    /// schema error leaves the buffer untouched.
    pub fn push_batch(&mut self, ts: &[Transition]) -> Result<()> {
        for t in ts {
            if t.state.len() != self.state_dim || t.next_state.len() != self.state_dim {
                return Err(Error::shape("replay push_batch (state)", self.state_dim, t.state.len()));
            }
            if t.action.len() != self.action_dim {
                return Err(Error::shape("replay push_batch (action)", self.action_dim, t.action.len()));
            }
        }
        for t in ts {
            self.push(&t.state, &t.action, t.reward_raw, &t.next_state, t.terminated, t.truncated)?;
        }
        Ok(())
    }

    /// Uniform indices in `[0, len)`, with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Result<Vec<usize>> {
        if self.size == 0 {
            return Err(Error::EmptyBuffer);
        }
        Ok((0..batch_size).map(|_| rng.random_range(0..self.size)).collect())
    }

    pub fn gather<T: Scalar>(&self, indices: &[usize]) -> Batch<T> {
        let (s, a, b) = (self.state_dim, self.action_dim, indices.len());
        let lift = |src: &[f32], width: usize| {
            Array2::from_shape_fn((b, width), |(r, c)| T::lit(f64::from(src[indices[r] * width + c])))
        };
        Batch {
            states: lift(&self.states, s),
            actions: lift(&self.actions, a),
            next_states: lift(&self.next_states, s),
            rewards: indices.iter().map(|&i| T::lit(self.rewards[i])).collect(),
            terminated: indices.iter().map(|&i| self.terminated[i]).collect(),
            truncated: indices.iter().map(|&i| self.truncated[i]).collect(),
        }
    }

    pub fn sample<T: Scalar, R: Rng + ?Sized>(&self, batch_size: usize, rng: &mut R) -> Result<Batch<T>> {
        let idx = self.sample_indices(batch_size, rng)?;
        Ok(self.gather(&idx))
    }

    /// Stored rows in slot order, one tensor per field.
    pub fn snapshot(&self) -> Vec<NamedTensor> {
        let n = self.size;
        let (s, a) = (self.state_dim, self.action_dim);
        let f = |v: &[f32]| v.iter().map(|&x| f64::from(x)).collect::<Vec<_>>();
        let flag = |v: &[bool]| v.iter().map(|&x| if x { 1.0 } else { 0.0 }).collect::<Vec<_>>();
        vec![
            NamedTensor::new("replay.state", vec![n, s], f(&self.states[..n * s])),
            NamedTensor::new("replay.action", vec![n, a], f(&self.actions[..n * a])),
            NamedTensor::new("replay.reward", vec![n], self.rewards[..n].to_vec()),
            NamedTensor::new("replay.next_state", vec![n, s], f(&self.next_states[..n * s])),
            NamedTensor::new("replay.terminated", vec![n], flag(&self.terminated[..n])),
            NamedTensor::new("replay.truncated", vec![n], flag(&self.truncated[..n])),
        ]
    }
}
