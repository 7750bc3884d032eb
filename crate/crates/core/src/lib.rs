//! Soft actor-critic with a batch-normalized inverted-residual backbone,
//! categorical critics, adaptive reward scaling, weight projection and
//! noise-repetition exploration, plus small analytic control environments.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`). Training
//! runs in double precision; the `*64` aliases below name those types.

pub mod distributional;
pub mod envs;
pub mod error;
pub mod exploration;
pub mod nn;
pub mod policy;
pub mod replay;
pub mod reward_norm;
mod scalar;
pub mod trainer;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type NetworkParams64 = nn::NetworkParams<f64>;
pub type NetworkParams32 = nn::NetworkParams<f32>;
pub type AtomGrid64 = distributional::AtomGrid<f64>;
pub type ReturnTracker64 = reward_norm::ReturnTracker<f64>;
pub type Temperature64 = policy::Temperature<f64>;
pub type AgentState64 = trainer::AgentState<f64>;
pub type Trainer64 = trainer::Trainer<f64>;
