//! Boosting with hierarchical label-noise modeling via stagewise variational
//! inference, together with AdaBoost baselines, a Gibbs-sampler oracle and
//! synthetic data generators.

pub mod adaboost;
pub mod datagen;
pub mod error;
pub mod gibbs;
pub mod hypotheses;
pub mod numerics;
pub mod viboost;
pub mod vlog;

pub use error::{Error, Result};
