//! Seasonal time-series forecasting models.
//!
//! The crate is organised around the experimental matrix of a seasonal
//! forecasting study:
//!
//! - [`series`]: the [`TimeSeries`] container, correlogram, seasonality rule
//!   of thumb, min-max normalization, train/test splitting and MAE/MSE.
//! - [`ann`]: seasonal `s × h × s` feedforward (SFANN) and Elman (SEANN)
//!   networks over a flat [`ParameterVector`], pattern construction, BIC
//!   hidden-node selection and iterated forecasting.
//! - [`bp`]: backpropagation gradients, Levenberg–Marquardt and
//!   gradient descent with momentum and adaptive learning rate.
//! - [`pso`]: particle swarm training (basic, Trelea, Clerc constriction).
//! - [`stats`]: SARIMA(0,1,1)×(0,1,1)_s by conditional least squares and
//!   multiplicative Holt-Winters.
//! - [`svr`]: ε-SVR with an RBF kernel, an SMO dual solver and grid search.
//! - [`ensemble`]: mean/median forecast combination.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod ann;
pub mod bp;
pub mod datasets;
pub mod ensemble;
mod error;
pub mod pso;
pub mod series;
pub mod stats;
pub mod svr;

pub use ann::{NetKind, ParameterVector, PatternLayout, PatternSet, SannTopology};
pub use error::{Error, Result};
pub use series::{ErrorMetrics, NormalizationMap, TimeSeries};
