//! Rank-based estimation for all-pass time series models.
//!
//! An all-pass model is an ARMA model whose autoregressive roots are the
//! reciprocals of its moving-average roots. Such models generate white-noise
//! series that remain dependent when the driving noise is non-Gaussian, which
//! makes them useful for identifying noncausal and noninvertible ARMA
//! structure that second-order methods cannot see.
//!
//! This crate provides:
//!
//! * simulation of causal all-pass and autoregressive processes with
//!   reproducible noise streams ([`simulate`]),
//! * parameter estimation by minimizing Jaeckel's rank dispersion of the
//!   model residuals, with plug-in asymptotic covariance and confidence
//!   intervals ([`estimation`]),
//! * model-order selection based on the significance of the highest-order
//!   fitted coefficient ([`order`]),
//! * asymptotic-efficiency calculators comparing the rank estimator against
//!   LAD- and ML-style alternatives ([`asymptotics`]),
//! * a deconvolution-style workflow that identifies the all-pass order of
//!   prefit residuals with autocorrelation diagnostics ([`pipeline`]).

pub mod asymptotics;
pub mod dispersion;
pub mod error;
pub mod estimation;
pub mod moments;
pub mod noise;
pub mod optim;
pub mod order;
pub mod pipeline;
pub mod quad;
pub mod residuals;
pub mod simulate;
pub mod weights;

pub use asymptotics::{ArAutocovariance, EfficiencyReport};
pub use error::{AllPassError, Result};
pub use estimation::{FitOptions, FitResult, KernelDensityEstimate, KernelKind, PluginEstimates};
pub use moments::ScoreMoments;
pub use noise::NoiseModel;
pub use order::{OrderReport, OrderSelection};
pub use pipeline::{AcfDiagnostics, DeconvReport};
pub use residuals::{AllPassParams, ResidualSeries};
pub use simulate::SimulatedSeries;
pub use weights::WeightFunction;
