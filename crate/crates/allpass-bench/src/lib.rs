//! Shared fixtures for the benchmark suite.

use allpass::noise::NoiseModel;
use allpass::residuals::AllPassParams;
use allpass::simulate::{simulate_allpass, SimulatedSeries};

/// A deterministic all-pass realization for benchmarking.
pub fn fixture(phi: &[f64], n: usize) -> SimulatedSeries {
    let params = AllPassParams::new(phi.to_vec()).expect("valid coefficients");
    let noise = NoiseModel::laplace(1.0).expect("valid noise");
    simulate_allpass(&params, &noise, n, 1234, None).expect("simulation succeeds")
}
