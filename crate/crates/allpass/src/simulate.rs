//! Simulation of causal all-pass and autoregressive processes.
//!
//! The all-pass generator draws i.i.d. noise, applies the moving-average
//! filter implied by the reversed autoregressive polynomial, and runs the
//! causal AR recursion forward, discarding a burn-in window. The driving
//! noise over the retained window is kept so tests can verify the residual
//! recursion recovers it.

use crate::error::{AllPassError, Result};
use crate::noise::NoiseModel;
use crate::residuals::AllPassParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// A simulated series with its retained driving noise and generation spec.
#[derive(Debug, Clone)]
pub struct SimulatedSeries {
    pub x: Vec<f64>,
    /// Noise Z*_t aligned with x: noise[t] is the lag-0 innovation of x[t].
    pub noise: Vec<f64>,
    pub params: AllPassParams,
    pub noise_model: NoiseModel,
    pub burnin: usize,
    pub seed: u64,
}

/// Default burn-in, long enough for roots with modulus >= 1.1.
pub fn default_burnin(p: usize) -> usize {
    500 + 50 * p
}

/// One independent stream per (master seed, replicate index) pair.
pub fn replicate_rng(master_seed: u64, replicate: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(replicate);
    rng
}

/// Simulate the causal all-pass process driven by `noise`. The moving
/// average uses the effective order r (trailing zero coefficients ignored):
/// X_t = phi_1 X_{t-1} + ... + phi_r X_{t-r}
///       + Z*_t + (phi_{r-1}/phi_r) Z*_{t-1} + ... + (phi_1/phi_r) Z*_{t-r+1}
///       - (1/phi_r) Z*_{t-r}.
pub fn simulate_allpass(
    params: &AllPassParams,
    noise: &NoiseModel,
    n: usize,
    seed: u64,
    burnin: Option<usize>,
) -> Result<SimulatedSeries> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = simulate_allpass_with_rng(params, noise, n, &mut rng, burnin)?;
    out.seed = seed;
    Ok(out)
}

/// As [`simulate_allpass`], drawing from a caller-provided stream.
pub fn simulate_allpass_with_rng<R: Rng + ?Sized>(
    params: &AllPassParams,
    noise: &NoiseModel,
    n: usize,
    rng: &mut R,
    burnin: Option<usize>,
) -> Result<SimulatedSeries> {
    let r = params.effective_order();
    if r == 0 {
        return Err(AllPassError::Degenerate(
            "all coefficients are zero; the all-pass model has order r = 0".into(),
        ));
    }
    params.ensure_causal()?;
    if n == 0 {
        return Err(AllPassError::Input("requested zero observations".into()));
    }
    let phi = &params.coeffs()[..r];
    let phi_r = phi[r - 1];
    let burnin = burnin.unwrap_or_else(|| default_burnin(params.order()));
    let total = n + burnin;

    // zstar[i] is Z* at time i - r (so every MA lag is in range from t = 0).
    let zstar = noise.sample(total + r, rng);
    let mut theta = vec![0.0; r + 1];
    theta[0] = 1.0;
    for k in 1..r {
        theta[k] = phi[r - 1 - k] / phi_r;
    }
    theta[r] = -1.0 / phi_r;

    let mut x = vec![0.0; total];
    for t in 0..total {
        let mut acc = 0.0;
        for (k, &th) in theta.iter().enumerate() {
            acc += th * zstar[t + r - k];
        }
        for (j, &c) in phi.iter().enumerate() {
            if t > j {
                acc += c * x[t - j - 1];
            }
        }
        x[t] = acc;
    }

    let kept_noise = zstar[burnin + r..burnin + r + n].to_vec();
    Ok(SimulatedSeries {
        x: x[burnin..].to_vec(),
        noise: kept_noise,
        params: params.clone(),
        noise_model: noise.clone(),
        burnin,
        seed: 0,
    })
}

/// Simulate a causal AR(p) process X_t = phi_1 X_{t-1} + ... + Z_t.
pub fn simulate_ar(
    params: &AllPassParams,
    noise: &NoiseModel,
    n: usize,
    seed: u64,
    burnin: Option<usize>,
) -> Result<SimulatedSeries> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = simulate_ar_with_rng(params, noise, n, &mut rng, burnin)?;
    out.seed = seed;
    Ok(out)
}

/// As [`simulate_ar`], drawing from a caller-provided stream.
pub fn simulate_ar_with_rng<R: Rng + ?Sized>(
    params: &AllPassParams,
    noise: &NoiseModel,
    n: usize,
    rng: &mut R,
    burnin: Option<usize>,
) -> Result<SimulatedSeries> {
    params.ensure_causal()?;
    if n == 0 {
        return Err(AllPassError::Input("requested zero observations".into()));
    }
    let phi = params.coeffs();
    let burnin = burnin.unwrap_or_else(|| default_burnin(params.order()));
    let total = n + burnin;
    let z = noise.sample(total, rng);
    let mut x = vec![0.0; total];
    for t in 0..total {
        let mut acc = z[t];
        for (j, &c) in phi.iter().enumerate() {
            if t > j {
                acc += c * x[t - j - 1];
            }
        }
        x[t] = acc;
    }
    Ok(SimulatedSeries {
        x: x[burnin..].to_vec(),
        noise: z[burnin..].to_vec(),
        params: params.clone(),
        noise_model: noise.clone(),
        burnin,
        seed: 0,
    })
}
