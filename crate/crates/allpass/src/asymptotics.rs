//! Asymptotic covariance machinery for all-pass estimators.
//!
//! Every estimator considered here (rank, LAD, ML) has asymptotic covariance
//! equal to a scalar multiple of sigma^2 Gamma_p^{-1} / n, where Gamma_p is
//! the autocovariance matrix of the causal AR process driven by the same
//! noise. This module computes Gamma_p from the psi-weights of 1/phi(z), the
//! three scalar multiples, and their efficiency ratios.

use crate::error::{AllPassError, Result};
use crate::moments::score_moments;
use crate::noise::NoiseModel;
use crate::quad::integrate_with_breaks;
use crate::residuals::AllPassParams;
use crate::weights::WeightFunction;
use nalgebra::DMatrix;

const PSI_CUTOFF: f64 = 1e-16;
const PSI_CAP: usize = 100_000;
const REL_TOL: f64 = 1e-10;

/// Autocovariances gamma(0..p-1) of the AR process 1/phi(B) driving noise
/// with variance sigma2, and the Toeplitz matrix Gamma_p they generate.
#[derive(Debug, Clone)]
pub struct ArAutocovariance {
    pub gamma: Vec<f64>,
    pub gamma_p: DMatrix<f64>,
    pub sigma2: f64,
}

impl ArAutocovariance {
    /// sigma^2 Gamma_p^{-1}; depends on phi only, since Gamma_p scales with
    /// sigma^2.
    pub fn normalized_inverse(&self) -> Result<DMatrix<f64>> {
        let chol = self
            .gamma_p
            .clone()
            .cholesky()
            .ok_or_else(|| AllPassError::Numeric("Gamma_p is not positive definite".into()))?;
        Ok(chol.inverse() * self.sigma2)
    }
}

/// Coefficients of 1/phi(z) = sum psi_j z^j, truncated at |psi_j| < 1e-16
/// (hard cap 10^5 terms; causality guarantees geometric decay).
pub fn psi_weights(params: &AllPassParams) -> Result<Vec<f64>> {
    params.ensure_causal()?;
    let phi = params.coeffs();
    let p = phi.len();
    let mut psi = vec![1.0];
    for j in 1..PSI_CAP {
        let mut acc = 0.0;
        for (k, &c) in phi.iter().enumerate().take(p.min(j)) {
            acc += c * psi[j - k - 1];
        }
        psi.push(acc);
        // Complex roots make individual psi_j oscillate through zero, so
        // truncate only once a full window of p values is negligible.
        if j >= p && psi[j + 1 - p..].iter().all(|v| v.abs() < PSI_CUTOFF) {
            break;
        }
    }
    Ok(psi)
}

/// gamma(h) = sigma^2 sum_j psi_j psi_{j+h} for h = 0..p-1, assembled into
/// the Toeplitz matrix Gamma_p.
pub fn ar_autocovariance(
    params: &AllPassParams,
    sigma2: f64,
    p: usize,
) -> Result<ArAutocovariance> {
    if p == 0 {
        return Err(AllPassError::Input(
            "matrix dimension p must be >= 1".into(),
        ));
    }
    if p < params.order() && params.effective_order() > p {
        return Err(AllPassError::Input(format!(
            "requested dimension {p} below the model order {}",
            params.effective_order()
        )));
    }
    if !sigma2.is_finite() || sigma2 <= 0.0 {
        return Err(AllPassError::Domain("sigma2 must be positive".into()));
    }
    let psi = psi_weights(params)?;
    let mut gamma = vec![0.0; p];
    for (h, g) in gamma.iter_mut().enumerate() {
        *g = sigma2
            * psi
                .iter()
                .zip(psi.iter().skip(h))
                .map(|(a, b)| a * b)
                .sum::<f64>();
    }
    let gamma_p = DMatrix::from_fn(p, p, |i, j| gamma[i.abs_diff(j)]);
    Ok(ArAutocovariance {
        gamma,
        gamma_p,
        sigma2,
    })
}

/// Scalar multiple for the rank estimator:
/// (sigma^2 J - K^2) / (2 (sigma^2 L - K)^2). Requires A5.
pub fn scalar_multiple_r(w: &WeightFunction, noise: &NoiseModel) -> Result<f64> {
    let sm = score_moments(w, noise)?;
    if !sm.a5_satisfied {
        return Err(AllPassError::TheoryInapplicable(format!(
            "assumption A5 (sigma^2 * L > K) fails for weight {} with {} noise \
             (sigma^2 L - K = {:.3e})",
            w.name(),
            noise.name(),
            sm.a5_gap()
        )));
    }
    Ok(sm.j_gap() / (2.0 * sm.a5_gap() * sm.a5_gap()))
}

fn expectation_breakpoints(noise: &NoiseModel) -> Result<Vec<f64>> {
    let (lo, hi) = noise.quantile_bounds(1e-14)?;
    let mut points = vec![lo, hi, 0.0];
    points.extend(noise.pdf_kinks());
    for s in [1e-8, 1e-4, 0.05, 0.25, 0.75, 0.95, 1.0 - 1e-4, 1.0 - 1e-8] {
        points.push(noise.quantile(s)?);
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    Ok(points)
}

/// Scalar multiple for the LAD estimator:
/// Var|Z| / (2 (2 sigma^2 f(0) - E|Z|)^2).
pub fn scalar_multiple_lad(noise: &NoiseModel) -> Result<f64> {
    let points = expectation_breakpoints(noise)?;
    let e_abs = integrate_with_breaks(|x| x.abs() * noise.pdf(x), &points, REL_TOL)?.value;
    let sigma2 = noise.variance();
    let var_abs = sigma2 - e_abs * e_abs;
    let denom = 2.0 * sigma2 * noise.pdf(0.0) - e_abs;
    if denom.abs() < 1e-7 * e_abs.max(1e-12) {
        return Err(AllPassError::Numeric(format!(
            "LAD multiple is singular for {} noise: 2 sigma^2 f(0) = E|Z|",
            noise.name()
        )));
    }
    Ok(var_abs / (2.0 * denom * denom))
}

/// Scalar multiple for the ML estimator:
/// (1/2) (sigma^2 Int f'(s)^2 / f(s) ds - 1)^{-1}.
pub fn scalar_multiple_ml(noise: &NoiseModel) -> Result<f64> {
    let points = expectation_breakpoints(noise)?;
    let fisher = integrate_with_breaks(
        |x| {
            let s = noise.score(x);
            s * s * noise.pdf(x)
        },
        &points,
        REL_TOL,
    )?
    .value;
    let gap = noise.variance() * fisher - 1.0;
    if gap < 1e-7 {
        return Err(AllPassError::Numeric(format!(
            "ML multiple is singular for {} noise: sigma^2 * Fisher information \
             does not exceed 1 (the Gaussian boundary)",
            noise.name()
        )));
    }
    Ok(0.5 / gap)
}

/// Asymptotic relative efficiency: the ratio of two variance multiples. The
/// efficiency of estimator A relative to B is B's multiple over A's.
pub fn are(numerator_multiple: f64, denominator_multiple: f64) -> Result<f64> {
    if !(numerator_multiple > 0.0 && denominator_multiple > 0.0) {
        return Err(AllPassError::Domain(
            "efficiency ratio needs positive variance multiples".into(),
        ));
    }
    Ok(numerator_multiple / denominator_multiple)
}

/// Efficiency of the rank estimator against LAD and ML for one noise family.
#[derive(Debug, Clone, Copy)]
pub struct EfficiencyReport {
    pub multiple_r: f64,
    pub multiple_lad: f64,
    pub multiple_ml: f64,
    pub are_r_lad: f64,
    pub are_r_ml: f64,
}

pub fn efficiency_report(w: &WeightFunction, noise: &NoiseModel) -> Result<EfficiencyReport> {
    let multiple_r = scalar_multiple_r(w, noise)?;
    let multiple_lad = scalar_multiple_lad(noise)?;
    let multiple_ml = scalar_multiple_ml(noise)?;
    Ok(EfficiencyReport {
        multiple_r,
        multiple_lad,
        multiple_ml,
        are_r_lad: are(multiple_lad, multiple_r)?,
        are_r_ml: are(multiple_ml, multiple_r)?,
    })
}

/// Limiting covariance of the estimate at sample size n:
/// (multiple / n) * sigma^2 Gamma_p^{-1}, with Gamma_p built from phi0.
pub fn asymptotic_covariance(
    params: &AllPassParams,
    multiple: f64,
    n: usize,
) -> Result<DMatrix<f64>> {
    if !multiple.is_finite() || multiple <= 0.0 {
        return Err(AllPassError::Domain(
            "variance multiple must be positive".into(),
        ));
    }
    if n == 0 {
        return Err(AllPassError::Input("sample size must be positive".into()));
    }
    let acov = ar_autocovariance(params, 1.0, params.order())?;
    Ok(acov.normalized_inverse()? * (multiple / n as f64))
}
