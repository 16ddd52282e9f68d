//! Deconvolution-style identification workflow.
//!
//! Fitting a causal, invertible model to a causal but noninvertible series
//! leaves residuals that follow an all-pass model whose order equals the
//! number of moving-average roots inside the unit circle. The workflow here:
//! prefit a causal AR (or ingest residuals computed elsewhere), check the
//! autocorrelations of the residuals and of their squares and absolute
//! values, then identify the all-pass order of the residual series and refit
//! at that order.

use crate::error::{AllPassError, Result};
use crate::estimation::{FitOptions, FitResult};
use crate::order::{select_order, OrderReport, OrderSelection};
use crate::residuals::AllPassParams;
use crate::weights::WeightFunction;

/// Mean-corrected sample autocorrelations at lags 1..=max_lag (divisor n).
pub fn sample_acf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if n <= max_lag {
        return Err(AllPassError::Input(format!(
            "series length {n} must exceed the maximum lag {max_lag}"
        )));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let denom: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    if denom == 0.0 {
        return Err(AllPassError::Degenerate(
            "constant series has undefined autocorrelation".into(),
        ));
    }
    Ok((1..=max_lag)
        .map(|h| {
            x.iter()
                .zip(&x[h..])
                .map(|(a, b)| (a - mean) * (b - mean))
                .sum::<f64>()
                / denom
        })
        .collect())
}

/// ACFs of a residual series, its squares and its absolute values, with the
/// white-noise band +/- 1.96/sqrt(n) and exceedance counts per transform.
#[derive(Debug, Clone)]
pub struct AcfDiagnostics {
    pub max_lag: usize,
    pub acf: Vec<f64>,
    pub acf_squares: Vec<f64>,
    pub acf_abs: Vec<f64>,
    pub bound: f64,
    pub exceed: usize,
    pub exceed_squares: usize,
    pub exceed_abs: usize,
}

impl AcfDiagnostics {
    /// All-pass residuals look white in levels but dependent in squares or
    /// absolute values; independent residuals look white in all three.
    pub fn looks_independent(&self, tolerated_per_transform: usize) -> bool {
        self.exceed <= tolerated_per_transform
            && self.exceed_squares <= tolerated_per_transform
            && self.exceed_abs <= tolerated_per_transform
    }
}

pub fn diagnose(w_series: &[f64], max_lag: usize) -> Result<AcfDiagnostics> {
    let n = w_series.len();
    let acf = sample_acf(w_series, max_lag)?;
    let squares: Vec<f64> = w_series.iter().map(|v| v * v).collect();
    let abs: Vec<f64> = w_series.iter().map(|v| v.abs()).collect();
    let acf_squares = sample_acf(&squares, max_lag)?;
    let acf_abs = sample_acf(&abs, max_lag)?;
    let bound = 1.96 / (n as f64).sqrt();
    let count = |v: &[f64]| v.iter().filter(|a| a.abs() > bound).count();
    Ok(AcfDiagnostics {
        max_lag,
        exceed: count(&acf),
        exceed_squares: count(&acf_squares),
        exceed_abs: count(&acf_abs),
        acf,
        acf_squares,
        acf_abs,
        bound,
    })
}

/// Yule-Walker AR(p) prefit via Durbin-Levinson on the sample
/// autocovariances (always causal), plus the filtered residuals
/// w_t = x_t - phi_1 x_{t-1} - ... - phi_p x_{t-p} for t = p+1..n.
pub fn prefit_ar(x: &[f64], p: usize) -> Result<(AllPassParams, Vec<f64>)> {
    let n = x.len();
    if p == 0 || n <= 2 * p {
        return Err(AllPassError::Input(format!(
            "prefit needs 0 < 2p < n, got p = {p}, n = {n}"
        )));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let mut gamma = vec![0.0; p + 1];
    for (h, g) in gamma.iter_mut().enumerate() {
        *g = x
            .iter()
            .zip(&x[h..])
            .map(|(a, b)| (a - mean) * (b - mean))
            .sum::<f64>()
            / n as f64;
    }
    if gamma[0] <= 0.0 {
        return Err(AllPassError::Numeric(
            "sample covariance is singular (zero variance)".into(),
        ));
    }

    // Durbin-Levinson recursion on the sample autocovariances.
    let mut phi = vec![0.0; p];
    let mut prev = vec![0.0; p];
    let mut innovation = gamma[0];
    for k in 1..=p {
        let mut acc = gamma[k];
        for j in 0..k - 1 {
            acc -= phi[j] * gamma[k - 1 - j];
        }
        let kappa = acc / innovation;
        if !kappa.is_finite() || kappa.abs() >= 1.0 {
            return Err(AllPassError::Numeric(format!(
                "sample covariance is numerically singular at step {k}"
            )));
        }
        prev[..k - 1].copy_from_slice(&phi[..k - 1]);
        for j in 0..k - 1 {
            phi[j] = prev[j] - kappa * prev[k - 2 - j];
        }
        phi[k - 1] = kappa;
        innovation *= 1.0 - kappa * kappa;
    }

    let residuals: Vec<f64> = (p..n)
        .map(|t| {
            let mut w = x[t];
            for (j, &c) in phi.iter().enumerate() {
                w -= c * x[t - j - 1];
            }
            w
        })
        .collect();
    Ok((AllPassParams::new(phi)?, residuals))
}

/// The full identification result for one residual series.
#[derive(Debug, Clone)]
pub struct DeconvReport {
    pub order_report: OrderReport,
    /// The all-pass fit at the selected order; absent when the selection is
    /// order 0 (nothing to fit) or undetermined.
    pub fit: Option<FitResult>,
    /// Diagnostics of the final residuals: the all-pass residuals when a
    /// model was fitted, the input series otherwise.
    pub diagnostics: AcfDiagnostics,
}

/// Identify the all-pass order of a residual series, refit at that order and
/// diagnose the final residuals.
pub fn deconv_identify(
    w_series: &[f64],
    max_order: usize,
    weight: &WeightFunction,
    opts: &FitOptions,
    max_lag: usize,
) -> Result<DeconvReport> {
    let order_report = select_order(w_series, max_order, weight, opts)?;
    let fit = match order_report.selection {
        OrderSelection::Order(r) if r >= 1 => Some(order_report.fits[r - 1].clone()),
        _ => None,
    };
    let diagnostics = match &fit {
        Some(f) => diagnose(&f.residuals, max_lag)?,
        None => diagnose(w_series, max_lag)?,
    };
    Ok(DeconvReport {
        order_report,
        fit,
        diagnostics,
    })
}

/// Convolve a noise sequence with a finite wavelet: x_t = sum_k beta_k z_{t-k}.
/// Returns n = z.len() - beta.len() + 1 fully covered observations.
pub fn convolve_wavelet(beta: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    if beta.is_empty() || z.len() < beta.len() {
        return Err(AllPassError::Input(
            "need a nonempty wavelet and at least as many noise values".into(),
        ));
    }
    let q = beta.len() - 1;
    Ok((q..z.len())
        .map(|t| beta.iter().enumerate().map(|(k, b)| b * z[t - k]).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseModel;
    use crate::simulate::{replicate_rng, simulate_allpass, simulate_ar};

    #[test]
    fn acf_of_iid_stays_in_band() {
        let noise = NoiseModel::laplace(1.0).unwrap();
        let mut rng = replicate_rng(50, 0);
        let x = noise.sample(10_000, &mut rng);
        let acf = sample_acf(&x, 20).unwrap();
        let bound = 1.96 / (10_000f64).sqrt();
        let exceed = acf.iter().filter(|a| a.abs() > bound).count();
        assert!(exceed <= 3, "{exceed} exceedances");
    }

    #[test]
    fn acf_of_ar1() {
        let params = AllPassParams::new(vec![0.5]).unwrap();
        let noise = NoiseModel::gaussian(1.0).unwrap();
        let sim = simulate_ar(&params, &noise, 100_000, 51, None).unwrap();
        let acf = sample_acf(&sim.x, 3).unwrap();
        assert!((acf[0] - 0.5).abs() < 0.02);
        assert!((acf[1] - 0.25).abs() < 0.02);
    }

    #[test]
    fn acf_rejects_degenerate_input() {
        assert!(matches!(
            sample_acf(&[1.0; 50], 5),
            Err(AllPassError::Degenerate(_))
        ));
        assert!(sample_acf(&[1.0, 2.0], 5).is_err());
    }

    #[test]
    fn prefit_recovers_ar_coefficients() {
        let params = AllPassParams::new(vec![0.5]).unwrap();
        let noise = NoiseModel::gaussian(1.0).unwrap();
        let sim = simulate_ar(&params, &noise, 100_000, 52, None).unwrap();
        let (est, w) = prefit_ar(&sim.x, 1).unwrap();
        assert!((est.coeffs()[0] - 0.5).abs() < 0.01, "{:?}", est);
        assert_eq!(w.len(), sim.x.len() - 1);
        // Residuals of a correctly specified AR are white.
        let diag = diagnose(&w, 20).unwrap();
        assert!(diag.exceed <= 3, "{}", diag.exceed);
    }

    #[test]
    fn prefit_on_iid_gives_small_coefficients() {
        let noise = NoiseModel::laplace(1.0).unwrap();
        let mut rng = replicate_rng(53, 0);
        let x = noise.sample(20_000, &mut rng);
        let (est, _) = prefit_ar(&x, 3).unwrap();
        let bound = 3.0 / (x.len() as f64).sqrt();
        for c in est.coeffs() {
            assert!(c.abs() < bound, "{c}");
        }
    }

    #[test]
    fn prefit_is_always_causal() {
        let params = AllPassParams::new(vec![0.9]).unwrap();
        let noise = NoiseModel::gaussian(1.0).unwrap();
        let sim = simulate_ar(&params, &noise, 5000, 54, None).unwrap();
        for p in 1..=8 {
            let (est, _) = prefit_ar(&sim.x, p).unwrap();
            assert!(est.is_causal(), "p = {p}: {:?}", est);
        }
    }

    #[test]
    fn allpass_series_diagnostics() {
        // Levels look white; squares do not (non-Gaussian, r >= 1).
        let params = AllPassParams::new(vec![0.5]).unwrap();
        let noise = NoiseModel::laplace(1.0).unwrap();
        let sim = simulate_allpass(&params, &noise, 10_000, 55, None).unwrap();
        let diag = diagnose(&sim.x, 20).unwrap();
        assert!(diag.exceed <= 3, "levels: {}", diag.exceed);
        assert!(diag.exceed_squares > 0, "squares should exceed somewhere");
        assert!(diag.acf_squares[0].abs() > diag.bound);
    }

    #[test]
    fn iid_diagnostics_look_independent() {
        let noise = NoiseModel::laplace(1.0).unwrap();
        let mut rng = replicate_rng(56, 2);
        let w = noise.sample(10_000, &mut rng);
        let diag = diagnose(&w, 20).unwrap();
        // >= 90% of lags inside the band for each transform.
        assert!(diag.exceed <= 2);
        assert!(diag.exceed_squares <= 2);
        assert!(diag.exceed_abs <= 2);
    }

    #[test]
    fn gaussian_allpass_is_independent() {
        let params = AllPassParams::new(vec![0.5]).unwrap();
        let noise = NoiseModel::gaussian(1.0).unwrap();
        let sim = simulate_allpass(&params, &noise, 10_000, 57, None).unwrap();
        let diag = diagnose(&sim.x, 20).unwrap();
        assert!(diag.looks_independent(2), "{diag:?}");
    }

    #[test]
    fn convolution_shapes() {
        let x = convolve_wavelet(&[1.0, 2.0], &[1.0, 1.0, 1.0, 5.0]).unwrap();
        assert_eq!(x, vec![3.0, 3.0, 7.0]);
        assert!(convolve_wavelet(&[], &[1.0]).is_err());
    }

    /// Mixed-phase wavelet with a declared number of roots inside the unit
    /// circle: the all-pass order a causal prefit should leave behind.
    fn mixed_phase_wavelet() -> Vec<f64> {
        // (1 - 1.4 z)(1 + 1.25 z)(1 - 0.5 z)(1 + 0.4 z):
        // roots 1/1.4 and -0.8 inside, 2 and -2.5 outside.
        let factors: [[f64; 2]; 4] = [[1.0, -1.4], [1.0, 1.25], [1.0, -0.5], [1.0, 0.4]];
        let mut beta = vec![1.0];
        for f in factors {
            let mut next = vec![0.0; beta.len() + 1];
            for (i, &b) in beta.iter().enumerate() {
                next[i] += b * f[0];
                next[i + 1] += b * f[1];
            }
            beta = next;
        }
        beta
    }

    #[test]
    fn deconv_identifies_noninvertibility_order() {
        // Desk-scale analog of the seismic workflow: two MA roots inside the
        // unit circle should surface as an all-pass model of order two in
        // the prefit residuals.
        let beta = mixed_phase_wavelet();
        let noise = NoiseModel::student_t(5.0, 1.0).unwrap();
        let w = WeightFunction::wilcoxon();
        let mut hits = 0;
        let reps = 3;
        for i in 0..reps {
            let mut rng = replicate_rng(600, i);
            let z = noise.sample(5000 + beta.len() - 1, &mut rng);
            let x = convolve_wavelet(&beta, &z).unwrap();
            let (_, w_res) = prefit_ar(&x, 25).unwrap();
            let opts = FitOptions {
                n_starts: 300,
                n_refine: 8,
                seed: 700 + i,
                ..FitOptions::default()
            };
            let report = deconv_identify(&w_res, 3, &w, &opts, 20).unwrap();
            if report.order_report.selection == OrderSelection::Order(2) {
                hits += 1;
                let diag = &report.diagnostics;
                let tolerated = diag.max_lag / 10;
                assert!(
                    diag.exceed_squares <= tolerated && diag.exceed_abs <= tolerated,
                    "final residual diagnostics: {diag:?}"
                );
            }
        }
        assert!(hits >= 2, "order 2 identified in {hits}/{reps}");
    }

    #[test]
    fn deconv_on_iid_selects_nothing() {
        let noise = NoiseModel::laplace(1.0).unwrap();
        let w = WeightFunction::wilcoxon();
        let mut rng = replicate_rng(58, 0);
        let series = noise.sample(1500, &mut rng);
        let opts = FitOptions {
            n_starts: 200,
            n_refine: 6,
            seed: 59,
            ..FitOptions::default()
        };
        let report = deconv_identify(&series, 2, &w, &opts, 15).unwrap();
        if report.order_report.selection == OrderSelection::Order(0) {
            assert!(report.fit.is_none());
        }
    }
}
