//! Rank-based parameter estimation with plug-in asymptotics.
//!
//! The estimate minimizes the rank dispersion D over the causal region,
//! searched in partial-autocorrelation coordinates where causality is
//! implicit: many random starts are screened by their D value, the best few
//! are refined with a simplex search, and the lowest terminal point wins.
//! Confidence intervals come from the plug-in variance multiple
//! tau^2 = [J - (K_z/s)^2] / (2 (s L_z - K_z/s)^2), where s is the residual
//! root mean square, K_z = D(phi_hat)/n, and L_z pairs the weight derivative
//! on the grid t/(n-p) with a kernel density estimate at the residual order
//! statistics.

use crate::dispersion::{dispersion_of, DispersionEval};
use crate::error::{AllPassError, Result};
use crate::moments::weight_j;
use crate::optim::{nelder_mead, SimplexOptions};
use crate::residuals::{pacf_to_phi, residuals, AllPassParams};
use crate::weights::WeightFunction;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use statrs::distribution::{Continuous, Normal, StudentsT};

/// Start coordinates are sampled uniformly on (-1 + delta, 1 - delta).
const START_MARGIN: f64 = 0.01;
/// Barrier keeping simplex iterates strictly inside the open unit box of
/// partial autocorrelations. Extreme multi-coordinate corners of the box can
/// still map to roots within the causality margin, so the fit re-checks the
/// terminal point.
const BARRIER_MARGIN: f64 = 1e-6;

/// Kernel for the residual density estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    Gaussian,
    /// Student-t density with the given degrees of freedom.
    StudentT(f64),
}

impl KernelKind {
    fn density(&self, u: f64) -> f64 {
        match self {
            KernelKind::Gaussian => {
                let n = Normal::new(0.0, 1.0).expect("unit normal");
                n.pdf(u)
            }
            KernelKind::StudentT(df) => {
                let t = StudentsT::new(0.0, 1.0, *df).expect("validated df");
                t.pdf(u)
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            KernelKind::Gaussian => "gaussian".into(),
            KernelKind::StudentT(df) => format!("t({df})"),
        }
    }
}

/// Kernel density estimate of the residual density f_z:
/// f_hat(s) = (b n)^{-1} sum_t kernel((s - z_t)/b), summed over the n-p
/// residuals but divided by the full series length n. Consequently the
/// estimate integrates to (n-p)/n, not 1.
#[derive(Debug, Clone)]
pub struct KernelDensityEstimate {
    sample: Vec<f64>,
    bandwidth: f64,
    kernel: KernelKind,
    series_len: usize,
}

impl KernelDensityEstimate {
    pub fn eval(&self, s: f64) -> f64 {
        let scale = 1.0 / (self.bandwidth * self.series_len as f64);
        self.sample
            .iter()
            .map(|z| self.kernel.density((s - z) / self.bandwidth))
            .sum::<f64>()
            * scale
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }
}

/// Build the kernel density estimate; `series_len` is the divisor n.
pub fn kernel_density(
    z: &[f64],
    series_len: usize,
    bandwidth: f64,
    kernel: KernelKind,
) -> Result<KernelDensityEstimate> {
    if !bandwidth.is_finite() || bandwidth <= 0.0 {
        return Err(AllPassError::Domain(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    if series_len < z.len() {
        return Err(AllPassError::Input(
            "series length cannot be below the residual count".into(),
        ));
    }
    Ok(KernelDensityEstimate {
        sample: z.to_vec(),
        bandwidth,
        kernel,
        series_len,
    })
}

/// Type-7 sample quantile (linear interpolation between order statistics).
fn sample_quantile(sorted: &[f64], p: f64) -> f64 {
    let m = sorted.len();
    if m == 1 {
        return sorted[0];
    }
    let h = (m - 1) as f64 * p;
    let lo = h.floor() as usize;
    let w = h - lo as f64;
    if lo + 1 < m {
        sorted[lo] * (1.0 - w) + sorted[lo + 1] * w
    } else {
        sorted[m - 1]
    }
}

/// Silverman-style bandwidth b = 0.9 n^{-1/5} min(s, IQR/1.34), where s is
/// the root mean square of `z` with divisor `series_len` and IQR its
/// interquartile range. `series_len` is the full series length n.
pub fn silverman_bandwidth(z: &[f64], series_len: usize) -> Result<f64> {
    if z.len() < 2 {
        return Err(AllPassError::Input(
            "bandwidth needs at least two residuals".into(),
        ));
    }
    let s = (z.iter().map(|v| v * v).sum::<f64>() / series_len as f64).sqrt();
    let mut sorted = z.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let iqr = sample_quantile(&sorted, 0.75) - sample_quantile(&sorted, 0.25);
    let spread = s.min(iqr / 1.34);
    if !spread.is_finite() || spread <= 0.0 {
        return Err(AllPassError::Degenerate(
            "residuals have zero spread; bandwidth is undefined".into(),
        ));
    }
    Ok(0.9 * (series_len as f64).powf(-0.2) * spread)
}

/// The plug-in quantities from one fitted model.
#[derive(Debug, Clone, Copy)]
pub struct PluginEstimates {
    /// Root mean square of the residuals (divisor n).
    pub s_hat: f64,
    /// D(phi_hat) / n.
    pub k_hat_z: f64,
    /// (1/n) sum_t lambda'(t/(n-p)) f_hat(z_(t)).
    pub l_hat_z: f64,
    /// sqrt([J - (K_z/s)^2] / (2 (s L_z - K_z/s)^2)).
    pub tau_hat: f64,
}

struct PluginParts {
    s_hat: f64,
    k_hat_z: f64,
    l_hat_z: f64,
    tau_hat: Result<f64>,
}

fn plugin_parts(
    params: &AllPassParams,
    x: &[f64],
    w: &WeightFunction,
    kernel: KernelKind,
) -> Result<PluginParts> {
    let res = residuals(params, x)?;
    let z = res.values();
    let n = x.len();
    let m = z.len();
    let nf = n as f64;

    let s_hat = (z.iter().map(|v| v * v).sum::<f64>() / nf).sqrt();
    let k_hat_z = dispersion_of(z, w) / nf;
    let bandwidth = silverman_bandwidth(z, n)?;
    let kde = kernel_density(z, n, bandwidth, kernel)?;

    let mut sorted = z.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let mut l_hat_z = 0.0;
    for (t, &zt) in sorted.iter().enumerate() {
        let grid = (t + 1) as f64 / m as f64;
        l_hat_z += w.deriv(grid)? * kde.eval(zt);
    }
    l_hat_z /= nf;

    let j = weight_j(w)?;
    let ratio = k_hat_z / s_hat;
    let numerator = j - ratio * ratio;
    let gap = s_hat * l_hat_z - ratio;
    let tau_hat = if gap <= 0.0 {
        Err(AllPassError::TheoryInapplicable(format!(
            "in-sample violation of assumption A5: s L_z - K_z/s = {gap:.3e} <= 0"
        )))
    } else if numerator <= 0.0 {
        Err(AllPassError::Numeric(format!(
            "plug-in numerator J - (K_z/s)^2 = {numerator:.3e} is not positive"
        )))
    } else {
        Ok((numerator / (2.0 * gap * gap)).sqrt())
    };
    Ok(PluginParts {
        s_hat,
        k_hat_z,
        l_hat_z,
        tau_hat,
    })
}

/// Compute (s, K_z, L_z, tau) at a fitted parameter vector.
pub fn estimate_tau(
    params: &AllPassParams,
    x: &[f64],
    w: &WeightFunction,
    kernel: KernelKind,
) -> Result<PluginEstimates> {
    let parts = plugin_parts(params, x, w, kernel)?;
    let tau_hat = parts.tau_hat?;
    Ok(PluginEstimates {
        s_hat: parts.s_hat,
        k_hat_z: parts.k_hat_z,
        l_hat_z: parts.l_hat_z,
        tau_hat,
    })
}

/// Options for the multi-start minimization.
#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Random starting values screened by their dispersion.
    pub n_starts: usize,
    /// How many of the best starts get a local simplex refinement.
    pub n_refine: usize,
    pub seed: u64,
    pub kernel: KernelKind,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            n_starts: 1000,
            n_refine: 12,
            seed: 0,
            kernel: KernelKind::Gaussian,
        }
    }
}

impl FitOptions {
    pub fn with_seed(seed: u64) -> Self {
        FitOptions {
            seed,
            ..FitOptions::default()
        }
    }
}

/// A fitted all-pass model with plug-in uncertainty quantities.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub phi_hat: AllPassParams,
    /// D at the estimate; never larger than D at any evaluated start.
    pub objective: f64,
    pub residuals: Vec<f64>,
    pub s_hat: f64,
    pub k_hat_z: f64,
    pub l_hat_z: f64,
    /// None when the sample violates A5, in which case no covariance or
    /// intervals are available.
    pub tau_hat: Option<f64>,
    pub covariance: Option<DMatrix<f64>>,
    pub std_errors: Option<Vec<f64>>,
    /// 95% confidence intervals, phi_j +/- 1.96 sqrt(cov_jj).
    pub ci: Option<Vec<(f64, f64)>>,
    pub n: usize,
    pub p: usize,
    pub weight_name: String,
    pub seed: u64,
    pub starts_used: usize,
    /// Whether the winning refinement met its tolerances within budget.
    pub converged: bool,
}

fn barrier_objective(eval: &mut DispersionEval<'_>, kappa: &[f64], phi_buf: &mut Vec<f64>) -> f64 {
    if kappa.iter().any(|k| k.abs() >= 1.0 - BARRIER_MARGIN) {
        return f64::INFINITY;
    }
    // Durbin-Levinson step-up, allocation-free.
    let p = kappa.len();
    phi_buf.clear();
    phi_buf.resize(2 * p, 0.0);
    let (phi, prev) = phi_buf.split_at_mut(p);
    phi[0] = kappa[0];
    for k in 2..=p {
        prev[..k - 1].copy_from_slice(&phi[..k - 1]);
        for j in 0..k - 1 {
            phi[j] = prev[j] - kappa[k - 1] * prev[k - 2 - j];
        }
        phi[k - 1] = kappa[k - 1];
    }
    eval.eval(phi)
}

/// Minimize the rank dispersion over causal models of order `p`.
pub fn fit(x: &[f64], p: usize, w: &WeightFunction, opts: &FitOptions) -> Result<FitResult> {
    if p == 0 {
        return Err(AllPassError::Input("model order must be at least 1".into()));
    }
    let n = x.len();
    if n <= 4 * p {
        return Err(AllPassError::Input(format!(
            "series length {n} must exceed 4p = {}",
            4 * p
        )));
    }
    if opts.n_starts == 0 {
        return Err(AllPassError::Input(
            "need at least one starting value".into(),
        ));
    }
    let n_refine = opts.n_refine.clamp(1, opts.n_starts);

    let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
    let starts: Vec<Vec<f64>> = (0..opts.n_starts)
        .map(|_| {
            (0..p)
                .map(|_| rng.random_range(-1.0 + START_MARGIN..1.0 - START_MARGIN))
                .collect()
        })
        .collect();

    // Screen all starts by dispersion; index order fixes every tie, so the
    // outcome does not depend on the parallel schedule.
    let screened: Vec<f64> = starts
        .par_iter()
        .map_init(
            || (DispersionEval::new(x, p, w), Vec::new()),
            |(eval, buf), kappa| barrier_objective(eval, kappa, buf),
        )
        .collect();
    if screened.iter().all(|d| !d.is_finite()) {
        return Err(AllPassError::EstimationFailure(
            "no starting value produced a finite dispersion".into(),
        ));
    }
    let mut ranked: Vec<usize> = (0..opts.n_starts).collect();
    ranked.sort_by(|&a, &b| screened[a].total_cmp(&screened[b]).then(a.cmp(&b)));
    ranked.truncate(n_refine);

    let simplex_opts = SimplexOptions {
        f_tol: 1e-10 * n as f64,
        x_tol: 1e-8,
        max_evals: 2000 * p,
    };
    let refined: Vec<(f64, Vec<f64>, bool)> = ranked
        .par_iter()
        .map_init(
            || (DispersionEval::new(x, p, w), Vec::new()),
            |(eval, buf), &idx| {
                let start = &starts[idx];
                let steps: Vec<f64> = start
                    .iter()
                    .map(|k| -k.signum() * (0.05 * (1.0 - k.abs())).max(1e-3))
                    .collect();
                let run = nelder_mead(
                    |kappa| barrier_objective(eval, kappa, buf),
                    start,
                    &steps,
                    &simplex_opts,
                );
                (run.value, run.x, run.converged)
            },
        )
        .collect();

    let winner = refined
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.0.total_cmp(&b.0).then(ia.cmp(ib)))
        .expect("at least one refinement ran");
    let (objective, kappa_hat, converged) = (winner.1 .0, winner.1 .1.clone(), winner.1 .2);
    if !objective.is_finite() {
        return Err(AllPassError::EstimationFailure(
            "every refinement diverged".into(),
        ));
    }
    let phi_hat = pacf_to_phi(&kappa_hat)?;
    if !phi_hat.is_causal() {
        return Err(AllPassError::EstimationFailure(format!(
            "the dispersion minimum sits on the causality boundary (phi = {:?})",
            phi_hat.coeffs()
        )));
    }

    let parts = plugin_parts(&phi_hat, x, w, opts.kernel)?;
    let res = residuals(&phi_hat, x)?;
    let (tau_hat, covariance, std_errors, ci) = match parts.tau_hat {
        Ok(tau) => {
            let acov = crate::asymptotics::ar_autocovariance(&phi_hat, 1.0, p)?;
            let cov = acov.normalized_inverse()? * (tau * tau / n as f64);
            let se: Vec<f64> = (0..p).map(|j| cov[(j, j)].sqrt()).collect();
            let ci: Vec<(f64, f64)> = phi_hat
                .coeffs()
                .iter()
                .zip(&se)
                .map(|(c, s)| (c - 1.96 * s, c + 1.96 * s))
                .collect();
            (Some(tau), Some(cov), Some(se), Some(ci))
        }
        Err(_) => (None, None, None, None),
    };

    Ok(FitResult {
        phi_hat,
        objective,
        residuals: res.values().to_vec(),
        s_hat: parts.s_hat,
        k_hat_z: parts.k_hat_z,
        l_hat_z: parts.l_hat_z,
        tau_hat,
        covariance,
        std_errors,
        ci,
        n,
        p,
        weight_name: w.name().to_string(),
        seed: opts.seed,
        starts_used: opts.n_starts,
        converged,
    })
}
