//! The all-pass residual recursion, causality checks and the bijective
//! parameterization of the causal region.

use crate::error::{AllPassError, Result};
use nalgebra::{Complex, DMatrix};

/// Margin on the root modulus when testing causality: optimizers probe the
/// boundary, so "outside the unit circle" means modulus > 1 + EPS_ROOT.
const EPS_ROOT: f64 = 1e-9;

/// Coefficients (phi_1, ..., phi_p) of the autoregressive polynomial
/// phi(z) = 1 - phi_1 z - ... - phi_p z^p.
#[derive(Debug, Clone, PartialEq)]
pub struct AllPassParams {
    phi: Vec<f64>,
}

impl AllPassParams {
    pub fn new(phi: Vec<f64>) -> Result<Self> {
        if phi.is_empty() {
            return Err(AllPassError::Input("empty coefficient vector".into()));
        }
        if phi.iter().any(|c| !c.is_finite()) {
            return Err(AllPassError::Input("non-finite coefficient".into()));
        }
        Ok(AllPassParams { phi })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.phi
    }

    /// The nominal order p (length of the coefficient vector).
    pub fn order(&self) -> usize {
        self.phi.len()
    }

    /// Index of the last nonzero coefficient (1-based); 0 when all vanish.
    pub fn effective_order(&self) -> usize {
        self.phi
            .iter()
            .rposition(|&c| c != 0.0)
            .map_or(0, |i| i + 1)
    }

    /// All roots of phi(z), ignoring trailing zero coefficients.
    pub fn roots(&self) -> Vec<Complex<f64>> {
        let d = self.effective_order();
        if d == 0 {
            return Vec::new();
        }
        // phi(z) = 1 - phi_1 z - ... - phi_d z^d. Monic form (divide by
        // -phi_d): z^d + (phi_{d-1}/phi_d) z^{d-1} + ... - 1/phi_d, whose
        // companion matrix has the roots as eigenvalues.
        let lead = self.phi[d - 1];
        let mut companion = DMatrix::zeros(d, d);
        for i in 1..d {
            companion[(i, i - 1)] = 1.0;
        }
        companion[(0, d - 1)] = 1.0 / lead;
        for j in 1..d {
            companion[(j, d - 1)] = -self.phi[j - 1] / lead;
        }
        companion.complex_eigenvalues().iter().copied().collect()
    }

    /// True when every root of phi(z) lies strictly outside the unit circle.
    pub fn is_causal(&self) -> bool {
        self.roots().iter().all(|z| z.norm() > 1.0 + EPS_ROOT)
    }

    pub(crate) fn ensure_causal(&self) -> Result<()> {
        if self.is_causal() {
            Ok(())
        } else {
            Err(AllPassError::NonCausal(format!(
                "some root of phi(z) has modulus <= 1 (phi = {:?})",
                self.phi
            )))
        }
    }
}

/// Map partial autocorrelations kappa in (-1,1)^p to AR coefficients via the
/// Durbin-Levinson step-up. The image is exactly the causal region.
pub fn pacf_to_phi(kappa: &[f64]) -> Result<AllPassParams> {
    if kappa.is_empty() {
        return Err(AllPassError::Input("empty pacf vector".into()));
    }
    for &k in kappa {
        if !k.is_finite() || k.abs() >= 1.0 {
            return Err(AllPassError::Domain(format!(
                "partial autocorrelation must lie in (-1,1), got {k}"
            )));
        }
    }
    let p = kappa.len();
    let mut phi = vec![0.0; p];
    let mut prev = vec![0.0; p];
    phi[0] = kappa[0];
    for k in 2..=p {
        prev[..k - 1].copy_from_slice(&phi[..k - 1]);
        for j in 0..k - 1 {
            phi[j] = prev[j] - kappa[k - 1] * prev[k - 2 - j];
        }
        phi[k - 1] = kappa[k - 1];
    }
    AllPassParams::new(phi)
}

/// Inverse of [`pacf_to_phi`] (Durbin-Levinson step-down). Fails outside the
/// causal region, where some reflection coefficient reaches 1 in modulus.
pub fn phi_to_pacf(params: &AllPassParams) -> Result<Vec<f64>> {
    let p = params.order();
    let mut work = params.coeffs().to_vec();
    let mut kappa = vec![0.0; p];
    for k in (1..=p).rev() {
        let kk = work[k - 1];
        kappa[k - 1] = kk;
        if k == 1 {
            break;
        }
        let denom = 1.0 - kk * kk;
        if denom <= 0.0 {
            return Err(AllPassError::Domain(
                "coefficients lie outside the causal region".into(),
            ));
        }
        let prev = work[..k - 1].to_vec();
        for j in 0..k - 1 {
            work[j] = (prev[j] + kk * prev[k - 2 - j]) / denom;
        }
    }
    Ok(kappa)
}

/// Residuals of the all-pass recursion: a vector of length n - p.
#[derive(Debug, Clone)]
pub struct ResidualSeries {
    z: Vec<f64>,
    n: usize,
}

impl ResidualSeries {
    pub fn values(&self) -> &[f64] {
        &self.z
    }

    /// Length of the observed series the residuals came from.
    pub fn series_len(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

/// Fill `buf` (resized to n) with the backward residual recursion:
/// z_{t-p} = phi_1 z_{t-p+1} + ... + phi_p z_t - phi(B) X_t, running t from
/// n down to p+1 with z_{n-p+1} = ... = z_n = 0. Entries p..n of `buf` keep
/// that zero tail; entries 0..n-p are the residuals. The caller guarantees
/// `phi` is causal and `x.len() > phi.len()`.
pub(crate) fn residuals_into(phi: &[f64], x: &[f64], buf: &mut Vec<f64>) {
    let n = x.len();
    let p = phi.len();
    buf.clear();
    buf.resize(n, 0.0);
    for i in (0..n - p).rev() {
        // i = t - p - 1 with t in p+1..=n (0-based arrays).
        let mut acc = -x[i + p];
        for (j, &c) in phi.iter().enumerate() {
            acc += c * (buf[i + j + 1] + x[i + p - j - 1]);
        }
        buf[i] = acc;
    }
    buf.truncate(n - p);
}

/// Compute the model residuals for a causal parameter vector.
pub fn residuals(params: &AllPassParams, x: &[f64]) -> Result<ResidualSeries> {
    let p = params.order();
    let n = x.len();
    if n <= p {
        return Err(AllPassError::Input(format!(
            "series length {n} must exceed the model order {p}"
        )));
    }
    params.ensure_causal()?;
    let mut z = Vec::new();
    residuals_into(params.coeffs(), x, &mut z);
    Ok(ResidualSeries { z, n })
}

/// Partial derivatives of each residual with respect to each coefficient:
/// an (n-p) x p matrix with entry (t, j) = d z_t / d phi_j. Column j applies
/// the filter 1/phi(B^-1) to {X_{t+p-j} + z_{t+j}}, realized as a backward
/// recursion with the same zero tail as the residual recursion.
pub fn residual_gradient(params: &AllPassParams, x: &[f64]) -> Result<DMatrix<f64>> {
    let p = params.order();
    let n = x.len();
    if n <= p {
        return Err(AllPassError::Input(format!(
            "series length {n} must exceed the model order {p}"
        )));
    }
    params.ensure_causal()?;
    let phi = params.coeffs();
    let m = n - p;

    let mut z = Vec::new();
    residuals_into(phi, x, &mut z);
    z.resize(n, 0.0); // restore the zero tail for index arithmetic

    let mut grad = DMatrix::zeros(m, p);
    let mut g = vec![0.0; n];
    for j in 1..=p {
        g.iter_mut().for_each(|v| *v = 0.0);
        for i in (0..m).rev() {
            let mut acc = x[i + p - j] + z[i + j];
            for (k, &c) in phi.iter().enumerate() {
                acc += c * g[i + k + 1];
            }
            g[i] = acc;
        }
        for i in 0..m {
            grad[(i, j - 1)] = g[i];
        }
    }
    Ok(grad)
}
