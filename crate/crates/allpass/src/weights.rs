//! Weight (score) functions for the rank dispersion objective.
//!
//! A weight function maps (0,1) to the reals, strictly increasing and odd
//! about 1/2, with a bounded, uniformly continuous derivative. The shipped
//! functions are the Wilcoxon weight s - 1/2, the arctan family
//! 2/pi * arctan(m(s - 1/2)) that approaches the LAD sign weight as m grows,
//! a bounded van der Waerden approximation (the normal quantile, continued
//! linearly outside (eps, 1-eps)), and the noise-optimal weight proportional
//! to -f'(F^-1(s)) / f(F^-1(s)).

use crate::error::{AllPassError, Result};
use crate::noise::NoiseModel;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use std::f64::consts::FRAC_2_PI;
use std::fmt;
use std::sync::Arc;

const VDW_EPS: f64 = 1e-4;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A dispersion weight: strictly increasing on (0,1), odd about 1/2.
#[derive(Clone)]
pub struct WeightFunction {
    name: String,
    eval: ScalarFn,
    deriv: ScalarFn,
    /// Interior points where eval or deriv is not smooth, for quadrature.
    kinks: Vec<f64>,
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFunction")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

impl WeightFunction {
    /// Wilcoxon weight lambda(s) = s - 1/2.
    pub fn wilcoxon() -> Self {
        WeightFunction {
            name: "wilcoxon".into(),
            eval: Arc::new(|s| s - 0.5),
            deriv: Arc::new(|_| 1.0),
            kinks: Vec::new(),
        }
    }

    /// LAD-like weight lambda_m(s) = 2/pi * arctan(m (s - 1/2)), m > 0.
    pub fn arctan(m: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(AllPassError::Domain(format!(
                "arctan weight needs m > 0, got {m}"
            )));
        }
        Ok(WeightFunction {
            name: format!("arctan-{m}"),
            eval: Arc::new(move |s| FRAC_2_PI * (m * (s - 0.5)).atan()),
            deriv: Arc::new(move |s| {
                let d = m * (s - 0.5);
                FRAC_2_PI * m / (1.0 + d * d)
            }),
            kinks: Vec::new(),
        })
    }

    /// Bounded approximation of the van der Waerden weight: the standard
    /// normal quantile on [eps, 1-eps], continued linearly outside with the
    /// boundary slope (eps = 1e-4).
    pub fn van_der_waerden() -> Self {
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        let x_hi = normal.inverse_cdf(1.0 - VDW_EPS);
        let slope = 1.0 / normal.pdf(x_hi);
        let n_eval = normal;
        let n_deriv = normal;
        WeightFunction {
            name: "van-der-waerden".into(),
            eval: Arc::new(move |s| {
                if s < VDW_EPS {
                    -x_hi + (s - VDW_EPS) * slope
                } else if s > 1.0 - VDW_EPS {
                    x_hi + (s - (1.0 - VDW_EPS)) * slope
                } else {
                    n_eval.inverse_cdf(s)
                }
            }),
            deriv: Arc::new(move |s| {
                let s = s.clamp(VDW_EPS, 1.0 - VDW_EPS);
                1.0 / n_deriv.pdf(n_deriv.inverse_cdf(s))
            }),
            kinks: vec![VDW_EPS, 1.0 - VDW_EPS],
        }
    }

    /// The efficiency-optimal weight for the given noise,
    /// lambda_f(s) proportional to -f'(F^-1(s)) / f(F^-1(s)),
    /// normalized so that lambda_f(3/4) = 1.
    pub fn optimal_for(noise: &NoiseModel) -> Result<Self> {
        let x34 = noise.quantile(0.75)?;
        if noise.pdf(x34) <= 0.0 {
            return Err(AllPassError::Domain(
                "density vanishes at the normalizing quantile".into(),
            ));
        }
        let scale = noise.score(x34);
        if !(scale.is_finite() && scale != 0.0) {
            return Err(AllPassError::Domain(
                "score vanishes at the normalizing quantile; cannot normalize".into(),
            ));
        }
        let kinks: Vec<f64> = noise.pdf_kinks().iter().map(|&x| noise.cdf(x)).collect();
        let noise_eval = noise.clone();
        let raw = move |s: f64| -> f64 {
            let x = noise_eval.quantile(s).expect("interior argument");
            let f = noise_eval.pdf(x);
            if f <= 0.0 {
                return f64::NAN;
            }
            noise_eval.score(x) / scale
        };
        let raw_eval = raw.clone();
        let raw_deriv = raw;
        Ok(WeightFunction {
            name: format!("optimal[{}]", noise.name()),
            eval: Arc::new(raw_eval),
            // Five-point central difference; closed forms for second density
            // derivatives are not worth carrying for this diagnostic weight.
            deriv: Arc::new(move |s| {
                let h = (1e-5f64).min(0.25 * s.min(1.0 - s)).max(1e-9);
                (-raw_deriv(s + 2.0 * h) + 8.0 * raw_deriv(s + h) - 8.0 * raw_deriv(s - h)
                    + raw_deriv(s - 2.0 * h))
                    / (12.0 * h)
            }),
            kinks,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Interior non-smooth points in (0,1), for seeding quadrature.
    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    /// Evaluate lambda(s) for s in the open interval (0,1).
    pub fn eval(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s < 1.0) {
            return Err(AllPassError::Domain(format!(
                "weight argument must lie in (0,1), got {s}"
            )));
        }
        Ok((self.eval)(s))
    }

    /// Evaluate lambda'(s). Accepts (0,1]; the plug-in estimators evaluate
    /// the grid t/(n-p), whose last point is exactly 1.
    pub fn deriv(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(AllPassError::Domain(format!(
                "weight derivative argument must lie in (0,1], got {s}"
            )));
        }
        Ok((self.deriv)(s))
    }

    /// Unchecked evaluation for hot loops where the argument is interior by
    /// construction (ranks divided by m+1).
    #[inline]
    pub(crate) fn eval_raw(&self, s: f64) -> f64 {
        (self.eval)(s)
    }
}
