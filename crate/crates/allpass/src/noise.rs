//! Zero-mean noise distributions driving the all-pass model.
//!
//! Each family exposes a consistent (pdf, cdf, quantile, sampler) quadruple
//! with known variance. The families shipped here are exactly the ones the
//! efficiency tables evaluate: Laplace, logistic, scaled Student-t (df > 2),
//! Gaussian (useful only for negative tests, since Gaussian all-pass
//! parameters are not identifiable) and the two-component normal mixture
//! 0.4 N(-1, 1) + 0.6 N(2/3, 3^2).

use crate::error::{AllPassError, Result};
use crate::quad::brent_root;
use rand::Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Normal, StudentsT};

const MIX_WEIGHTS: [f64; 2] = [0.4, 0.6];
const MIX_MEANS: [f64; 2] = [-1.0, 2.0 / 3.0];
const MIX_SDS: [f64; 2] = [1.0, 3.0];

/// A zero-mean noise distribution with variance `sigma2`.
#[derive(Debug, Clone)]
pub enum NoiseModel {
    Laplace {
        sigma2: f64,
    },
    Logistic {
        sigma2: f64,
    },
    /// Student-t with `df` degrees of freedom, rescaled to variance `sigma2`.
    StudentT {
        df: f64,
        sigma2: f64,
    },
    Gaussian {
        sigma2: f64,
    },
    /// The fixed asymmetric mixture 0.4 N(-1, 1) + 0.6 N(2/3, 9).
    NormalMixture,
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(AllPassError::Domain(format!(
            "variance must be positive and finite, got {sigma2}"
        )));
    }
    Ok(())
}

impl NoiseModel {
    pub fn laplace(sigma2: f64) -> Result<Self> {
        check_sigma2(sigma2)?;
        Ok(NoiseModel::Laplace { sigma2 })
    }

    pub fn logistic(sigma2: f64) -> Result<Self> {
        check_sigma2(sigma2)?;
        Ok(NoiseModel::Logistic { sigma2 })
    }

    /// Student-t scaled to the requested variance. Requires `df > 2`,
    /// otherwise the variance does not exist.
    pub fn student_t(df: f64, sigma2: f64) -> Result<Self> {
        check_sigma2(sigma2)?;
        if !(df > 2.0 && df.is_finite()) {
            return Err(AllPassError::Domain(format!(
                "Student-t needs df > 2 for a finite variance, got {df}"
            )));
        }
        Ok(NoiseModel::StudentT { df, sigma2 })
    }

    pub fn gaussian(sigma2: f64) -> Result<Self> {
        check_sigma2(sigma2)?;
        Ok(NoiseModel::Gaussian { sigma2 })
    }

    pub fn normal_mixture() -> Self {
        NoiseModel::NormalMixture
    }

    pub fn name(&self) -> String {
        match self {
            NoiseModel::Laplace { .. } => "laplace".into(),
            NoiseModel::Logistic { .. } => "logistic".into(),
            NoiseModel::StudentT { df, .. } => format!("t({df})"),
            NoiseModel::Gaussian { .. } => "gaussian".into(),
            NoiseModel::NormalMixture => "mixture".into(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            NoiseModel::Laplace { sigma2 }
            | NoiseModel::Logistic { sigma2 }
            | NoiseModel::StudentT { sigma2, .. }
            | NoiseModel::Gaussian { sigma2 } => *sigma2,
            NoiseModel::NormalMixture => MIX_WEIGHTS
                .iter()
                .zip(MIX_MEANS)
                .zip(MIX_SDS)
                .map(|((w, m), s)| w * (s * s + m * m))
                .sum(),
        }
    }

    /// Laplace scale: f(s) = exp(-sqrt(2)|s|/sigma) / (sqrt(2) sigma).
    fn laplace_rate(sigma2: f64) -> f64 {
        (2.0 / sigma2).sqrt()
    }

    /// Logistic scale b with variance (pi b)^2 / 3.
    fn logistic_scale(sigma2: f64) -> f64 {
        (3.0 * sigma2).sqrt() / std::f64::consts::PI
    }

    /// Scale factor c such that c * T(df) has variance sigma2.
    fn t_scale(df: f64, sigma2: f64) -> f64 {
        (sigma2 * (df - 2.0) / df).sqrt()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            NoiseModel::Laplace { sigma2 } => {
                let a = Self::laplace_rate(*sigma2);
                0.5 * a * (-a * x.abs()).exp()
            }
            NoiseModel::Logistic { sigma2 } => {
                let b = Self::logistic_scale(*sigma2);
                let f = 1.0 / (1.0 + (-x / b).exp());
                f * (1.0 - f) / b
            }
            NoiseModel::StudentT { df, sigma2 } => {
                let c = Self::t_scale(*df, *sigma2);
                let t = StudentsT::new(0.0, 1.0, *df).expect("validated parameters");
                t.pdf(x / c) / c
            }
            NoiseModel::Gaussian { sigma2 } => {
                let s = sigma2.sqrt();
                let n = Normal::new(0.0, 1.0).expect("unit normal");
                n.pdf(x / s) / s
            }
            NoiseModel::NormalMixture => {
                let n = Normal::new(0.0, 1.0).expect("unit normal");
                MIX_WEIGHTS
                    .iter()
                    .zip(MIX_MEANS)
                    .zip(MIX_SDS)
                    .map(|((w, m), s)| w * n.pdf((x - m) / s) / s)
                    .sum()
            }
        }
    }

    /// Derivative of the density, analytic for every shipped family.
    pub fn pdf_deriv(&self, x: f64) -> f64 {
        match self {
            NoiseModel::Laplace { sigma2 } => {
                let a = Self::laplace_rate(*sigma2);
                if x == 0.0 {
                    0.0
                } else {
                    -a * x.signum() * self.pdf(x)
                }
            }
            NoiseModel::Logistic { sigma2 } => {
                let b = Self::logistic_scale(*sigma2);
                let cdf = 1.0 / (1.0 + (-x / b).exp());
                self.pdf(x) * (1.0 - 2.0 * cdf) / b
            }
            NoiseModel::StudentT { df, sigma2 } => {
                let c = Self::t_scale(*df, *sigma2);
                let u = x / c;
                let t = StudentsT::new(0.0, 1.0, *df).expect("validated parameters");
                t.pdf(u) * (-(df + 1.0) * u / (df + u * u)) / (c * c)
            }
            NoiseModel::Gaussian { sigma2 } => -x / sigma2 * self.pdf(x),
            NoiseModel::NormalMixture => {
                let n = Normal::new(0.0, 1.0).expect("unit normal");
                MIX_WEIGHTS
                    .iter()
                    .zip(MIX_MEANS)
                    .zip(MIX_SDS)
                    .map(|((w, m), s)| {
                        let u = (x - m) / s;
                        w * n.pdf(u) * (-u) / (s * s)
                    })
                    .sum()
            }
        }
    }

    /// Location score -f'(x)/f(x).
    pub fn score(&self, x: f64) -> f64 {
        -self.pdf_deriv(x) / self.pdf(x)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            NoiseModel::Laplace { sigma2 } => {
                let a = Self::laplace_rate(*sigma2);
                if x < 0.0 {
                    0.5 * (a * x).exp()
                } else {
                    1.0 - 0.5 * (-a * x).exp()
                }
            }
            NoiseModel::Logistic { sigma2 } => {
                let b = Self::logistic_scale(*sigma2);
                1.0 / (1.0 + (-x / b).exp())
            }
            NoiseModel::StudentT { df, sigma2 } => {
                let c = Self::t_scale(*df, *sigma2);
                let t = StudentsT::new(0.0, 1.0, *df).expect("validated parameters");
                t.cdf(x / c)
            }
            NoiseModel::Gaussian { sigma2 } => {
                let n = Normal::new(0.0, 1.0).expect("unit normal");
                n.cdf(x / sigma2.sqrt())
            }
            NoiseModel::NormalMixture => {
                let n = Normal::new(0.0, 1.0).expect("unit normal");
                MIX_WEIGHTS
                    .iter()
                    .zip(MIX_MEANS)
                    .zip(MIX_SDS)
                    .map(|((w, m), s)| w * n.cdf((x - m) / s))
                    .sum()
            }
        }
    }

    /// Inverse cdf. Closed form where available; Student-t and the mixture
    /// use bracketed root finding on the cdf to tolerance 1e-12.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(AllPassError::Domain(format!(
                "quantile argument must lie in (0,1), got {u}"
            )));
        }
        Ok(match self {
            NoiseModel::Laplace { sigma2 } => {
                let a = Self::laplace_rate(*sigma2);
                if u < 0.5 {
                    (2.0 * u).ln() / a
                } else {
                    -(2.0 * (1.0 - u)).ln() / a
                }
            }
            NoiseModel::Logistic { sigma2 } => {
                let b = Self::logistic_scale(*sigma2);
                b * (u / (1.0 - u)).ln()
            }
            NoiseModel::Gaussian { sigma2 } => {
                let n = Normal::new(0.0, 1.0).expect("unit normal");
                sigma2.sqrt() * n.inverse_cdf(u)
            }
            NoiseModel::StudentT { .. } | NoiseModel::NormalMixture => self.quantile_by_root(u)?,
        })
    }

    fn quantile_by_root(&self, u: f64) -> Result<f64> {
        // Bracket from a Gaussian-scale guess, expanding geometrically.
        let n = Normal::new(0.0, 1.0).expect("unit normal");
        let guess = self.variance().sqrt() * n.inverse_cdf(u);
        let mut half_width = 1.0 + guess.abs();
        let (mut lo, mut hi) = (guess - half_width, guess + half_width);
        for _ in 0..200 {
            if self.cdf(lo) < u && self.cdf(hi) > u {
                break;
            }
            half_width *= 4.0;
            lo = guess - half_width;
            hi = guess + half_width;
        }
        brent_root(|x| self.cdf(x) - u, lo, hi, 1e-12)
    }

    /// x-positions where the density is not differentiable.
    pub fn pdf_kinks(&self) -> Vec<f64> {
        match self {
            NoiseModel::Laplace { .. } => vec![0.0],
            _ => Vec::new(),
        }
    }

    /// (lower, upper) quantiles used to truncate expectation integrals.
    pub fn quantile_bounds(&self, delta: f64) -> Result<(f64, f64)> {
        Ok((self.quantile(delta)?, self.quantile(1.0 - delta)?))
    }

    /// Draw one variate. Deterministic given the state of `rng`.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            NoiseModel::Laplace { .. } | NoiseModel::Logistic { .. } => {
                let u = open_unit(rng);
                self.quantile(u).expect("u is interior")
            }
            NoiseModel::Gaussian { sigma2 } => {
                let n = Normal::new(0.0, 1.0).expect("unit normal");
                sigma2.sqrt() * n.inverse_cdf(open_unit(rng))
            }
            NoiseModel::StudentT { df, sigma2 } => {
                // Bailey's polar method for the Student-t.
                let c = Self::t_scale(*df, *sigma2);
                loop {
                    let u = 2.0 * rng.random::<f64>() - 1.0;
                    let v = 2.0 * rng.random::<f64>() - 1.0;
                    let w = u * u + v * v;
                    if w > 0.0 && w < 1.0 {
                        return c * u * (df * (w.powf(-2.0 / df) - 1.0) / w).sqrt();
                    }
                }
            }
            NoiseModel::NormalMixture => {
                let n = Normal::new(0.0, 1.0).expect("unit normal");
                let pick = rng.random::<f64>();
                let idx = usize::from(pick >= MIX_WEIGHTS[0]);
                MIX_MEANS[idx] + MIX_SDS[idx] * n.inverse_cdf(open_unit(rng))
            }
        }
    }

    /// Draw `count` variates from the given stream.
    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<f64> {
        (0..count).map(|_| self.sample_one(rng)).collect()
    }
}

/// Uniform draw strictly inside (0,1).
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u = rng.random::<f64>();
        if u > 0.0 {
            return u;
        }
    }
}
