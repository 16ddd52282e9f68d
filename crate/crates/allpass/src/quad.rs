//! Shared numeric primitives: adaptive quadrature and bracketed root finding.

use crate::error::{AllPassError, Result};
use std::collections::BinaryHeap;

/// A computed integral together with its error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
}

// 15-point Kronrod abscissae (positive half) and weights, with the embedded
// 7-point Gauss rule on the odd-indexed nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_67,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

fn kronrod_15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let f_mid = f(mid);
    let mut kronrod = WGK[7] * f_mid;
    let mut gauss = WG[3] * f_mid;
    for i in 0..7 {
        let dx = half * XGK[i];
        let fsum = f(mid - dx) + f(mid + dx);
        kronrod += WGK[i] * fsum;
        if i % 2 == 1 {
            gauss += WG[i / 2] * fsum;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

const MAX_SEGMENTS: usize = 20_000;

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]` to the given
/// relative tolerance. Subdivides globally, always splitting the segment with
/// the largest error estimate. Integrable endpoint singularities are handled
/// by the subdivision (the rule never evaluates at segment endpoints).
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<Quadrature> {
    integrate_with_breaks(f, &[a, b], rel_tol)
}

/// As [`integrate`], seeding the subdivision with the given breakpoints
/// (ascending). Use this when the integrand has interior kinks.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    rel_tol: f64,
) -> Result<Quadrature> {
    if points.len() < 2 {
        return Err(AllPassError::Input(
            "integration needs at least two breakpoints".into(),
        ));
    }
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut scale = 0.0; // sum of |segment integral|: the size the relative
                         // tolerance refers to when cancellation drives the
                         // signed total toward zero
    let mut total_err = 0.0;
    for w in points.windows(2) {
        let (v, e) = kronrod_15(&mut f, w[0], w[1]);
        total += v;
        scale += v.abs();
        total_err += e;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }

    while total_err > rel_tol * total.abs().max(scale).max(1e-300) && total_err > f64::MIN_POSITIVE
    {
        if heap.len() >= MAX_SEGMENTS {
            return Err(AllPassError::Numeric(format!(
                "quadrature did not converge: residual error estimate {total_err:.3e}"
            )));
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // Segment narrower than floating-point resolution; accept as is.
            heap.push(Segment {
                error: 0.0,
                ..worst
            });
            total_err = heap.iter().map(|s| s.error).sum();
            continue;
        }
        let (v1, e1) = kronrod_15(&mut f, worst.a, mid);
        let (v2, e2) = kronrod_15(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        scale += v1.abs() + v2.abs() - worst.value.abs();
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }

    if !total.is_finite() {
        return Err(AllPassError::Numeric(
            "quadrature produced a non-finite value".into(),
        ));
    }
    Ok(Quadrature {
        value: total,
        abs_error: total_err,
    })
}

/// Find a root of `f` in `[lo, hi]` by Brent's method. The bracket must
/// straddle the root: `f(lo)` and `f(hi)` of opposite sign.
pub fn brent_root<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, x_tol: f64) -> Result<f64> {
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(AllPassError::Numeric(format!(
            "root not bracketed on [{a}, {b}]"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.abs() > fc.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * x_tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Inverse quadratic interpolation / secant step.
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * xm * q0 * (q0 - r) - (b - a) * (r - 1.0)),
                    (q0 - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    Err(AllPassError::Numeric(
        "root finding exceeded the iteration limit".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| 3.0 * x * x, 0.0, 1.0, 1e-12).unwrap();
        assert!((q.value - 1.0).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity_converges() {
        // Integral of 1/sqrt(x) over (0,1) = 2.
        let q = integrate(|x| x.powf(-0.5), 0.0, 1.0, 1e-9).unwrap();
        assert!((q.value - 2.0).abs() < 1e-7, "value {}", q.value);
    }

    #[test]
    fn interior_kink_with_breakpoints() {
        let q = integrate_with_breaks(|x: f64| x.abs(), &[-1.0, 0.0, 2.0], 1e-12).unwrap();
        assert!((q.value - 2.5).abs() < 1e-12);
    }

    #[test]
    fn brent_finds_cube_root() {
        let r = brent_root(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn brent_rejects_bad_bracket() {
        assert!(brent_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }
}
