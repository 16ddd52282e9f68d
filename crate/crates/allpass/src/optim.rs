//! Derivative-free simplex minimization (Nelder-Mead).
//!
//! The dispersion objective is piecewise linear in the residuals, so
//! gradient-based methods are a poor fit; a simplex search with tolerance
//! stopping is used for the local refinements. Objective values of +inf are
//! legal and act as a barrier (reflections into forbidden regions are
//! rejected by the ordinary comparison logic).

/// Stopping rules and budget for one simplex run.
#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Stop when the spread of objective values over the simplex is below
    /// this absolute tolerance.
    pub f_tol: f64,
    /// Stop when every vertex is within this distance of the best vertex.
    pub x_tol: f64,
    pub max_evals: usize,
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

const ALPHA: f64 = 1.0; // reflection
const GAMMA: f64 = 2.0; // expansion
const RHO: f64 = 0.5; // contraction
const SIGMA: f64 = 0.5; // shrink

/// Minimize `f` starting from `start`, with per-coordinate initial steps.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    steps: &[f64],
    opts: &SimplexOptions,
) -> SimplexResult {
    let dim = start.len();
    assert_eq!(steps.len(), dim, "one initial step per coordinate");
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(start.to_vec());
    for i in 0..dim {
        let mut v = start.to_vec();
        v[i] += steps[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();

    loop {
        // Order so that values[order[0]] is best.
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        let spread = values[worst] - values[best];
        let diameter = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let converged = (spread.is_nan() || spread <= opts.f_tol) && diameter <= opts.x_tol;
        if converged || evals >= opts.max_evals {
            return SimplexResult {
                x: simplex[best].clone(),
                value: values[best],
                evals,
                converged,
            };
        }

        // Centroid of all vertices except the worst.
        let mut centroid = vec![0.0; dim];
        for (i, v) in simplex.iter().enumerate() {
            if i == worst {
                continue;
            }
            for (c, a) in centroid.iter_mut().zip(v) {
                *c += a;
            }
        }
        centroid.iter_mut().for_each(|c| *c /= dim as f64);

        let blend = |from: &[f64], coeff: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(from)
                .map(|(c, w)| c + coeff * (c - w))
                .collect()
        };

        let reflected = blend(&simplex[worst], ALPHA);
        let f_reflected = eval(&reflected, &mut evals);

        if f_reflected < values[best] {
            let expanded = blend(&simplex[worst], GAMMA);
            let f_expanded = eval(&expanded, &mut evals);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }

        // Contraction, outside or inside depending on the reflection value.
        let (contracted, f_contracted) = if f_reflected < values[worst] {
            let c = blend(&simplex[worst], ALPHA * RHO);
            let fc = eval(&c, &mut evals);
            (c, fc)
        } else {
            let c = blend(&simplex[worst], -RHO);
            let fc = eval(&c, &mut evals);
            (c, fc)
        };
        if f_contracted < f_reflected.min(values[worst]) {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }

        // Shrink everything toward the best vertex.
        let anchor = simplex[best].clone();
        for (i, v) in simplex.iter_mut().enumerate() {
            if i == best {
                continue;
            }
            for (a, b) in v.iter_mut().zip(&anchor) {
                *a = b + SIGMA * (*a - b);
            }
            values[i] = eval(v, &mut evals);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(max_evals: usize) -> SimplexOptions {
        SimplexOptions {
            f_tol: 1e-12,
            x_tol: 1e-9,
            max_evals,
        }
    }

    #[test]
    fn quadratic_bowl() {
        let r = nelder_mead(
            |x| (x[0] - 1.5).powi(2) + 3.0 * (x[1] + 0.5).powi(2),
            &[0.0, 0.0],
            &[0.1, 0.1],
            &opts(2000),
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.5).abs() < 1e-6);
        assert!((r.x[1] + 0.5).abs() < 1e-6);
    }

    #[test]
    fn piecewise_linear_objective() {
        let r = nelder_mead(
            |x| (x[0] - 0.3).abs() + 2.0 * (x[1] - 0.7).abs(),
            &[0.0, 0.0],
            &[0.2, 0.2],
            &opts(4000),
        );
        assert!((r.x[0] - 0.3).abs() < 1e-6, "{:?}", r.x);
        assert!((r.x[1] - 0.7).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn rosenbrock() {
        let r = nelder_mead(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &[0.1, 0.1],
            &opts(4000),
        );
        assert!((r.x[0] - 1.0).abs() < 1e-4, "{:?}", r.x);
        assert!((r.x[1] - 1.0).abs() < 1e-4, "{:?}", r.x);
    }

    #[test]
    fn infinite_barrier_is_respected() {
        let r = nelder_mead(
            |x| {
                if x[0] >= 1.0 {
                    f64::INFINITY
                } else {
                    (x[0] - 3.0).powi(2)
                }
            },
            &[0.0],
            &[0.2],
            &opts(2000),
        );
        assert!(r.x[0] < 1.0);
        assert!(r.x[0] > 0.999, "{:?}", r.x);
    }

    #[test]
    fn never_returns_worse_than_the_start() {
        // Refinement is monotone: the terminal value cannot exceed the
        // objective at the starting point.
        let f = |x: &[f64]| (x[0].sin() * 3.0).abs() + 0.1 * (x[1] - 4.0).abs() + x[0] * 0.01;
        for i in 0..25 {
            let start = [i as f64 * 0.7 - 8.0, -(i as f64) * 0.3];
            let r = nelder_mead(f, &start, &[0.25, 0.25], &opts(600));
            assert!(r.value <= f(&start) + 1e-15, "start {start:?}");
        }
    }

    #[test]
    fn respects_eval_budget() {
        let mut count = 0;
        let r = nelder_mead(
            |x| {
                count += 1;
                x[0].sin() + x[1].cos()
            },
            &[0.0, 0.0],
            &[0.5, 0.5],
            &opts(50),
        );
        assert!(r.evals <= 52); // initial simplex plus a final iteration
        assert_eq!(count, r.evals);
    }
}
