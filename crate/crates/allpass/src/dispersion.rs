//! Jaeckel's rank dispersion of the all-pass residuals.
//!
//! D(phi) = sum_t lambda(R_t(phi) / (n-p+1)) z_t(phi), where R_t is the rank
//! of z_t among the residuals. Equivalently, summing weights against the
//! order statistics: D(phi) = sum_t lambda(t / (n-p+1)) z_(t)(phi). D is
//! nonnegative, continuous, and vanishes exactly when all residuals are
//! equal, which makes it a dispersion measure the estimator can minimize.

use crate::error::Result;
use crate::residuals::{residuals, residuals_into, AllPassParams};
use crate::weights::WeightFunction;

/// Ranks of the entries in ascending order (1-based). Ties are broken by the
/// original index, so the result is always a permutation of 1..=len.
pub fn ranks(z: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..z.len()).collect();
    idx.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));
    let mut out = vec![0usize; z.len()];
    for (rank, &i) in idx.iter().enumerate() {
        out[i] = rank + 1;
    }
    out
}

/// Dispersion of a raw residual vector: sorts a copy and sums the order
/// statistics against lambda(t/(m+1)).
pub fn dispersion_of(z: &[f64], w: &WeightFunction) -> f64 {
    let m = z.len();
    if m == 0 {
        return 0.0;
    }
    let mut sorted = z.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let denom = (m + 1) as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(k, &v)| w.eval_raw((k + 1) as f64 / denom) * v)
        .sum()
}

/// The rank dispersion D(phi) of the residuals of `x` under `params`.
pub fn dispersion(params: &AllPassParams, x: &[f64], w: &WeightFunction) -> Result<f64> {
    let r = residuals(params, x)?;
    Ok(dispersion_of(r.values(), w))
}

/// Reusable dispersion evaluator for the optimizer: fixes the data, the
/// order and the weight, caches lambda(k/(m+1)) and reuses one scratch
/// buffer across evaluations. The caller guarantees causal coefficients.
pub(crate) struct DispersionEval<'a> {
    x: &'a [f64],
    lambda_at_rank: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> DispersionEval<'a> {
    pub fn new(x: &'a [f64], p: usize, w: &WeightFunction) -> Self {
        let m = x.len() - p;
        let denom = (m + 1) as f64;
        let lambda_at_rank = (1..=m).map(|k| w.eval_raw(k as f64 / denom)).collect();
        DispersionEval {
            x,
            lambda_at_rank,
            scratch: Vec::with_capacity(x.len()),
        }
    }

    pub fn eval(&mut self, phi: &[f64]) -> f64 {
        residuals_into(phi, self.x, &mut self.scratch);
        self.scratch.sort_unstable_by(f64::total_cmp);
        self.scratch
            .iter()
            .zip(&self.lambda_at_rank)
            .map(|(z, l)| z * l)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::AllPassError;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn wilcoxon() -> WeightFunction {
        WeightFunction::wilcoxon()
    }

    #[test]
    fn ranks_simple() {
        assert_eq!(ranks(&[-3.125, -3.25, -2.5]), vec![2, 1, 3]);
        assert_eq!(ranks(&[5.0]), vec![1]);
    }

    #[test]
    fn ranks_break_ties_by_index() {
        assert_eq!(ranks(&[1.0, 1.0, 0.0]), vec![2, 3, 1]);
    }

    #[test]
    fn dispersion_hand_computed() {
        let params = AllPassParams::new(vec![0.5]).unwrap();
        let d = dispersion(&params, &[1.0, 2.0, 3.0, 4.0], &wilcoxon()).unwrap();
        assert!((d - 0.1875).abs() < 1e-14, "{d}");
    }

    #[test]
    fn dispersion_rejects_noncausal() {
        let params = AllPassParams::new(vec![1.2]).unwrap();
        assert!(matches!(
            dispersion(&params, &[1.0, 2.0, 3.0], &wilcoxon()),
            Err(AllPassError::NonCausal(_))
        ));
    }

    #[test]
    fn zero_iff_equal_residuals() {
        let w = wilcoxon();
        assert!(dispersion_of(&[2.5; 7], &w).abs() < 1e-15);
        assert!(dispersion_of(&[1.0, 1.0, 1.0000001], &w) > 0.0);
    }

    #[test]
    fn rank_form_equals_order_statistic_form() {
        let w = WeightFunction::arctan(5.0).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for _ in 0..50 {
            let m = rng.random_range(1..40);
            let z: Vec<f64> = (0..m).map(|_| rng.random_range(-4.0..4.0)).collect();
            let denom = (m + 1) as f64;
            let by_ranks: f64 = ranks(&z)
                .iter()
                .zip(&z)
                .map(|(&r, &v)| w.eval(r as f64 / denom).unwrap() * v)
                .sum();
            assert!((by_ranks - dispersion_of(&z, &w)).abs() < 1e-12);
        }
    }

    /// All permutations of `items`, via Heap's algorithm.
    fn permutations(items: &[f64]) -> Vec<Vec<f64>> {
        fn heap(k: usize, arr: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
            if k <= 1 {
                out.push(arr.clone());
                return;
            }
            for i in 0..k {
                heap(k - 1, arr, out);
                if k.is_multiple_of(2) {
                    arr.swap(i, k - 1);
                } else {
                    arr.swap(0, k - 1);
                }
            }
        }
        let mut arr = items.to_vec();
        let mut out = Vec::new();
        heap(arr.len(), &mut arr, &mut out);
        out
    }

    #[test]
    fn dispersion_is_sup_over_permutations() {
        let w = WeightFunction::arctan(3.0).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..30 {
            let m = rng.random_range(2..=6);
            let z: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
            let denom = (m + 1) as f64;
            let sup = permutations(&z)
                .iter()
                .map(|perm| -> f64 {
                    perm.iter()
                        .enumerate()
                        .map(|(t, &v)| w.eval((t + 1) as f64 / denom).unwrap() * v)
                        .sum()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            let d = dispersion_of(&z, &w);
            assert!((d - sup).abs() < 1e-12, "{d} vs {sup}");
            assert!(d >= 0.0);
        }
    }

    #[test]
    fn location_shift_leaves_dispersion_unchanged() {
        // Odd weights sum to zero over the rank grid for both parities of m.
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for w in [wilcoxon(), WeightFunction::arctan(50.0).unwrap()] {
            for m in [6usize, 7] {
                let z: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
                let shifted: Vec<f64> = z.iter().map(|v| v + 13.7).collect();
                let a = dispersion_of(&z, &w);
                let b = dispersion_of(&shifted, &w);
                assert!((a - b).abs() < 1e-10, "{} m={m}: {a} vs {b}", w.name());
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn prop_nonnegative_and_forms_agree(
            z in proptest::collection::vec(-100.0f64..100.0, 1..60)
        ) {
            let w = WeightFunction::wilcoxon();
            let d = dispersion_of(&z, &w);
            proptest::prop_assert!(d >= 0.0);
            let denom = (z.len() + 1) as f64;
            let by_ranks: f64 = ranks(&z)
                .iter()
                .zip(&z)
                .map(|(&r, &v)| (r as f64 / denom - 0.5) * v)
                .sum();
            proptest::prop_assert!((by_ranks - d).abs() <= 1e-9 * d.abs().max(1.0));
        }
    }

    #[test]
    fn cached_evaluator_matches_public_path() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let x: Vec<f64> = (0..120).map(|_| rng.random_range(-2.0..2.0)).collect();
        let w = wilcoxon();
        let mut eval = DispersionEval::new(&x, 2, &w);
        for _ in 0..20 {
            let kappa = [rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9)];
            let params = crate::residuals::pacf_to_phi(&kappa).unwrap();
            let fast = eval.eval(params.coeffs());
            let slow = dispersion(&params, &x, &w).unwrap();
            assert!((fast - slow).abs() < 1e-12);
        }
    }
}
