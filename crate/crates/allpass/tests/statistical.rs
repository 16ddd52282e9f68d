//! Slower statistical properties of the order-selection machinery: the
//! calibration of the significance rule above the true order, and the
//! absence of underselection.

use allpass::estimation::FitOptions;
use allpass::noise::NoiseModel;
use allpass::order::{select_order, OrderSelection};
use allpass::residuals::AllPassParams;
use allpass::simulate::{replicate_rng, simulate_allpass_with_rng};
use allpass::weights::WeightFunction;

/// Above the true order, sqrt(n) phi_hat_p is asymptotically N(0, tau^2)
/// with the same tau^2 for every p > r, so testing the top coefficient at
/// the 1.96 level should reject about 5% of the time.
#[test]
fn rejection_rate_above_true_order_is_calibrated() {
    let params = AllPassParams::new(vec![0.5]).unwrap();
    let noise = NoiseModel::laplace(1.0).unwrap();
    let w = WeightFunction::wilcoxon();
    let replicates = 100;
    let n = 5000;
    let mut rejections = 0usize;
    for i in 0..replicates {
        let mut rng = replicate_rng(0x5CA1E, i as u64);
        let sim = simulate_allpass_with_rng(&params, &noise, n, &mut rng, None).unwrap();
        let opts = FitOptions::with_seed(4_000 + i as u64);
        let report = select_order(&sim.x, 2, &w, &opts).unwrap();
        // True order is 1; the order-2 record sits above it.
        if report.records[1].significant {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / replicates as f64;
    assert!(
        (0.01..=0.12).contains(&rate),
        "rejection rate {rate} over {replicates} replicates"
    );
}

#[test]
fn order_two_model_is_never_underselected() {
    let params = AllPassParams::new(vec![0.3, 0.4]).unwrap();
    let noise = NoiseModel::laplace(1.0).unwrap();
    let w = WeightFunction::wilcoxon();
    for i in 0..3u64 {
        let mut rng = replicate_rng(0x0DD2, i);
        let sim = simulate_allpass_with_rng(&params, &noise, 5000, &mut rng, None).unwrap();
        let opts = FitOptions::with_seed(5_000 + i);
        let report = select_order(&sim.x, 3, &w, &opts).unwrap();
        match report.selection {
            OrderSelection::Order(r) => assert!(r >= 2, "replicate {i} selected {r}"),
            OrderSelection::Undetermined => {}
        }
    }
}

/// With the maximum order at the true order, the top coefficient stays
/// significant and the minimum rule has no admissible order below it.
#[test]
fn selection_at_true_order_reports_undetermined() {
    let params = AllPassParams::new(vec![0.5]).unwrap();
    let noise = NoiseModel::laplace(1.0).unwrap();
    let w = WeightFunction::wilcoxon();
    let mut rng = replicate_rng(0xD0D0, 0);
    let sim = simulate_allpass_with_rng(&params, &noise, 3000, &mut rng, None).unwrap();
    let report = select_order(&sim.x, 1, &w, &FitOptions::with_seed(6)).unwrap();
    assert_eq!(report.selection, OrderSelection::Undetermined);
    assert_eq!(report.selected_or_max(), 1);
    assert!(report.records[0].significant);
}
