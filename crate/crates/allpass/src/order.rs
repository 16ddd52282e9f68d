//! All-pass model order selection.
//!
//! Fit orders 1..=P, take tau from the order-P fit, and choose the smallest
//! order beyond which every fitted top coefficient is insignificant against
//! the threshold 1.96 tau / sqrt(n). This mirrors using the partial
//! autocorrelation function to pick an AR order: for any fitted order p
//! above the true order, sqrt(n) phi_hat_p is asymptotically N(0, tau^2).

use crate::error::{AllPassError, Result};
use crate::estimation::{fit, FitOptions, FitResult};
use crate::weights::WeightFunction;
use rayon::prelude::*;

/// Evidence for one candidate order.
#[derive(Debug, Clone, Copy)]
pub struct OrderRecord {
    pub p: usize,
    /// The pth coefficient of the order-p fit.
    pub top_coeff: f64,
    /// 1.96 tau_hat / sqrt(n), shared across orders.
    pub threshold: f64,
    pub significant: bool,
}

/// Outcome of the minimum rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderSelection {
    Order(usize),
    /// The top coefficient at the largest order tried is itself significant,
    /// so no order up to P-1 satisfies the rule; increase P.
    Undetermined,
}

#[derive(Debug, Clone)]
pub struct OrderReport {
    pub max_order: usize,
    pub records: Vec<OrderRecord>,
    /// tau from the order-P fit, used for every threshold.
    pub tau_hat: f64,
    pub selection: OrderSelection,
    /// The underlying fits, index p-1 holds the order-p fit.
    pub fits: Vec<FitResult>,
    pub n: usize,
}

impl OrderReport {
    /// The selected order, counting an undetermined outcome as P. Useful for
    /// frequency tables over replicates.
    pub fn selected_or_max(&self) -> usize {
        match self.selection {
            OrderSelection::Order(r) => r,
            OrderSelection::Undetermined => self.max_order,
        }
    }
}

/// Fit orders 1..=max_order and apply the minimum rule. Each order is fitted
/// independently with the full multi-start protocol (its own seed stream; no
/// warm starts), so one order's optimizer failure cannot bias its neighbors.
pub fn select_order(
    x: &[f64],
    max_order: usize,
    w: &WeightFunction,
    opts: &FitOptions,
) -> Result<OrderReport> {
    if max_order == 0 {
        return Err(AllPassError::Input("max order must be at least 1".into()));
    }
    let n = x.len();
    if n <= 4 * max_order {
        return Err(AllPassError::Input(format!(
            "series length {n} must exceed 4P = {}",
            4 * max_order
        )));
    }

    let fits: Vec<FitResult> = (1..=max_order)
        .into_par_iter()
        .map(|p| {
            let order_opts = FitOptions {
                seed: opts.seed.wrapping_add(p as u64),
                ..opts.clone()
            };
            fit(x, p, w, &order_opts)
                .map_err(|e| AllPassError::EstimationFailure(format!("order {p} fit failed: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let tau_hat = fits[max_order - 1].tau_hat.ok_or_else(|| {
        AllPassError::EstimationFailure(
            "order-P fit has no usable tau (in-sample A5 violation); cannot threshold".into(),
        )
    })?;
    let threshold = 1.96 * tau_hat / (n as f64).sqrt();

    let records: Vec<OrderRecord> = fits
        .iter()
        .map(|f| {
            let top = f.phi_hat.coeffs()[f.p - 1];
            OrderRecord {
                p: f.p,
                top_coeff: top,
                threshold,
                significant: top.abs() >= threshold,
            }
        })
        .collect();

    // Smallest p in 0..P such that every order above p is insignificant.
    // p = P would hold vacuously; report that case as undetermined instead.
    let selection = (0..max_order)
        .find(|&p| records[p..].iter().all(|r| !r.significant))
        .map_or(OrderSelection::Undetermined, OrderSelection::Order);

    Ok(OrderReport {
        max_order,
        records,
        tau_hat,
        selection,
        fits,
        n,
    })
}
