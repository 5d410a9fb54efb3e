//! Shared estimation step of the trade-off and topology experiments.

use std::ops::Range;

use super::table::{ResultRow, ResultTable};
use crate::adversary::AnalyticPrivacy;
use crate::error::Result;
use crate::info::{knn_mi_with_error, normalize, utility, KnnConfig, MIEstimate, SampleMatrix};

/// Sub-samples used for estimator standard errors.
pub const BATCHES: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Estimates {
    pub utility: MIEstimate,
    pub privacy: MIEstimate,
    pub lower_bound: MIEstimate,
}

/// Column layout: `[s_i, view…, lower-bound statistic, y, ŷ_i]`.
pub(crate) fn estimate(samples: &SampleMatrix, view: Range<usize>, cfg: &KnnConfig) -> Result<Estimates> {
    let lb = view.end;
    let (y, yhat) = (lb + 1, lb + 2);
    let batches = if samples.trials() / BATCHES > 10 * cfg.k { BATCHES } else { 1 };
    let view_cols: Vec<usize> = view.collect();
    let privacy = knn_mi_with_error(samples, &[0], &view_cols, cfg, batches)?;
    let lower_bound = knn_mi_with_error(samples, &[0], &[lb], cfg, batches)?;
    let full = utility(&samples.column(y), &samples.column(yhat), cfg)?;
    let utility = if full.is_infinite() { full } else { knn_mi_with_error(samples, &[y], &[yhat], cfg, batches)? };
    Ok(Estimates { utility, privacy, lower_bound })
}

pub(crate) struct RowContext<'a> {
    pub experiment: &'a str,
    pub mechanism: &'a str,
    pub sigma_sq: f64,
    pub node: usize,
    pub seed: u64,
}

pub(crate) fn push_rows(table: &mut ResultTable, ctx: &RowContext<'_>, analytic: &AnalyticPrivacy, est: &Estimates) {
    let mut push = |metric: String, value: f64, method: &str| {
        table.push(ResultRow {
            experiment: ctx.experiment.into(),
            mechanism: ctx.mechanism.into(),
            sigma_sq: Some(ctx.sigma_sq),
            metric,
            node: Some(ctx.node),
            t: None,
            value,
            method: method.into(),
            seed: ctx.seed,
        })
    };
    for (name, exact, e) in [
        ("u", analytic.utility_bits, &est.utility),
        ("rho", analytic.privacy_bits, &est.privacy),
        ("rho_min", analytic.lower_bound_bits, &est.lower_bound),
    ] {
        push(format!("{name}_bits"), exact, "analytic");
        push(format!("{name}_nmi"), normalize(exact), "analytic");
        push(format!("{name}_bits"), e.value_bits, "knn");
        push(format!("{name}_nmi"), e.nmi, "knn");
        if let Some(se) = e.nmi_std_error() {
            push(format!("{name}_nmi_se"), se, "knn");
        }
    }
}
