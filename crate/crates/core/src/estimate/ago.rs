//! Approximate gradient oracle: high-probability accuracy from repeated
//! unbiased estimates by a consensus vote.

use crate::error::{invalid, Result};
use crate::ledger::QueryLedger;
use crate::linalg::Vector;
use crate::rng::Rng;

use super::backend::{consensus_index, MeanEstimationBackend};
use super::mlmc::mlmc_variance_reduce;
use super::source::RandomVariableSource;

#[derive(Clone, Debug, PartialEq)]
pub struct AgoOutput {
    pub estimate: Vector,
    /// No estimate was close to two thirds of the others; the medoid was returned.
    pub degraded: bool,
}

/// `ceil(log2(1/xi)) + 10`.
pub fn ago_group_count(xi: f64) -> usize {
    (1.0 / xi).log2().ceil().max(0.0) as usize + 10
}

pub fn approx_gradient(
    src: &dyn RandomVariableSource,
    delta_err: f64,
    xi: f64,
    backend: &MeanEstimationBackend,
    ledger: &mut QueryLedger,
    rng: &mut Rng,
) -> Result<AgoOutput> {
    if !(delta_err > 0.0) || !delta_err.is_finite() {
        return Err(invalid(format!("delta_err must be positive, got {delta_err}")));
    }
    if !(xi > 0.0 && xi < 1.0) {
        return Err(invalid(format!("xi must lie in (0, 1), got {xi}")));
    }
    let k = ago_group_count(xi);
    let sigma_hat = delta_err / 4.0;
    let estimates = (0..k)
        .map(|_| mlmc_variance_reduce(src, sigma_hat, backend, ledger, rng))
        .collect::<Result<Vec<_>>>()?;
    let (i, ok) = consensus_index(&estimates, delta_err / 2.0);
    Ok(AgoOutput {
        estimate: estimates[i].clone(),
        degraded: !ok,
    })
}
