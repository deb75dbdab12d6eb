//! Models of the biased quantum mean estimator.
//!
//! The estimator is specified only by its contract: given a target error
//! `sigma_hat <= L` and failure probability `delta`, it returns an estimate
//! within `sigma_hat` of the mean with probability at least `1 - delta`, at a
//! cost of `~ L sqrt(d) log(1/delta) / sigma_hat` queries. Two realizations
//! are provided. The contract backend perturbs the exact mean of a fixture;
//! the sample-based backend runs a classical groups-of-means selection that
//! meets the same error guarantee, while the ledger is still charged with
//! the quantum cost.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ledger::{CostModel, QueryLedger};
use crate::linalg::{gaussian, unit_vector, Vector};
use crate::rng::Rng;

use super::source::RandomVariableSource;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoisePolicy {
    /// Gaussian error with `E|eta|^2 = sigma_hat^2 / 4`, clipped to `|eta| <= sigma_hat`.
    HonestGaussianClipped,
    /// `|eta| = sigma_hat` exactly, uniform direction.
    AdversarialBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractConfig {
    pub policy: NoisePolicy,
    pub failure_injection: bool,
    /// Distance of an injected failure from the mean; defaults to `10 L^3 / sigma_hat^2`.
    pub failure_radius: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BackendMode {
    Contract(ContractConfig),
    SampleBased,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimationBackend {
    pub mode: BackendMode,
    pub cost: CostModel,
}

impl MeanEstimationBackend {
    pub fn contract(policy: NoisePolicy) -> Self {
        Self {
            mode: BackendMode::Contract(ContractConfig {
                policy,
                failure_injection: false,
                failure_radius: None,
            }),
            cost: CostModel::default(),
        }
    }

    pub fn honest() -> Self {
        Self::contract(NoisePolicy::HonestGaussianClipped)
    }

    pub fn adversarial() -> Self {
        Self::contract(NoisePolicy::AdversarialBoundary)
    }

    pub fn sample_based() -> Self {
        Self {
            mode: BackendMode::SampleBased,
            cost: CostModel::default(),
        }
    }

    /// Enable failure injection (contract mode only; no-op otherwise).
    pub fn with_failures(mut self, radius: Option<f64>) -> Self {
        if let BackendMode::Contract(ref mut c) = self.mode {
            c.failure_injection = true;
            c.failure_radius = radius;
        }
        self
    }

    pub fn with_cost(mut self, cost: CostModel) -> Self {
        self.cost = cost;
        self
    }
}

/// Number of groups and draws per group used by the sample-based backend.
pub fn group_plan(l_eff: f64, sigma_hat: f64, delta: f64) -> (usize, u64) {
    let k = (1.0 / delta).log2().ceil().max(0.0) as usize + 10;
    let n = (16.0 * l_eff * l_eff / (sigma_hat * sigma_hat)).ceil().max(1.0) as u64;
    (k, n)
}

/// Index of a point within `radius` of at least `2k/3` of the points,
/// itself included.
/// Falls back to the medoid (minimum total distance) and reports `false`
/// when no point qualifies.
pub fn consensus_index(points: &[Vector], radius: f64) -> (usize, bool) {
    let k = points.len();
    for (i, p) in points.iter().enumerate() {
        let close = points
            .iter()
            .filter(|q| (p - *q).norm() <= radius)
            .count();
        if 3 * close >= 2 * k {
            return (i, true);
        }
    }
    let medoid = (0..k)
        .map(|i| {
            let s: f64 = points.iter().map(|q| (&points[i] - q).norm()).sum();
            (i, s)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    (medoid, false)
}

/// One contract invocation; draws that need several base-oracle calls
/// multiply the charge.
fn charge_cost(
    ledger: &mut QueryLedger,
    model: &CostModel,
    bound: f64,
    sigma_hat: f64,
    delta: f64,
    dim: usize,
    calls: u64,
) -> Result<u64> {
    let q = model.cost(bound, sigma_hat, delta, dim)?.saturating_mul(calls);
    ledger.charge(q);
    Ok(q)
}

/// Queries charged by [`estimate_mean`] for these inputs, as a float.
pub fn estimate_charge(
    backend: &MeanEstimationBackend,
    src: &dyn RandomVariableSource,
    sigma_hat: f64,
    delta: f64,
) -> Result<f64> {
    let bound = src.second_moment_bound();
    if bound == 0.0 {
        return Ok(0.0);
    }
    let q = backend.cost.cost_real(bound, sigma_hat, delta, src.dim())?;
    Ok(q * src.oracle_calls_per_draw() as f64)
}

pub fn estimate_mean(
    backend: &MeanEstimationBackend,
    src: &dyn RandomVariableSource,
    sigma_hat: f64,
    delta: f64,
    ledger: &mut QueryLedger,
    rng: &mut Rng,
) -> Result<Vector> {
    let bound = src.second_moment_bound();
    if !(sigma_hat > 0.0) {
        return Err(invalid(format!("sigma_hat must be positive, got {sigma_hat}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid(format!("delta must lie in (0, 1], got {delta}")));
    }
    let calls = src.oracle_calls_per_draw();
    if bound == 0.0 {
        // a point mass is revealed by a single draw; the cost formula gives 0
        ledger.record_samples(calls);
        return Ok(src.draw(rng));
    }
    if sigma_hat > bound {
        return Err(Error::ContractViolation { sigma_hat, bound });
    }
    let d = src.dim();

    match backend.mode {
        BackendMode::Contract(cfg) => {
            let mu = src.exact_mean().ok_or(Error::Unsupported("exact mean"))?;
            charge_cost(ledger, &backend.cost, bound, sigma_hat, delta, d, calls)?;
            if cfg.failure_injection && rng.uniform() < delta {
                let rho = cfg
                    .failure_radius
                    .unwrap_or(10.0 * bound.powi(3) / (sigma_hat * sigma_hat));
                return Ok(mu + unit_vector(d, rng) * rho);
            }
            let eta = match cfg.policy {
                NoisePolicy::HonestGaussianClipped => {
                    let z = gaussian(d, 0.5 * sigma_hat / (d as f64).sqrt(), rng);
                    let n = z.norm();
                    if n > sigma_hat {
                        z * (sigma_hat / n)
                    } else {
                        z
                    }
                }
                NoisePolicy::AdversarialBoundary => unit_vector(d, rng) * sigma_hat,
            };
            Ok(mu + eta)
        }
        BackendMode::SampleBased => {
            charge_cost(ledger, &backend.cost, bound, sigma_hat, delta, d, calls)?;
            let (k, n) = group_plan(bound, sigma_hat, delta);
            let means: Vec<Vector> = (0..k).map(|_| src.draw_mean(n, rng)).collect();
            ledger.record_samples(k as u64 * n * calls);
            let (i, _) = consensus_index(&means, sigma_hat / 2.0);
            Ok(means[i].clone())
        }
    }
}
