//! Outlier-rejecting wrapper around the biased estimator.
//!
//! The wrapper compares the estimator's output against one fresh classical
//! draw and, when they are further apart than a threshold `D`, replaces the
//! output by another independent draw. The rare failures of the estimator
//! then cost at most a bounded second moment.

use crate::error::Result;
use crate::ledger::QueryLedger;
use crate::linalg::Vector;
use crate::rng::Rng;

use super::backend::{estimate_charge, estimate_mean, MeanEstimationBackend};
use super::source::RandomVariableSource;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WrapperParams {
    /// Target error passed to the estimator.
    pub inner_sigma: f64,
    pub delta: f64,
    /// Acceptance threshold on `|X1 - X2|`.
    pub threshold: f64,
}

impl WrapperParams {
    /// `delta = s^6 / L^6`, `D = s + L^3 / s^2` for estimator error `s`.
    pub fn for_inner_error(s: f64, l: f64) -> Self {
        let delta = (s / l).powi(6).clamp(f64::MIN_POSITIVE, 1.0);
        Self {
            inner_sigma: s,
            delta,
            threshold: s + l.powi(3) / (s * s),
        }
    }

    /// Parameters used by [`qme_plus`] for an overall target `sigma_hat`:
    /// estimator error `sigma_hat / 4`, i.e. `delta = sigma_hat^6 / (4L)^6`
    /// and `D = sigma_hat / 4 + 16 L^3 / sigma_hat^2`.
    pub fn for_target(sigma_hat: f64, l: f64) -> Self {
        Self::for_inner_error(sigma_hat / 4.0, l)
    }
}

fn classical_draw(src: &dyn RandomVariableSource, ledger: &mut QueryLedger, rng: &mut Rng) -> Vector {
    // a classical sample is one measurement of the sampling oracle
    let calls = src.oracle_calls_per_draw();
    ledger.record_samples(calls);
    ledger.charge(calls);
    src.draw(rng)
}

/// `X1` if `|X1 - X2| <= D`, otherwise a fresh draw `X3`.
pub fn wrapped_estimate(
    src: &dyn RandomVariableSource,
    params: &WrapperParams,
    backend: &MeanEstimationBackend,
    ledger: &mut QueryLedger,
    rng: &mut Rng,
) -> Result<Vector> {
    let x1 = estimate_mean(backend, src, params.inner_sigma, params.delta, ledger, rng)?;
    let x2 = classical_draw(src, ledger, rng);
    if (&x1 - &x2).norm() <= params.threshold {
        Ok(x1)
    } else {
        Ok(classical_draw(src, ledger, rng))
    }
}

/// Estimate with `E|result - mu|^2 <= sigma_hat^2`.
///
/// When `sigma_hat` exceeds the source's bound `L` a single classical draw
/// already has variance at most `L^2 <= sigma_hat^2` and is returned as is.
pub fn qme_plus(
    src: &dyn RandomVariableSource,
    sigma_hat: f64,
    backend: &MeanEstimationBackend,
    ledger: &mut QueryLedger,
    rng: &mut Rng,
) -> Result<Vector> {
    let l = src.second_moment_bound();
    if sigma_hat >= l {
        return Ok(classical_draw(src, ledger, rng));
    }
    wrapped_estimate(src, &WrapperParams::for_target(sigma_hat, l), backend, ledger, rng)
}

/// Charge of [`qme_plus`] excluding the data-dependent replacement draw.
pub fn qme_plus_charge(src: &dyn RandomVariableSource, sigma_hat: f64, backend: &MeanEstimationBackend) -> Result<f64> {
    let l = src.second_moment_bound();
    let calls = src.oracle_calls_per_draw() as f64;
    if sigma_hat >= l {
        return Ok(calls);
    }
    let p = WrapperParams::for_target(sigma_hat, l);
    Ok(estimate_charge(backend, src, p.inner_sigma, p.delta)? + calls)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::source::{ConstantSource, DiscreteSource};

    #[test]
    fn parameter_formulas() {
        let p = WrapperParams::for_target(0.4, 1.0);
        assert!((p.delta - 1e-6).abs() < 1e-18);
        assert!((p.threshold - 100.1).abs() < 1e-9);
        assert!((p.inner_sigma - 0.1).abs() < 1e-15);
    }

    #[test]
    fn constant_source_passes_through() {
        let c = Vector::from_vec(vec![2.0, -1.0, 0.5]);
        let mut rng = Rng::new(0, 0);
        let mut ledger = QueryLedger::new();
        let src = ConstantSource::new(c.clone(), 0.0);
        assert_eq!(
            qme_plus(&src, 0.3, &MeanEstimationBackend::sample_based(), &mut ledger, &mut rng).unwrap(),
            c
        );
        let loose = ConstantSource::new(c.clone(), 1.0);
        assert_eq!(
            qme_plus(&loose, 0.3, &MeanEstimationBackend::sample_based(), &mut ledger, &mut rng).unwrap(),
            c
        );
    }

    #[test]
    fn oversized_target_falls_back_to_one_draw() {
        let src = DiscreteSource::signed_axes(2);
        let mut rng = Rng::new(0, 1);
        let mut ledger = QueryLedger::new();
        let v = qme_plus(&src, 2.0, &MeanEstimationBackend::honest(), &mut ledger, &mut rng).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-15);
        assert_eq!(ledger.classical_samples(), 1);
        assert_eq!(ledger.quantum_queries(), 1);
    }

    #[test]
    fn rejected_estimates_are_replaced() {
        let src = DiscreteSource::signed_axes(2);
        let mut rng = Rng::new(9, 9);
        let mut ledger = QueryLedger::new();
        // every estimator call fails far outside the threshold
        let backend = MeanEstimationBackend::honest().with_failures(Some(1e6));
        let params = WrapperParams {
            inner_sigma: 0.5,
            delta: 1.0,
            threshold: 3.0,
        };
        for _ in 0..100 {
            let z = wrapped_estimate(&src, &params, &backend, &mut ledger, &mut rng).unwrap();
            assert!((z.norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(ledger.classical_samples(), 200);
    }
}
