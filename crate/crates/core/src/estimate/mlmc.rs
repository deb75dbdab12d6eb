//! Multilevel de-biasing of the wrapped estimator.

use rand::RngCore;

use crate::error::{invalid, Result};
use crate::ledger::QueryLedger;
use crate::linalg::Vector;
use crate::rng::Rng;

use super::backend::MeanEstimationBackend;
use super::qme::{qme_plus, qme_plus_charge};
use super::source::RandomVariableSource;

/// `J` with `Pr[J = j] = 2^-j` on `j = 1, 2, ...`, without truncation.
pub fn sample_level(rng: &mut Rng) -> u32 {
    let mut j = 1;
    loop {
        let bits = rng.next_u64();
        if bits != 0 {
            return j + bits.trailing_zeros();
        }
        j += 64;
    }
}

/// Target error of level `j`: `2^(-3j/4) sigma_hat / 10`.
pub fn level_target(sigma_hat: f64, j: u32) -> f64 {
    (-0.75 * j as f64).exp2() * sigma_hat / 10.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlmcDraw {
    pub estimate: Vector,
    pub level: u32,
}

/// `mu_0 + 2^J (mu_J - mu_{J-1})`, unbiased with `E|result - mu|^2 <= sigma_hat^2`.
pub fn mlmc_variance_reduce(
    src: &dyn RandomVariableSource,
    sigma_hat: f64,
    backend: &MeanEstimationBackend,
    ledger: &mut QueryLedger,
    rng: &mut Rng,
) -> Result<Vector> {
    mlmc_detailed(src, sigma_hat, backend, ledger, rng).map(|m| m.estimate)
}

pub fn mlmc_detailed(
    src: &dyn RandomVariableSource,
    sigma_hat: f64,
    backend: &MeanEstimationBackend,
    ledger: &mut QueryLedger,
    rng: &mut Rng,
) -> Result<MlmcDraw> {
    if !(sigma_hat > 0.0) || !sigma_hat.is_finite() {
        return Err(invalid(format!("sigma_hat must be positive, got {sigma_hat}")));
    }
    let base = qme_plus(src, level_target(sigma_hat, 0), backend, ledger, rng)?;
    let level = sample_level(rng);
    let fine = qme_plus(src, level_target(sigma_hat, level), backend, ledger, rng)?;
    let coarse = qme_plus(src, level_target(sigma_hat, level - 1), backend, ledger, rng)?;
    let realized = qme_plus_charge(src, level_target(sigma_hat, level), backend)?
        + qme_plus_charge(src, level_target(sigma_hat, level - 1), backend)?;
    ledger.compensate(expected_level_charge(src, sigma_hat, backend)? - realized);
    let weight = (level as f64).exp2();
    Ok(MlmcDraw {
        estimate: base + (fine - coarse) * weight,
        level,
    })
}

/// `E_J[c(J) + c(J-1)]` for the fixed part `c` of the level charges.
fn expected_level_charge(src: &dyn RandomVariableSource, sigma_hat: f64, backend: &MeanEstimationBackend) -> Result<f64> {
    let mut total = 0.0;
    let mut prev = qme_plus_charge(src, level_target(sigma_hat, 0), backend)?;
    for j in 1..=1000u32 {
        let cur = qme_plus_charge(src, level_target(sigma_hat, j), backend)?;
        let term = (-(j as f64)).exp2() * (cur + prev);
        total += term;
        if j > 40 && term < 1e-15 * total {
            break;
        }
        prev = cur;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::source::{ConstantSource, DiscreteSource};

    #[test]
    fn level_law_is_geometric() {
        let mut rng = Rng::new(3, 0);
        let n = 200_000;
        let mut counts = [0u64; 8];
        for _ in 0..n {
            let j = sample_level(&mut rng) as usize;
            assert!(j >= 1);
            if j <= 7 {
                counts[j] += 1;
            }
        }
        for (j, &c) in counts.iter().enumerate().skip(1) {
            let p = (-(j as f64)).exp2();
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((c as f64 / n as f64 - p).abs() < 5.0 * se, "level {j}");
        }
    }

    #[test]
    fn level_targets() {
        assert!((level_target(1.0, 0) - 0.1).abs() < 1e-15);
        assert!((level_target(1.0, 4) - 0.0125).abs() < 1e-15);
    }

    #[test]
    fn constant_source_is_fixed_point() {
        let c = Vector::from_vec(vec![1.0, -2.0]);
        let src = ConstantSource::new(c.clone(), 0.0);
        let mut rng = Rng::new(0, 0);
        let mut ledger = QueryLedger::new();
        for _ in 0..50 {
            let out = mlmc_variance_reduce(&src, 0.3, &MeanEstimationBackend::honest(), &mut ledger, &mut rng)
                .unwrap();
            assert_eq!(out, c);
        }
    }

    #[test]
    fn contract_mlmc_is_unbiased() {
        let src = DiscreteSource::signed_axes(2);
        let backend = MeanEstimationBackend::adversarial();
        let mut rng = Rng::new(5, 5);
        let mut ledger = QueryLedger::new();
        let n = 20_000;
        let sigma = 0.3;
        let mut acc = Vector::zeros(2);
        let mut m2 = 0.0;
        for _ in 0..n {
            let v = mlmc_variance_reduce(&src, sigma, &backend, &mut ledger, &mut rng).unwrap();
            m2 += v.norm_squared();
            acc += v;
        }
        let mean = acc / n as f64;
        assert!(mean.norm() < 5.0 * sigma / (n as f64).sqrt(), "{}", mean.norm());
        assert!(m2 / (n as f64) <= 1.2 * sigma * sigma);
    }
}
