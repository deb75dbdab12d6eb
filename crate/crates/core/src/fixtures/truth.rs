//! Brute-force Monte Carlo references. Nothing here touches a ledger.

use crate::error::{invalid, Error, Result};
use crate::estimate::RandomVariableSource;
use crate::linalg::{gaussian, Vector};
use crate::oracle::GradientOracle;
use crate::rng::Rng;

pub const MIN_TRUTH_SAMPLES: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TruthTarget {
    /// Mean of the stochastic gradient.
    Mean,
    FunctionValue,
    /// `F_r(x)` for the given width.
    ConvolvedValue(f64),
    /// `grad F_r(x)`, estimated from blurred oracle draws.
    ConvolvedGradient(f64),
}

/// Plain Monte Carlo average with its per-coordinate standard error.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthEstimate {
    pub value: Vector,
    pub std_err: Vector,
}

impl TruthEstimate {
    pub fn scalar(&self) -> f64 {
        self.value[0]
    }
}

fn average(n: u64, d: usize, mut sample: impl FnMut() -> Result<Vector>) -> Result<TruthEstimate> {
    let mut sum = Vector::zeros(d);
    let mut sum_sq = Vector::zeros(d);
    for _ in 0..n {
        let v = sample()?;
        sum_sq += v.component_mul(&v);
        sum += v;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean.component_mul(&mean)).map(|v| v.max(0.0));
    Ok(TruthEstimate {
        std_err: (var / nf).map(f64::sqrt),
        value: mean,
    })
}

pub fn offline_truth(
    target: TruthTarget,
    oracle: &dyn GradientOracle,
    x: &Vector,
    n_samples: u64,
    rng: &mut Rng,
) -> Result<TruthEstimate> {
    if n_samples < MIN_TRUTH_SAMPLES {
        return Err(invalid(format!("offline truth needs at least {MIN_TRUTH_SAMPLES} samples")));
    }
    let d = oracle.dim();
    match target {
        TruthTarget::Mean => average(n_samples, d, || Ok(oracle.draw(x, rng))),
        TruthTarget::FunctionValue => average(n_samples, 1, || {
            oracle
                .draw_value(x, rng)
                .map(|v| Vector::from_element(1, v))
                .ok_or(Error::Unsupported("function value"))
        }),
        TruthTarget::ConvolvedValue(r) => average(n_samples, 1, || {
            let y = gaussian(d, r, rng);
            oracle
                .value(&(x - y))
                .map(|v| Vector::from_element(1, v))
                .ok_or(Error::Unsupported("function value"))
        }),
        TruthTarget::ConvolvedGradient(r) => average(n_samples, d, || {
            let y = gaussian(d, r, rng);
            Ok(oracle.draw(&(x - y), rng))
        }),
    }
}

/// Mean of a generic source, for instrumentation of derived sources.
pub fn source_truth(src: &dyn RandomVariableSource, n_samples: u64, rng: &mut Rng) -> Result<TruthEstimate> {
    if n_samples < MIN_TRUTH_SAMPLES {
        return Err(invalid(format!("offline truth needs at least {MIN_TRUTH_SAMPLES} samples")));
    }
    average(n_samples, src.dim(), || Ok(src.draw(rng)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::ConstantSource;
    use crate::fixtures::oracles::LinearOracle;

    #[test]
    fn constant_source_has_zero_error() {
        let c = Vector::from_vec(vec![1.5, -2.0]);
        let t = source_truth(&ConstantSource::new(c.clone(), 0.0), 1000, &mut Rng::new(0, 0)).unwrap();
        assert_eq!(t.value, c);
        assert_eq!(t.std_err, Vector::zeros(2));
    }

    #[test]
    fn convolution_of_affine_is_exact() {
        let f = LinearOracle {
            c: Vector::from_vec(vec![1.0, 2.0]),
            noise: 0.0,
        };
        let x = Vector::from_vec(vec![0.3, -0.7]);
        let t = offline_truth(TruthTarget::ConvolvedValue(0.5), &f, &x, 100_000, &mut Rng::new(1, 0)).unwrap();
        assert!((t.scalar() - f.value(&x).unwrap()).abs() < 5.0 * t.std_err[0]);
    }

    #[test]
    fn too_few_samples_is_an_error() {
        let f = LinearOracle {
            c: Vector::from_vec(vec![1.0]),
            noise: 0.0,
        };
        assert!(offline_truth(TruthTarget::Mean, &f, &Vector::zeros(1), 10, &mut Rng::new(0, 0)).is_err());
    }
}
