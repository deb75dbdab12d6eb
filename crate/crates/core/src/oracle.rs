//! Stochastic gradient oracles.
//!
//! A [`GradientOracle`] is a seeded sampler of stochastic gradients `g(x)`
//! with `E g(x) = grad f(x)`. Fixtures additionally expose the exact mean
//! and, when the noise is indexed by an explicit seed, a shared-seed channel
//! `g(x, omega)` whose values at two points are correlated.

use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::ledger::QueryLedger;
use crate::linalg::{check_point, Vector};
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleBounds {
    /// Second-moment bound `E|g(x)|^2 <= L^2`.
    pub lipschitz: f64,
    /// `E|g(x) - grad f(x)|^2 <= sigma^2`.
    pub variance: f64,
    /// Mean-squared smoothness `E|g(x,w) - g(y,w)|^2 <= l^2 |x - y|^2`.
    pub mean_square_smoothness: Option<f64>,
}

pub trait GradientOracle: Send + Sync + Debug {
    fn dim(&self) -> usize;

    fn bounds(&self) -> OracleBounds;

    /// One stochastic gradient at `x`. Inputs are already validated.
    fn draw(&self, x: &Vector, rng: &mut Rng) -> Vector;

    /// Mean of `n` independent draws. Fixtures override this with an exact
    /// sampler of the same distribution.
    fn draw_mean(&self, x: &Vector, n: u64, rng: &mut Rng) -> Vector {
        let mut acc = Vector::zeros(self.dim());
        for _ in 0..n {
            acc += self.draw(x, rng);
        }
        acc / n.max(1) as f64
    }

    fn supports_shared_seed(&self) -> bool {
        false
    }

    /// `g(x, omega)`; `None` when the oracle has no shared-seed channel.
    fn draw_seeded(&self, _x: &Vector, _seed: u64) -> Option<Vector> {
        None
    }

    /// Exact `grad f(x)` (a subgradient where f is not differentiable).
    fn gradient(&self, _x: &Vector) -> Option<Vector> {
        None
    }

    /// Exact gradient of the Gaussian convolution `F_r`.
    fn smoothed_gradient(&self, _x: &Vector, _radius: f64) -> Option<Vector> {
        None
    }

    fn value(&self, _x: &Vector) -> Option<f64> {
        None
    }

    /// Exact `F_r(x)`.
    fn smoothed_value(&self, _x: &Vector, _radius: f64) -> Option<f64> {
        None
    }

    /// A stochastic function value with mean `f(x)`; used by offline truth
    /// estimators only.
    fn draw_value(&self, x: &Vector, _rng: &mut Rng) -> Option<f64> {
        self.value(x)
    }
}

pub fn sample(
    oracle: &dyn GradientOracle,
    x: &Vector,
    rng: &mut Rng,
    ledger: &mut QueryLedger,
) -> Result<Vector> {
    check_point(x, oracle.dim(), "sample")?;
    ledger.record_samples(1);
    Ok(oracle.draw(x, rng))
}

pub fn sample_with_seed(oracle: &dyn GradientOracle, x: &Vector, seed: u64) -> Result<Vector> {
    check_point(x, oracle.dim(), "sample_with_seed")?;
    oracle
        .draw_seeded(x, seed)
        .ok_or(Error::Unsupported("shared-seed sampling"))
}

/// Simulation-only truth channel; never touches a ledger.
pub fn exact_mean(oracle: &dyn GradientOracle, x: &Vector) -> Result<Vector> {
    check_point(x, oracle.dim(), "exact_mean")?;
    oracle.gradient(x).ok_or(Error::Unsupported("exact mean"))
}
