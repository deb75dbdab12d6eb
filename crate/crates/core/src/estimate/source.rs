//! Random variables handed to the mean estimators.

use rand::RngCore;
use rand_distr::{Binomial, Distribution};

use crate::linalg::{gaussian, Vector};
use crate::oracle::GradientOracle;
use crate::rng::Rng;

/// A d-dimensional random variable with `Var[X] <= L_eff^2`.
pub trait RandomVariableSource: Send + Sync {
    fn dim(&self) -> usize;

    fn draw(&self, rng: &mut Rng) -> Vector;

    /// Mean of `n` independent draws.
    fn draw_mean(&self, n: u64, rng: &mut Rng) -> Vector {
        let mut acc = Vector::zeros(self.dim());
        for _ in 0..n {
            acc += self.draw(rng);
        }
        acc / n.max(1) as f64
    }

    fn exact_mean(&self) -> Option<Vector>;

    /// The `L` of the mean-estimation contract.
    fn second_moment_bound(&self) -> f64;

    /// Base-oracle queries needed to produce one draw.
    fn oracle_calls_per_draw(&self) -> u64 {
        1
    }
}

/// Stochastic gradient of an oracle at a fixed point.
pub struct GradientSource<'a> {
    oracle: &'a dyn GradientOracle,
    x: Vector,
    bound: f64,
}

impl<'a> GradientSource<'a> {
    pub fn new(oracle: &'a dyn GradientOracle, x: Vector, bound: f64) -> Self {
        Self { oracle, x, bound }
    }

    /// Uses the oracle's second-moment bound `L`.
    pub fn lipschitz(oracle: &'a dyn GradientOracle, x: Vector) -> Self {
        let bound = oracle.bounds().lipschitz;
        Self::new(oracle, x, bound)
    }

    /// Uses the oracle's variance bound `sigma`.
    pub fn variance(oracle: &'a dyn GradientOracle, x: Vector) -> Self {
        let bound = oracle.bounds().variance;
        Self::new(oracle, x, bound)
    }
}

impl RandomVariableSource for GradientSource<'_> {
    fn dim(&self) -> usize {
        self.oracle.dim()
    }

    fn draw(&self, rng: &mut Rng) -> Vector {
        self.oracle.draw(&self.x, rng)
    }

    fn draw_mean(&self, n: u64, rng: &mut Rng) -> Vector {
        self.oracle.draw_mean(&self.x, n, rng)
    }

    fn exact_mean(&self) -> Option<Vector> {
        self.oracle.gradient(&self.x)
    }

    fn second_moment_bound(&self) -> f64 {
        self.bound
    }
}

/// The scalar `<g(x), e>` for a fixed unit direction `e`.
pub struct ProjectedSource<'a> {
    oracle: &'a dyn GradientOracle,
    x: Vector,
    direction: Vector,
}

impl<'a> ProjectedSource<'a> {
    pub fn new(oracle: &'a dyn GradientOracle, x: Vector, direction: Vector) -> Self {
        Self {
            oracle,
            x,
            direction,
        }
    }
}

impl RandomVariableSource for ProjectedSource<'_> {
    fn dim(&self) -> usize {
        1
    }

    fn draw(&self, rng: &mut Rng) -> Vector {
        Vector::from_element(1, self.oracle.draw(&self.x, rng).dot(&self.direction))
    }

    fn draw_mean(&self, n: u64, rng: &mut Rng) -> Vector {
        // projection is linear, so project the mean
        Vector::from_element(1, self.oracle.draw_mean(&self.x, n, rng).dot(&self.direction))
    }

    fn exact_mean(&self) -> Option<Vector> {
        self.oracle
            .gradient(&self.x)
            .map(|g| Vector::from_element(1, g.dot(&self.direction)))
    }

    fn second_moment_bound(&self) -> f64 {
        self.oracle.bounds().lipschitz
    }
}

/// `g(x, w) - g(prev, w)` with a shared seed `w`; one draw costs two oracle calls.
pub struct DifferenceSource<'a> {
    oracle: &'a dyn GradientOracle,
    x: Vector,
    prev: Vector,
    bound: f64,
}

impl<'a> DifferenceSource<'a> {
    /// Second-moment bound `l * |x - prev|` from mean-squared smoothness, or
    /// 0 for a noiseless oracle, whose difference is a point mass.
    /// Returns `None` when the oracle has no shared-seed channel.
    pub fn new(oracle: &'a dyn GradientOracle, x: Vector, prev: Vector) -> Option<Self> {
        if !oracle.supports_shared_seed() {
            return None;
        }
        let b = oracle.bounds();
        let ell = b.mean_square_smoothness?;
        let bound = if b.variance == 0.0 { 0.0 } else { ell * (&x - &prev).norm() };
        Some(Self {
            oracle,
            x,
            prev,
            bound,
        })
    }

    pub fn draw_with_seed(&self, seed: u64) -> Vector {
        let a = self.oracle.draw_seeded(&self.x, seed).expect("shared seed");
        let b = self.oracle.draw_seeded(&self.prev, seed).expect("shared seed");
        a - b
    }
}

impl RandomVariableSource for DifferenceSource<'_> {
    fn dim(&self) -> usize {
        self.oracle.dim()
    }

    fn draw(&self, rng: &mut Rng) -> Vector {
        self.draw_with_seed(rng.next_u64())
    }

    fn exact_mean(&self) -> Option<Vector> {
        Some(self.oracle.gradient(&self.x)? - self.oracle.gradient(&self.prev)?)
    }

    fn second_moment_bound(&self) -> f64 {
        self.bound
    }

    fn oracle_calls_per_draw(&self) -> u64 {
        2
    }
}

/// Degenerate distribution at a fixed vector.
pub struct ConstantSource {
    value: Vector,
    bound: f64,
}

impl ConstantSource {
    pub fn new(value: Vector, bound: f64) -> Self {
        Self { value, bound }
    }
}

impl RandomVariableSource for ConstantSource {
    fn dim(&self) -> usize {
        self.value.len()
    }

    fn draw(&self, _rng: &mut Rng) -> Vector {
        self.value.clone()
    }

    fn draw_mean(&self, _n: u64, _rng: &mut Rng) -> Vector {
        self.value.clone()
    }

    fn exact_mean(&self) -> Option<Vector> {
        Some(self.value.clone())
    }

    fn second_moment_bound(&self) -> f64 {
        self.bound
    }
}

/// Uniform over a finite set of atoms.
pub struct DiscreteSource {
    atoms: Vec<Vector>,
    bound: f64,
}

impl DiscreteSource {
    pub fn new(atoms: Vec<Vector>, bound: f64) -> Self {
        assert!(!atoms.is_empty(), "discrete source needs at least one atom");
        Self { atoms, bound }
    }

    /// Uniform over `{+e_1, -e_1, ..., +e_d, -e_d}`: mean zero, `E|X|^2 = 1`.
    pub fn signed_axes(d: usize) -> Self {
        let atoms = (0..d)
            .flat_map(|i| {
                let e = crate::linalg::basis(d, i);
                [e.clone(), -e]
            })
            .collect();
        Self::new(atoms, 1.0)
    }
}

impl RandomVariableSource for DiscreteSource {
    fn dim(&self) -> usize {
        self.atoms[0].len()
    }

    fn draw(&self, rng: &mut Rng) -> Vector {
        self.atoms[rng.below(self.atoms.len() as u64) as usize].clone()
    }

    /// Multinomial counts via sequential binomials, then the weighted mean.
    fn draw_mean(&self, n: u64, rng: &mut Rng) -> Vector {
        let m = self.atoms.len();
        let mut acc = Vector::zeros(self.dim());
        let mut remaining = n;
        for (i, atom) in self.atoms.iter().enumerate() {
            if remaining == 0 {
                break;
            }
            let count = if i + 1 == m {
                remaining
            } else {
                let p = 1.0 / (m - i) as f64;
                Binomial::new(remaining, p).expect("valid binomial").sample(rng)
            };
            if count > 0 {
                acc.axpy(count as f64, atom, 1.0);
            }
            remaining -= count;
        }
        acc / n.max(1) as f64
    }

    fn exact_mean(&self) -> Option<Vector> {
        let mut acc = Vector::zeros(self.dim());
        for a in &self.atoms {
            acc += a;
        }
        Some(acc / self.atoms.len() as f64)
    }

    fn second_moment_bound(&self) -> f64 {
        self.bound
    }
}

/// `N(mean, (spread^2 / d) I)`, so that `E|X - mean|^2 = spread^2`.
pub struct GaussianSource {
    mean: Vector,
    spread: f64,
}

impl GaussianSource {
    pub fn new(mean: Vector, spread: f64) -> Self {
        Self { mean, spread }
    }
}

impl RandomVariableSource for GaussianSource {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn draw(&self, rng: &mut Rng) -> Vector {
        let d = self.dim();
        &self.mean + gaussian(d, self.spread / (d as f64).sqrt(), rng)
    }

    fn draw_mean(&self, n: u64, rng: &mut Rng) -> Vector {
        let d = self.dim();
        let s = self.spread / ((d as f64) * n.max(1) as f64).sqrt();
        &self.mean + gaussian(d, s, rng)
    }

    fn exact_mean(&self) -> Option<Vector> {
        Some(self.mean.clone())
    }

    fn second_moment_bound(&self) -> f64 {
        self.spread
    }
}
