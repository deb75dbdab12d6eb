//! Accelerated stochastic approximation on the Gaussian-smoothed objective.
//!
//! `F_r(x) = E_y f(x - y)` with `y ~ N(0, r^2 I)` is `L`-Lipschitz and
//! `(L/r)`-smooth, and `g(x - y)` is an unbiased gradient of it that costs one
//! base query. Each iteration asks the variance-reduced estimator for
//! `grad F_r` at the middle point and takes a proximal step on the ball.

use log::warn;

use crate::error::{invalid, Result};
use crate::estimate::{mlmc_variance_reduce, GradientSource, MeanEstimationBackend};
use crate::fixtures::ProblemInstance;
use crate::ledger::QueryLedger;
use crate::linalg::{gaussian, project_ball, Vector};
use crate::oracle::{GradientOracle, OracleBounds};
use crate::rng::Rng;

/// `g_F(x) = g(x - y)`, `y ~ N(0, r^2 I)`.
#[derive(Debug)]
pub struct ConvolvedOracle<'a> {
    base: &'a dyn GradientOracle,
    radius: f64,
}

impl<'a> ConvolvedOracle<'a> {
    pub fn new(base: &'a dyn GradientOracle, radius: f64) -> Self {
        Self { base, radius }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl GradientOracle for ConvolvedOracle<'_> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn bounds(&self) -> OracleBounds {
        OracleBounds {
            mean_square_smoothness: None,
            ..self.base.bounds()
        }
    }

    fn draw(&self, x: &Vector, rng: &mut Rng) -> Vector {
        let y = gaussian(self.dim(), self.radius, rng);
        self.base.draw(&(x - y), rng)
    }

    fn gradient(&self, x: &Vector) -> Option<Vector> {
        self.base.smoothed_gradient(x, self.radius)
    }

    fn value(&self, x: &Vector) -> Option<f64> {
        self.base.smoothed_value(x, self.radius)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AcsaParams {
    pub iterations: usize,
    pub sigma_hat: f64,
    pub r: f64,
    pub gamma: f64,
    /// Smoothness `L / r` of the convolution.
    pub ell_f: f64,
    /// Accuracy actually used, after clamping to `LR`.
    pub epsilon: f64,
}

/// `T = ceil(4 d^(1/4) L R / eps)`, `sigma_hat = (d^(1/8) / 8) sqrt(L eps / R)`,
/// `r = eps / (4 sqrt(d) L)`, `gamma = R sqrt(6 L / r) / ((T + 2)^(3/2) sigma_hat)`.
pub fn acsa_parameters(d: usize, l: f64, radius: f64, epsilon: f64) -> Result<AcsaParams> {
    if d == 0 {
        return Err(invalid("dimension must be positive"));
    }
    for (name, v) in [("epsilon", epsilon), ("L", l), ("R", radius)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(format!("{name} must be positive, got {v}")));
        }
    }
    let mut eps = epsilon;
    if eps > l * radius {
        warn!("epsilon {eps} exceeds L R = {}; the origin is already eps-optimal, clamping", l * radius);
        eps = l * radius;
    }
    let df = d as f64;
    let iterations = (4.0 * df.powf(0.25) * l * radius / eps * (1.0 - 1e-12)).ceil() as usize;
    let sigma_hat = df.powf(0.125) / 8.0 * (l * eps / radius).sqrt();
    let r = eps / (4.0 * df.sqrt() * l);
    let ell_f = l / r;
    let gamma = radius * (6.0 * ell_f).sqrt() / ((iterations as f64 + 2.0).powf(1.5) * sigma_hat);
    Ok(AcsaParams {
        iterations,
        sigma_hat,
        r,
        gamma,
        ell_f,
        epsilon: eps,
    })
}

/// `argmin_{|z| <= R} gamma_t <g, z - x_md> + L |x_md - z|^2 / (2r)`
/// `= Proj(x_md - (gamma_t r / L) g)`.
pub fn prox_step(x_md: &Vector, g_tilde: &Vector, gamma_t: f64, l: f64, r: f64, radius: f64) -> Vector {
    project_ball(x_md - g_tilde * (gamma_t * r / l), radius)
}

/// Right-hand side of the convergence bound for the smoothed objective:
/// `4 L R^2 / (r T (T + 2)) + 4 R sigma_hat / sqrt(T)`.
pub fn acsa_bound(p: &AcsaParams, l: f64, radius: f64) -> f64 {
    let t = p.iterations as f64;
    4.0 * l * radius * radius / (p.r * t * (t + 2.0)) + 4.0 * radius * p.sigma_hat / t.sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct AcsaOutcome {
    pub x: Vector,
    pub params: AcsaParams,
}

pub fn run_acsa(
    problem: &ProblemInstance,
    epsilon: f64,
    backend: &MeanEstimationBackend,
    ledger: &mut QueryLedger,
    rng: &mut Rng,
) -> Result<AcsaOutcome> {
    let d = problem.dim();
    let l = problem.lipschitz;
    let radius = problem.radius;
    let p = acsa_parameters(d, l, radius, epsilon)?;
    let smoothed = ConvolvedOracle::new(problem.oracle.as_ref(), p.r);

    let mut x = Vector::zeros(d);
    let mut x_ag = Vector::zeros(d);
    for t in 1..=p.iterations {
        let beta = (t as f64 + 1.0) / 2.0;
        let gamma_t = (t as f64 + 1.0) * p.gamma / 2.0;
        let x_md = &x / beta + &x_ag * (1.0 - 1.0 / beta);
        let src = GradientSource::new(&smoothed, x_md.clone(), l);
        let g = mlmc_variance_reduce(&src, p.sigma_hat, backend, ledger, rng)?;
        x = prox_step(&x_md, &g, gamma_t, l, p.r, radius);
        x_ag = &x / beta + x_ag * (1.0 - 1.0 / beta);
    }
    Ok(AcsaOutcome { x: x_ag, params: p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::basis;

    #[test]
    fn parameter_examples() {
        let p = acsa_parameters(1, 1.0, 1.0, 0.25).unwrap();
        assert_eq!(p.iterations, 16);
        assert!((p.r - 0.0625).abs() < 1e-15);
        assert!((p.sigma_hat - 0.0625).abs() < 1e-15);
        let q = acsa_parameters(16, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(q.iterations, 16);
        assert!((q.r - 0.03125).abs() < 1e-15);
    }

    #[test]
    fn halving_epsilon() {
        let a = acsa_parameters(3, 1.0, 1.0, 0.2).unwrap();
        let b = acsa_parameters(3, 1.0, 1.0, 0.1).unwrap();
        assert!((b.iterations as f64 / a.iterations as f64 - 2.0).abs() < 0.1);
        assert!((b.sigma_hat / a.sigma_hat - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn clamps_large_epsilon() {
        let p = acsa_parameters(2, 1.0, 1.0, 5.0).unwrap();
        assert_eq!(p.epsilon, 1.0);
        assert!(acsa_parameters(2, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn prox_examples() {
        let z = Vector::zeros(2);
        let e = basis(2, 0);
        let x = Vector::from_vec(vec![0.2, 0.3]);
        assert_eq!(prox_step(&x, &z, 1.0, 1.0, 1.0, 1.0), x);
        assert!((prox_step(&z, &e, 0.3, 1.0, 1.0, 1.0) + &e * 0.3).norm() < 1e-15);
        assert!((prox_step(&z, &e, 5.0, 1.0, 1.0, 1.0) + &e).norm() < 1e-15);
    }
}
