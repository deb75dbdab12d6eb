//! Stochastic cutting-plane search driven by approximate gradients.
//!
//! A central-cut ellipsoid method over `B_2R(0)` localizes the set of
//! near-optimal points; every in-ball center is queried with the approximate
//! gradient oracle and the returned vector is used as the cut. The query
//! points form the candidate set handed to the tournament.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::estimate::{approx_gradient, GradientSource, MeanEstimationBackend};
use crate::fixtures::ProblemInstance;
use crate::ledger::QueryLedger;
use crate::linalg::Vector;
use crate::rng::Rng;

/// Answer of a separation oracle at `point`. A zero direction means the
/// point is accepted; otherwise `{z : <direction, z> <= <direction, point>}`
/// is claimed to contain the target set.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationResponse {
    pub point: Vector,
    pub direction: Vector,
}

impl SeparationResponse {
    pub fn is_feasible(&self) -> bool {
        self.direction.iter().all(|&v| v == 0.0)
    }
}

/// `E = {c + P^(1/2) u : |u| <= 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ellipsoid {
    center: Vector,
    shape: DMatrix<f64>,
}

impl Ellipsoid {
    pub fn ball(d: usize, radius: f64) -> Self {
        Self {
            center: Vector::zeros(d),
            shape: DMatrix::identity(d, d) * (radius * radius),
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn shape(&self) -> &DMatrix<f64> {
        &self.shape
    }

    /// `ln(vol / vol(unit ball)) = ln det(P) / 2`.
    pub fn log_volume(&self) -> f64 {
        match self.shape.clone().cholesky() {
            Some(c) => c.l().diagonal().iter().map(|v| v.ln()).sum(),
            None => f64::NEG_INFINITY,
        }
    }

    /// Keep `{z : <a, z - c> <= 0}`.
    fn cut(&mut self, a: &Vector) -> Result<()> {
        let d = self.dim();
        let pa = &self.shape * a;
        let apa = a.dot(&pa);
        if !(apa > 0.0) || !apa.is_finite() {
            return Err(Error::NumericDegeneracy);
        }
        let b = pa / apa.sqrt();
        if d == 1 {
            // interval halving
            self.center -= &b * 0.5;
            self.shape *= 0.25;
            return Ok(());
        }
        let df = d as f64;
        self.center -= &b / (df + 1.0);
        let next = (&self.shape - (&b * b.transpose()) * (2.0 / (df + 1.0))) * (df * df / (df * df - 1.0));
        let sym = (&next + next.transpose()) * 0.5;
        if sym.clone().cholesky().is_none() {
            return Err(Error::NumericDegeneracy);
        }
        self.shape = sym;
        Ok(())
    }
}

/// Apply a central cut through the current center; returns the next query
/// point. A feasible response leaves the ellipsoid untouched.
pub fn ellipsoid_cut(engine: &mut Ellipsoid, response: &SeparationResponse) -> Result<Vector> {
    if !response.is_feasible() {
        engine.cut(&response.direction)?;
    }
    Ok(engine.center.clone())
}

/// `ceil(2 (d + 1) d ln(2R / r_K)) + 1`.
pub fn cut_budget(d: usize, radius: f64, r_k: f64) -> usize {
    let df = d as f64;
    (2.0 * (df + 1.0) * df * (2.0 * radius / r_k).ln()).ceil().max(0.0) as usize + 1
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScpCandidates {
    pub points: Vec<Vector>,
    pub degraded: bool,
    pub cuts: usize,
}

pub fn run_scp_candidates(
    problem: &ProblemInstance,
    epsilon: f64,
    backend: &MeanEstimationBackend,
    ledger: &mut QueryLedger,
    rng: &mut Rng,
) -> Result<ScpCandidates> {
    let d = problem.dim();
    let l = problem.lipschitz;
    let radius = problem.radius;
    if epsilon >= l * radius {
        return Ok(ScpCandidates {
            points: vec![Vector::zeros(d)],
            degraded: false,
            cuts: 0,
        });
    }
    let r_k = epsilon / (2.0 * l);
    let budget = cut_budget(d, radius, r_k);
    let xi = 1.0 / (6.0 * budget as f64);
    let delta_err = epsilon / (10.0 * radius);

    let mut engine = Ellipsoid::ball(d, 2.0 * radius);
    let mut points = Vec::new();
    let mut degraded = false;
    let mut cuts = 0;
    for _ in 0..budget {
        let c = engine.center().clone();
        let direction = if c.norm() > radius {
            // outside the feasible ball: cut towards it without a query
            c.clone()
        } else {
            let src = GradientSource::lipschitz(problem.oracle.as_ref(), c.clone());
            let out = approx_gradient(&src, delta_err, xi, backend, ledger, rng)?;
            degraded |= out.degraded;
            points.push(c.clone());
            out.estimate
        };
        let response = SeparationResponse { point: c, direction };
        if response.is_feasible() {
            break;
        }
        match ellipsoid_cut(&mut engine, &response) {
            Ok(_) => cuts += 1,
            Err(Error::NumericDegeneracy) => {
                degraded = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if points.is_empty() {
        points.push(Vector::zeros(d));
    }
    Ok(ScpCandidates { points, degraded, cuts })
}
