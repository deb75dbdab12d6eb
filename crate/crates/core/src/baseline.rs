//! Classical projected SGD with iterate averaging, for comparison.

use crate::error::{invalid, Result};
use crate::fixtures::ProblemInstance;
use crate::ledger::QueryLedger;
use crate::linalg::{project_ball, Vector};
use crate::oracle::sample;
use crate::rng::Rng;

/// `T = ceil((2 R L / eps)^2)` steps of size `R / (L sqrt(T))`; every sample
/// is one classical query.
pub fn run_sgd_baseline(
    problem: &ProblemInstance,
    epsilon: f64,
    ledger: &mut QueryLedger,
    rng: &mut Rng,
) -> Result<Vector> {
    if !(epsilon > 0.0) {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let (l, r) = (problem.lipschitz, problem.radius);
    let steps = ((2.0 * r * l / epsilon).powi(2) * (1.0 - 1e-12)).ceil().max(1.0) as u64;
    let eta = r / (l * (steps as f64).sqrt());
    let oracle = problem.oracle.as_ref();
    let mut x = Vector::zeros(problem.dim());
    let mut avg = Vector::zeros(problem.dim());
    for t in 0..steps {
        avg += (&x - &avg) / (t as f64 + 1.0);
        let g = sample(oracle, &x, rng, ledger)?;
        ledger.charge(1);
        x = project_ball(x - g * eta, r);
    }
    Ok(avg)
}
