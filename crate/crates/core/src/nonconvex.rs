//! Expected eps-critical points of smooth non-convex objectives.

use crate::error::{invalid, Error, Result};
use crate::estimate::{mlmc_variance_reduce, DifferenceSource, GradientSource, MeanEstimationBackend};
use crate::fixtures::ProblemInstance;
use crate::ledger::QueryLedger;
use crate::linalg::Vector;
use crate::rng::Rng;

fn smoothness_and_gap(problem: &ProblemInstance) -> Result<(f64, f64)> {
    let ell = problem
        .smoothness
        .ok_or_else(|| invalid("problem declares no smoothness constant"))?;
    let gap = problem.gap.ok_or_else(|| invalid("problem declares no gap bound"))?;
    if !(ell > 0.0) || !(gap >= 0.0) {
        return Err(invalid(format!("need smoothness > 0 and gap >= 0, got {ell} and {gap}")));
    }
    Ok((ell, gap))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct QsgdOutcome {
    pub x: Vector,
    /// Budget `T = ceil(12 Delta l / eps^2)`.
    pub budget: u64,
    /// Stopping index `N`, uniform on `1..=T`.
    pub stop: u64,
}

pub fn qsgd_budget(gap: f64, ell: f64, epsilon: f64) -> u64 {
    ((12.0 * gap * ell / (epsilon * epsilon)) * (1.0 - 1e-12)).ceil().max(1.0) as u64
}

/// Randomized SGD with variance-reduced gradients: `N - 1` steps of
/// `x <- x - g / l` from the origin with `sigma_hat = eps / 3`.
pub fn run_qsgd(
    problem: &ProblemInstance,
    epsilon: f64,
    backend: &MeanEstimationBackend,
    ledger: &mut QueryLedger,
    rng: &mut Rng,
) -> Result<QsgdOutcome> {
    check_epsilon(epsilon)?;
    let (ell, gap) = smoothness_and_gap(problem)?;
    let budget = qsgd_budget(gap, ell, epsilon);
    let stop = rng.below(budget) + 1;
    let sigma_hat = epsilon / 3.0;
    let oracle = problem.oracle.as_ref();
    let mut x = Vector::zeros(problem.dim());
    for _ in 0..stop - 1 {
        let src = GradientSource::variance(oracle, x.clone());
        let g = mlmc_variance_reduce(&src, sigma_hat, backend, ledger, rng)?;
        x -= g / ell;
    }
    Ok(QsgdOutcome { x, budget, stop })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpiderParams {
    pub q: u64,
    pub sigma_hat_anchor: f64,
    pub sigma_hat_inner: f64,
    pub budget: u64,
}

/// `q = 20 sigma / eps`, `sigma_hat_1 = eps / 40`,
/// `sigma_hat_2 = (eps / 40) sqrt(eps / (10 sigma))`, `T = 1600 l Delta / sigma^2`,
/// with `q` and `T` rounded up. A noiseless oracle uses `sigma = eps`.
pub fn spider_parameters(sigma: f64, ell: f64, gap: f64, epsilon: f64) -> Result<SpiderParams> {
    check_epsilon(epsilon)?;
    if epsilon > sigma && sigma > 0.0 {
        return Err(invalid(format!("Q-SPIDER needs eps <= sigma, got eps = {epsilon}, sigma = {sigma}")));
    }
    let s = if sigma > 0.0 { sigma } else { epsilon };
    let round = |v: f64| (v * (1.0 - 1e-12)).ceil().max(1.0) as u64;
    Ok(SpiderParams {
        q: round(20.0 * s / epsilon),
        sigma_hat_anchor: epsilon / 40.0,
        sigma_hat_inner: epsilon / 40.0 * (epsilon / (10.0 * s)).sqrt(),
        budget: round(1600.0 * ell * gap / (s * s)),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpiderOutcome {
    pub x: Vector,
    pub params: SpiderParams,
    /// Index `t` of the last iteration executed.
    pub last_iteration: u64,
    pub anchors: u64,
    /// Lengths of all steps taken.
    pub step_lengths: Vec<f64>,
    /// `x_0, x_1, ...` up to and including the returned point.
    pub iterates: Vec<Vector>,
    pub returned_early: bool,
}

/// SPIDER with variance-reduced anchors and shared-seed difference
/// estimates, normalized steps of length `eps / l`, and early return once
/// `|v_t| <= 2 eps`.
pub fn run_qspider(
    problem: &ProblemInstance,
    epsilon: f64,
    backend: &MeanEstimationBackend,
    ledger: &mut QueryLedger,
    rng: &mut Rng,
) -> Result<SpiderOutcome> {
    let oracle = problem.oracle.as_ref();
    if !oracle.supports_shared_seed() {
        return Err(Error::Unsupported("shared-seed sampling"));
    }
    let (ell, gap) = smoothness_and_gap(problem)?;
    let p = spider_parameters(problem.variance, ell, gap, epsilon)?;

    let d = problem.dim();
    let mut x = Vector::zeros(d);
    let mut prev = Vector::zeros(d);
    let mut v = Vector::zeros(d);
    let mut anchors = 0;
    let mut step_lengths = Vec::new();
    let mut iterates = vec![x.clone()];
    for t in 0..=p.budget {
        if t % p.q == 0 {
            let src = GradientSource::variance(oracle, x.clone());
            v = mlmc_variance_reduce(&src, p.sigma_hat_anchor, backend, ledger, rng)?;
            anchors += 1;
        } else {
            let src = DifferenceSource::new(oracle, x.clone(), prev.clone())
                .ok_or(Error::Unsupported("shared-seed sampling"))?;
            v += mlmc_variance_reduce(&src, p.sigma_hat_inner, backend, ledger, rng)?;
        }
        let vn = v.norm();
        if vn <= 2.0 * epsilon {
            return Ok(SpiderOutcome {
                x,
                params: p,
                last_iteration: t,
                anchors,
                step_lengths,
                iterates,
                returned_early: true,
            });
        }
        if t == p.budget {
            break;
        }
        let next = &x - &v * (epsilon / (ell * vn));
        step_lengths.push((&next - &x).norm());
        prev = std::mem::replace(&mut x, next);
        iterates.push(x.clone());
    }
    Ok(SpiderOutcome {
        x,
        params: p,
        last_iteration: p.budget,
        anchors,
        step_lengths,
        iterates,
        returned_early: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spider_parameter_formulas() {
        let p = spider_parameters(1.0, 2.0, 3.0, 0.1).unwrap();
        assert_eq!(p.q, 200);
        assert_eq!(p.budget, 9600);
        assert!((p.sigma_hat_anchor - 0.0025).abs() < 1e-15);
        assert!((p.sigma_hat_inner - 0.00025).abs() < 1e-15);
        assert!(spider_parameters(0.05, 1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn qsgd_budget_formula() {
        assert_eq!(qsgd_budget(0.5, 2.0, 0.1), 1200);
    }
}
