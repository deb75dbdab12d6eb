//! One trial of one algorithm, reduced to a flat record.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::acsa::run_acsa;
use crate::baseline::run_sgd_baseline;
use crate::error::{invalid, Error, Result};
use crate::estimate::{mlmc_variance_reduce, GradientSource, MeanEstimationBackend};
use crate::fixtures::ProblemInstance;
use crate::ledger::{PhaseTally, QueryLedger};
use crate::linalg::Vector;
use crate::nonconvex::{run_qsgd, run_qspider};
use crate::oracle::exact_mean;
use crate::rng::Rng;
use crate::tournament::run_qscp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Qvr,
    Acsa,
    Qscp,
    Qsgd,
    Qspider,
    SgdBaseline,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Qvr,
        Algorithm::Acsa,
        Algorithm::Qscp,
        Algorithm::Qsgd,
        Algorithm::Qspider,
        Algorithm::SgdBaseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Qvr => "qvr",
            Algorithm::Acsa => "acsa",
            Algorithm::Qscp => "qscp",
            Algorithm::Qsgd => "qsgd",
            Algorithm::Qspider => "qspider",
            Algorithm::SgdBaseline => "sgd-baseline",
        }
    }

    /// Exponent `k` in `queries ~ (1/eps)^k` at fixed dimension. For `qvr`
    /// the swept parameter is the target error itself.
    pub fn predicted_exponent(self) -> f64 {
        match self {
            Algorithm::Qvr => 1.0,
            Algorithm::Acsa => 1.5,
            Algorithm::Qscp => 1.0,
            Algorithm::Qsgd => 3.0,
            Algorithm::Qspider => 2.5,
            Algorithm::SgdBaseline => 2.0,
        }
    }

    pub fn is_nonconvex(self) -> bool {
        matches!(self, Algorithm::Qsgd | Algorithm::Qspider)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| invalid(format!("unknown algorithm `{s}`")))
    }
}

/// Outcome of one trial.
///
/// `metric` is the optimality gap for the convex solvers, `|grad f|` for the
/// non-convex ones and the squared estimation error `|mu_hat - mu|^2` for
/// `qvr`, where `epsilon` plays the role of the target error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub fixture: String,
    pub d: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub queries: u64,
    pub expected_queries: f64,
    pub classical_samples: u64,
    pub metric: f64,
    pub phases: BTreeMap<String, PhaseTally>,
    pub wall_ms: u64,
    pub degraded: bool,
}

struct Solved {
    metric: f64,
    degraded: bool,
}

fn gap(problem: &ProblemInstance, x: &Vector) -> Result<f64> {
    problem
        .gap_at(x)
        .ok_or_else(|| invalid(format!("fixture `{}` has no known optimum", problem.kind)))
}

fn grad_norm(problem: &ProblemInstance, x: &Vector) -> Result<f64> {
    problem
        .gradient_norm(x)
        .ok_or_else(|| invalid(format!("fixture `{}` has no gradient channel", problem.kind)))
}

fn solve(
    algorithm: Algorithm,
    problem: &ProblemInstance,
    epsilon: f64,
    backend: &MeanEstimationBackend,
    ledger: &mut QueryLedger,
    rng: &mut Rng,
) -> Result<Solved> {
    let plain = |metric| Solved { metric, degraded: false };
    match algorithm {
        Algorithm::Qvr => {
            let oracle = problem.oracle.as_ref();
            let x = Vector::zeros(problem.dim());
            let mu = exact_mean(oracle, &x)?;
            let src = GradientSource::lipschitz(oracle, x);
            let est = mlmc_variance_reduce(&src, epsilon, backend, ledger, rng)?;
            Ok(plain((est - mu).norm_squared()))
        }
        Algorithm::Acsa => {
            let out = run_acsa(problem, epsilon, backend, ledger, rng)?;
            Ok(plain(gap(problem, &out.x)?))
        }
        Algorithm::Qscp => {
            let out = run_qscp(problem, epsilon, backend, ledger, rng)?;
            Ok(Solved {
                metric: gap(problem, &out.x)?,
                degraded: out.degraded,
            })
        }
        Algorithm::Qsgd => {
            let out = run_qsgd(problem, epsilon, backend, ledger, rng)?;
            Ok(plain(grad_norm(problem, &out.x)?))
        }
        Algorithm::Qspider => {
            let out = run_qspider(problem, epsilon, backend, ledger, rng)?;
            Ok(plain(grad_norm(problem, &out.x)?))
        }
        Algorithm::SgdBaseline => {
            let x = run_sgd_baseline(problem, epsilon, ledger, rng)?;
            Ok(plain(gap(problem, &x)?))
        }
    }
}

/// Run one trial with a fresh ledger and build its record.
pub fn run_trial(
    algorithm: Algorithm,
    problem: &ProblemInstance,
    epsilon: f64,
    backend: &MeanEstimationBackend,
    seed: u64,
    rng: &mut Rng,
) -> Result<RunRecord> {
    let mut ledger = QueryLedger::new();
    let start = Instant::now();
    let solved = solve(algorithm, problem, epsilon, backend, &mut ledger, rng)?;
    let wall_ms = start.elapsed().as_millis() as u64;
    if !solved.metric.is_finite() {
        return Err(Error::NonFinite("trial metric"));
    }
    Ok(RunRecord {
        algorithm,
        fixture: problem.kind.name().to_string(),
        d: problem.dim(),
        epsilon,
        seed,
        queries: ledger.quantum_queries(),
        expected_queries: ledger.expected_queries(),
        classical_samples: ledger.classical_samples(),
        metric: solved.metric,
        phases: ledger.phases().clone(),
        wall_ms,
        degraded: solved.degraded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("spider".parse::<Algorithm>().is_err());
    }
}
