//! Approximately best point among finitely many candidates, by a knockout
//! tournament of stochastic line searches.

use crate::cutting_plane::run_scp_candidates;
use crate::error::{invalid, Error, Result};
use crate::estimate::{approx_gradient, MeanEstimationBackend, ProjectedSource};
use crate::fixtures::ProblemInstance;
use crate::ledger::QueryLedger;
use crate::linalg::Vector;
use crate::oracle::GradientOracle;
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSearchConfig {
    pub eps_prime: f64,
    pub radius: f64,
    pub lipschitz: f64,
    /// Number of points in the enclosing tournament; sets the per-call
    /// failure probability `(6 T log2(2RL/eps'))^-1`.
    pub tournament_size: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LineSearchOutcome {
    pub point: Vector,
    pub iterations: usize,
    pub degraded: bool,
}

/// Bisection on `[y_l0, y_r0]` using projected directional-derivative
/// estimates of error `eps' / (4R)`.
pub fn stochastic_line_search(
    oracle: &dyn GradientOracle,
    y_l0: &Vector,
    y_r0: &Vector,
    cfg: &LineSearchConfig,
    backend: &MeanEstimationBackend,
    ledger: &mut QueryLedger,
    rng: &mut Rng,
) -> Result<LineSearchOutcome> {
    if !(cfg.eps_prime > 0.0) {
        return Err(invalid(format!("eps' must be positive, got {}", cfg.eps_prime)));
    }
    let mut y_l = y_l0.clone();
    let mut y_r = y_r0.clone();
    if y_l == y_r {
        return Ok(LineSearchOutcome {
            point: y_l,
            iterations: 0,
            degraded: false,
        });
    }
    let e_hat = (&y_r - &y_l).normalize();
    let tol = cfg.eps_prime / (4.0 * cfg.radius);
    let levels = (2.0 * cfg.radius * cfg.lipschitz / cfg.eps_prime).log2().max(1.0);
    let xi = (1.0 / (6.0 * cfg.tournament_size.max(1) as f64 * levels)).min(0.5);
    let stop = cfg.eps_prime / cfg.lipschitz;

    let mut iterations = 0;
    let mut degraded = false;
    loop {
        let y_m = (&y_l + &y_r) * 0.5;
        let src = ProjectedSource::new(oracle, y_m.clone(), e_hat.clone());
        let est = approx_gradient(&src, tol, xi, backend, ledger, rng)?;
        iterations += 1;
        degraded |= est.degraded;
        let g = est.estimate[0];
        if g.abs() <= tol {
            return Ok(LineSearchOutcome {
                point: y_m,
                iterations,
                degraded,
            });
        }
        if g > 0.0 {
            y_r = y_m;
        } else {
            y_l = y_m;
        }
        if (&y_r - &y_l).norm() <= stop {
            return Ok(LineSearchOutcome {
                point: y_l,
                iterations,
                degraded,
            });
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TournamentOutcome {
    pub point: Vector,
    pub matches: usize,
    pub degraded: bool,
}

/// Pads to a power of two with copies of the first point, then runs
/// `log2 T` rounds of pairwise line searches at accuracy `eps / log2 T`.
#[allow(clippy::too_many_arguments)]
pub fn best_point_tournament(
    oracle: &dyn GradientOracle,
    points: &[Vector],
    epsilon: f64,
    radius: f64,
    lipschitz: f64,
    backend: &MeanEstimationBackend,
    ledger: &mut QueryLedger,
    rng: &mut Rng,
) -> Result<TournamentOutcome> {
    let first = points.first().ok_or(Error::Empty("tournament points"))?;
    let size = points.len().next_power_of_two();
    let mut level: Vec<Vector> = points.to_vec();
    level.resize(size, first.clone());
    let rounds = size.trailing_zeros() as usize;
    if rounds == 0 {
        return Ok(TournamentOutcome {
            point: first.clone(),
            matches: 0,
            degraded: false,
        });
    }
    let cfg = LineSearchConfig {
        eps_prime: epsilon / rounds as f64,
        radius,
        lipschitz,
        tournament_size: size,
    };
    let mut matches = 0;
    let mut degraded = false;
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len() / 2);
        for pair in level.chunks(2) {
            let out = stochastic_line_search(oracle, &pair[0], &pair[1], &cfg, backend, ledger, rng)?;
            matches += 1;
            degraded |= out.degraded;
            next.push(out.point);
        }
        level = next;
    }
    Ok(TournamentOutcome {
        point: level.pop().unwrap(),
        matches,
        degraded,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct QscpOutcome {
    pub x: Vector,
    pub candidates: Vec<Vector>,
    pub degraded: bool,
}

/// Cutting-plane candidates followed by the tournament. Ledger charges are
/// split into the phases `cutting-plane` and `tournament`.
pub fn run_qscp(
    problem: &ProblemInstance,
    epsilon: f64,
    backend: &MeanEstimationBackend,
    ledger: &mut QueryLedger,
    rng: &mut Rng,
) -> Result<QscpOutcome> {
    let previous = ledger.set_phase("cutting-plane");
    let cands = run_scp_candidates(problem, epsilon, backend, ledger, &mut rng.split(1));
    ledger.set_phase("tournament");
    let result = cands.and_then(|c| {
        let t = best_point_tournament(
            problem.oracle.as_ref(),
            &c.points,
            epsilon,
            problem.radius,
            problem.lipschitz,
            backend,
            ledger,
            &mut rng.split(2),
        )?;
        Ok(QscpOutcome {
            x: t.point,
            degraded: c.degraded || t.degraded,
            candidates: c.points,
        })
    });
    ledger.set_phase(&previous);
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::BallDistanceOracle;

    fn abs_on_line(center: f64) -> BallDistanceOracle {
        BallDistanceOracle {
            center: Vector::from_element(1, center),
            scale: 1.0,
            noise: 0.0,
        }
    }

    fn cfg(eps: f64, t: usize) -> LineSearchConfig {
        LineSearchConfig {
            eps_prime: eps,
            radius: 1.0,
            lipschitz: 1.0,
            tournament_size: t,
        }
    }

    #[test]
    fn identical_endpoints_return_immediately() {
        let f = abs_on_line(0.3);
        let y = Vector::from_element(1, 0.7);
        let mut l = QueryLedger::new();
        let out = stochastic_line_search(&f, &y, &y, &cfg(0.01, 1), &MeanEstimationBackend::honest(), &mut l, &mut Rng::new(0, 0))
            .unwrap();
        assert_eq!(out.point, y);
        assert_eq!(l.quantum_queries(), 0);
    }

    #[test]
    fn finds_the_kink() {
        let f = abs_on_line(0.3);
        let mut l = QueryLedger::new();
        let out = stochastic_line_search(
            &f,
            &Vector::zeros(1),
            &Vector::from_element(1, 1.0),
            &cfg(0.01, 1),
            &MeanEstimationBackend::honest(),
            &mut l,
            &mut Rng::new(0, 0),
        )
        .unwrap();
        assert!(f.value(&out.point).unwrap() <= 0.01);
        assert!(out.iterations as f64 <= (2.0f64 / 0.01).log2());
    }

    #[test]
    fn single_point_and_empty_list() {
        let f = abs_on_line(0.0);
        let mut l = QueryLedger::new();
        let b = MeanEstimationBackend::honest();
        let p = vec![Vector::from_element(1, 0.4)];
        let out = best_point_tournament(&f, &p, 0.1, 1.0, 1.0, &b, &mut l, &mut Rng::new(0, 0)).unwrap();
        assert_eq!(out.point, p[0]);
        assert!(best_point_tournament(&f, &[], 0.1, 1.0, 1.0, &b, &mut l, &mut Rng::new(0, 0)).is_err());
    }
}
