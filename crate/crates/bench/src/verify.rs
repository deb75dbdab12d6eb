//! Statistical self-checks, each a list of measured-versus-bound lines.

use std::fmt;
use std::str::FromStr;

use qstoch_core::acsa::run_acsa;
use qstoch_core::estimate::{
    mlmc_variance_reduce, qme_plus, sample_level, wrapped_estimate, ConstantSource, DifferenceSource,
    DiscreteSource, MeanEstimationBackend, RandomVariableSource, WrapperParams,
};
use qstoch_core::fixtures::{make_fixture, offline_truth, FixtureKind, FixtureParams, TruthTarget};
use qstoch_core::nonconvex::run_qspider;
use qstoch_core::par::map_trials;
use qstoch_core::stats::{chi_square, mean_se};
use qstoch_core::tournament::run_qscp;
use qstoch_core::{QueryLedger, Rng, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Mlmc,
    Lemma22,
    AcsaBound,
    QscpSuccess,
    SpiderVariance,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Mlmc,
        Suite::Lemma22,
        Suite::AcsaBound,
        Suite::QscpSuccess,
        Suite::SpiderVariance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Mlmc => "mlmc",
            Suite::Lemma22 => "lemma22",
            Suite::AcsaBound => "acsa-bound",
            Suite::QscpSuccess => "qscp-success",
            Suite::SpiderVariance => "spider-variance",
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

/// `measured <= bound` unless `at_least` is set, in which case `measured >= bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub at_least: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            bound,
            at_least: false,
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            at_least: true,
            ..Self::at_most(name, measured, bound)
        }
    }

    /// Distance to the bound, positive when the check passes.
    pub fn margin(&self) -> f64 {
        if self.at_least {
            self.measured - self.bound
        } else {
            self.bound - self.measured
        }
    }

    pub fn passed(&self) -> bool {
        self.margin() >= 0.0
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: measured {:.6e} {} {:.6e} (margin {:.3e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            if self.at_least { ">=" } else { "<=" },
            self.bound,
            self.margin()
        )
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {}", self.suite.name())?;
        for c in &self.checks {
            writeln!(f, "  {c}")?;
        }
        write!(f, "{}", if self.passed() { "ok" } else { "FAILED" })
    }
}

/// Squared errors of `n` independent MLMC outputs around the true mean.
pub fn mlmc_errors(
    src: &dyn RandomVariableSource,
    sigma_hat: f64,
    backend: &MeanEstimationBackend,
    n: u64,
    seed: u64,
) -> (Vector, Vec<f64>) {
    let mu = src.exact_mean().expect("source with a known mean");
    let outs = map_trials(n, |t| {
        let mut ledger = QueryLedger::new();
        mlmc_variance_reduce(src, sigma_hat, backend, &mut ledger, &mut Rng::new(seed, t)).expect("mlmc run")
    });
    let mut mean = Vector::zeros(src.dim());
    for o in &outs {
        mean += o;
    }
    mean /= n as f64;
    let sq = outs.iter().map(|o| (o - &mu).norm_squared()).collect();
    (mean - mu, sq)
}

pub const MLMC_RUNS: u64 = 100_000;
pub const MLMC_SIGMA: f64 = 0.3;

/// The four backend variants the variance bound is checked against.
pub fn backend_variants() -> Vec<(&'static str, MeanEstimationBackend)> {
    vec![
        ("honest", MeanEstimationBackend::honest()),
        ("adversarial", MeanEstimationBackend::adversarial()),
        ("failure-injection", MeanEstimationBackend::honest().with_failures(None)),
        ("sample-based", MeanEstimationBackend::sample_based()),
    ]
}

fn mlmc_suite(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let c = Vector::from_vec(vec![0.5, -1.5]);
    let constant = ConstantSource::new(c.clone(), 1.0);
    let (bias, _) = mlmc_errors(&constant, MLMC_SIGMA, &MeanEstimationBackend::sample_based(), 1000, seed);
    checks.push(Check::at_most("constant source is a fixed point", bias.norm(), 0.0));

    let src = DiscreteSource::signed_axes(2);
    let s = MLMC_SIGMA;
    let n = MLMC_RUNS;
    for (label, backend) in backend_variants() {
        let (bias, sq) = mlmc_errors(&src, s, &backend, n, seed ^ 0x51);
        if label == "sample-based" {
            checks.push(Check::at_most(
                "unbiasedness |mean| <= 5 sigma_hat / sqrt(n), sample-based",
                bias.norm(),
                5.0 * s / (n as f64).sqrt(),
            ));
        }
        checks.push(Check::at_most(
            format!("E|mu_hat - mu|^2 <= 1.2 sigma_hat^2, {label}"),
            mean_se(&sq).0,
            1.2 * s * s,
        ));
    }

    let draws = 1_000_000u64;
    let mut rng = Rng::new(seed, 0x1e7e1);
    let mut counts = [0u64; 13];
    for _ in 0..draws {
        let j = sample_level(&mut rng).min(13) as usize;
        counts[j - 1] += 1;
    }
    let expected: Vec<f64> = (1..=13)
        .map(|j| {
            let p = if j == 13 { (-12.0f64).exp2() } else { (-(j as f64)).exp2() };
            p * draws as f64
        })
        .collect();
    let (_, p) = chi_square(&counts, &expected);
    checks.push(Check::at_least("level law chi-square p-value", p, 1e-3));
    checks
}

fn lemma22_suite(seed: u64) -> Vec<Check> {
    let src = DiscreteSource::signed_axes(2);
    let mu = src.exact_mean().unwrap();
    let l = src.second_moment_bound();
    let s = MLMC_SIGMA;
    let n = MLMC_RUNS;
    let backend = MeanEstimationBackend::honest().with_failures(Some(10.0 * l.powi(3) / (s * s)));
    let params = WrapperParams::for_inner_error(s, l);
    let wrapped = map_trials(n, |t| {
        let mut ledger = QueryLedger::new();
        let z = wrapped_estimate(&src, &params, &backend, &mut ledger, &mut Rng::new(seed, t)).unwrap();
        (z - &mu).norm_squared()
    });
    let plus_backend = MeanEstimationBackend::honest().with_failures(None);
    let plus = map_trials(n, |t| {
        let mut ledger = QueryLedger::new();
        let z = qme_plus(&src, s, &plus_backend, &mut ledger, &mut Rng::new(seed ^ 0x9, t)).unwrap();
        (z - &mu).norm_squared()
    });
    vec![
        Check::at_most("wrapper E|Z - mu|^2 <= 13 sigma^2", mean_se(&wrapped).0, 13.0 * s * s),
        Check::at_most("qme_plus E|Z - mu|^2 <= sigma_hat^2", mean_se(&plus).0, s * s),
    ]
}

pub const ACSA_BOUND_TRIALS: u64 = 100;
pub const ACSA_BOUND_EPS: f64 = 0.1;

/// Returns `(mean excess of F_r, its SE, bound, |F_r* analytic - offline|, offline SE)`.
pub fn acsa_bound_measurement(seed: u64) -> (f64, f64, f64, f64, f64) {
    let problem = make_fixture(FixtureKind::Quadratic, 2, &FixtureParams::default(), &mut Rng::new(seed, 0)).unwrap();
    let backend = MeanEstimationBackend::honest();
    let outs = map_trials(ACSA_BOUND_TRIALS, |t| {
        let mut ledger = QueryLedger::new();
        run_acsa(&problem, ACSA_BOUND_EPS, &backend, &mut ledger, &mut Rng::new(seed, t)).unwrap()
    });
    let p = outs[0].params;
    let oracle = problem.oracle.as_ref();
    let center = problem.optimum.as_ref().unwrap().point.clone();
    // F_r = f + const for a quadratic, so both share the minimizer
    let f_star = oracle.smoothed_value(&center, p.r).unwrap();
    let offline = offline_truth(
        TruthTarget::ConvolvedValue(p.r),
        oracle,
        &center,
        200_000,
        &mut Rng::new(seed, 0x0ff),
    )
    .unwrap();
    let excess: Vec<f64> = outs
        .iter()
        .map(|o| oracle.smoothed_value(&o.x, p.r).unwrap() - f_star)
        .collect();
    let (m, se) = mean_se(&excess);
    let bound = qstoch_core::acsa::acsa_bound(&p, problem.lipschitz, problem.radius);
    (m, se, bound, (offline.scalar() - f_star).abs(), offline.std_err[0])
}

fn acsa_bound_suite(seed: u64) -> Vec<Check> {
    let (m, _, bound, gap, se) = acsa_bound_measurement(seed);
    vec![
        Check::at_most("E[F_r(x_ag) - F_r*] <= convergence bound", m, bound),
        Check::at_most("offline F_r* within 5 SE of the closed form", gap, 5.0 * se),
    ]
}

pub const QSCP_TRIALS: u64 = 200;

/// Success indicators (`gap <= eps`) of Q-SCP on a d = 2 fixture.
pub fn qscp_successes(kind: FixtureKind, epsilon: f64, trials: u64, seed: u64) -> Vec<f64> {
    let problem = make_fixture(kind, 2, &FixtureParams::default(), &mut Rng::new(seed, 0)).unwrap();
    let backend = MeanEstimationBackend::honest();
    map_trials(trials, |t| {
        let mut ledger = QueryLedger::new();
        let out = run_qscp(&problem, epsilon, &backend, &mut ledger, &mut Rng::new(seed, t)).unwrap();
        let gap = problem.gap_at(&out.x).unwrap();
        if gap <= epsilon {
            1.0
        } else {
            0.0
        }
    })
}

fn qscp_suite(seed: u64) -> Vec<Check> {
    [FixtureKind::BallDistance, FixtureKind::QuadraticNoisy, FixtureKind::HardInstance]
        .into_iter()
        .map(|kind| {
            let s = qscp_successes(kind, 0.1, QSCP_TRIALS, seed);
            let (m, se) = mean_se(&s);
            Check::at_least(format!("success frequency, {kind}"), m, 2.0 / 3.0 - 3.0 * se)
        })
        .collect()
}

/// Largest ratio `Var[D] / (l^2 |x - y|^2)` over consecutive Q-SPIDER iterates,
/// each pair probed with `probes` shared seeds.
pub fn spider_variance_ratio(seed: u64, probes: u64) -> f64 {
    let params = FixtureParams {
        scale: 20.0,
        ..FixtureParams::default()
    };
    let problem = make_fixture(FixtureKind::SeededSmoothNonconvex, 2, &params, &mut Rng::new(seed, 0)).unwrap();
    let oracle = problem.oracle.as_ref();
    let ell = problem.smoothness.unwrap();
    let mut ledger = QueryLedger::new();
    let out = run_qspider(&problem, 0.2, &MeanEstimationBackend::honest(), &mut ledger, &mut Rng::new(seed, 1)).unwrap();
    let pairs: Vec<(Vector, Vector)> = out
        .iterates
        .windows(2)
        .map(|w| (w[1].clone(), w[0].clone()))
        .collect();
    let stride = (pairs.len() / 50).max(1);
    let mut worst: f64 = 0.0;
    for (x, y) in pairs.iter().step_by(stride) {
        let src = DifferenceSource::new(oracle, x.clone(), y.clone()).unwrap();
        let draws: Vec<Vector> = (0..probes)
            .map(|k| src.draw_with_seed(seed.wrapping_mul(31).wrapping_add(k)))
            .collect();
        let mut mean = Vector::zeros(2);
        for v in &draws {
            mean += v;
        }
        mean /= probes as f64;
        let var = draws.iter().map(|v| (v - &mean).norm_squared()).sum::<f64>() / (probes as f64 - 1.0);
        worst = worst.max(var / (ell * ell * (x - y).norm_squared()));
    }
    worst
}

fn spider_suite(seed: u64) -> Vec<Check> {
    vec![Check::at_most(
        "max Var[D] / (l^2 |dx|^2) over iterates, 1000 probes",
        spider_variance_ratio(seed, 1000),
        1.0,
    )]
}

pub fn run_suite(suite: Suite, seed: u64) -> Report {
    let checks = match suite {
        Suite::Mlmc => mlmc_suite(seed),
        Suite::Lemma22 => lemma22_suite(seed),
        Suite::AcsaBound => acsa_bound_suite(seed),
        Suite::QscpSuccess => qscp_suite(seed),
        Suite::SpiderVariance => spider_suite(seed),
    };
    Report { suite, checks }
}
