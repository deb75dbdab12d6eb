use qstoch_core::fixtures::{hard_instance_subgradient, make_fixture, FixtureKind, FixtureParams, HardVariant, ProblemInstance};
use qstoch_core::linalg::{gaussian, project_ball};
use qstoch_core::oracle::{exact_mean, sample, sample_with_seed};
use qstoch_core::par::map_trials;
use qstoch_core::stats::chi_square;
use qstoch_core::{QueryLedger, Rng, Vector};

const N: u64 = 100_000;

fn fixture(kind: FixtureKind, d: usize, params: FixtureParams) -> ProblemInstance {
    make_fixture(kind, d, &params, &mut Rng::new(5, d as u64)).unwrap()
}

/// Per-coordinate mean and standard error of `n` draws.
fn moments(draws: &[Vector]) -> (Vector, Vector, f64) {
    let n = draws.len() as f64;
    let d = draws[0].len();
    let mean = draws.iter().fold(Vector::zeros(d), |a, v| a + v) / n;
    let var = draws
        .iter()
        .fold(Vector::zeros(d), |a, v| a + (v - &mean).component_mul(&(v - &mean)))
        / (n - 1.0);
    let second = draws.iter().map(|v| v.norm_squared()).sum::<f64>() / n;
    (mean, (var / n).map(f64::sqrt), second)
}

fn draws_at(p: &ProblemInstance, x: &Vector, seed: u64) -> Vec<Vector> {
    map_trials(N, |t| {
        let mut ledger = QueryLedger::new();
        sample(p.oracle.as_ref(), x, &mut Rng::new(seed, t), &mut ledger).unwrap()
    })
}

#[test]
fn noiseless_linear_samples_are_c() {
    let params = FixtureParams {
        center: Some(vec![0.3, -0.4, 1.2]),
        noise: Some(0.0),
        ..FixtureParams::default()
    };
    let p = fixture(FixtureKind::Linear, 3, params);
    let c = Vector::from_vec(vec![0.3, -0.4, 1.2]);
    let mut rng = Rng::new(1, 0);
    let mut ledger = QueryLedger::new();
    for _ in 0..100 {
        let x = gaussian(3, 2.0, &mut rng);
        assert_eq!(sample(p.oracle.as_ref(), &x, &mut rng, &mut ledger).unwrap(), c);
        assert_eq!(exact_mean(p.oracle.as_ref(), &x).unwrap(), c);
    }
    assert_eq!(ledger.classical_samples(), 100);
    assert_eq!(ledger.quantum_queries(), 0);
}

#[test]
fn noisy_quadratic_mean_at_e1() {
    let (d, sigma) = (4, 1.0);
    let params = FixtureParams {
        center: Some(vec![0.0; d]),
        noise: Some(sigma),
        ..FixtureParams::default()
    };
    let p = fixture(FixtureKind::QuadraticNoisy, d, params);
    let e1 = Vector::from_fn(d, |i, _| if i == 0 { 1.0 } else { 0.0 });
    assert_eq!(exact_mean(p.oracle.as_ref(), &e1).unwrap(), e1);
    let (mean, _, _) = moments(&draws_at(&p, &e1, 2));
    let band = 4.0 * sigma / (N as f64).sqrt();
    for i in 0..d {
        assert!((mean[i] - e1[i]).abs() <= band, "coordinate {i}: {}", mean[i]);
    }
}

#[test]
fn hard_instance_samples_are_bounded_and_uniform() {
    for variant in [HardVariant::LowDimensional, HardVariant::HighDimensional] {
        let params = FixtureParams {
            hard_variant: variant,
            radius: 2.0,
            columns: 3,
            ..FixtureParams::default()
        };
        let p = fixture(FixtureKind::HardInstance, 4, params);
        let h = p.hard.clone().unwrap();
        let x = Vector::from_vec(vec![1.5, -0.7, 0.2, 0.9]);
        let draws = draws_at(&p, &x, 3);
        assert!(draws.iter().all(|g| g.norm() <= p.lipschitz + 1e-12));
        // classes of identical g_hat vectors, weighted by how many (i, j) share them
        let mut classes: Vec<(Vector, f64)> = Vec::new();
        for i in 0..h.rows() {
            for j in 0..h.cols() {
                let g = hard_instance_subgradient(&h, i, j, &x);
                match classes.iter_mut().find(|(v, _)| (v - &g).norm() < 1e-12) {
                    Some(c) => c.1 += 1.0,
                    None => classes.push((g, 1.0)),
                }
            }
        }
        let mut counts = vec![0u64; classes.len()];
        for g in &draws {
            let k = classes
                .iter()
                .position(|(v, _)| (v - g).norm() < 1e-12)
                .expect("draw is one of the g_hat");
            counts[k] += 1;
        }
        let total = (h.rows() * h.cols()) as f64;
        let expected: Vec<f64> = classes.iter().map(|(_, m)| N as f64 * m / total).collect();
        let (chi, p_value) = chi_square(&counts, &expected);
        assert!(p_value > 1e-4, "{variant:?}: chi^2 = {chi}");
    }
}

#[test]
fn exact_means_of_fixtures() {
    let lin = fixture(FixtureKind::Linear, 2, FixtureParams::default());
    let x = Vector::from_vec(vec![0.2, 0.1]);
    assert_eq!(exact_mean(lin.oracle.as_ref(), &x).unwrap(), Vector::from_vec(vec![1.0, 0.0]));

    let quad = fixture(
        FixtureKind::Quadratic,
        2,
        FixtureParams {
            center: Some(vec![0.0, 0.0]),
            ..FixtureParams::default()
        },
    );
    assert_eq!(exact_mean(quad.oracle.as_ref(), &x).unwrap(), x);

    let params = FixtureParams {
        radius: 2.0,
        ..FixtureParams::default()
    };
    let hard = fixture(FixtureKind::HardInstance, 4, params);
    let h = hard.hard.clone().unwrap();
    let inside = Vector::from_vec(vec![0.3, -0.2, 0.1, 0.4]);
    let g = exact_mean(hard.oracle.as_ref(), &inside).unwrap();
    assert!((g + h.g_bar() / 3.0).norm() < 1e-12);
}

#[test]
fn shared_seed_difference_vanishes_at_equal_points() {
    for kind in [FixtureKind::QuadraticNoisy, FixtureKind::SeededSmoothNonconvex, FixtureKind::BallDistance] {
        let p = fixture(kind, 3, FixtureParams::default());
        let x = Vector::from_vec(vec![0.1, 0.4, -0.3]);
        for seed in 0..50 {
            let a = sample_with_seed(p.oracle.as_ref(), &x, seed).unwrap();
            let b = sample_with_seed(p.oracle.as_ref(), &x.clone(), seed).unwrap();
            assert_eq!((a - b).norm(), 0.0, "{kind}");
        }
    }
}

#[test]
fn mean_square_smoothness_holds() {
    let cases = [
        (FixtureKind::QuadraticNoisy, FixtureParams::default()),
        (
            FixtureKind::SeededSmoothNonconvex,
            FixtureParams {
                scale: 20.0,
                ..FixtureParams::default()
            },
        ),
    ];
    for (kind, params) in cases {
        let p = fixture(kind, 2, params);
        let ell = p.smoothness.unwrap();
        let mut rng = Rng::new(9, 0);
        for _ in 0..5 {
            let x = gaussian(2, 0.8, &mut rng);
            let y = &x + gaussian(2, 0.3, &mut rng);
            let sq = map_trials(N, |w| {
                let a = sample_with_seed(p.oracle.as_ref(), &x, w).unwrap();
                let b = sample_with_seed(p.oracle.as_ref(), &y, w).unwrap();
                (a - b).norm_squared()
            });
            let m = sq.iter().sum::<f64>() / N as f64;
            let bound = 1.05 * ell * ell * (&x - &y).norm_squared();
            assert!(m <= bound, "{kind}: {m} > {bound}");
        }
    }
}

#[test]
fn shared_seed_mean_is_the_gradient() {
    let p = fixture(FixtureKind::SeededSmoothNonconvex, 2, FixtureParams::default());
    let x = Vector::from_vec(vec![-0.4, 0.7]);
    let draws = map_trials(N, |w| sample_with_seed(p.oracle.as_ref(), &x, w).unwrap());
    let (mean, se, _) = moments(&draws);
    let g = exact_mean(p.oracle.as_ref(), &x).unwrap();
    for i in 0..2 {
        assert!((mean[i] - g[i]).abs() <= 5.0 * se[i], "coordinate {i}");
    }
}

#[test]
fn every_fixture_passes_the_law_checks() {
    let mut rng = Rng::new(12, 0);
    for kind in FixtureKind::ALL {
        for d in [1usize, 3] {
            let params = FixtureParams {
                noise: Some(0.5),
                ..FixtureParams::default()
            };
            let p = fixture(kind, d, params);
            for k in 0..3 {
                let x = project_ball(gaussian(d, p.radius, &mut rng), p.radius);
                let (mean, se, second) = moments(&draws_at(&p, &x, 100 + k));
                let g = exact_mean(p.oracle.as_ref(), &x).unwrap();
                for i in 0..d {
                    let tol = (5.0 * se[i]).max(1e-12);
                    assert!((mean[i] - g[i]).abs() <= tol, "{kind} d={d} coordinate {i}");
                }
                assert!(
                    second <= 1.05 * p.lipschitz * p.lipschitz,
                    "{kind} d={d}: second moment {second} vs L^2 = {}",
                    p.lipschitz * p.lipschitz
                );
            }
        }
    }
}
