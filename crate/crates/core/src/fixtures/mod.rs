//! Test problems with analytic truth channels.

pub mod hard;
pub mod oracles;
pub mod smoothing;
pub mod truth;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{basis, Vector};
use crate::oracle::GradientOracle;
use crate::rng::Rng;

pub use hard::{hard_instance_subgradient, random_matrix, HardInstance, HardVariant};
pub use oracles::{BallDistanceOracle, LinearOracle, PlateauOracle, QuadraticOracle};
pub use truth::{offline_truth, source_truth, TruthEstimate, TruthTarget};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureKind {
    Linear,
    BallDistance,
    Quadratic,
    QuadraticNoisy,
    SeededSmoothNonconvex,
    HardInstance,
}

impl FixtureKind {
    pub const ALL: [FixtureKind; 6] = [
        FixtureKind::Linear,
        FixtureKind::BallDistance,
        FixtureKind::Quadratic,
        FixtureKind::QuadraticNoisy,
        FixtureKind::SeededSmoothNonconvex,
        FixtureKind::HardInstance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FixtureKind::Linear => "linear",
            FixtureKind::BallDistance => "ball-distance",
            FixtureKind::Quadratic => "quadratic",
            FixtureKind::QuadraticNoisy => "quadratic-noisy",
            FixtureKind::SeededSmoothNonconvex => "seeded-smooth-nonconvex",
            FixtureKind::HardInstance => "hard-instance",
        }
    }
}

impl fmt::Display for FixtureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FixtureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid(format!("unknown fixture kind {s:?}")))
    }
}

/// Shape parameters. Every field has a default so that configs only name
/// what they change.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixtureParams {
    /// Feasible radius `R`.
    pub radius: f64,
    /// `L` for linear, ball-distance and hard instances, `l` for quadratics,
    /// the height `A` for the plateau.
    pub scale: f64,
    /// Additive noise level `sigma`; `quadratic-noisy` uses 1 when unset.
    pub noise: Option<f64>,
    /// Direction `c`, minimizer, or peak, depending on the kind.
    pub center: Option<Vec<f64>>,
    pub plateau_exponent: f64,
    pub plateau_width: f64,
    pub relative_noise: f64,
    pub columns: usize,
    pub hard_variant: HardVariant,
}

impl Default for FixtureParams {
    fn default() -> Self {
        Self {
            radius: 1.0,
            scale: 1.0,
            noise: None,
            center: None,
            plateau_exponent: 0.25,
            plateau_width: 1.0,
            relative_noise: 0.5,
            columns: 8,
            hard_variant: HardVariant::LowDimensional,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Optimum {
    pub point: Vector,
    pub value: f64,
}

/// Objective, oracle and geometry of one test problem.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub kind: FixtureKind,
    pub oracle: Arc<dyn GradientOracle>,
    pub radius: f64,
    pub lipschitz: f64,
    pub variance: f64,
    pub smoothness: Option<f64>,
    /// `f(0) - inf f` where known.
    pub gap: Option<f64>,
    /// Minimizer over the ball of radius `radius`.
    pub optimum: Option<Optimum>,
    pub hard: Option<Arc<HardInstance>>,
}

impl ProblemInstance {
    pub fn dim(&self) -> usize {
        self.oracle.dim()
    }

    pub fn value(&self, x: &Vector) -> Option<f64> {
        self.oracle.value(x)
    }

    /// `f(x) - f*` over the ball.
    pub fn gap_at(&self, x: &Vector) -> Option<f64> {
        Some(self.value(x)? - self.optimum.as_ref()?.value)
    }

    pub fn gradient_norm(&self, x: &Vector) -> Option<f64> {
        self.oracle.gradient(x).map(|g| g.norm())
    }

    fn from_oracle(kind: FixtureKind, oracle: Arc<dyn GradientOracle>, radius: f64) -> Self {
        let b = oracle.bounds();
        Self {
            kind,
            radius,
            lipschitz: b.lipschitz,
            variance: b.variance,
            smoothness: b.mean_square_smoothness,
            gap: None,
            optimum: None,
            hard: None,
            oracle,
        }
    }
}

fn center_or(params: &FixtureParams, d: usize, default: impl FnOnce() -> Vector) -> Result<Vector> {
    match &params.center {
        Some(c) if c.len() != d => Err(Error::DimensionMismatch {
            expected: d,
            got: c.len(),
        }),
        Some(c) if c.iter().any(|v| !v.is_finite()) => Err(Error::NonFinite("fixture center")),
        Some(c) => Ok(Vector::from_column_slice(c)),
        None => Ok(default()),
    }
}

/// `(R/2)(1, ..., 1)/sqrt(d)`.
fn diagonal(d: usize, radius: f64) -> Vector {
    Vector::from_element(d, radius / (2.0 * (d as f64).sqrt()))
}

pub fn make_fixture(kind: FixtureKind, d: usize, params: &FixtureParams, rng: &mut Rng) -> Result<ProblemInstance> {
    if d == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let r = params.radius;
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("radius must be positive, got {r}")));
    }
    if !(params.scale > 0.0 && params.scale.is_finite()) {
        return Err(invalid(format!("scale must be positive, got {}", params.scale)));
    }
    let default_noise = if kind == FixtureKind::QuadraticNoisy { 1.0 } else { 0.0 };
    let noise = params.noise.unwrap_or(default_noise);
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(invalid(format!("noise must be non-negative, got {noise}")));
    }
    let s = params.scale;

    let inst = match kind {
        FixtureKind::Linear => {
            let c = center_or(params, d, || basis(d, 0) * s)?;
            let cn = c.norm();
            let optimum = (cn > 0.0).then(|| Optimum {
                point: &c * (-r / cn),
                value: -r * cn,
            });
            let mut p = ProblemInstance::from_oracle(kind, Arc::new(LinearOracle { c, noise }), r);
            p.optimum = optimum;
            p
        }
        FixtureKind::BallDistance => {
            let center = center_or(params, d, || diagonal(d, r))?;
            let optimum = if center.norm() <= r {
                Optimum {
                    point: center.clone(),
                    value: 0.0,
                }
            } else {
                let n = center.norm();
                Optimum {
                    point: &center * (r / n),
                    value: s * (n - r),
                }
            };
            let gap = s * center.norm() - optimum.value;
            let mut p = ProblemInstance::from_oracle(
                kind,
                Arc::new(BallDistanceOracle {
                    center,
                    scale: s,
                    noise,
                }),
                r,
            );
            p.optimum = Some(optimum);
            p.gap = Some(gap);
            p
        }
        FixtureKind::Quadratic | FixtureKind::QuadraticNoisy => {
            let center = center_or(params, d, || diagonal(d, r))?;
            let cn = center.norm();
            let point = if cn <= r { center.clone() } else { &center * (r / cn) };
            let value = 0.5 * s * (&point - &center).norm_squared();
            let gap = 0.5 * s * cn * cn;
            let mut p = ProblemInstance::from_oracle(
                kind,
                Arc::new(QuadraticOracle {
                    center,
                    smoothness: s,
                    noise,
                    domain: r,
                }),
                r,
            );
            p.optimum = Some(Optimum { point, value });
            p.gap = Some(gap);
            p
        }
        FixtureKind::SeededSmoothNonconvex => {
            if !(params.plateau_exponent > 0.0 && params.plateau_exponent <= 3.0) {
                return Err(invalid("plateau exponent must lie in (0, 3]"));
            }
            if !(params.plateau_width > 0.0) || !(params.relative_noise >= 0.0) {
                return Err(invalid("plateau width must be positive and relative noise non-negative"));
            }
            let peak = center_or(params, d, || basis(d, 0) * 0.5)?;
            let oracle = PlateauOracle {
                peak,
                height: s,
                exponent: params.plateau_exponent,
                width: params.plateau_width,
                relative_noise: params.relative_noise,
                noise: params.noise.unwrap_or(0.5),
            };
            let gap = oracle.value(&Vector::zeros(d)).unwrap();
            let mut p = ProblemInstance::from_oracle(kind, Arc::new(oracle), r);
            p.gap = Some(gap);
            p
        }
        FixtureKind::HardInstance => {
            let cols = match params.hard_variant {
                HardVariant::LowDimensional => params.columns.max(1),
                HardVariant::HighDimensional => 1,
            };
            let a = random_matrix(d, cols, rng);
            let h = Arc::new(HardInstance::new(params.hard_variant, a, s, r)?);
            let mut p = ProblemInstance::from_oracle(kind, h.clone(), r);
            p.optimum = h.minimizer().map(|point| Optimum {
                point,
                value: h.optimal_value(),
            });
            p.gap = Some(-h.optimal_value());
            p.hard = Some(h);
            p
        }
    };
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_optimum() {
        let p = make_fixture(FixtureKind::Linear, 3, &FixtureParams::default(), &mut Rng::new(0, 0)).unwrap();
        let o = p.optimum.unwrap();
        assert_eq!(o.value, -1.0);
        assert_eq!(o.point, -basis(3, 0));
    }

    #[test]
    fn kinds_round_trip_through_names() {
        for k in FixtureKind::ALL {
            assert_eq!(k.name().parse::<FixtureKind>().unwrap(), k);
        }
        assert!("cubic".parse::<FixtureKind>().is_err());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let mut rng = Rng::new(0, 0);
        let bad = FixtureParams {
            radius: -1.0,
            ..FixtureParams::default()
        };
        assert!(make_fixture(FixtureKind::Linear, 2, &bad, &mut rng).is_err());
        let wrong_dim = FixtureParams {
            center: Some(vec![1.0]),
            ..FixtureParams::default()
        };
        assert!(make_fixture(FixtureKind::Quadratic, 2, &wrong_dim, &mut rng).is_err());
        assert!(make_fixture(FixtureKind::Linear, 0, &FixtureParams::default(), &mut rng).is_err());
    }

    #[test]
    fn capability_flags() {
        let mut rng = Rng::new(0, 0);
        for k in FixtureKind::ALL {
            let p = make_fixture(k, 2, &FixtureParams::default(), &mut rng).unwrap();
            assert!(p.oracle.gradient(&Vector::zeros(2)).is_some());
            let seeded = p.oracle.supports_shared_seed();
            assert_eq!(seeded, k != FixtureKind::HardInstance, "{k}");
        }
    }
}
