//! Analytic test objectives with stochastic gradient oracles.
//!
//! Unless noted, the noise is additive `N(0, (sigma^2/d) I)`; the shared
//! seed indexes that noise, so differences of seeded draws are noiseless.

use crate::linalg::{gaussian, Vector};
use crate::oracle::{GradientOracle, OracleBounds};
use crate::rng::Rng;

use super::smoothing::{smoothed_distance, smoothed_distance_gradient};

/// Stream reserved for seeded draws.
const SEEDED_STREAM: u64 = 0x5eed;

fn additive_noise(d: usize, sigma: f64, rng: &mut Rng) -> Vector {
    gaussian(d, sigma / (d as f64).sqrt(), rng)
}

/// `f(x) = <c, x>`.
#[derive(Clone, Debug)]
pub struct LinearOracle {
    pub c: Vector,
    pub noise: f64,
}

impl GradientOracle for LinearOracle {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn bounds(&self) -> OracleBounds {
        OracleBounds {
            lipschitz: (self.c.norm_squared() + self.noise * self.noise).sqrt(),
            variance: self.noise,
            mean_square_smoothness: Some(0.0),
        }
    }

    fn draw(&self, _x: &Vector, rng: &mut Rng) -> Vector {
        &self.c + additive_noise(self.dim(), self.noise, rng)
    }

    fn draw_mean(&self, _x: &Vector, n: u64, rng: &mut Rng) -> Vector {
        &self.c + additive_noise(self.dim(), self.noise / (n.max(1) as f64).sqrt(), rng)
    }

    fn supports_shared_seed(&self) -> bool {
        true
    }

    fn draw_seeded(&self, x: &Vector, seed: u64) -> Option<Vector> {
        Some(self.draw(x, &mut Rng::new(seed, SEEDED_STREAM)))
    }

    fn gradient(&self, _x: &Vector) -> Option<Vector> {
        Some(self.c.clone())
    }

    fn smoothed_gradient(&self, _x: &Vector, _radius: f64) -> Option<Vector> {
        Some(self.c.clone())
    }

    fn value(&self, x: &Vector) -> Option<f64> {
        Some(self.c.dot(x))
    }

    fn smoothed_value(&self, x: &Vector, _radius: f64) -> Option<f64> {
        self.value(x)
    }
}

/// `f(x) = L |x - center|`.
#[derive(Clone, Debug)]
pub struct BallDistanceOracle {
    pub center: Vector,
    pub scale: f64,
    pub noise: f64,
}

impl GradientOracle for BallDistanceOracle {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn bounds(&self) -> OracleBounds {
        OracleBounds {
            lipschitz: (self.scale * self.scale + self.noise * self.noise).sqrt(),
            variance: self.noise,
            mean_square_smoothness: None,
        }
    }

    fn draw(&self, x: &Vector, rng: &mut Rng) -> Vector {
        self.gradient(x).unwrap() + additive_noise(self.dim(), self.noise, rng)
    }

    fn draw_mean(&self, x: &Vector, n: u64, rng: &mut Rng) -> Vector {
        self.gradient(x).unwrap() + additive_noise(self.dim(), self.noise / (n.max(1) as f64).sqrt(), rng)
    }

    fn supports_shared_seed(&self) -> bool {
        true
    }

    fn draw_seeded(&self, x: &Vector, seed: u64) -> Option<Vector> {
        Some(self.draw(x, &mut Rng::new(seed, SEEDED_STREAM)))
    }

    fn gradient(&self, x: &Vector) -> Option<Vector> {
        Some(smoothed_distance_gradient(x, &self.center, self.scale, 0.0))
    }

    fn smoothed_gradient(&self, x: &Vector, radius: f64) -> Option<Vector> {
        Some(smoothed_distance_gradient(x, &self.center, self.scale, radius))
    }

    fn value(&self, x: &Vector) -> Option<f64> {
        Some(self.scale * (x - &self.center).norm())
    }

    fn smoothed_value(&self, x: &Vector, radius: f64) -> Option<f64> {
        Some(smoothed_distance(x, &self.center, self.scale, radius))
    }
}

/// `f(x) = (l/2) |x - center|^2`. The declared second-moment bound holds on
/// the ball of radius `domain` and its Gaussian blur of width up to `domain / (4 sqrt(d))`.
#[derive(Clone, Debug)]
pub struct QuadraticOracle {
    pub center: Vector,
    pub smoothness: f64,
    pub noise: f64,
    pub domain: f64,
}

impl GradientOracle for QuadraticOracle {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn bounds(&self) -> OracleBounds {
        let reach = self.domain + self.center.norm();
        let l = self.smoothness;
        OracleBounds {
            lipschitz: (l * l * (reach * reach + self.domain * self.domain / 16.0) + self.noise * self.noise)
                .sqrt(),
            variance: self.noise,
            mean_square_smoothness: Some(self.smoothness),
        }
    }

    fn draw(&self, x: &Vector, rng: &mut Rng) -> Vector {
        self.gradient(x).unwrap() + additive_noise(self.dim(), self.noise, rng)
    }

    fn draw_mean(&self, x: &Vector, n: u64, rng: &mut Rng) -> Vector {
        self.gradient(x).unwrap() + additive_noise(self.dim(), self.noise / (n.max(1) as f64).sqrt(), rng)
    }

    fn supports_shared_seed(&self) -> bool {
        true
    }

    fn draw_seeded(&self, x: &Vector, seed: u64) -> Option<Vector> {
        Some(self.draw(x, &mut Rng::new(seed, SEEDED_STREAM)))
    }

    fn gradient(&self, x: &Vector) -> Option<Vector> {
        Some((x - &self.center) * self.smoothness)
    }

    fn smoothed_gradient(&self, x: &Vector, _radius: f64) -> Option<Vector> {
        self.gradient(x)
    }

    fn value(&self, x: &Vector) -> Option<f64> {
        Some(0.5 * self.smoothness * (x - &self.center).norm_squared())
    }

    fn smoothed_value(&self, x: &Vector, radius: f64) -> Option<f64> {
        let d = self.dim() as f64;
        Some(self.value(x)? + 0.5 * self.smoothness * d * radius * radius)
    }
}

/// Smooth non-convex bump `f(x) = A (s^2 / (s^2 + |x - a|^2))^(k/2)` that
/// decays to `inf f = 0` away from `a`.
///
/// Seeded gradients are `(1 + tau xi) grad f(x) + sigma0 z` with standard
/// normal `xi` and `z ~ N(0, I/d)`, giving mean-squared smoothness
/// `sqrt(1 + tau^2) l_f` and variance `tau^2 G^2 + sigma0^2`.
#[derive(Clone, Debug)]
pub struct PlateauOracle {
    pub peak: Vector,
    pub height: f64,
    pub exponent: f64,
    pub width: f64,
    pub relative_noise: f64,
    pub noise: f64,
}

impl PlateauOracle {
    /// `l_f = k A / s^2`.
    pub fn gradient_smoothness(&self) -> f64 {
        self.exponent * self.height / (self.width * self.width)
    }

    /// `max |grad f|`, attained at `|x - a|^2 = s^2 / (k + 1)`.
    pub fn max_gradient(&self) -> f64 {
        let k = self.exponent;
        let u: f64 = 1.0 / (k + 1.0);
        k * self.height / self.width * u.sqrt() * (1.0 + u).powf(-k / 2.0 - 1.0)
    }

    fn seeded(&self, x: &Vector, rng: &mut Rng) -> Vector {
        let xi: f64 = gaussian(1, 1.0, rng)[0];
        self.gradient(x).unwrap() * (1.0 + self.relative_noise * xi) + additive_noise(self.dim(), self.noise, rng)
    }
}

impl GradientOracle for PlateauOracle {
    fn dim(&self) -> usize {
        self.peak.len()
    }

    fn bounds(&self) -> OracleBounds {
        let g = self.max_gradient();
        let tau2 = self.relative_noise * self.relative_noise;
        let s2 = self.noise * self.noise;
        OracleBounds {
            lipschitz: (g * g * (1.0 + tau2) + s2).sqrt(),
            variance: (tau2 * g * g + s2).sqrt(),
            mean_square_smoothness: Some((1.0 + tau2).sqrt() * self.gradient_smoothness()),
        }
    }

    fn draw(&self, x: &Vector, rng: &mut Rng) -> Vector {
        self.seeded(x, rng)
    }

    fn supports_shared_seed(&self) -> bool {
        true
    }

    fn draw_seeded(&self, x: &Vector, seed: u64) -> Option<Vector> {
        Some(self.seeded(x, &mut Rng::new(seed, SEEDED_STREAM)))
    }

    fn gradient(&self, x: &Vector) -> Option<Vector> {
        let diff = x - &self.peak;
        let s2 = self.width * self.width;
        let u = diff.norm_squared() / s2;
        let k = self.exponent;
        Some(diff * (-k * self.height / s2 * (1.0 + u).powf(-k / 2.0 - 1.0)))
    }

    fn value(&self, x: &Vector) -> Option<f64> {
        let u = (x - &self.peak).norm_squared() / (self.width * self.width);
        Some(self.height * (1.0 + u).powf(-self.exponent / 2.0))
    }
}
