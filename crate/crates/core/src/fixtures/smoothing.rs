//! Gaussian smoothing of the Euclidean norm in closed form.
//!
//! For `u ~ N(mu, I_d)` and `z = |mu|^2 / 2`:
//!
//! ```text
//! E|u|       = sqrt(2) G((d+1)/2) / G(d/2)     1F1(-1/2; d/2;   -z)
//! E[u / |u|] = mu G((d+1)/2) / (sqrt(2) G(d/2+1)) 1F1(1/2; d/2+1; -z)
//! ```

use statrs::function::gamma::ln_gamma;

use crate::linalg::Vector;

const SERIES_LIMIT: f64 = 30.0;

/// `1F1(a; b; -z)` for `z >= 0` and `b > 0`.
pub fn hyp1f1_neg(a: f64, b: f64, z: f64) -> f64 {
    assert!(z >= 0.0 && b > 0.0);
    if z <= SERIES_LIMIT {
        // Kummer: 1F1(a; b; -z) = e^-z 1F1(b - a; b; z), all terms positive for b > a
        let c = b - a;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 0.0;
        loop {
            term *= (c + k) / (b + k) * z / (k + 1.0);
            sum += term;
            k += 1.0;
            if term.abs() <= 1e-17 * sum.abs() && k > z {
                break;
            }
        }
        (-z).exp() * sum
    } else {
        // large-argument expansion; the exponentially small part is dropped
        let scale = (ln_gamma(b) - ln_gamma(b - a)).exp() * z.powf(-a);
        let mut term: f64 = 1.0;
        let mut sum: f64 = 1.0;
        for k in 0..60 {
            let k = k as f64;
            let next = term * (a + k) * (a - b + 1.0 + k) / ((k + 1.0) * z);
            if next.abs() >= term.abs() || next.abs() <= 1e-17 * sum.abs() {
                break;
            }
            term = next;
            sum += term;
        }
        scale * sum
    }
}

fn gamma_ratio(num: f64, den: f64) -> f64 {
    (ln_gamma(num) - ln_gamma(den)).exp()
}

/// `E|u|` for `u ~ N(mu, I_d)` with `|mu| = m`.
pub fn mean_norm(m: f64, d: usize) -> f64 {
    let d = d as f64;
    let z = 0.5 * m * m;
    std::f64::consts::SQRT_2 * gamma_ratio((d + 1.0) / 2.0, d / 2.0) * hyp1f1_neg(-0.5, d / 2.0, z)
}

/// `E[u / |u|]` for `u ~ N(mu, I_d)`.
pub fn mean_direction(mu: &Vector) -> Vector {
    let d = mu.len() as f64;
    let z = 0.5 * mu.norm_squared();
    let c = gamma_ratio((d + 1.0) / 2.0, d / 2.0 + 1.0) / std::f64::consts::SQRT_2
        * hyp1f1_neg(0.5, d / 2.0 + 1.0, z);
    mu * c
}

/// `E_y L|x - y - center|` with `y ~ N(0, r^2 I)`.
pub fn smoothed_distance(x: &Vector, center: &Vector, lipschitz: f64, r: f64) -> f64 {
    let diff = x - center;
    if r == 0.0 {
        return lipschitz * diff.norm();
    }
    lipschitz * r * mean_norm(diff.norm() / r, x.len())
}

/// Gradient of [`smoothed_distance`].
pub fn smoothed_distance_gradient(x: &Vector, center: &Vector, lipschitz: f64, r: f64) -> Vector {
    let diff = x - center;
    if r == 0.0 {
        let n = diff.norm();
        return if n > 0.0 { diff * (lipschitz / n) } else { diff * 0.0 };
    }
    mean_direction(&(diff / r)) * lipschitz
}
