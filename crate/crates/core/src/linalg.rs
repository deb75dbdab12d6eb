use nalgebra::DVector;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::Rng;

pub type Vector = DVector<f64>;

pub fn zeros(d: usize) -> Vector {
    Vector::zeros(d)
}

pub fn basis(d: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(d);
    v[i] = 1.0;
    v
}

pub fn gaussian(d: usize, scale: f64, rng: &mut Rng) -> Vector {
    Vector::from_fn(d, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        scale * z
    })
}

/// Uniform direction on the unit sphere. In d = 1 this is a random sign.
pub fn unit_vector(d: usize, rng: &mut Rng) -> Vector {
    loop {
        let v = gaussian(d, 1.0, rng);
        let n = v.norm();
        if n > 1e-300 {
            return v / n;
        }
    }
}

/// Euclidean projection onto the ball of the given radius around the origin.
pub fn project_ball(x: Vector, radius: f64) -> Vector {
    let n = x.norm();
    if n <= radius {
        x
    } else {
        x * (radius / n)
    }
}

pub fn check_point(x: &Vector, dim: usize, what: &'static str) -> Result<()> {
    if x.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    Ok(())
}
