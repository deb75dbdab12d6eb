//! Lower-bound instances built from a Search-of-Parity matrix.
//!
//! For `A in {0,1}^{N x M}` and vectors `g_ij` with `|g_ij| <= L`,
//! `f_ij(x) = -(1/3)<x, g_ij> + (2L/3) max(0, |x| - R/2)` and the objective is
//! the uniform average over `(i, j)`.

use rand::seq::SliceRandom;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::Vector;
use crate::oracle::{GradientOracle, OracleBounds};
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HardVariant {
    /// `N = d` rows, `g_ij = c (-1)^(1 + A_ij) e_i`.
    LowDimensional,
    /// `M = 1`, `N = d`, `g_i = L A_i sqrt(N / (2(N-1))) e_i`.
    HighDimensional,
}

/// Serializes the matrix and scalars; rebuild with [`HardInstance::new`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HardInstance {
    pub variant: HardVariant,
    pub matrix: Vec<Vec<u8>>,
    pub lipschitz: f64,
    pub radius: f64,
    #[serde(skip)]
    vectors: Vec<Vector>,
    #[serde(skip)]
    g_bar: Vector,
}

/// `floor(N/2)` rows of weight `floor(M/2)`, the others of weight
/// `floor(M/2) + 1`, with rows and entries shuffled.
pub fn random_matrix(rows: usize, cols: usize, rng: &mut Rng) -> Vec<Vec<u8>> {
    let light = cols / 2;
    let mut out: Vec<Vec<u8>> = (0..rows)
        .map(|i| {
            let w = if i < rows / 2 { light } else { (light + 1).min(cols) };
            let mut row: Vec<u8> = (0..cols).map(|j| u8::from(j < w)).collect();
            row.shuffle(rng);
            row
        })
        .collect();
    out.shuffle(rng);
    out
}

impl HardInstance {
    pub fn new(variant: HardVariant, matrix: Vec<Vec<u8>>, lipschitz: f64, radius: f64) -> Result<Self> {
        let n = matrix.len();
        if n == 0 {
            return Err(invalid("hard instance needs at least one row"));
        }
        let m = matrix[0].len();
        if m == 0 || matrix.iter().any(|r| r.len() != m) {
            return Err(invalid("hard instance rows must be nonempty and of equal length"));
        }
        if matrix.iter().flatten().any(|&v| v > 1) {
            return Err(invalid("hard instance entries must be 0 or 1"));
        }
        if !(lipschitz > 0.0 && radius > 0.0) {
            return Err(invalid("hard instance needs L > 0 and R > 0"));
        }
        let d = n;
        let vectors: Vec<Vector> = match variant {
            HardVariant::LowDimensional => {
                let nm = (n * m) as f64;
                let c = lipschitz * nm / (4.0 * nm * nm - (d * d) as f64).sqrt();
                matrix
                    .iter()
                    .enumerate()
                    .flat_map(|(i, row)| {
                        row.iter().map(move |&a| {
                            let mut g = Vector::zeros(d);
                            g[i] = if a == 1 { c } else { -c };
                            g
                        })
                    })
                    .collect()
            }
            HardVariant::HighDimensional => {
                if m != 1 || n < 2 {
                    return Err(invalid("high-dimensional hard instance needs one column and N >= 2"));
                }
                let c = lipschitz * (n as f64 / (2.0 * (n as f64 - 1.0))).sqrt();
                matrix
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        let mut g = Vector::zeros(d);
                        g[i] = c * row[0] as f64;
                        g
                    })
                    .collect()
            }
        };
        let mut g_bar = Vector::zeros(d);
        for g in &vectors {
            g_bar += g;
        }
        g_bar /= vectors.len() as f64;
        Ok(Self {
            variant,
            matrix,
            lipschitz,
            radius,
            vectors,
            g_bar,
        })
    }

    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn cols(&self) -> usize {
        self.matrix[0].len()
    }

    pub fn g(&self, i: usize, j: usize) -> &Vector {
        &self.vectors[i * self.cols() + j]
    }

    pub fn g_bar(&self) -> &Vector {
        &self.g_bar
    }

    /// `b_i = 1` for rows of weight `floor(M/2) + 1`, else 0.
    pub fn b(&self) -> Vector {
        let heavy = self.cols() / 2 + 1;
        Vector::from_iterator(
            self.rows(),
            self.matrix
                .iter()
                .map(|r| f64::from(r.iter().map(|&v| v as usize).sum::<usize>() == heavy)),
        )
    }

    /// `x* = (R/2) g_bar / |g_bar|`, or `None` when `g_bar = 0`.
    pub fn minimizer(&self) -> Option<Vector> {
        let n = self.g_bar.norm();
        (n > 0.0).then(|| &self.g_bar * (self.radius / (2.0 * n)))
    }

    /// `-(R/6) |g_bar|`.
    pub fn optimal_value(&self) -> f64 {
        -self.radius * self.g_bar.norm() / 6.0
    }

    fn penalty_gradient(&self, x: &Vector) -> Vector {
        let n = x.norm();
        if n > self.radius / 2.0 {
            x * (2.0 * self.lipschitz / (3.0 * n))
        } else {
            Vector::zeros(x.len())
        }
    }

    fn penalty(&self, x: &Vector) -> f64 {
        2.0 * self.lipschitz / 3.0 * (x.norm() - self.radius / 2.0).max(0.0)
    }
}

/// Subgradient of `f_ij` at `x`: `-(1/3) g_ij + (2L/3) 1[|x| > R/2] x / |x|`.
pub fn hard_instance_subgradient(inst: &HardInstance, i: usize, j: usize, x: &Vector) -> Vector {
    inst.penalty_gradient(x) - inst.g(i, j) / 3.0
}

impl GradientOracle for HardInstance {
    fn dim(&self) -> usize {
        self.rows()
    }

    fn bounds(&self) -> OracleBounds {
        let spread = self
            .vectors
            .iter()
            .map(|g| (g - &self.g_bar).norm_squared())
            .sum::<f64>()
            / self.vectors.len() as f64;
        OracleBounds {
            lipschitz: self.lipschitz,
            variance: spread.sqrt() / 3.0,
            mean_square_smoothness: None,
        }
    }

    fn draw(&self, x: &Vector, rng: &mut Rng) -> Vector {
        let k = rng.below(self.vectors.len() as u64) as usize;
        self.penalty_gradient(x) - &self.vectors[k] / 3.0
    }

    fn draw_mean(&self, x: &Vector, n: u64, rng: &mut Rng) -> Vector {
        // multinomial counts over the atoms via sequential binomials
        let total = self.vectors.len();
        let mut acc = Vector::zeros(self.dim());
        let mut remaining = n;
        for (k, g) in self.vectors.iter().enumerate() {
            if remaining == 0 {
                break;
            }
            let count = if k + 1 == total {
                remaining
            } else {
                Binomial::new(remaining, 1.0 / (total - k) as f64)
                    .expect("valid binomial")
                    .sample(rng)
            };
            acc.axpy(count as f64, g, 1.0);
            remaining -= count;
        }
        self.penalty_gradient(x) - acc / (3.0 * n.max(1) as f64)
    }

    fn gradient(&self, x: &Vector) -> Option<Vector> {
        Some(self.penalty_gradient(x) - &self.g_bar / 3.0)
    }

    fn value(&self, x: &Vector) -> Option<f64> {
        Some(-x.dot(&self.g_bar) / 3.0 + self.penalty(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_has_the_weight_profile() {
        let mut rng = Rng::new(4, 0);
        for (n, m) in [(4, 6), (5, 7), (2, 1), (6, 2)] {
            let a = random_matrix(n, m, &mut rng);
            let light = a.iter().filter(|r| r.iter().map(|&v| v as usize).sum::<usize>() == m / 2).count();
            assert_eq!(light, n / 2, "n={n} m={m}");
        }
    }

    #[test]
    fn all_ones_gives_diagonal_mean() {
        let inst = HardInstance::new(HardVariant::LowDimensional, vec![vec![1; 4]; 3], 1.0, 2.0).unwrap();
        let g = inst.g_bar();
        assert!((g[0] - g[1]).abs() < 1e-15 && (g[1] - g[2]).abs() < 1e-15);
        let nm = 12.0f64;
        let c = nm / (4.0 * nm * nm - 9.0).sqrt();
        assert!((g[0] - c / 3.0).abs() < 1e-15);
    }

    #[test]
    fn outside_penalty_is_two_thirds_l() {
        let inst = HardInstance::new(HardVariant::LowDimensional, vec![vec![1, 0]; 2], 1.0, 2.0).unwrap();
        let u = Vector::from_vec(vec![0.6, 0.8]);
        let x = &u * 2.0;
        let s = hard_instance_subgradient(&inst, 0, 0, &x);
        let want = &u * (2.0 / 3.0) - inst.g(0, 0) / 3.0;
        assert!((s - want).norm() < 1e-15);
    }

    #[test]
    fn high_dimensional_vectors_are_bounded() {
        let inst = HardInstance::new(HardVariant::HighDimensional, vec![vec![1], vec![0], vec![1]], 1.0, 1.0).unwrap();
        let c = (3.0f64 / 4.0).sqrt();
        assert!((inst.g(0, 0)[0] - c).abs() < 1e-15);
        assert!(inst.g(1, 0).norm() == 0.0);
        assert_eq!(inst.b(), Vector::from_vec(vec![1.0, 0.0, 1.0]));
    }

    #[test]
    fn rejects_malformed_matrices() {
        assert!(HardInstance::new(HardVariant::LowDimensional, vec![], 1.0, 1.0).is_err());
        assert!(HardInstance::new(HardVariant::LowDimensional, vec![vec![1, 0], vec![1]], 1.0, 1.0).is_err());
        assert!(HardInstance::new(HardVariant::LowDimensional, vec![vec![2]], 1.0, 1.0).is_err());
        assert!(HardInstance::new(HardVariant::HighDimensional, vec![vec![1, 0], vec![0, 1]], 1.0, 1.0).is_err());
    }
}
