//! Small dense complex linear algebra: inner products, Gram matrices and a
//! Hermitian positive-definite Cholesky solver.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Matrices whose Cholesky diagonal ratio squared exceeds this are treated
/// as numerically singular.
pub const MAX_CONDITION_ESTIMATE: f64 = 1e13;

/// `a^H b`.
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Dense square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.n + col] = value;
    }

    pub fn add_to_diagonal(&mut self, value: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += value;
        }
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

/// Gram matrix `G_ij = c_i^H c_j` of the given columns.
///
/// Only the upper triangle is computed; the lower one is filled by
/// conjugate symmetry so the result is exactly Hermitian.
pub fn gram(columns: &[&[Complex64]]) -> Matrix {
    let k = columns.len();
    let mut g = Matrix::zeros(k);
    for i in 0..k {
        for j in i..k {
            let v = if i == j {
                Complex64::new(norm_sqr(columns[i]), 0.0)
            } else {
                dot(columns[i], columns[j])
            };
            g.set(i, j, v);
            g.set(j, i, v.conj());
        }
    }
    g
}

/// Lower-triangular factor `L` with `A = L L^H`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
    condition_estimate: f64,
}

impl Cholesky {
    /// Factors a Hermitian positive-definite matrix. Only the lower
    /// triangle of `a` is read.
    pub fn factor(a: &Matrix) -> Result<Self> {
        let n = a.dim();
        let mut l = Matrix::zeros(n);
        let mut max_diag: f64 = 0.0;
        let mut min_diag = f64::INFINITY;
        for j in 0..n {
            let mut d = a.get(j, j).re;
            for k in 0..j {
                d -= l.get(j, k).norm_sqr();
            }
            if !(d.is_finite() && d > 0.0) {
                let condition_estimate = if min_diag.is_finite() {
                    (max_diag / min_diag).powi(2)
                } else {
                    f64::INFINITY
                };
                return Err(Error::Solver {
                    reason: format!("matrix is not positive definite (pivot {j} = {d:e})"),
                    condition_estimate,
                });
            }
            let ljj = d.sqrt();
            max_diag = max_diag.max(ljj);
            min_diag = min_diag.min(ljj);
            l.set(j, j, Complex64::new(ljj, 0.0));
            for i in j + 1..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k).conj();
                }
                l.set(i, j, s / ljj);
            }
        }
        let condition_estimate = if n == 0 {
            1.0
        } else {
            (max_diag / min_diag).powi(2)
        };
        if condition_estimate > MAX_CONDITION_ESTIMATE {
            return Err(Error::Solver {
                reason: "matrix is too ill-conditioned".into(),
                condition_estimate,
            });
        }
        Ok(Self {
            l,
            condition_estimate,
        })
    }

    pub fn dim(&self) -> usize {
        self.l.dim()
    }

    /// Cheap lower bound on the 2-norm condition number.
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    /// Solves `A x = b` by forward and back substitution.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(b.len(), n, "right-hand side has the wrong length");
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l.get(i, k) * y[k];
            }
            y[i] = s / self.l.get(i, i).re;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l.get(k, i).conj() * y[k];
            }
            y[i] = s / self.l.get(i, i).re;
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn solves_hermitian_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 2, 5, 12] {
            let cols: Vec<_> = (0..n + 2).map(|_| random_vec(&mut rng, n)).collect();
            // A = Σ c c^H + 0.1 I, built explicitly.
            let mut a = Matrix::zeros(n);
            for c in &cols {
                for i in 0..n {
                    for j in 0..n {
                        a.set(i, j, a.get(i, j) + c[i] * c[j].conj());
                    }
                }
            }
            a.add_to_diagonal(0.1);
            let b = random_vec(&mut rng, n);
            let x = Cholesky::factor(&a).unwrap().solve(&b);
            let r: Vec<_> = a.mul_vec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
            assert!(norm_sqr(&r).sqrt() < 1e-12 * norm_sqr(&b).sqrt());
        }
    }

    #[test]
    fn gram_is_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cols: Vec<_> = (0..4).map(|_| random_vec(&mut rng, 9)).collect();
        let refs: Vec<&[Complex64]> = cols.iter().map(|c| c.as_slice()).collect();
        let g = gram(&refs);
        for i in 0..4 {
            assert_eq!(g.get(i, i).im, 0.0);
            for j in 0..4 {
                assert_eq!(g.get(i, j), g.get(j, i).conj());
                assert!((g.get(i, j) - dot(&cols[i], &cols[j])).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_indefinite_matrix() {
        let mut a = Matrix::zeros(2);
        a.set(0, 0, Complex64::new(1.0, 0.0));
        a.set(1, 0, Complex64::new(2.0, 0.0));
        a.set(0, 1, Complex64::new(2.0, 0.0));
        a.set(1, 1, Complex64::new(1.0, 0.0));
        let err = Cholesky::factor(&a).unwrap_err();
        assert!(matches!(err, Error::Solver { .. }));
    }

    #[test]
    fn rejects_near_singular_matrix() {
        let mut a = Matrix::zeros(2);
        a.set(0, 0, Complex64::new(1.0, 0.0));
        a.set(1, 1, Complex64::new(1e-15, 0.0));
        match Cholesky::factor(&a) {
            Err(Error::Solver {
                condition_estimate, ..
            }) => assert!(condition_estimate > 1e14),
            other => panic!("expected solver error, got {other:?}"),
        }
    }
}
