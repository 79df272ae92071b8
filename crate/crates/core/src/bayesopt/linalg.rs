//! Dense Cholesky factorization for the small covariance systems the
//! Gaussian process needs (at most a few dozen training points).

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix
/// stored row-major.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Vec<f64>,
    n: usize,
}

impl Cholesky {
    /// Factorize `a` (n×n, row-major). Returns `None` when the matrix is not
    /// positive definite.
    pub fn decompose(a: &[f64], n: usize) -> Option<Self> {
        assert_eq!(a.len(), n * n);
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return None;
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Some(Cholesky { l, n })
    }

    /// Solve L·x = b by forward substitution.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.l[i * n + k] * x[k];
            }
            x[i] /= self.l[i * n + i];
        }
        x
    }

    /// Solve (L·Lᵀ)·x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = self.solve_lower(b);
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] -= self.l[k * n + i] * x[k];
            }
            x[i] /= self.l[i * n + i];
        }
        x
    }

    /// log det(L·Lᵀ) = 2·Σ ln L_ii.
    pub fn log_det(&self) -> f64 {
        (0..self.n)
            .map(|i| self.l[i * self.n + i].ln())
            .sum::<f64>()
            * 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_and_solve_spd_system() {
        // A = [[4,2],[2,3]], b = [1, 2] → x = [-1/8, 3/4]
        let a = vec![4.0, 2.0, 2.0, 3.0];
        let ch = Cholesky::decompose(&a, 2).unwrap();
        let x = ch.solve(&[1.0, 2.0]);
        assert!((x[0] + 0.125).abs() < 1e-12);
        assert!((x[1] - 0.75).abs() < 1e-12);
        assert!((ch.log_det() - (4.0f64 * 3.0 - 4.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_indefinite_matrix() {
        let a = vec![1.0, 2.0, 2.0, 1.0];
        assert!(Cholesky::decompose(&a, 2).is_none());
    }
}
