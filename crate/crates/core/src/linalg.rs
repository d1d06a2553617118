//! Small dense-banded solvers used by the time stepper and the eigensolver.

use crate::error::{Error, Result};

/// Solves a tridiagonal system in place (Thomas algorithm).
///
/// `lower[i]` couples row `i` to `i - 1` (ignored for `i = 0`), `upper[i]`
/// couples row `i` to `i + 1` (ignored for the last row). `rhs` is
/// overwritten with the solution.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) -> Result<()> {
    let n = rhs.len();
    if lower.len() != n || diag.len() != n || upper.len() != n {
        return Err(Error::Shape { expected: n, found: diag.len() });
    }
    if n == 0 {
        return Ok(());
    }
    let mut c = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot.abs() < f64::MIN_POSITIVE || !pivot.is_finite() {
        return Err(Error::LinearAlgebra("zero pivot in row 0".into()));
    }
    c[0] = upper[0] / pivot;
    rhs[0] /= pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot.abs() < f64::MIN_POSITIVE || !pivot.is_finite() {
            return Err(Error::LinearAlgebra(format!("zero pivot in row {i}")));
        }
        c[i] = upper[i] / pivot;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    Ok(())
}

/// Cholesky factor of a symmetric positive definite banded matrix.
///
/// Storage is row-major over the lower band: `band[i][k]` holds entry
/// `(i, i - k)` for `k = 0..=bandwidth`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    factor: Vec<f64>,
}

impl BandedCholesky {
    /// Factors the matrix whose lower band is produced by `entry(i, k)` for
    /// `(i, i - k)`.
    pub fn factor(n: usize, bandwidth: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let bw = bandwidth.min(n.saturating_sub(1));
        let stride = bw + 1;
        let mut l = vec![0.0; n * stride];
        for i in 0..n {
            for k in 0..=bw.min(i) {
                l[i * stride + k] = entry(i, k);
            }
        }
        for j in 0..n {
            // Diagonal.
            let mut d = l[j * stride];
            for k in 1..=bw.min(j) {
                let v = l[j * stride + k];
                d -= v * v;
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::LinearAlgebra(format!("matrix not positive definite at row {j}")));
            }
            let d = d.sqrt();
            l[j * stride] = d;
            // Column j below the diagonal.
            for i in j + 1..(j + bw + 1).min(n) {
                let kij = i - j;
                let mut s = l[i * stride + kij];
                for m in 1..=bw {
                    if m + kij > bw || m > j {
                        break;
                    }
                    // L[i][j-m] * L[j][j-m]
                    s -= l[i * stride + kij + m] * l[j * stride + m];
                }
                l[i * stride + kij] = s / d;
            }
        }
        Ok(BandedCholesky { n, bw, factor: l })
    }

    /// Solves `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        let (n, bw, stride) = (self.n, self.bw, self.bw + 1);
        assert_eq!(b.len(), n);
        for i in 0..n {
            let mut s = b[i];
            for k in 1..=bw.min(i) {
                s -= self.factor[i * stride + k] * b[i - k];
            }
            b[i] = s / self.factor[i * stride];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in 1..=bw.min(n - 1 - i) {
                s -= self.factor[(i + k) * stride + k] * b[i + k];
            }
            b[i] = s / self.factor[i * stride];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_matches_known_solution() {
        let n = 7;
        let lower = vec![-1.0; n];
        let diag = vec![2.5; n];
        let upper = vec![-1.0; n];
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 1.0).collect();
        let mut rhs: Vec<f64> = (0..n)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += upper[i] * x[i + 1];
                }
                s
            })
            .collect();
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs).unwrap();
        for i in 0..n {
            assert!((rhs[i] - x[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn thomas_zero_pivot() {
        let mut rhs = vec![1.0, 1.0];
        assert!(solve_tridiagonal(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &mut rhs).is_err());
    }

    #[test]
    fn banded_cholesky_solves() {
        let n = 40;
        let bw = 3;
        let a = |i: usize, j: usize| -> f64 {
            let k = i.abs_diff(j);
            if k == 0 {
                4.0 + (i as f64) * 0.01
            } else if k <= bw {
                0.5 / k as f64
            } else {
                0.0
            }
        };
        let chol = BandedCholesky::factor(n, bw, |i, k| a(i, i - k)).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).cos()).collect();
        let mut b: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a(i, j) * x[j]).sum()).collect();
        chol.solve(&mut b);
        for i in 0..n {
            assert!((b[i] - x[i]).abs() < 1e-12, "{i}: {} vs {}", b[i], x[i]);
        }
    }

    #[test]
    fn banded_cholesky_rejects_indefinite() {
        assert!(BandedCholesky::factor(3, 1, |i, k| if k == 0 { 1.0 } else { 2.0 + i as f64 }).is_err());
    }
}
