#![allow(dead_code)]

use freebound_core::{InteractionKind, Kernel, ModelParams};
use nalgebra::{DMatrix, SymmetricEigen};

pub fn tent() -> Kernel {
    Kernel::tent(1.0).unwrap()
}

pub fn competition(a: f64, mu: f64, rho: f64) -> ModelParams {
    ModelParams::new(InteractionKind::Competition, 1.0, 1.0, a, 0.5, 0.5, mu, rho).unwrap()
}

pub fn predation(a: f64, mu: f64, rho: f64) -> ModelParams {
    ModelParams::new(InteractionKind::Predation, 1.0, 1.0, a, 0.5, 0.5, mu, rho).unwrap()
}

/// Top eigenvalue of `d(K - I) + θ0` on `(0, length)` from a full dense
/// eigendecomposition of the plain trapezoid quadrature matrix, symmetrized
/// by `diag(√w)`.
pub fn dense_lambda_p(d: f64, theta0: f64, length: f64, spacing: f64, kernel: &Kernel) -> f64 {
    let n = (length / spacing).ceil() as usize + 1;
    let h = length / (n - 1) as f64;
    let x: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    let w: Vec<f64> = (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h }).collect();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let k = d * (w[i] * w[j]).sqrt() * kernel.eval(x[i] - x[j]);
        if i == j {
            k + theta0 - d
        } else {
            k
        }
    });
    SymmetricEigen::new(m).eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Length where the dense oracle changes sign, by bisection on `[lo, hi]`.
pub fn dense_critical_length(d1: f64, a: f64, kernel: &Kernel, spacing: f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(dense_lambda_p(d1, a, lo, spacing, kernel) < 0.0);
    assert!(dense_lambda_p(d1, a, hi, spacing, kernel) > 0.0);
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if dense_lambda_p(d1, a, mid, spacing, kernel) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Piecewise-linear interpolation of `(xs, f)` at `x`, clamped to the ends.
pub fn interp(xs: &[f64], f: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return f[0];
    }
    if x >= xs[xs.len() - 1] {
        return f[f.len() - 1];
    }
    let j = xs.partition_point(|&q| q <= x).clamp(1, xs.len() - 1);
    let t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    f[j - 1] * (1.0 - t) + f[j] * t
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
