//! Principal eigenvalue of the nonlocal operator
//! `(L_I + θ0)φ = d (∫_I J(x - y) φ(y) dy - φ) + θ0 φ` on a bounded interval,
//! and the critical length at which it changes sign.
//!
//! The operator is collocated on uniform nodes with trapezoid weights (kernel
//! weights rescaled by the lattice mass, see [`LatticeConvolution`]). The
//! weighted matrix `K` is conjugate to a symmetric banded matrix `S` by
//! `diag(√ω)`, and `σI - S` with `σ` the largest row sum of `K` is a
//! positive definite M-matrix. Power iteration on `(σI - S)^{-1}` therefore
//! keeps iterates positive and converges to the Perron vector at a ratio
//! `(σ - κ1)/(σ - κ2)` that stays bounded away from 1 even for long intervals.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::kernel::{Kernel, LatticeConvolution};
use crate::linalg::BandedCholesky;

/// Default node spacing, in units of the kernel radius.
pub const DEFAULT_SPACING_IN_RADII: f64 = 1.0 / 32.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenProblem {
    pub d: f64,
    pub theta0: f64,
    pub interval: (f64, f64),
    pub n: usize,
    pub kernel: Kernel,
}

impl EigenProblem {
    pub fn new(d: f64, theta0: f64, interval: (f64, f64), n: usize, kernel: Kernel) -> Result<Self> {
        let prob = EigenProblem { d, theta0, interval, n, kernel };
        prob.validate()?;
        Ok(prob)
    }

    /// Chooses the node count so the spacing does not exceed `spacing`.
    pub fn with_spacing(d: f64, theta0: f64, interval: (f64, f64), spacing: f64, kernel: Kernel) -> Result<Self> {
        require_positive("spacing", spacing)?;
        let n = nodes_for_length(interval.1 - interval.0, spacing);
        Self::new(d, theta0, interval, n, kernel)
    }

    /// Default resolution: spacing `R/32`.
    pub fn resolved(d: f64, theta0: f64, interval: (f64, f64), kernel: Kernel) -> Result<Self> {
        let spacing = kernel.radius() * DEFAULT_SPACING_IN_RADII;
        Self::with_spacing(d, theta0, interval, spacing, kernel)
    }

    fn validate(&self) -> Result<()> {
        require_positive("d", self.d)?;
        if !self.theta0.is_finite() {
            return Err(Error::invalid("theta0", "must be finite"));
        }
        let (l1, l2) = self.interval;
        if !(l1.is_finite() && l2.is_finite() && l2 > l1) {
            return Err(Error::invalid("interval", format!("need l1 < l2, got ({l1}, {l2})")));
        }
        if self.n < 8 {
            return Err(Error::invalid("n", format!("need at least 8 nodes, got {}", self.n)));
        }
        let spacing = self.spacing();
        if spacing >= 0.25 * self.kernel.radius() {
            return Err(Error::Resolution { spacing, radius: self.kernel.radius() });
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.interval.1 - self.interval.0
    }

    pub fn spacing(&self) -> f64 {
        self.length() / (self.n - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n).map(|i| self.interval.0 + i as f64 * h).collect()
    }

    fn operator(&self) -> Result<LatticeConvolution> {
        LatticeConvolution::new(&self.kernel, self.spacing(), self.n)
    }
}

pub fn nodes_for_length(length: f64, spacing: f64) -> usize {
    ((length / spacing).ceil() as usize + 1).max(8)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Stop when the sup-normalized eigenvector changes by less than this.
    pub sweep_tol: f64,
    pub max_iterations: usize,
    /// Largest accepted `‖(L + θ0)φ - λφ‖_∞` for the sup-normalized `φ`.
    pub residual_tol: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { sweep_tol: 1e-12, max_iterations: 100_000, residual_tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub lambda_p: f64,
    /// Positive, normalized to maximum 1.
    pub eigenfunction: Vec<f64>,
    pub nodes: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// Top eigenvalue of the discrete convolution; `λ_p = d(κ - 1) + θ0`.
    pub kappa: f64,
    /// Quadrature weights of the convolution (trapezoid over lattice mass).
    pub weights: Vec<f64>,
}

impl EigenResult {
    /// Nyström extension of the eigenfunction to any `x`:
    /// `φ(x) = Σ_j w_j J(x - x_j) φ_j / κ`. Agrees with the samples at nodes.
    pub fn eigenfunction_at(&self, kernel: &Kernel, x: f64) -> f64 {
        let r = kernel.radius();
        let mut acc = 0.0;
        for ((&xj, &wj), &pj) in self.nodes.iter().zip(&self.weights).zip(&self.eigenfunction) {
            if (x - xj).abs() < r {
                acc += wj * kernel.eval(x - xj) * pj;
            }
        }
        acc / self.kappa
    }
}

pub fn lambda_p(prob: &EigenProblem) -> Result<EigenResult> {
    lambda_p_with(prob, &EigenOptions::default())
}

pub fn lambda_p_with(prob: &EigenProblem, opts: &EigenOptions) -> Result<EigenResult> {
    prob.validate()?;
    let n = prob.n;
    let conv = prob.operator()?;
    let coeffs = conv.coeffs();
    let bw = coeffs.len() - 1;
    let omega = end_weights(n);
    let sqrt_w: Vec<f64> = omega.iter().map(|w| w.sqrt()).collect();

    let row_max = conv.row_sums().into_iter().fold(0.0, f64::max);
    let mut shift = row_max * (1.0 + 1e-12) + f64::MIN_POSITIVE;
    let chol = loop {
        let entry = |i: usize, k: usize| {
            let s = sqrt_w[i] * coeffs[k] * sqrt_w[i - k];
            if k == 0 {
                shift - s
            } else {
                -s
            }
        };
        match BandedCholesky::factor(n, bw, entry) {
            Ok(c) => break c,
            Err(_) if shift < 2.0 * row_max + 1.0 => shift += 1e-9 * row_max.max(1e-300) * 1e3,
            Err(e) => return Err(e),
        }
    };

    // Iterate on the symmetric form ψ = √ω φ.
    let mut psi = sqrt_w.clone();
    let mut phi = vec![1.0; n];
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        chol.solve(&mut psi);
        let mut next: Vec<f64> = psi.iter().zip(&sqrt_w).map(|(p, s)| p / s).collect();
        let top = next.iter().cloned().fold(0.0, f64::max);
        if !(top > 0.0) || !top.is_finite() {
            return Err(Error::Convergence { iterations, residual: f64::NAN });
        }
        for v in next.iter_mut() {
            *v /= top;
        }
        change = next.iter().zip(&phi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        phi = next;
        psi = phi.iter().zip(&sqrt_w).map(|(p, s)| p * s).collect();
        if change < opts.sweep_tol {
            break;
        }
    }
    if change >= opts.sweep_tol {
        return Err(Error::Convergence { iterations, residual: change });
    }

    let kappa = symmetric_rayleigh(&conv, &omega, &phi);
    let mut k_phi = vec![0.0; n];
    conv.apply(&phi, &mut k_phi);
    let residual = prob.d * k_phi.iter().zip(&phi).map(|(kp, p)| (kp - kappa * p).abs()).fold(0.0, f64::max);
    if residual >= opts.residual_tol {
        return Err(Error::Convergence { iterations, residual });
    }
    if phi.iter().any(|&p| !(p > 0.0)) {
        return Err(Error::Convergence { iterations, residual });
    }

    let h = prob.spacing();
    let mass = prob.kernel.lattice_mass(h);
    let weights = omega.iter().map(|w| w * h / mass).collect();
    Ok(EigenResult {
        lambda_p: prob.d * (kappa - 1.0) + prob.theta0,
        eigenfunction: phi,
        nodes: prob.nodes(),
        residual,
        iterations,
        kappa,
        weights,
    })
}

fn end_weights(n: usize) -> Vec<f64> {
    let mut w = vec![1.0; n];
    w[0] = 0.5;
    w[n - 1] = 0.5;
    w
}

/// `⟨φ, Kφ⟩_ω / ⟨φ, φ⟩_ω`.
fn symmetric_rayleigh(conv: &LatticeConvolution, omega: &[f64], phi: &[f64]) -> f64 {
    let mut k_phi = vec![0.0; phi.len()];
    conv.apply(phi, &mut k_phi);
    let num: f64 = omega.iter().zip(phi).zip(&k_phi).map(|((w, p), kp)| w * p * kp).sum();
    let den: f64 = omega.iter().zip(phi).map(|(w, p)| w * p * p).sum();
    num / den
}

/// Discrete Rayleigh quotient of the weighted operator at `trial`.
pub fn rayleigh_quotient(prob: &EigenProblem, trial: &[f64]) -> Result<f64> {
    prob.validate()?;
    if trial.len() != prob.n {
        return Err(Error::Shape { expected: prob.n, found: trial.len() });
    }
    let conv = prob.operator()?;
    let kappa = symmetric_rayleigh(&conv, &end_weights(prob.n), trial);
    Ok(prob.d * (kappa - 1.0) + prob.theta0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalLengthOptions {
    /// Target node spacing; defaults to `R/64`.
    pub spacing: Option<f64>,
    /// Largest length searched; defaults to `50R`.
    pub ell_max: Option<f64>,
    /// Width of the final bracket.
    pub tol: f64,
    /// Largest accepted `|λ_p|` at the returned length.
    pub lambda_tol: f64,
}

impl CriticalLengthOptions {
    pub fn with_tol(tol: f64) -> Self {
        CriticalLengthOptions { spacing: None, ell_max: None, tol, lambda_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalLength {
    pub ell_star: f64,
    pub lambda_at_ell_star: f64,
    pub bracket: (f64, f64),
    /// Node count used throughout the final bisection.
    pub n: usize,
}

/// Length `ℓ*` with `λ_p(L_(0,ℓ*) + a) = 0` for diffusivity `d1`.
pub fn critical_length(d1: f64, a: f64, kernel: &Kernel, tol: f64) -> Result<CriticalLength> {
    critical_length_with(d1, a, kernel, &CriticalLengthOptions::with_tol(tol))
}

pub fn critical_length_with(d1: f64, a: f64, kernel: &Kernel, opts: &CriticalLengthOptions) -> Result<CriticalLength> {
    require_positive("d1", d1)?;
    require_positive("a", a)?;
    require_positive("tol", opts.tol)?;
    if a >= d1 {
        return Err(Error::NoRoot { d1, a });
    }
    let r = kernel.radius();
    let spacing = opts.spacing.unwrap_or(r / 64.0);
    let ell_max = opts.ell_max.unwrap_or(50.0 * r);
    let eval = |ell: f64, n: usize| -> Result<f64> {
        let prob = EigenProblem::new(d1, a, (0.0, ell), n, kernel.clone())?;
        Ok(lambda_p(&prob)?.lambda_p)
    };
    let eval_resolved = |ell: f64| eval(ell, nodes_for_length(ell, spacing));

    // Coarse bracket with the target spacing.
    let mut hi = (4.0 * r).min(ell_max);
    while eval_resolved(hi)? <= 0.0 {
        if hi >= ell_max {
            return Err(Error::SearchRange { ell_max });
        }
        hi = (2.0 * hi).min(ell_max);
    }
    let mut lo = 0.5 * hi;
    while eval_resolved(lo)? > 0.0 {
        hi = lo;
        lo *= 0.5;
    }

    // Fixed node count from here on, so λ_p is continuous in the length.
    let n = nodes_for_length(hi, spacing);
    while eval(lo, n)? >= 0.0 {
        lo *= 0.5;
    }
    while eval(hi, n)? <= 0.0 {
        hi *= 1.25;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let value = eval(mid, n)?;
        if value < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < opts.tol && value.abs() < opts.lambda_tol {
            return Ok(CriticalLength { ell_star: mid, lambda_at_ell_star: value, bracket: (lo, hi), n });
        }
    }
    Err(Error::Convergence { iterations: 200, residual: hi - lo })
}
