//! Dispersal kernels for the nonlocal diffusion term.
//!
//! Every shipped family is symmetric, Lipschitz, compactly supported on
//! `[-R, R]` and normalized in closed form to unit mass. The tail mass
//! `Ĵ(s) = ∫_s^∞ J` is also closed form; it collapses the inner integral of
//! the nonlocal flux that drives the free boundaries.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use crate::error::{require_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// `(1/R)(1 - |s|/R)`.
    Tent,
    /// `(3/(4R))(1 - (s/R)^2)`.
    ParabolicBump,
    /// Gaussian with standard deviation `R/3`, shifted down so it vanishes at
    /// `±R` (keeps the kernel Lipschitz) and renormalized.
    TruncatedGaussian,
}

impl KernelFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelFamily::Tent => "tent",
            KernelFamily::ParabolicBump => "parabolic_bump",
            KernelFamily::TruncatedGaussian => "truncated_gaussian",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tent" => Ok(KernelFamily::Tent),
            "parabolic_bump" | "parabolic" => Ok(KernelFamily::ParabolicBump),
            "truncated_gaussian" | "gaussian" => Ok(KernelFamily::TruncatedGaussian),
            other => Err(Error::invalid(
                "kernel.family",
                format!("unknown family `{other}` (tent, parabolic_bump, truncated_gaussian)"),
            )),
        }
    }
}

/// Ratio `R / σ` for the truncated Gaussian family.
const GAUSSIAN_RADIUS_IN_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    family: KernelFamily,
    radius: f64,
    normalization: f64,
    lipschitz: f64,
    positivity_radius: f64,
    positivity_floor: f64,
}

impl Kernel {
    pub fn new(family: KernelFamily, radius: f64) -> Result<Self> {
        require_positive("kernel.radius", radius)?;
        let r = radius;
        let (normalization, lipschitz) = match family {
            KernelFamily::Tent => (1.0 / r, 1.0 / (r * r)),
            KernelFamily::ParabolicBump => (3.0 / (4.0 * r), 3.0 / (2.0 * r * r)),
            KernelFamily::TruncatedGaussian => {
                let sigma = r / GAUSSIAN_RADIUS_IN_SIGMAS;
                let edge = gaussian_edge();
                let mass = sigma * (2.0 * PI).sqrt() * libm::erf(r / (sigma * SQRT_2)) - 2.0 * r * edge;
                let norm = 1.0 / mass;
                (norm, norm * (-0.5f64).exp() / sigma)
            }
        };
        let mut kernel = Kernel {
            family,
            radius,
            normalization,
            lipschitz,
            positivity_radius: 0.5 * r,
            positivity_floor: 0.0,
        };
        kernel.positivity_floor = kernel.eval(0.5 * r) * (1.0 - 1e-9);
        Ok(kernel)
    }

    pub fn tent(radius: f64) -> Result<Self> {
        Self::new(KernelFamily::Tent, radius)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn lipschitz_constant(&self) -> f64 {
        self.lipschitz
    }

    pub fn positivity_radius(&self) -> f64 {
        self.positivity_radius
    }

    pub fn positivity_floor(&self) -> f64 {
        self.positivity_floor
    }

    /// `J(s)`. Evaluated on `|s|`, so symmetry is exact.
    pub fn eval(&self, s: f64) -> f64 {
        let s = s.abs();
        let r = self.radius;
        if s >= r {
            return 0.0;
        }
        let t = s / r;
        match self.family {
            KernelFamily::Tent => self.normalization * (1.0 - t),
            KernelFamily::ParabolicBump => self.normalization * (1.0 - t * t),
            KernelFamily::TruncatedGaussian => {
                let q = t * GAUSSIAN_RADIUS_IN_SIGMAS;
                self.normalization * ((-0.5 * q * q).exp() - gaussian_edge())
            }
        }
    }

    /// Tail mass `Ĵ(s) = ∫_s^∞ J(z) dz`.
    pub fn tail_mass(&self, s: f64) -> f64 {
        let r = self.radius;
        if s >= r {
            return 0.0;
        }
        if s <= -r {
            return 1.0;
        }
        let t = s / r;
        let value = match self.family {
            KernelFamily::Tent => {
                if t >= 0.0 {
                    0.5 * (1.0 - t) * (1.0 - t)
                } else {
                    1.0 - 0.5 * (1.0 + t) * (1.0 + t)
                }
            }
            KernelFamily::ParabolicBump => 0.5 - 0.75 * t + 0.25 * t * t * t,
            KernelFamily::TruncatedGaussian => {
                let sigma = r / GAUSSIAN_RADIUS_IN_SIGMAS;
                let scale = sigma * (PI / 2.0).sqrt();
                let upper = libm::erf(r / (sigma * SQRT_2));
                let lower = libm::erf(s / (sigma * SQRT_2));
                self.normalization * (scale * (upper - lower) - gaussian_edge() * (r - s))
            }
        };
        value.clamp(0.0, 1.0)
    }

    /// `∫_0^∞ Ĵ(s) ds = ∫_0^R s J(s) ds`: the largest outward flux a unit
    /// density can push across one front.
    pub fn outward_moment(&self) -> f64 {
        let r = self.radius;
        match self.family {
            KernelFamily::Tent => r / 6.0,
            KernelFamily::ParabolicBump => 3.0 * r / 16.0,
            KernelFamily::TruncatedGaussian => {
                let sigma = r / GAUSSIAN_RADIUS_IN_SIGMAS;
                let edge = gaussian_edge();
                self.normalization * (sigma * sigma * (1.0 - edge) - 0.5 * edge * r * r)
            }
        }
    }

    /// Trapezoid mass of the kernel sampled on the infinite lattice
    /// `spacing · Z`. Differs from 1 by `O(spacing²)`.
    pub fn lattice_mass(&self, spacing: f64) -> f64 {
        let mut sum = 0.0;
        let mut k = 1usize;
        loop {
            let s = k as f64 * spacing;
            if s >= self.radius {
                break;
            }
            sum += self.eval(s);
            k += 1;
        }
        spacing * (self.eval(0.0) + 2.0 * sum)
    }

    /// A positivity pair `(ε̄, δ₀)` with `ε̄ < h0/4` and `J(s) > δ₀` for `|s| < ε̄`.
    pub fn positivity_pair(&self, h0: f64) -> (f64, f64) {
        if self.positivity_radius < 0.25 * h0 {
            (self.positivity_radius, self.positivity_floor)
        } else {
            let eps = 0.125 * h0;
            (eps, self.eval(eps) * (1.0 - 1e-9))
        }
    }
}

fn gaussian_edge() -> f64 {
    (-0.5 * GAUSSIAN_RADIUS_IN_SIGMAS * GAUSSIAN_RADIUS_IN_SIGMAS).exp()
}

/// Composite trapezoid weights for strictly increasing `nodes`.
pub fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for i in 1..n {
        let half = 0.5 * (nodes[i] - nodes[i - 1]);
        w[i - 1] += half;
        w[i] += half;
    }
    w
}

/// `out[i] = Σ_j weights[j] · J(nodes[i] - nodes[j]) · field[j]`.
pub fn nonlocal_apply(kernel: &Kernel, nodes: &[f64], weights: &[f64], field: &[f64]) -> Result<Vec<f64>> {
    let n = nodes.len();
    if weights.len() != n {
        return Err(Error::Shape { expected: n, found: weights.len() });
    }
    if field.len() != n {
        return Err(Error::Shape { expected: n, found: field.len() });
    }
    if nodes.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::invalid("nodes", "must be strictly increasing"));
    }
    Ok(nodes
        .iter()
        .map(|&xi| {
            nodes
                .iter()
                .zip(weights)
                .zip(field)
                .map(|((&xj, &wj), &fj)| wj * kernel.eval(xi - xj) * fj)
                .sum()
        })
        .collect())
}

/// Convolution with `J` on a uniform grid, trapezoid rule, with the kernel
/// weights rescaled by the lattice mass so a constant field far from the ends
/// is reproduced exactly. The stencil is summed in mirrored pairs, so a
/// reflected field yields an exactly reflected result.
#[derive(Debug, Clone)]
pub struct LatticeConvolution {
    coeffs: Vec<f64>,
    len: usize,
}

impl LatticeConvolution {
    pub fn new(kernel: &Kernel, spacing: f64, len: usize) -> Result<Self> {
        require_positive("spacing", spacing)?;
        if len < 2 {
            return Err(Error::invalid("len", "need at least two nodes"));
        }
        let mass = kernel.lattice_mass(spacing);
        let mut coeffs = Vec::new();
        for k in 0..len {
            let value = kernel.eval(k as f64 * spacing);
            if value == 0.0 {
                break;
            }
            coeffs.push(spacing * value / mass);
        }
        Ok(LatticeConvolution { coeffs, len })
    }

    /// Number of stencil offsets `k >= 0` with a nonzero weight.
    pub fn bandwidth(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Applies the operator; the two end nodes carry half trapezoid weight.
    pub fn apply(&self, field: &[f64], out: &mut [f64]) {
        let n = self.len;
        assert_eq!(field.len(), n);
        assert_eq!(out.len(), n);
        let mut weighted = field.to_vec();
        weighted[0] *= 0.5;
        weighted[n - 1] *= 0.5;
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = self.coeffs[0] * weighted[i];
            for (k, &c) in self.coeffs.iter().enumerate().skip(1) {
                let left = if i >= k { weighted[i - k] } else { 0.0 };
                let right = if i + k < n { weighted[i + k] } else { 0.0 };
                acc += c * (left + right);
            }
            *o = acc;
        }
    }

    /// Row sums `Σ_j K_ij` of the operator, including end half-weights.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len];
        self.apply(&vec![1.0; self.len], &mut out);
        out
    }
}
