//! Reaction terms, parameters, initial data and a-priori solution bounds.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{require_positive, Error, Result};
use crate::kernel::Kernel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionKind {
    /// `f1 = u(a - u - bv)`, `f2 = v(1 - v - cu)`.
    Competition,
    /// `f1 = u(a - u - bv)`, `f2 = v(1 - v + cu)`; `u` is the prey.
    Predation,
}

impl InteractionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InteractionKind::Competition => "competition",
            InteractionKind::Predation => "predation",
        }
    }
}

impl fmt::Display for InteractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InteractionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "competition" => Ok(InteractionKind::Competition),
            "predation" | "prey_predator" => Ok(InteractionKind::Predation),
            other => Err(Error::invalid(
                "model.kind",
                format!("unknown kind `{other}` (competition, predation)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Nonlocal diffusivity of `u`.
    pub d1: f64,
    /// Local diffusivity of `v`.
    pub d2: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Front response to the gradient of `v`.
    pub mu: f64,
    /// Front response to the outward nonlocal flux of `u`.
    pub rho: f64,
    pub kind: InteractionKind,
}

impl ModelParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(kind: InteractionKind, d1: f64, d2: f64, a: f64, b: f64, c: f64, mu: f64, rho: f64) -> Result<Self> {
        let p = ModelParams { d1, d2, a, b, c, mu, rho, kind };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("model.d1", self.d1),
            ("model.d2", self.d2),
            ("model.a", self.a),
            ("model.b", self.b),
            ("model.c", self.c),
            ("model.mu", self.mu),
            ("model.rho", self.rho),
        ] {
            require_positive(name, v)?;
        }
        Ok(())
    }

    /// Same parameters with the front coefficients replaced.
    pub fn with_front(mut self, mu: f64, rho: f64) -> Self {
        self.mu = mu;
        self.rho = rho;
        self
    }

    /// `1/c > a > b` for competition. Strict, no tolerance.
    pub fn weak_competition(&self) -> bool {
        self.kind == InteractionKind::Competition && self.c * self.a < 1.0 && self.a > self.b
    }

    /// `a > b + abc` for predation. Strict, no tolerance.
    pub fn weak_predation(&self) -> bool {
        self.kind == InteractionKind::Predation && self.a > self.b + self.a * self.b * self.c
    }

    /// Reaction pair `(f1, f2)`; negative densities are rejected.
    pub fn reaction(&self, u: f64, v: f64) -> Result<(f64, f64)> {
        if !(u >= 0.0 && v >= 0.0) {
            return Err(Error::NegativeDensity { u, v });
        }
        Ok(self.reaction_unchecked(u, v))
    }

    #[inline]
    pub fn reaction_unchecked(&self, u: f64, v: f64) -> (f64, f64) {
        let f1 = u * (self.a - u - self.b * v);
        let f2 = match self.kind {
            InteractionKind::Competition => v * (1.0 - v - self.c * u),
            InteractionKind::Predation => v * (1.0 - v + self.c * u),
        };
        (f1, f2)
    }

    /// Positive constant state approached when the habitat spreads, in the
    /// weak competition or weak predation regime.
    pub fn coexistence_state(&self) -> Result<(f64, f64)> {
        let (a, b, c) = (self.a, self.b, self.c);
        if self.weak_competition() {
            let den = 1.0 - b * c;
            Ok(((a - b) / den, (1.0 - a * c) / den))
        } else if self.weak_predation() {
            let den = 1.0 + b * c;
            Ok(((a - b) / den, (1.0 + a * c) / den))
        } else {
            Err(Error::Regime(format!(
                "{} with a = {a}, b = {b}, c = {c} is neither weak competition (1/c > a > b) nor weak predation (a > b + abc)",
                self.kind
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    Linear,
    /// Monotone piecewise-cubic Hermite; never overshoots the samples.
    Cubic,
}

/// An initial profile on `[-h0, h0]`, parameterized by `y = x / h0 ∈ [-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    /// `amplitude · cos(π y / 2)`.
    Cosine { amplitude: f64 },
    /// Samples on a uniform grid of `[-1, 1]`, endpoints included.
    Sampled { values: Vec<f64>, rule: Interpolation },
}

impl Profile {
    fn validate(&self, name: &str) -> Result<()> {
        match self {
            Profile::Cosine { amplitude } => require_positive(&format!("{name}_amplitude"), *amplitude),
            Profile::Sampled { values, .. } => {
                if values.len() < 3 {
                    return Err(Error::invalid(name, "need at least 3 samples"));
                }
                let last = values.len() - 1;
                if values[0] != 0.0 || values[last] != 0.0 {
                    return Err(Error::invalid(name, "must vanish at both ends"));
                }
                if values[1..last].iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(Error::invalid(name, "must be positive in the interior"));
                }
                Ok(())
            }
        }
    }

    /// Value at `y ∈ [-1, 1]`; zero outside.
    pub fn eval(&self, y: f64) -> f64 {
        if !(-1.0..=1.0).contains(&y) {
            return 0.0;
        }
        match self {
            Profile::Cosine { amplitude } => {
                if y.abs() == 1.0 {
                    0.0
                } else {
                    amplitude * (0.5 * PI * y).cos()
                }
            }
            Profile::Sampled { values, rule } => {
                let m = values.len() - 1;
                let pos = (y + 1.0) * 0.5 * m as f64;
                let i = (pos.floor() as usize).min(m - 1);
                let t = pos - i as f64;
                match rule {
                    Interpolation::Linear => values[i] * (1.0 - t) + values[i + 1] * t,
                    Interpolation::Cubic => pchip(values, i, t),
                }
            }
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            Profile::Cosine { amplitude } => *amplitude,
            Profile::Sampled { values, .. } => values.iter().cloned().fold(0.0, f64::max),
        }
    }

    /// Sup of `|d/dy|`.
    pub fn slope_sup(&self) -> f64 {
        match self {
            Profile::Cosine { amplitude } => 0.5 * PI * amplitude,
            Profile::Sampled { values, .. } => {
                let dy = 2.0 / (values.len() - 1) as f64;
                values.windows(2).map(|p| (p[1] - p[0]).abs() / dy).fold(0.0, f64::max)
            }
        }
    }
}

/// Fritsch–Carlson monotone cubic on unit spacing.
fn pchip(values: &[f64], i: usize, t: f64) -> f64 {
    let m = values.len() - 1;
    let delta = |k: usize| values[k + 1] - values[k];
    let slope = |k: usize| -> f64 {
        if k == 0 {
            delta(0)
        } else if k == m {
            delta(m - 1)
        } else {
            let (l, r) = (delta(k - 1), delta(k));
            if l * r <= 0.0 {
                0.0
            } else {
                2.0 * l * r / (l + r)
            }
        }
    };
    let (y0, y1) = (values[i], values[i + 1]);
    let (s0, s1) = (slope(i), slope(i + 1));
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * s0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * s1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub h0: f64,
    pub u0: Profile,
    pub v0: Profile,
}

impl InitialData {
    pub fn new(h0: f64, u0: Profile, v0: Profile) -> Result<Self> {
        require_positive("init.h0", h0)?;
        u0.validate("init.u0")?;
        v0.validate("init.v0")?;
        Ok(InitialData { h0, u0, v0 })
    }

    /// `u0 = m_u cos(πx/(2h0))`, `v0 = m_v cos(πx/(2h0))`.
    pub fn cosine(h0: f64, u_amplitude: f64, v_amplitude: f64) -> Result<Self> {
        Self::new(
            h0,
            Profile::Cosine { amplitude: u_amplitude },
            Profile::Cosine { amplitude: v_amplitude },
        )
    }

    /// Samples `u0` on a physical position `x`.
    pub fn u0_at(&self, x: f64) -> f64 {
        self.u0.eval(x / self.h0)
    }

    pub fn v0_at(&self, x: f64) -> f64 {
        self.v0.eval(x / self.h0)
    }

    /// Kernel positivity pair compatible with this initial range.
    pub fn positivity_pair(&self, kernel: &Kernel) -> (f64, f64) {
        kernel.positivity_pair(self.h0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionBounds {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    /// `sup f2` over `(0, k1) × (0, k2)`.
    pub reaction_sup: f64,
}

pub fn bounds(p: &ModelParams, init: &InitialData) -> SolutionBounds {
    let k1 = init.u0.sup().max(p.a);
    let k2 = match p.kind {
        InteractionKind::Competition => init.v0.sup().max(1.0),
        InteractionKind::Predation => init.v0.sup().max(1.0 + p.c * k1),
    };
    // f2(u, v) = v (r - v) with r the largest intrinsic rate over the box;
    // the maximum is at v = r/2 when that lies inside (0, k2).
    let r = match p.kind {
        InteractionKind::Competition => 1.0,
        InteractionKind::Predation => 1.0 + p.c * k1,
    };
    let v_star = (0.5 * r).min(k2);
    let reaction_sup = v_star * (r - v_star);
    let v0_slope = init.v0.slope_sup() / init.h0;
    let k3 = (1.0 / init.h0).max((reaction_sup / (2.0 * p.d2)).sqrt()).max(v0_slope / k2);
    SolutionBounds { k1, k2, k3, reaction_sup }
}
