//! Closed-form upper solutions that certify vanishing for small front budgets.
//!
//! Both constructions freeze `u` under a decaying multiple of the principal
//! eigenfunction on `(-h1, h1)` with `λ = λ_p(L_(-h1,h1) + a) < 0`, bound `v` by
//! a decaying cosine on a slowly widening interval, and integrate the front law
//! against these bounds. When `μ + ρ ≤ Λ0` the fronts stay inside `(-h1, h1)`
//! and the comparison principle pins the true solution underneath.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::eigen::{lambda_p, EigenProblem, EigenResult};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::model::{InitialData, InteractionKind, ModelParams};
use crate::solver::Trajectory;

/// Samples used to fit the initial-data constants.
const FIT_SAMPLES: usize = 4001;
/// Factor by which the Stefan term of `h̄'(0)` must exceed `μ sup|v0_x|`.
/// Equality would let the discrete front overtake `h̄` in the first steps.
const STEFAN_MARGIN: f64 = 1.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuperSolutionConstants {
    /// `ū = C e^{λt/2} φ(x)`, `v̄ = K e^{-σt} cos(πx/(2s(t)))`,
    /// `s(t) = h0(1 + 2δ - δe^{-σt})`.
    Competition { c: f64, k: f64, delta: f64, sigma: f64, m: f64 },
    /// `ū = σk e^{-γt} φ(x)`, `v̄ = k e^{-γt} cos(πx/(2(h̄(t) + ε)))`,
    /// `h̄(t) = h0 + ((θ + δ)/γ)(1 - e^{-γt})`.
    Predation { epsilon: f64, sigma: f64, k: f64, theta: f64, delta: f64, gamma: f64, m: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperSolution {
    pub h0: f64,
    pub h1: f64,
    pub mu: f64,
    pub rho: f64,
    /// `λ_p(L_(-h1,h1) + a)`, negative.
    pub lambda: f64,
    pub eigen: EigenResult,
    pub kernel: Kernel,
    pub constants: SuperSolutionConstants,
    /// Largest `μ + ρ` for which the construction is an upper solution.
    pub lambda0: f64,
}

impl SuperSolution {
    /// Normalized principal eigenfunction on `(-h1, h1)`.
    pub fn phi(&self, x: f64) -> f64 {
        self.eigen.eigenfunction_at(&self.kernel, x).max(0.0)
    }

    pub fn admissible(&self) -> bool {
        self.mu + self.rho <= self.lambda0
    }

    /// `s(t)`, the support of `v̄` (competition); `h̄(t) + ε` for predation.
    pub fn s(&self, t: f64) -> f64 {
        match self.constants {
            SuperSolutionConstants::Competition { delta, sigma, .. } => {
                self.h0 * (1.0 + 2.0 * delta - delta * (-sigma * t).exp())
            }
            SuperSolutionConstants::Predation { epsilon, .. } => self.h_bar(t) + epsilon,
        }
    }

    pub fn u_bar(&self, t: f64, x: f64) -> f64 {
        match self.constants {
            SuperSolutionConstants::Competition { c, .. } => c * (0.5 * self.lambda * t).exp() * self.phi(x),
            SuperSolutionConstants::Predation { sigma, k, gamma, .. } => sigma * k * (-gamma * t).exp() * self.phi(x),
        }
    }

    pub fn v_bar(&self, t: f64, x: f64) -> f64 {
        let s = self.s(t);
        let (amp, rate) = match self.constants {
            SuperSolutionConstants::Competition { k, sigma, .. } => (k, sigma),
            SuperSolutionConstants::Predation { k, gamma, .. } => (k, gamma),
        };
        if x.abs() >= s {
            return 0.0;
        }
        amp * (-rate * t).exp() * (0.5 * PI * x / s).cos()
    }

    pub fn h_bar(&self, t: f64) -> f64 {
        match self.constants {
            SuperSolutionConstants::Competition { c, k, delta, sigma, .. } => {
                let h0 = self.h0;
                let s = h0 * (1.0 + 2.0 * delta - delta * (-sigma * t).exp());
                let stefan = self.mu * 0.5 * PI * k / (sigma * h0 * delta) * (s / (h0 * (1.0 + delta))).ln();
                let flux = -4.0 * self.rho * c * self.h1 / self.lambda * (1.0 - (0.5 * self.lambda * t).exp());
                h0 + stefan + flux
            }
            SuperSolutionConstants::Predation { theta, delta, gamma, .. } => {
                self.h0 + (theta + delta) / gamma * (1.0 - (-gamma * t).exp())
            }
        }
    }

    pub fn g_bar(&self, t: f64) -> f64 {
        -self.h_bar(t)
    }

    /// Upper bound on `lim h̄(t)`.
    pub fn front_limit_bound(&self) -> f64 {
        match self.constants {
            SuperSolutionConstants::Competition { c, k, delta, sigma, .. } => {
                self.h0 + self.mu * PI * k / (2.0 * sigma * self.h0 * (1.0 + delta)) - 4.0 * self.rho * c * self.h1 / self.lambda
            }
            SuperSolutionConstants::Predation { theta, delta, gamma, .. } => self.h0 + (theta + delta) / gamma,
        }
    }
}

struct Common {
    lambda: f64,
    eigen: EigenResult,
}

fn common(p: &ModelParams, init: &InitialData, k: &Kernel, h1: f64) -> Result<Common> {
    let h0 = init.h0;
    if p.a >= p.d1 {
        return Err(Error::Regime(format!("need a < d1, got a = {}, d1 = {}", p.a, p.d1)));
    }
    let half_pi = 0.5 * PI * p.d2.sqrt();
    if h0 >= half_pi {
        return Err(Error::Regime(format!("need h0 < pi*sqrt(d2)/2 = {half_pi}, got h0 = {h0}")));
    }
    if !(h1 > h0) {
        return Err(Error::Regime(format!("need h1 > h0 = {h0}, got h1 = {h1}")));
    }
    let spacing = (k.radius() / 64.0).min(h1 / 32.0);
    let prob = EigenProblem::with_spacing(p.d1, p.a, (-h1, h1), spacing, k.clone())?;
    let eigen = lambda_p(&prob)?;
    let lambda = eigen.lambda_p;
    if !(lambda < 0.0) {
        return Err(Error::Regime(format!(
            "lambda_p on (-h1, h1) = {lambda} is not negative; h1 = {h1} is not below ell*/2"
        )));
    }
    Ok(Common { lambda, eigen })
}

fn fit_points(h0: f64) -> impl Iterator<Item = f64> {
    (1..FIT_SAMPLES - 1).map(move |i| -h0 + 2.0 * h0 * i as f64 / (FIT_SAMPLES - 1) as f64)
}

/// Upper solution for the competition system.
pub fn build_vanishing_supersolution(p: &ModelParams, init: &InitialData, k: &Kernel, h1: f64) -> Result<SuperSolution> {
    if p.kind != InteractionKind::Competition {
        return Err(Error::Regime("this construction is for the competition system".into()));
    }
    let Common { lambda, eigen } = common(p, init, k, h1)?;
    let h0 = init.h0;
    let mut upper = SuperSolution {
        h0,
        h1,
        mu: p.mu,
        rho: p.rho,
        lambda,
        eigen,
        kernel: k.clone(),
        constants: SuperSolutionConstants::Competition { c: 0.0, k: 0.0, delta: 0.0, sigma: 0.0, m: 0.0 },
        lambda0: 0.0,
    };
    let c = fit_points(h0).map(|x| init.u0_at(x) / upper.phi(x)).fold(0.0, f64::max);

    // v̄ solves its equation when d2 π²/(4 s²) - 1 ≥ σ for s ≤ h0(1 + 2δ).
    let ratio = 0.5 * PI * p.d2.sqrt() / h0;
    let delta = (0.25f64).min(0.25 * (ratio - 1.0));
    let sigma = (0.5f64).min(0.5 * (p.d2 * PI * PI / (4.0 * (h0 * (1.0 + 2.0 * delta)).powi(2)) - 1.0));
    let width = h0 * (1.0 + delta);
    // Besides v̄(0) ≥ v0, the Stefan term of h̄ must dominate -v_x at the
    // front from t = 0 on; v̄ stays positive there, so this is not implied.
    let v0_slope = init.v0.slope_sup() / h0;
    let kk = fit_points(h0)
        .map(|x| init.v0_at(x) / (0.5 * PI * x / width).cos())
        .fold(STEFAN_MARGIN * 2.0 * width * v0_slope / PI, f64::max);

    let m = (PI * kk / (2.0 * sigma * h0 * (1.0 + delta))).max(-4.0 * c * h1 / lambda);
    upper.lambda0 = ((h1 - h0) / m).min(delta * h0 / m);
    upper.constants = SuperSolutionConstants::Competition { c, k: kk, delta, sigma, m };
    Ok(upper)
}

/// Upper solution for the prey-predator system.
pub fn build_predation_supersolution(p: &ModelParams, init: &InitialData, k: &Kernel, h1: f64) -> Result<SuperSolution> {
    if p.kind != InteractionKind::Predation {
        return Err(Error::Regime("this construction is for the prey-predator system".into()));
    }
    let Common { lambda, eigen } = common(p, init, k, h1)?;
    let h0 = init.h0;
    let mut upper = SuperSolution {
        h0,
        h1,
        mu: p.mu,
        rho: p.rho,
        lambda,
        eigen,
        kernel: k.clone(),
        constants: SuperSolutionConstants::Predation {
            epsilon: 0.0,
            sigma: 0.0,
            k: 0.0,
            theta: 0.0,
            delta: 0.0,
            gamma: 0.0,
            m: 0.0,
        },
        lambda0: 0.0,
    };
    let half_pi = 0.5 * PI * p.d2.sqrt();
    let epsilon = (half_pi - h0) / 3.0;
    let sigma = (1.0f64).min((0.5 * PI * h1 / (h1 + epsilon)).cos() / p.c);
    let k_u = fit_points(h0).map(|x| init.u0_at(x) / (sigma * upper.phi(x))).fold(0.0, f64::max);
    let k_v = fit_points(h0)
        .map(|x| init.v0_at(x) / (0.5 * PI * x / (h0 + epsilon)).cos())
        .fold(0.0, f64::max);
    // Keeps δ ≥ μ sup|v0_x| so h̄ outruns the Stefan term from t = 0 on.
    let kk = k_u.max(k_v).max(STEFAN_MARGIN * 2.0 * init.v0.slope_sup() / PI);
    let gamma = 0.5 * (-lambda).min(p.d2 * PI * PI / (4.0 * (h0 + epsilon).powi(2)) - 1.0);
    let theta = 2.0 * sigma * kk * h1 * p.rho;
    let delta = kk * PI * p.mu / (2.0 * h0);
    // θ + δ ≤ (μ + ρ) m; keep h0 + (θ + δ)/γ below h1 and below the width at
    // which the cosine bound for v stops decaying at rate γ.
    let m = (2.0 * sigma * kk * h1).max(kk * PI / (2.0 * h0));
    let h_star = PI * p.d2.sqrt() / (2.0 * (1.0 + gamma).sqrt()) - epsilon;
    upper.lambda0 = gamma * (h1 - h0).min(0.99 * (h_star - h0)) / m;
    upper.constants = SuperSolutionConstants::Predation { epsilon, sigma, k: kk, theta, delta, gamma, m };
    Ok(upper)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub tol: f64,
    pub samples_checked: usize,
    pub snapshots_checked: usize,
    /// Largest `u - ū` over stored snapshots.
    pub max_u_excess: f64,
    pub max_v_excess: f64,
    /// Largest `h - h̄` and `ḡ - g` over stored samples.
    pub max_h_excess: f64,
    pub max_g_excess: f64,
    pub dominated: bool,
}

/// Compares a trajectory (with field snapshots) against the upper solution.
pub fn check_domination(upper: &SuperSolution, traj: &Trajectory, tol: f64) -> Result<DominationReport> {
    if traj.snapshots.is_empty() {
        return Err(Error::invalid("trajectory", "no field snapshots to compare; set a snapshot interval"));
    }
    let mut report = DominationReport {
        tol,
        samples_checked: traj.samples.len(),
        snapshots_checked: traj.snapshots.len(),
        max_u_excess: f64::NEG_INFINITY,
        max_v_excess: f64::NEG_INFINITY,
        max_h_excess: f64::NEG_INFINITY,
        max_g_excess: f64::NEG_INFINITY,
        dominated: false,
    };
    for s in &traj.samples {
        report.max_h_excess = report.max_h_excess.max(s.h - upper.h_bar(s.t));
        report.max_g_excess = report.max_g_excess.max(upper.g_bar(s.t) - s.g);
    }
    for snap in &traj.snapshots {
        for ((&x, &u), &v) in snap.x.iter().zip(&snap.u).zip(&snap.v) {
            report.max_u_excess = report.max_u_excess.max(u - upper.u_bar(snap.t, x));
            report.max_v_excess = report.max_v_excess.max(v - upper.v_bar(snap.t, x));
        }
    }
    report.dominated = [report.max_u_excess, report.max_v_excess, report.max_h_excess, report.max_g_excess]
        .iter()
        .all(|&e| e <= tol);
    Ok(report)
}
