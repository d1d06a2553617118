//! Spreading/vanishing verdicts for finished trajectories.
//!
//! Spreading is certified, never guessed: the habitat length exceeding
//! `π√d2` or the critical length `ℓ*` rules out a bounded limit, and `a ≥ d1`
//! forces spreading outright. Vanishing is only asymptotic, so it is reported
//! from a finite-horizon plateau rule and flagged heuristic.

mod supersolution;
mod sweep;
mod threshold;

pub use supersolution::{
    build_predation_supersolution, build_vanishing_supersolution, check_domination, DominationReport,
    SuperSolutionConstants, SuperSolution,
};
pub use sweep::{sweep, PhasePlan, PhaseRow, PhaseTable, PHASE_HEADER};
pub use threshold::{estimate_threshold, ThresholdControl, ThresholdEstimate};

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::eigen::{critical_length, lambda_p, EigenProblem};
use crate::kernel::Kernel;
use crate::model::ModelParams;
use crate::solver::{Sample, State, StopRule, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Spreading,
    Vanishing,
    Undecided,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Spreading => "spreading",
            Verdict::Vanishing => "vanishing",
            Verdict::Undecided => "undecided",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// The habitat grew longer than `π√d2`, which no vanishing solution does.
    LengthExceedsPiSqrtD2,
    /// The habitat grew longer than `ℓ*`, where `λ_p(L_I + a)` turns positive.
    LengthExceedsEllStar,
    /// `a ≥ d1`: spreading for every initial datum.
    ARateDominates,
    /// Norms and front speeds stayed below tolerance over the trailing window.
    NormPlateauDecay,
    /// Nothing conclusive before the horizon.
    HorizonExhausted,
}

impl Certificate {
    pub fn as_str(self) -> &'static str {
        match self {
            Certificate::LengthExceedsPiSqrtD2 => "length_exceeds_pi_sqrt_d2",
            Certificate::LengthExceedsEllStar => "length_exceeds_ell_star",
            Certificate::ARateDominates => "a_rate_dominates",
            Certificate::NormPlateauDecay => "norm_plateau_decay",
            Certificate::HorizonExhausted => "horizon_exhausted",
        }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub vanish_tol: f64,
    pub speed_tol: f64,
    /// Largest `λ_p(L_(g(T),h(T)) + a)` accepted for a vanishing verdict.
    pub eigen_slack: f64,
    /// Trailing window, as a fraction of the horizon.
    pub window_fraction: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { vanish_tol: 1e-3, speed_tol: 1e-3, eigen_slack: 1e-2, window_fraction: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub final_time: f64,
    pub final_length: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    pub gdot: f64,
    pub hdot: f64,
    /// `λ_p(L_(g(T),h(T)) + a)`; absent if the eigen solve failed.
    pub lambda_p_final: Option<f64>,
    /// Node spacing of the final mapped grid.
    pub grid_spacing: f64,
    pub pi_sqrt_d2: f64,
    pub ell_star: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub certificate: Certificate,
    /// Time at which the certificate first held.
    pub fired_at: f64,
    pub evidence: Evidence,
    /// True when the verdict rests on the finite-horizon plateau rule.
    pub heuristic: bool,
}

/// Length beyond which spreading is certified: `min{π√d2, ℓ*}`.
pub fn spreading_length(pi_sqrt_d2: f64, ell_star: Option<f64>) -> (f64, Certificate) {
    match ell_star {
        Some(l) if l < pi_sqrt_d2 => (l, Certificate::LengthExceedsEllStar),
        _ => (pi_sqrt_d2, Certificate::LengthExceedsPiSqrtD2),
    }
}

/// `ℓ*` for `(d1, a)`, `None` when it does not exist or cannot be bracketed.
pub fn ell_star_for(p: &ModelParams, k: &Kernel) -> Option<f64> {
    if p.a >= p.d1 {
        return None;
    }
    critical_length(p.d1, p.a, k, 1e-6).ok().map(|c| c.ell_star)
}

pub fn classify(traj: &Trajectory, p: &ModelParams, k: &Kernel) -> Classification {
    classify_with(traj, p, k, &ClassifyOptions::default(), ell_star_for(p, k))
}

pub fn classify_with(
    traj: &Trajectory,
    p: &ModelParams,
    k: &Kernel,
    opts: &ClassifyOptions,
    ell_star: Option<f64>,
) -> Classification {
    let last = *traj.last();
    let fin = &traj.final_state;
    let pi_sqrt_d2 = PI * p.d2.sqrt();
    let lambda_p_final = final_eigenvalue(fin, p, k);
    let evidence = Evidence {
        final_time: last.t,
        final_length: last.length(),
        sup_u: last.sup_u,
        sup_v: last.sup_v,
        gdot: last.gdot,
        hdot: last.hdot,
        lambda_p_final,
        grid_spacing: fin.length() / fin.n() as f64,
        pi_sqrt_d2,
        ell_star,
    };
    let verdict = |verdict, certificate, fired_at, heuristic| Classification {
        verdict,
        certificate,
        fired_at,
        evidence,
        heuristic,
    };

    if p.a >= p.d1 {
        return verdict(Verdict::Spreading, Certificate::ARateDominates, 0.0, false);
    }
    let (threshold, cert) = spreading_length(pi_sqrt_d2, ell_star);
    if let Some(s) = traj.samples.iter().find(|s| s.length() > threshold) {
        return verdict(Verdict::Spreading, cert, s.t, false);
    }
    if let Some(since) = plateau_start(traj, opts) {
        let length_ok = evidence.final_length <= pi_sqrt_d2 + 2.0 * evidence.grid_spacing;
        let eigen_ok = lambda_p_final.is_some_and(|l| l <= opts.eigen_slack);
        if length_ok && eigen_ok {
            return verdict(Verdict::Vanishing, Certificate::NormPlateauDecay, since, true);
        }
    }
    verdict(Verdict::Undecided, Certificate::HorizonExhausted, last.t, false)
}

fn quiet(s: &Sample, opts: &ClassifyOptions) -> bool {
    s.sup_u < opts.vanish_tol && s.sup_v < opts.vanish_tol && s.gdot.abs() < opts.speed_tol && s.hdot.abs() < opts.speed_tol
}

/// Start of the final run of quiet samples, if it spans the trailing window.
fn plateau_start(traj: &Trajectory, opts: &ClassifyOptions) -> Option<f64> {
    let window = opts.window_fraction * traj.horizon;
    let last = traj.last().t;
    let start = traj.samples.iter().rev().take_while(|s| quiet(s, opts)).last()?.t;
    (last - start >= window * (1.0 - 1e-12)).then_some(start)
}

fn final_eigenvalue(s: &State, p: &ModelParams, k: &Kernel) -> Option<f64> {
    let prob = EigenProblem::resolved(p.d1, p.a, (s.g, s.h), k.clone()).ok()?;
    lambda_p(&prob).ok().map(|r| r.lambda_p)
}

/// Ends a run once spreading is certified by length, or once the vanishing
/// plateau has held for the trailing window.
#[derive(Debug, Clone)]
pub struct ClassifyStop {
    spreading_length: f64,
    pi_sqrt_d2: f64,
    window: f64,
    opts: ClassifyOptions,
    quiet_since: Option<f64>,
}

impl ClassifyStop {
    pub fn new(p: &ModelParams, ell_star: Option<f64>, horizon: f64, opts: ClassifyOptions) -> Self {
        let pi_sqrt_d2 = PI * p.d2.sqrt();
        ClassifyStop {
            spreading_length: spreading_length(pi_sqrt_d2, ell_star).0,
            pi_sqrt_d2,
            window: opts.window_fraction * horizon,
            opts,
            quiet_since: None,
        }
    }
}

impl StopRule for ClassifyStop {
    fn observe(&mut self, sample: &Sample, state: &State) -> Option<String> {
        if sample.length() > self.spreading_length {
            return Some(format!("length {} exceeds {}", sample.length(), self.spreading_length));
        }
        if quiet(sample, &self.opts) {
            let since = *self.quiet_since.get_or_insert(sample.t);
            let slack = 2.0 * state.length() / state.n() as f64;
            if sample.t - since >= self.window * (1.0 - 1e-12) && sample.length() <= self.pi_sqrt_d2 + slack {
                return Some(format!("norms and front speeds quiet since t = {since}"));
            }
        } else {
            self.quiet_since = None;
        }
        None
    }
}

/// Classifier sharing one `ℓ*` per `(d1, a, kernel)` across runs.
#[derive(Debug, Default)]
pub struct Classifier {
    cache: Mutex<HashMap<(u64, u64, String, u64), Option<f64>>>,
}

impl Classifier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ell_star(&self, p: &ModelParams, k: &Kernel) -> Option<f64> {
        let key = (p.d1.to_bits(), p.a.to_bits(), k.family().to_string(), k.radius().to_bits());
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return *v;
        }
        let value = ell_star_for(p, k);
        self.cache.lock().expect("cache lock").insert(key, value);
        value
    }

    /// Runs to the horizon (or an earlier certificate) and classifies.
    pub fn run_and_classify(
        &self,
        p: &ModelParams,
        init: &crate::model::InitialData,
        k: &Kernel,
        ctrl: &crate::solver::RunControl,
        opts: &ClassifyOptions,
    ) -> crate::error::Result<(Trajectory, Classification)> {
        let ell = self.ell_star(p, k);
        let mut stop = ClassifyStop::new(p, ell, ctrl.horizon, *opts);
        let traj = crate::solver::run_with(p, init, k, ctrl, &mut stop)?;
        let class = classify_with(&traj, p, k, opts, ell);
        Ok((traj, class))
    }
}
