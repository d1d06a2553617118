//! Bracketing the front-budget thresholds along a ray in the `(μ, ρ)` plane.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::sweep::parallel_map;
use super::{Classifier, ClassifyOptions, Verdict};
use crate::error::{require_positive, Error, Result};
use crate::kernel::Kernel;
use crate::model::{InitialData, ModelParams};
use crate::solver::RunControl;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdControl {
    pub s_min: f64,
    pub s_max: f64,
    /// Geometric scan points, endpoints included.
    pub scan_points: usize,
    /// Geometric bisection steps after the scan.
    pub bisection_steps: usize,
    pub run: RunControl,
    pub classify: ClassifyOptions,
    pub workers: usize,
}

impl ThresholdControl {
    pub fn new(run: RunControl) -> Self {
        ThresholdControl {
            s_min: 1e-6,
            s_max: 1e3,
            scan_points: 10,
            bisection_steps: 6,
            run,
            classify: ClassifyOptions::default(),
            workers: default_workers(),
        }
    }
}

pub(crate) fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    /// Normalized so `μ̂ + ρ̂ = 1`.
    pub ray: (f64, f64),
    /// Largest scale with a vanishing verdict below `upper`.
    pub lower: f64,
    /// Smallest scale with a spreading verdict.
    pub upper: f64,
    /// False if some spreading scale lies below a vanishing one.
    pub monotone_flag: bool,
    /// Every evaluated `(scale, verdict)`, in evaluation order.
    pub evaluations: Vec<(f64, Verdict)>,
}

/// Scans `μ + ρ = s` along `ray` and brackets the change of verdict.
pub fn estimate_threshold(
    p: &ModelParams,
    init: &InitialData,
    k: &Kernel,
    ray: (f64, f64),
    ctrl: &ThresholdControl,
) -> Result<ThresholdEstimate> {
    require_positive("threshold.ray_mu", ray.0)?;
    require_positive("threshold.ray_rho", ray.1)?;
    require_positive("threshold.s_min", ctrl.s_min)?;
    if !(ctrl.s_max > ctrl.s_min) {
        return Err(Error::invalid("threshold.s_max", "must exceed threshold.s_min"));
    }
    if ctrl.scan_points < 2 {
        return Err(Error::invalid("threshold.scan_points", "need at least 2"));
    }
    let ray = (ray.0 / (ray.0 + ray.1), ray.1 / (ray.0 + ray.1));
    if p.a >= p.d1 {
        return Err(Error::Precondition(format!(
            "a = {} >= d1 = {}: spreading happens for every front budget",
            p.a, p.d1
        )));
    }
    let half_pi = 0.5 * PI * p.d2.sqrt();
    if init.h0 >= half_pi {
        return Err(Error::Precondition(format!(
            "h0 = {} >= pi*sqrt(d2)/2 = {half_pi}: spreading happens for every front budget",
            init.h0
        )));
    }
    let classifier = Classifier::new();
    if let Some(ell) = classifier.ell_star(p, k) {
        if init.h0 >= 0.5 * ell {
            return Err(Error::Precondition(format!(
                "h0 = {} >= ell*/2 = {}: spreading happens for every front budget",
                init.h0,
                0.5 * ell
            )));
        }
    }

    let evaluate = |s: f64| -> Verdict {
        let q = p.with_front(s * ray.0, s * ray.1);
        match classifier.run_and_classify(&q, init, k, &ctrl.run, &ctrl.classify) {
            Ok((_, c)) => c.verdict,
            Err(_) => Verdict::Undecided,
        }
    };

    let m = ctrl.scan_points;
    let ratio = ctrl.s_max / ctrl.s_min;
    let scales: Vec<f64> = (0..m)
        .map(|i| if i + 1 == m { ctrl.s_max } else { ctrl.s_min * ratio.powf(i as f64 / (m - 1) as f64) })
        .collect();
    let verdicts = parallel_map(&scales, ctrl.workers, |&s| evaluate(s));
    let mut evaluations: Vec<(f64, Verdict)> = scales.iter().cloned().zip(verdicts).collect();

    let spreading: Vec<f64> = evaluations.iter().filter(|e| e.1 == Verdict::Spreading).map(|e| e.0).collect();
    let vanishing: Vec<f64> = evaluations.iter().filter(|e| e.1 == Verdict::Vanishing).map(|e| e.0).collect();
    if spreading.is_empty() && vanishing.is_empty() {
        return Err(Error::Inconclusive(
            "every scanned scale is undecided; raise numerics.horizon".into(),
        ));
    }
    let Some(&first_spread) = spreading.first() else {
        return Err(Error::Inconclusive(format!(
            "no spreading verdict up to scale {}; raise threshold.s_max or numerics.horizon",
            ctrl.s_max
        )));
    };
    let monotone_flag = vanishing.iter().all(|&v| v < first_spread);
    let Some(mut lower) = vanishing.iter().cloned().filter(|&v| v < first_spread).reduce(f64::max) else {
        return Err(Error::Inconclusive(format!(
            "no vanishing verdict below scale {first_spread}; lower threshold.s_min or raise numerics.horizon"
        )));
    };
    let mut upper = first_spread;
    for _ in 0..ctrl.bisection_steps {
        let mid = (lower * upper).sqrt();
        let v = evaluate(mid);
        evaluations.push((mid, v));
        match v {
            Verdict::Vanishing => lower = mid,
            Verdict::Spreading => upper = mid,
            Verdict::Undecided => break,
        }
    }
    Ok(ThresholdEstimate { ray, lower, upper, monotone_flag, evaluations })
}
