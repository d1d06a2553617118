//! Run configuration: a flat document of dotted keys (`model.d1 = 1.0`),
//! read as TOML, or the `config` object embedded in an emitted summary.

use std::f64::consts::PI;

use freebound_core::classify::{PhasePlan, ThresholdControl};
use freebound_core::{
    ClassifyOptions, InitialData, InteractionKind, Kernel, KernelFamily, ModelParams, RunControl, TimeStep,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub kernel: KernelSection,
    pub model: ModelSection,
    pub init: InitSection,
    #[serde(default)]
    pub numerics: NumericsSection,
    #[serde(default)]
    pub classify: ClassifySection,
    #[serde(default)]
    pub threshold: ThresholdSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub supersolution: SuperSolutionSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSection {
    pub family: KernelFamily,
    pub radius: f64,
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection { family: KernelFamily::Tent, radius: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: InteractionKind,
    pub d1: f64,
    pub d2: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub mu: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    pub h0: f64,
    #[serde(default = "half")]
    pub u0_amplitude: f64,
    #[serde(default = "half")]
    pub v0_amplitude: f64,
}

fn half() -> f64 {
    0.5
}

/// `numerics.dt`: a number for a fixed step, or `"auto"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepSetting {
    Fixed(f64),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSection {
    pub n: usize,
    pub dt: StepSetting,
    /// Cap on automatic steps.
    pub dt_max: f64,
    pub horizon: f64,
    /// Defaults to `horizon / 1000`.
    pub sample_interval: Option<f64>,
    pub snapshot_interval: Option<f64>,
}

impl Default for NumericsSection {
    fn default() -> Self {
        NumericsSection {
            n: 400,
            dt: StepSetting::Keyword("auto".into()),
            dt_max: 0.02,
            horizon: 200.0,
            sample_interval: None,
            snapshot_interval: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifySection {
    pub vanish_tol: f64,
    pub speed_tol: f64,
    pub eigen_slack: f64,
    pub window_fraction: f64,
}

impl Default for ClassifySection {
    fn default() -> Self {
        let o = ClassifyOptions::default();
        ClassifySection {
            vanish_tol: o.vanish_tol,
            speed_tol: o.speed_tol,
            eigen_slack: o.eigen_slack,
            window_fraction: o.window_fraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdSection {
    pub ray_mu: f64,
    pub ray_rho: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub scan_points: usize,
    pub bisection_steps: usize,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
}

impl Default for ThresholdSection {
    fn default() -> Self {
        ThresholdSection {
            ray_mu: 1.0,
            ray_rho: 1.0,
            s_min: 1e-6,
            s_max: 1e3,
            scan_points: 10,
            bisection_steps: 6,
            workers: 0,
        }
    }
}

/// Swept axes; an absent list means the single value from `model` / `init`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub a: Option<Vec<f64>>,
    pub d1: Option<Vec<f64>>,
    pub d2: Option<Vec<f64>>,
    pub h0: Option<Vec<f64>>,
    /// `[mu, rho]` pairs.
    pub fronts: Option<Vec<[f64; 2]>>,
    pub kind: Option<Vec<InteractionKind>>,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuperSolutionSection {
    /// Half-width of the interval the fronts must stay inside.
    pub h1: Option<f64>,
    pub tol: f64,
}

impl Default for SuperSolutionSection {
    fn default() -> Self {
        SuperSolutionSection { h1: None, tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: "out".into() }
    }
}

/// Parses a configuration document, or a summary JSON carrying one under
/// `config`, then fills derived defaults and validates every field.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let raw: RunConfig = if text.trim_start().starts_with('{') {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::config_at(e.line(), e.to_string()))?;
        let config = value
            .get("config")
            .ok_or_else(|| CliError::config("summary JSON has no `config` object"))?;
        serde_json::from_value(config.clone()).map_err(|e| CliError::config(e.to_string()))?
    } else {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            let message = e.message().to_string();
            match line {
                Some(l) => CliError::config_at(l, message),
                None => CliError::config(message),
            }
        })?
    };
    raw.resolve()
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::field(name, format!("must be > 0, got {v}")))
    }
}

impl RunConfig {
    fn resolve(mut self) -> Result<Self, CliError> {
        if let StepSetting::Keyword(k) = &self.numerics.dt {
            if k != "auto" {
                return Err(CliError::field("numerics.dt", format!("expected a number or \"auto\", got \"{k}\"")));
            }
        }
        let horizon = self.numerics.horizon;
        self.numerics.sample_interval.get_or_insert(horizon / 1000.0);
        let m = &self.model;
        let sw = &mut self.sweep;
        sw.a.get_or_insert_with(|| vec![m.a]);
        sw.d1.get_or_insert_with(|| vec![m.d1]);
        sw.d2.get_or_insert_with(|| vec![m.d2]);
        sw.h0.get_or_insert_with(|| vec![self.init.h0]);
        sw.fronts.get_or_insert_with(|| vec![[m.mu, m.rho]]);
        sw.kind.get_or_insert_with(|| vec![m.kind]);
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.kernel()?;
        self.params()?;
        self.initial_data()?;
        let run = self.run_control();
        run.validate()?;
        freebound_core::solver::ReferenceGrid::new(run.n)?;
        positive("numerics.dt_max", self.numerics.dt_max)?;
        let c = &self.classify;
        positive("classify.vanish_tol", c.vanish_tol)?;
        positive("classify.speed_tol", c.speed_tol)?;
        positive("classify.eigen_slack", c.eigen_slack)?;
        if !(c.window_fraction > 0.0 && c.window_fraction <= 1.0) {
            return Err(CliError::field("classify.window_fraction", "must lie in (0, 1]"));
        }
        let t = &self.threshold;
        positive("threshold.ray_mu", t.ray_mu)?;
        positive("threshold.ray_rho", t.ray_rho)?;
        positive("threshold.s_min", t.s_min)?;
        positive("threshold.s_max", t.s_max)?;
        if t.s_max <= t.s_min {
            return Err(CliError::field("threshold.s_max", "must exceed threshold.s_min"));
        }
        if t.scan_points < 2 {
            return Err(CliError::field("threshold.scan_points", "need at least 2"));
        }
        let plan = self.phase_plan();
        plan.validate()?;
        for (name, values) in [("sweep.a", &plan.a), ("sweep.d1", &plan.d1), ("sweep.d2", &plan.d2), ("sweep.h0", &plan.h0)] {
            for &v in values.iter() {
                positive(name, v)?;
            }
        }
        for &(mu, rho) in &plan.fronts {
            positive("sweep.fronts", mu)?;
            positive("sweep.fronts", rho)?;
        }
        if let Some(h1) = self.supersolution.h1 {
            if !(h1 > self.init.h0) {
                return Err(CliError::field("supersolution.h1", "must exceed init.h0"));
            }
        }
        positive("supersolution.tol", self.supersolution.tol)?;
        if self.output.dir.is_empty() {
            return Err(CliError::field("output.dir", "must not be empty"));
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<Kernel, CliError> {
        Ok(Kernel::new(self.kernel.family, self.kernel.radius)?)
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        let m = &self.model;
        Ok(ModelParams::new(m.kind, m.d1, m.d2, m.a, m.b, m.c, m.mu, m.rho)?)
    }

    pub fn initial_data(&self) -> Result<InitialData, CliError> {
        let i = &self.init;
        Ok(InitialData::cosine(i.h0, i.u0_amplitude, i.v0_amplitude)?)
    }

    pub fn run_control(&self) -> RunControl {
        let n = &self.numerics;
        let mut run = RunControl::new(n.horizon, n.n);
        run.time_step = match n.dt {
            StepSetting::Fixed(dt) => TimeStep::Fixed(dt),
            StepSetting::Keyword(_) => TimeStep::Auto { max: n.dt_max },
        };
        if let Some(s) = n.sample_interval {
            run.sample_interval = s;
        }
        run.snapshot_interval = n.snapshot_interval;
        run
    }

    pub fn classify_options(&self) -> ClassifyOptions {
        let c = &self.classify;
        ClassifyOptions {
            vanish_tol: c.vanish_tol,
            speed_tol: c.speed_tol,
            eigen_slack: c.eigen_slack,
            window_fraction: c.window_fraction,
        }
    }

    pub fn threshold_control(&self) -> ThresholdControl {
        let t = &self.threshold;
        let mut ctrl = ThresholdControl::new(self.run_control());
        ctrl.s_min = t.s_min;
        ctrl.s_max = t.s_max;
        ctrl.scan_points = t.scan_points;
        ctrl.bisection_steps = t.bisection_steps;
        ctrl.classify = self.classify_options();
        if t.workers > 0 {
            ctrl.workers = t.workers;
        }
        ctrl
    }

    pub fn phase_plan(&self) -> PhasePlan {
        let s = &self.sweep;
        let m = &self.model;
        PhasePlan {
            kernel: Kernel::new(self.kernel.family, self.kernel.radius).expect("validated kernel"),
            base: ModelParams { kind: m.kind, d1: m.d1, d2: m.d2, a: m.a, b: m.b, c: m.c, mu: m.mu, rho: m.rho },
            a: s.a.clone().unwrap_or_else(|| vec![m.a]),
            d1: s.d1.clone().unwrap_or_else(|| vec![m.d1]),
            d2: s.d2.clone().unwrap_or_else(|| vec![m.d2]),
            h0: s.h0.clone().unwrap_or_else(|| vec![self.init.h0]),
            fronts: s.fronts.clone().unwrap_or_else(|| vec![[m.mu, m.rho]]).iter().map(|f| (f[0], f[1])).collect(),
            kinds: s.kind.clone().unwrap_or_else(|| vec![m.kind]),
            u0_amplitude: self.init.u0_amplitude,
            v0_amplitude: self.init.v0_amplitude,
            run: self.run_control(),
            classify: self.classify_options(),
        }
    }

    /// Regime notes reported alongside classifications.
    pub fn regime_notes(&self) -> Vec<String> {
        let m = &self.model;
        let half_pi = 0.5 * PI * m.d2.sqrt();
        let mut notes = Vec::new();
        if m.a >= m.d1 {
            notes.push(format!("a = {} >= d1 = {}: spreading for every front budget", m.a, m.d1));
        }
        if self.init.h0 < half_pi {
            notes.push(format!("h0 = {} < pi*sqrt(d2)/2 = {half_pi:.6}: below the spreading length", self.init.h0));
        } else {
            notes.push(format!("h0 = {} >= pi*sqrt(d2)/2 = {half_pi:.6}: spreading for every front budget", self.init.h0));
        }
        notes
    }
}
