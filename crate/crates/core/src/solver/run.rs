use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Solver, State, AUTO_STEP_FRACTION};
use crate::error::{require_positive, Error, Result};
use crate::kernel::Kernel;
use crate::model::{InitialData, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeStep {
    /// Constant step; the run fails if it ever exceeds the stability limit.
    Fixed(f64),
    /// Each step uses a fixed fraction of the current stability limit, capped at `max`.
    Auto { max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunControl {
    pub horizon: f64,
    pub time_step: TimeStep,
    /// Interior resolution of the reference grid (even).
    pub n: usize,
    pub sample_interval: f64,
    /// Full field snapshots are stored at this cadence when set.
    pub snapshot_interval: Option<f64>,
}

impl RunControl {
    pub fn new(horizon: f64, n: usize) -> Self {
        RunControl {
            horizon,
            time_step: TimeStep::Auto { max: 0.02 },
            n,
            sample_interval: horizon / 1000.0,
            snapshot_interval: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("numerics.horizon", self.horizon)?;
        require_positive("numerics.sample_interval", self.sample_interval)?;
        if let Some(s) = self.snapshot_interval {
            require_positive("numerics.snapshot_interval", s)?;
        }
        match self.time_step {
            TimeStep::Fixed(dt) => require_positive("numerics.dt", dt),
            TimeStep::Auto { max } => require_positive("numerics.dt", max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub g: f64,
    pub h: f64,
    pub gdot: f64,
    pub hdot: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    pub u_center: f64,
    pub v_center: f64,
}

impl Sample {
    pub fn length(&self) -> f64 {
        self.h - self.g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Horizon,
    StopRule(String),
}

/// Observes each recorded sample; returning a reason ends the run.
pub trait StopRule {
    fn observe(&mut self, sample: &Sample, state: &State) -> Option<String>;
}

pub struct NeverStop;

impl StopRule for NeverStop {
    fn observe(&mut self, _: &Sample, _: &State) -> Option<String> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub snapshots: Vec<Snapshot>,
    pub termination: Termination,
    pub final_state: State,
    pub steps: usize,
    pub horizon: f64,
}

pub const TRAJECTORY_HEADER: &str = "t,g,h,gdot,hdot,sup_u,sup_v,u_center,v_center";

impl Trajectory {
    /// One row per sample, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.samples.len() + 1));
        out.push_str(TRAJECTORY_HEADER);
        out.push('\n');
        for s in &self.samples {
            let row = [s.t, s.g, s.h, s.gdot, s.hdot, s.sup_u, s.sup_v, s.u_center, s.v_center];
            push_row(&mut out, &row);
        }
        out
    }

    /// Snapshot matrices `(x, u, v)`: one row per snapshot, time first.
    pub fn snapshot_csv(&self) -> (String, String, String) {
        let (mut x, mut u, mut v) = (String::new(), String::new(), String::new());
        for s in &self.snapshots {
            for (out, field) in [(&mut x, &s.x), (&mut u, &s.u), (&mut v, &s.v)] {
                let mut row = Vec::with_capacity(field.len() + 1);
                row.push(s.t);
                row.extend_from_slice(field);
                push_row(out, &row);
            }
        }
        (x, u, v)
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory always holds the initial sample")
    }
}

fn push_row(out: &mut String, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v:.16e}");
    }
    out.push('\n');
}

pub fn run(p: &ModelParams, init: &InitialData, k: &Kernel, ctrl: &RunControl) -> Result<Trajectory> {
    run_with(p, init, k, ctrl, &mut NeverStop)
}

pub fn run_with(
    p: &ModelParams,
    init: &InitialData,
    k: &Kernel,
    ctrl: &RunControl,
    stop: &mut dyn StopRule,
) -> Result<Trajectory> {
    ctrl.validate()?;
    let solver = Solver::new(*p, k.clone(), init, ctrl.n)?;
    let state = solver.initial_state(init);
    integrate(&solver, state, ctrl, stop)
}

/// Integrates from `state` to the horizon or until `stop` fires.
pub(crate) fn integrate(solver: &Solver, mut state: State, ctrl: &RunControl, stop: &mut dyn StopRule) -> Result<Trajectory> {
    let horizon = ctrl.horizon;
    let end_tol = 1e-12 * horizon;
    let mut samples = Vec::new();
    let mut snapshots = Vec::new();
    let mut next_sample = 0.0;
    let mut next_snapshot = 0.0;
    let mut steps = 0usize;

    let mut velocities = solver.velocities(&state)?;
    loop {
        let done = state.t >= horizon - end_tol;
        let mut termination = None;
        if done || state.t >= next_sample {
            let sample = make_sample(&state, velocities);
            samples.push(sample);
            while next_sample <= state.t {
                next_sample += ctrl.sample_interval;
            }
            if let Some(reason) = stop.observe(&sample, &state) {
                termination = Some(Termination::StopRule(reason));
            }
        }
        if let Some(every) = ctrl.snapshot_interval {
            if done || termination.is_some() || state.t >= next_snapshot {
                snapshots.push(Snapshot { t: state.t, x: state.nodes(), u: state.w.clone(), v: state.z.clone() });
                while next_snapshot <= state.t {
                    next_snapshot += every;
                }
            }
        }
        if done || termination.is_some() {
            return Ok(Trajectory {
                samples,
                snapshots,
                termination: termination.unwrap_or(Termination::Horizon),
                final_state: state,
                steps,
                horizon,
            });
        }

        let (gdot, hdot) = velocities;
        let limit = solver.stability_limit(&state, gdot, hdot)?;
        let remaining = horizon - state.t;
        let dt = match ctrl.time_step {
            TimeStep::Fixed(dt) => {
                if dt > limit {
                    return Err(Error::Stability { dt, limit, t: state.t });
                }
                dt
            }
            TimeStep::Auto { max } => max.min(AUTO_STEP_FRACTION * limit),
        };
        let dt = if remaining - dt < end_tol { remaining } else { dt };
        let mut next = solver.advance(&state, dt, gdot, hdot)?;
        steps += 1;
        if (horizon - next.t).abs() < end_tol {
            next.t = horizon;
        }
        velocities = solver.velocities(&next)?;
        state = next;
    }
}

fn make_sample(s: &State, (gdot, hdot): (f64, f64)) -> Sample {
    let (u_center, v_center) = s.center();
    Sample { t: s.t, g: s.g, h: s.h, gdot, hdot, sup_u: s.sup_u(), sup_v: s.sup_v(), u_center, v_center }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::InteractionKind;

    #[test]
    fn csv_header_and_rows() {
        let p = ModelParams::new(InteractionKind::Competition, 1.0, 1.0, 0.8, 0.5, 0.5, 1.0, 1.0).unwrap();
        let init = InitialData::cosine(1.0, 0.5, 0.5).unwrap();
        let mut ctrl = RunControl::new(0.1, 20);
        ctrl.sample_interval = 0.05;
        ctrl.time_step = TimeStep::Fixed(0.01);
        let traj = run(&p, &init, &Kernel::tent(1.0).unwrap(), &ctrl).unwrap();
        let csv = traj.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), TRAJECTORY_HEADER);
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), traj.samples.len());
        assert_eq!(traj.samples[0].t, 0.0);
        assert_eq!(traj.last().t, 0.1);
        for row in rows {
            let vals: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
            assert_eq!(vals.len(), 9);
        }
        assert_eq!(traj.termination, Termination::Horizon);
    }

    #[test]
    fn csv_round_trips_bits() {
        let mut s = String::new();
        let x = [0.1 + 0.2, 1.0 / 3.0, -2.5e-300, 6.02214076e23];
        push_row(&mut s, &x);
        let back: Vec<f64> = s.trim().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(back, x);
    }
}
