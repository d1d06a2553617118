//! Parameter sweeps: one classified run per grid cell, in parallel.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use super::{Classification, Classifier, ClassifyOptions};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::model::{InitialData, InteractionKind, ModelParams};
use crate::solver::RunControl;

pub const PHASE_HEADER: &str = "a,d1,d2,h0,mu,rho,kind,verdict,certificate,final_length,sup_u,sup_v,lambda_p_final";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePlan {
    pub kernel: Kernel,
    /// Supplies `b` and `c`; the swept fields are overridden per cell.
    pub base: ModelParams,
    pub a: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub h0: Vec<f64>,
    /// `(μ, ρ)` pairs.
    pub fronts: Vec<(f64, f64)>,
    pub kinds: Vec<InteractionKind>,
    pub u0_amplitude: f64,
    pub v0_amplitude: f64,
    pub run: RunControl,
    pub classify: ClassifyOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub a: f64,
    pub d1: f64,
    pub d2: f64,
    pub h0: f64,
    pub mu: f64,
    pub rho: f64,
    pub kind: InteractionKind,
}

impl PhasePlan {
    /// Cells in row-major order: `a` slowest, then `d1, d2, h0, (μ, ρ)`, `kind` fastest.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &a in &self.a {
            for &d1 in &self.d1 {
                for &d2 in &self.d2 {
                    for &h0 in &self.h0 {
                        for &(mu, rho) in &self.fronts {
                            for &kind in &self.kinds {
                                out.push(Cell { a, d1, d2, h0, mu, rho, kind });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        for (name, len) in [
            ("sweep.a", self.a.len()),
            ("sweep.d1", self.d1.len()),
            ("sweep.d2", self.d2.len()),
            ("sweep.h0", self.h0.len()),
            ("sweep.fronts", self.fronts.len()),
            ("sweep.kind", self.kinds.len()),
        ] {
            if len == 0 {
                return Err(Error::invalid(name, "must list at least one value"));
            }
        }
        self.run.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub cell: Cell,
    pub outcome: std::result::Result<Classification, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTable {
    pub rows: Vec<PhaseRow>,
}

impl PhaseTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(PHASE_HEADER);
        out.push('\n');
        for row in &self.rows {
            let c = &row.cell;
            let _ = write!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},", c.a, c.d1, c.d2, c.h0, c.mu, c.rho, c.kind);
            match &row.outcome {
                Ok(class) => {
                    let e = &class.evidence;
                    let lam = e.lambda_p_final.unwrap_or(f64::NAN);
                    let _ = writeln!(
                        out,
                        "{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                        class.verdict, class.certificate, e.final_length, e.sup_u, e.sup_v, lam
                    );
                }
                Err(_) => out.push_str("failed,none,NaN,NaN,NaN,NaN\n"),
            }
        }
        out
    }

    /// Number of cells per verdict (`failed` for errored cells).
    pub fn counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for row in &self.rows {
            let key = match &row.outcome {
                Ok(c) => c.verdict.as_str(),
                Err(_) => "failed",
            };
            *counts.entry(key.to_string()).or_insert(0) += 1;
        }
        counts
    }
}

/// Classifies every cell of `plan` with `workers` threads. Rows come back in
/// grid order whatever the completion order; failed cells keep their error.
pub fn sweep(plan: &PhasePlan, workers: usize) -> Result<PhaseTable> {
    plan.validate()?;
    let classifier = Classifier::new();
    let cells = plan.cells();
    let outcomes = parallel_map(&cells, workers, |cell| run_cell(plan, &classifier, cell));
    let rows = cells.into_iter().zip(outcomes).map(|(cell, outcome)| PhaseRow { cell, outcome }).collect();
    Ok(PhaseTable { rows })
}

fn run_cell(plan: &PhasePlan, classifier: &Classifier, c: &Cell) -> std::result::Result<Classification, String> {
    let go = || -> Result<Classification> {
        let base = &plan.base;
        let p = ModelParams::new(c.kind, c.d1, c.d2, c.a, base.b, base.c, c.mu, c.rho)?;
        let init = InitialData::cosine(c.h0, plan.u0_amplitude, plan.v0_amplitude)?;
        let (_, class) = classifier.run_and_classify(&p, &init, &plan.kernel, &plan.run, &plan.classify)?;
        Ok(class)
    };
    go().map_err(|e| e.to_string())
}

/// Maps `f` over `items` on a fixed pool of scoped threads pulling indices
/// from a shared counter; results are returned in input order.
pub(crate) fn parallel_map<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = workers.clamp(1, items.len().max(1));
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let mut tagged: Vec<(usize, R)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut local = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= items.len() {
                            break;
                        }
                        local.push((i, f(&items[i])));
                    }
                    local
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    tagged.sort_by_key(|(i, _)| *i);
    tagged.into_iter().map(|(_, r)| r).collect()
}
