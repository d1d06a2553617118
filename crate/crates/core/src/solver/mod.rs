//! Time integration of the coupled system on its moving domain.
//!
//! The domain `[g(t), h(t)]` is mapped onto `y ∈ [-1, 1]` by
//! `x = (g + h)/2 + y (h - g)/2`. In `y` the fields obey
//!
//! ```text
//! w_t = ζ w_y + d1 (∫ J(x - x') u dx' - w) + f1(w, z)
//! z_t = d2 ξ z_yy + ζ z_y + f2(w, z)
//! ```
//!
//! with `ξ = (2/(h - g))²` and `ζ = (2/(h - g)) x_t`. Each step is one IMEX
//! Euler step: explicit fronts, explicit `w`, implicit local diffusion of `z`.

mod fixed;
mod run;

pub use fixed::{fixed_domain_run, FixedDomainOutcome, Persistence};
pub use run::{run, run_with, NeverStop, RunControl, Sample, Snapshot, StopRule, Termination, TimeStep, Trajectory};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{Kernel, LatticeConvolution};
use crate::linalg::solve_tridiagonal;
use crate::model::{bounds, InitialData, ModelParams, SolutionBounds};

/// Relative slack allowed on the a-priori bounds `w ≤ k1`, `z ≤ k2`.
pub const BOUND_SLACK: f64 = 1e-8;
/// Negative values above this are roundoff and clamped to zero.
pub const NEGATIVE_CLAMP: f64 = -1e-13;
/// Values below this are flushed to zero to keep arithmetic out of subnormals.
pub const UNDERFLOW_FLOOR: f64 = 1e-200;
/// Fraction of the stability bound used by automatic time stepping.
pub const AUTO_STEP_FRACTION: f64 = 0.5;

/// `n + 1` uniform nodes on `[-1, 1]`, `y_i = (2i - n)/n`, so `y_{n-i} = -y_i`
/// exactly and the middle node sits at `y = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceGrid {
    n: usize,
    y: Vec<f64>,
}

impl ReferenceGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::invalid("numerics.n", format!("must be even and at least 4, got {n}")));
        }
        let y = (0..=n).map(|i| (2.0 * i as f64 - n as f64) / n as f64).collect();
        Ok(ReferenceGrid { n, y })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[f64] {
        &self.y
    }

    pub fn spacing(&self) -> f64 {
        2.0 / self.n as f64
    }

    /// Physical positions of the nodes for fronts `g`, `h`.
    pub fn physical(&self, g: f64, h: f64) -> Vec<f64> {
        let mid = 0.5 * (g + h);
        let half = 0.5 * (h - g);
        self.y.iter().map(|y| mid + y * half).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub g: f64,
    pub h: f64,
    /// `u` on the reference nodes.
    pub w: Vec<f64>,
    /// `v` on the reference nodes.
    pub z: Vec<f64>,
}

impl State {
    pub fn n(&self) -> usize {
        self.w.len() - 1
    }

    pub fn length(&self) -> f64 {
        self.h - self.g
    }

    pub fn sup_u(&self) -> f64 {
        self.w.iter().cloned().fold(0.0, f64::max)
    }

    pub fn sup_v(&self) -> f64 {
        self.z.iter().cloned().fold(0.0, f64::max)
    }

    /// Values at the node mapped to the domain midpoint.
    pub fn center(&self) -> (f64, f64) {
        let m = self.n() / 2;
        (self.w[m], self.z[m])
    }

    /// Physical node positions.
    pub fn nodes(&self) -> Vec<f64> {
        let n = self.n();
        let mid = 0.5 * (self.g + self.h);
        let half = 0.5 * (self.h - self.g);
        (0..=n).map(|i| mid + half * (2.0 * i as f64 - n as f64) / n as f64).collect()
    }

    /// Initial state sampled from `init` on `grid`.
    pub fn initial(grid: &ReferenceGrid, init: &InitialData) -> Self {
        let n = grid.n();
        let mut w: Vec<f64> = grid.nodes().iter().map(|&y| init.u0.eval(y)).collect();
        let mut z: Vec<f64> = grid.nodes().iter().map(|&y| init.v0.eval(y)).collect();
        w[0] = 0.0;
        w[n] = 0.0;
        z[0] = 0.0;
        z[n] = 0.0;
        State { t: 0.0, g: -init.h0, h: init.h0, w, z }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformedCoeffs {
    pub xi: f64,
    pub zeta: Vec<f64>,
}

/// `ξ = (2/(h - g))²`, `ζ_i = (2/(h - g)) ((g' + h')/2 + y_i (h' - g')/2)`.
pub fn transform_coefficients(grid: &ReferenceGrid, s: &State, gdot: f64, hdot: f64) -> Result<TransformedCoeffs> {
    let len = s.h - s.g;
    if !(len > 0.0) || !len.is_finite() {
        return Err(Error::DegenerateDomain { g: s.g, h: s.h });
    }
    let scale = 2.0 / len;
    let mean = 0.5 * (gdot + hdot);
    let spread = 0.5 * (hdot - gdot);
    let zeta = grid.nodes().iter().map(|y| scale * (mean + y * spread)).collect();
    Ok(TransformedCoeffs { xi: scale * scale, zeta })
}

/// Front velocities `(g', h')`.
///
/// `h' = -μ v_x(h) + ρ ∫ Ĵ(h - x) u dx`, `g' = -μ v_x(g) - ρ ∫ Ĵ(x - g) u dx`,
/// trapezoid on the mapped nodes. `v_x` uses the 3-point one-sided stencil,
/// falling back to the 2-point one when the 3-point value has the wrong sign
/// for a nonnegative profile.
pub fn boundary_velocities(s: &State, p: &ModelParams, k: &Kernel) -> Result<(f64, f64)> {
    let n = s.n();
    if s.w.iter().chain(&s.z).any(|v| !v.is_finite()) || !s.g.is_finite() || !s.h.is_finite() {
        return Err(Error::NumericalBlowup(format!("non-finite state at t = {}", s.t)));
    }
    let len = s.h - s.g;
    if !(len > 0.0) {
        return Err(Error::DegenerateDomain { g: s.g, h: s.h });
    }
    let dy = 2.0 / n as f64;
    let scale = 2.0 / len;

    let mut vx_h = (3.0 * s.z[n] - 4.0 * s.z[n - 1] + s.z[n - 2]) / (2.0 * dy);
    if vx_h > 0.0 {
        vx_h = (s.z[n] - s.z[n - 1]) / dy;
    }
    let mut vx_g = (-3.0 * s.z[0] + 4.0 * s.z[1] - s.z[2]) / (2.0 * dy);
    if vx_g < 0.0 {
        vx_g = (s.z[1] - s.z[0]) / dy;
    }
    vx_h *= scale;
    vx_g *= scale;

    let dx = len / n as f64;
    let nf = n as f64;
    let weight = |j: usize| if j == 0 || j == n { 0.5 * dx } else { dx };
    let mut flux_h = 0.0;
    for j in 0..=n {
        let dist = len * ((n - j) as f64 / nf);
        if dist < k.radius() && s.w[j] != 0.0 {
            flux_h += weight(j) * k.tail_mass(dist) * s.w[j];
        }
    }
    // Mirrored order, so a reflected state gives exactly g' = -h'.
    let mut flux_g = 0.0;
    for j in (0..=n).rev() {
        let dist = len * (j as f64 / nf);
        if dist < k.radius() && s.w[j] != 0.0 {
            flux_g += weight(j) * k.tail_mass(dist) * s.w[j];
        }
    }
    let hdot = -p.mu * vx_h + p.rho * flux_h;
    let gdot = -p.mu * vx_g - p.rho * flux_g;
    if !hdot.is_finite() || !gdot.is_finite() {
        return Err(Error::NumericalBlowup(format!("non-finite front speed at t = {}", s.t)));
    }
    Ok((gdot, hdot))
}

/// Integrator for one parameter set on a fixed reference grid.
#[derive(Debug, Clone)]
pub struct Solver {
    params: ModelParams,
    kernel: Kernel,
    grid: ReferenceGrid,
    bounds: Option<SolutionBounds>,
    h0: f64,
}

impl Solver {
    pub fn new(params: ModelParams, kernel: Kernel, init: &InitialData, n: usize) -> Result<Self> {
        params.validate()?;
        let grid = ReferenceGrid::new(n)?;
        let b = bounds(&params, init);
        Ok(Solver { params, kernel, grid, bounds: Some(b), h0: init.h0 })
    }

    /// Disables the a-priori bound checks (for states outside the admissible class).
    pub fn without_bound_checks(mut self) -> Self {
        self.bounds = None;
        self
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn grid(&self) -> &ReferenceGrid {
        &self.grid
    }

    pub fn bounds(&self) -> Option<&SolutionBounds> {
        self.bounds.as_ref()
    }

    pub fn initial_state(&self, init: &InitialData) -> State {
        State::initial(&self.grid, init)
    }

    pub fn velocities(&self, s: &State) -> Result<(f64, f64)> {
        self.check_shape(s)?;
        boundary_velocities(s, &self.params, &self.kernel)
    }

    /// Largest rate among the explicit reaction and nonlocal terms.
    fn reaction_rate(&self, s: &State) -> f64 {
        let p = &self.params;
        let (k1, k2) = match &self.bounds {
            Some(b) => (b.k1, b.k2),
            None => (s.sup_u().max(p.a), s.sup_v().max(1.0)),
        };
        p.d1 + p.a + p.b * k2 + p.c * k1 + 1.0 + k1 + k2
    }

    /// `0.4 · min{Δy / max|ζ|, 1/rate}` for the given front speeds.
    pub fn stability_limit(&self, s: &State, gdot: f64, hdot: f64) -> Result<f64> {
        let coeffs = transform_coefficients(&self.grid, s, gdot, hdot)?;
        let zeta_max = coeffs.zeta.iter().fold(0.0f64, |m, z| m.max(z.abs()));
        let advective = if zeta_max > 0.0 { self.grid.spacing() / zeta_max } else { f64::INFINITY };
        Ok(0.4 * advective.min(1.0 / self.reaction_rate(s)))
    }

    /// One IMEX Euler step of size `dt`; fails if `dt` exceeds the stability limit.
    pub fn step(&self, s: &State, dt: f64) -> Result<State> {
        let (gdot, hdot) = self.velocities(s)?;
        let limit = self.stability_limit(s, gdot, hdot)?;
        if !(dt > 0.0) || dt > limit {
            return Err(Error::Stability { dt, limit, t: s.t });
        }
        self.advance(s, dt, gdot, hdot)
    }

    fn check_shape(&self, s: &State) -> Result<()> {
        let expected = self.grid.n() + 1;
        if s.w.len() != expected {
            return Err(Error::Shape { expected, found: s.w.len() });
        }
        if s.z.len() != expected {
            return Err(Error::Shape { expected, found: s.z.len() });
        }
        Ok(())
    }

    fn advance(&self, s: &State, dt: f64, gdot: f64, hdot: f64) -> Result<State> {
        let n = self.grid.n();
        let p = &self.params;
        let dy = self.grid.spacing();
        let g = s.g + dt * gdot;
        let h = s.h + dt * hdot;
        if !(h > g) || !g.is_finite() || !h.is_finite() {
            return Err(Error::DegenerateDomain { g, h });
        }
        let moved = State { t: s.t + dt, g, h, w: Vec::new(), z: Vec::new() };
        let coeffs = transform_coefficients(&self.grid, &moved, gdot, hdot)?;
        let zeta = &coeffs.zeta;

        let upwind = |f: &[f64], i: usize| -> f64 {
            if zeta[i] > 0.0 {
                zeta[i] * (f[i + 1] - f[i]) / dy
            } else if zeta[i] < 0.0 {
                zeta[i] * (f[i] - f[i - 1]) / dy
            } else {
                0.0
            }
        };

        let conv = LatticeConvolution::new(&self.kernel, (h - g) / n as f64, n + 1)?;
        let mut kw = vec![0.0; n + 1];
        conv.apply(&s.w, &mut kw);

        let mut w = vec![0.0; n + 1];
        for i in 1..n {
            let (f1, _) = p.reaction_unchecked(s.w[i], s.z[i]);
            w[i] = s.w[i] + dt * (upwind(&s.w, i) + p.d1 * (kw[i] - s.w[i]) + f1);
        }

        let m = n - 1;
        let diff = dt * p.d2 * coeffs.xi / (dy * dy);
        let lower = vec![-diff; m];
        let diag = vec![1.0 + 2.0 * diff; m];
        let upper = vec![-diff; m];
        let mut rhs: Vec<f64> = (1..n)
            .map(|i| {
                let (_, f2) = p.reaction_unchecked(s.w[i], s.z[i]);
                s.z[i] + dt * (upwind(&s.z, i) + f2)
            })
            .collect();
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs)?;
        let mut z = vec![0.0; n + 1];
        z[1..n].copy_from_slice(&rhs);

        let mut next = State { t: s.t + dt, g, h, w, z };
        self.sanitize(&mut next)?;
        Ok(next)
    }

    /// Clamps roundoff negatives, flushes underflow, and checks the invariants.
    fn sanitize(&self, s: &mut State) -> Result<()> {
        for (name, field) in [("u", &s.w), ("v", &s.z)] {
            if let Some(v) = field.iter().find(|v| !v.is_finite()) {
                return Err(Error::NumericalBlowup(format!("{name} = {v} at t = {}", s.t)));
            }
            if let Some(v) = field.iter().find(|&&v| v < NEGATIVE_CLAMP) {
                return Err(self.failure(s, format!("negative {name} = {v:e}")));
            }
        }
        for v in s.w.iter_mut().chain(s.z.iter_mut()) {
            if *v < UNDERFLOW_FLOOR {
                *v = 0.0;
            }
        }
        if let Some(b) = &self.bounds {
            let (su, sv) = (s.sup_u(), s.sup_v());
            if su > b.k1 * (1.0 + BOUND_SLACK) {
                return Err(self.failure(s, format!("sup u = {su} exceeds k1 = {}", b.k1)));
            }
            if sv > b.k2 * (1.0 + BOUND_SLACK) {
                return Err(self.failure(s, format!("sup v = {sv} exceeds k2 = {}", b.k2)));
            }
            if s.g > -self.h0 || s.h < self.h0 {
                return Err(self.failure(s, format!("domain shrank below the initial one: [{}, {}]", s.g, s.h)));
            }
        }
        Ok(())
    }

    fn failure(&self, s: &State, reason: String) -> Error {
        Error::SolverFailure { t: s.t, reason, state: Some(Box::new(s.clone())) }
    }
}
