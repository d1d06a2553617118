use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::kernel::{Kernel, LatticeConvolution};

/// Fields with sup-norm below this are declared extinct.
pub const EXTINCTION_FLOOR: f64 = 1e-6;
/// Relative change of the sup-norm per unit time regarded as stationary.
const STATIONARY_RATE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Persistence {
    Persists,
    Dies,
    /// Neither extinct nor stationary by the horizon.
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedDomainOutcome {
    pub field: Vec<f64>,
    pub nodes: Vec<f64>,
    pub verdict: Persistence,
    pub t: f64,
    pub steps: usize,
}

/// Explicit Euler for `u_t = d(∫_I J(x - y) u dy - u) + u(θ0 - u)` on a fixed
/// interval, collocated on `u0.len()` uniform nodes including both endpoints
/// (the same discretization as the eigenvalue solver).
pub fn fixed_domain_run(
    d: f64,
    theta0: f64,
    interval: (f64, f64),
    u0: &[f64],
    kernel: &Kernel,
    horizon: f64,
) -> Result<FixedDomainOutcome> {
    require_positive("d", d)?;
    require_positive("horizon", horizon)?;
    let (l1, l2) = interval;
    if !(l2 > l1) {
        return Err(Error::invalid("interval", format!("need l1 < l2, got ({l1}, {l2})")));
    }
    let n = u0.len();
    if n < 2 {
        return Err(Error::invalid("u0", "need at least two samples"));
    }
    if u0.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::invalid("u0", "must be finite and nonnegative"));
    }
    let spacing = (l2 - l1) / (n - 1) as f64;
    let conv = LatticeConvolution::new(kernel, spacing, n)?;
    let nodes: Vec<f64> = (0..n).map(|i| l1 + i as f64 * spacing).collect();

    let sup0 = u0.iter().cloned().fold(0.0, f64::max);
    let rate = d + theta0.abs() + sup0.max(theta0.max(0.0));
    let dt = (0.4 / rate).min(0.1);

    let mut u = u0.to_vec();
    let mut ku = vec![0.0; n];
    let mut t = 0.0;
    let mut steps = 0;
    let mut last_sup = sup0;
    let mut last_check = 0.0;
    let mut verdict = Persistence::Undetermined;
    if sup0 == 0.0 {
        verdict = Persistence::Dies;
    }
    while verdict == Persistence::Undetermined && t < horizon {
        let h = dt.min(horizon - t);
        conv.apply(&u, &mut ku);
        for i in 0..n {
            let next = u[i] + h * (d * (ku[i] - u[i]) + u[i] * (theta0 - u[i]));
            if next < -1e-13 || !next.is_finite() {
                return Err(Error::SolverFailure {
                    t,
                    reason: format!("fixed-domain field left the admissible range: {next:e}"),
                    state: None,
                });
            }
            u[i] = if next < super::UNDERFLOW_FLOOR { 0.0 } else { next };
        }
        t += h;
        steps += 1;
        let sup = u.iter().cloned().fold(0.0, f64::max);
        if sup < EXTINCTION_FLOOR {
            verdict = Persistence::Dies;
        } else if t - last_check >= 1.0 {
            let change = (sup - last_sup).abs() / (sup * (t - last_check));
            if change < STATIONARY_RATE {
                verdict = Persistence::Persists;
            }
            last_sup = sup;
            last_check = t;
        }
    }
    Ok(FixedDomainOutcome { field: u, nodes, verdict, t, steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_stays_zero() {
        let out = fixed_domain_run(1.0, 0.5, (0.0, 2.0), &[0.0; 50], &Kernel::tent(1.0).unwrap(), 10.0).unwrap();
        assert!(out.field.iter().all(|&v| v == 0.0));
        assert_eq!(out.verdict, Persistence::Dies);
    }

    #[test]
    fn short_interval_dies() {
        let u0 = vec![0.5; 41];
        let out = fixed_domain_run(1.0, 0.5, (0.0, 0.1), &u0, &Kernel::tent(1.0).unwrap(), 200.0).unwrap();
        assert_eq!(out.verdict, Persistence::Dies);
    }

    #[test]
    fn rejects_negative_data() {
        let k = Kernel::tent(1.0).unwrap();
        assert!(fixed_domain_run(1.0, 0.5, (0.0, 1.0), &[0.1, -0.1, 0.1], &k, 1.0).is_err());
    }
}
