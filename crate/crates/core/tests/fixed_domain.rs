mod common;

use common::tent;
use freebound_core::eigen::{lambda_p, EigenProblem};
use freebound_core::solver::{fixed_domain_run, Persistence};

fn cosine_bump(n: usize) -> Vec<f64> {
    (0..n).map(|i| (std::f64::consts::PI * i as f64 / (n - 1) as f64).sin().max(0.0) * 0.3).collect()
}

/// Steady state of `d(Ku - u) + u(θ0 - u) = 0` by damped iteration of
/// `u = d Ku / (d - θ0 + u)`, with `K` the plain trapezoid sum.
fn steady_state(d: f64, theta0: f64, length: f64, n: usize) -> Vec<f64> {
    let h = length / (n - 1) as f64;
    let k = tent();
    let band = (1.0 / h).ceil() as usize;
    let w = |j: usize| if j == 0 || j == n - 1 { 0.5 * h } else { h };
    let mut u = vec![theta0; n];
    for _ in 0..200_000 {
        let mut change: f64 = 0.0;
        let next: Vec<f64> = (0..n)
            .map(|i| {
                let lo = i.saturating_sub(band);
                let hi = (i + band).min(n - 1);
                let ku: f64 = (lo..=hi).map(|j| w(j) * k.eval((i as f64 - j as f64) * h) * u[j]).sum();
                d * ku / (d - theta0 + u[i])
            })
            .collect();
        for (a, b) in u.iter_mut().zip(next) {
            let damped = 0.5 * *a + 0.5 * b;
            change = change.max((damped - *a).abs());
            *a = damped;
        }
        if change < 1e-13 {
            break;
        }
    }
    u
}

#[test]
fn short_interval_dies_with_negative_eigenvalue() {
    let n = 33;
    let out = fixed_domain_run(1.0, 0.5, (0.0, 0.1), &cosine_bump(n), &tent(), 1000.0).unwrap();
    let lam = lambda_p(&EigenProblem::new(1.0, 0.5, (0.0, 0.1), n, tent()).unwrap()).unwrap().lambda_p;
    assert!(lam < 0.0);
    assert_eq!(out.verdict, Persistence::Dies);
}

#[test]
fn long_interval_persists_at_the_steady_state() {
    let n = 1601;
    let out = fixed_domain_run(1.0, 0.5, (0.0, 100.0), &cosine_bump(n), &tent(), 5000.0).unwrap();
    let lam = lambda_p(&EigenProblem::new(1.0, 0.5, (0.0, 100.0), n, tent()).unwrap()).unwrap().lambda_p;
    assert!(lam > 0.0);
    assert_eq!(out.verdict, Persistence::Persists);
    let oracle = steady_state(1.0, 0.5, 100.0, n);
    let err = out.field.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-3, "max deviation from steady state {err:e}");
}

#[test]
fn verdict_follows_eigenvalue_sign() {
    // ℓ* for d = 1, θ0 = 0.5 is about 0.63.
    for length in [0.3, 0.5, 0.8, 1.5, 3.0] {
        let n = ((length * 32.0_f64).ceil() as usize + 1).max(17);
        let lam = lambda_p(&EigenProblem::new(1.0, 0.5, (0.0, length), n, tent()).unwrap()).unwrap().lambda_p;
        let out = fixed_domain_run(1.0, 0.5, (0.0, length), &cosine_bump(n), &tent(), 20_000.0).unwrap();
        let expected = if lam > 0.0 { Persistence::Persists } else { Persistence::Dies };
        assert_eq!(out.verdict, expected, "length {length}, lambda_p {lam}");
    }
}
