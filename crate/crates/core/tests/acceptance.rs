//! Acceptance suite: one line per criterion, all must pass.

mod common;

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;

use common::{competition, dense_critical_length, interp, max_abs_diff, predation, tent};
use freebound_core::classify::{
    build_predation_supersolution, build_vanishing_supersolution, check_domination, estimate_threshold, sweep,
    Classifier, PhasePlan, SuperSolution, ThresholdControl,
};
use freebound_core::eigen::{critical_length, lambda_p, EigenProblem};
use freebound_core::model::{bounds, Interpolation, Profile};
use freebound_core::solver::{Solver, TimeStep};
use freebound_core::{
    run, Classification, ClassifyOptions, InitialData, InteractionKind, Kernel, KernelFamily,
    ModelParams, RunControl, Verdict,
};

type Outcome = (bool, String);

fn eigen(d: f64, theta0: f64, interval: (f64, f64)) -> f64 {
    let prob = EigenProblem::resolved(d, theta0, interval, tent()).unwrap();
    lambda_p(&prob).unwrap().lambda_p
}

fn eigenvalue_limits() -> Outcome {
    let small = eigen(1.0, 0.5, (0.0, 1e-3));
    let large = eigen(1.0, 0.5, (0.0, 200.0));
    let seq: Vec<f64> = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0].iter().map(|&l| eigen(1.0, 0.5, (0.0, l))).collect();
    let increasing = seq.windows(2).all(|w| w[1] > w[0]);
    let pass = (small + 0.5).abs() <= 1e-2 && (large - 0.5).abs() <= 1e-2 && increasing;
    (pass, format!("lambda_p(1e-3) = {small:.6}, lambda_p(200) = {large:.6}, increasing over lengths: {increasing}"))
}

fn translation_invariance() -> Outcome {
    let at = |interval| {
        let prob = EigenProblem::new(1.0, 0.0, interval, 129, tent()).unwrap();
        lambda_p(&prob).unwrap().lambda_p
    };
    let (a, b) = (at((0.0, 2.0)), at((5.0, 7.0)));
    ((a - b).abs() <= 1e-12, format!("(0,2): {a:.15}, (5,7): {b:.15}, diff {:.1e}", (a - b).abs()))
}

fn critical_length_consistency() -> Outcome {
    let k = tent();
    let c = critical_length(1.0, 0.5, &k, 1e-6).unwrap();
    let oracle = dense_critical_length(1.0, 0.5, &k, 1.0 / 256.0, 0.3, 1.2);
    let rel = (c.ell_star - oracle).abs() / oracle;
    let low = critical_length(1.0, 0.3, &k, 1e-6).unwrap().ell_star;
    let high = critical_length(1.0, 0.6, &k, 1e-6).unwrap().ell_star;
    let pass = c.lambda_at_ell_star.abs() < 1e-6 && rel <= 1e-2 && low > high;
    (
        pass,
        format!(
            "ell* = {:.6} (|lambda| = {:.1e}), dense oracle {oracle:.6}, rel err {rel:.1e}; ell*(0.3) = {low:.4} > ell*(0.6) = {high:.4}",
            c.ell_star,
            c.lambda_at_ell_star.abs()
        ),
    )
}

fn unconditional_spreading() -> Outcome {
    let p = ModelParams::new(InteractionKind::Competition, 1.0, 1.0, 1.0, 0.5, 0.5, 1e-4, 1e-4).unwrap();
    let init = InitialData::cosine(0.2, 1e-3, 1e-3).unwrap();
    let ctrl = RunControl::new(500.0, 400);
    let (traj, class) = Classifier::new().run_and_classify(&p, &init, &tent(), &ctrl, &ClassifyOptions::default()).unwrap();
    let pass = class.verdict == Verdict::Spreading && traj.last().t <= 500.0;
    (pass, format!("verdict {} ({}) at t = {:.1}, final length {:.4}", class.verdict, class.certificate, traj.last().t, traj.last().length()))
}

/// Twenty small-budget runs below the spreading thresholds.
fn vanishing_batch() -> &'static Vec<(ModelParams, Classification)> {
    static BATCH: OnceLock<Vec<(ModelParams, Classification)>> = OnceLock::new();
    BATCH.get_or_init(|| {
        let mut cfgs = Vec::new();
        for a in [0.3, 0.4, 0.5, 0.6] {
            for (h0, s) in [(0.15, 1e-6), (0.15, 1e-3), (0.2, 1e-6), (0.2, 1e-4), (0.2, 1e-3)] {
                cfgs.push((competition(a, 0.5 * s, 0.5 * s), h0));
            }
        }
        let classifier = Classifier::new();
        let mut ctrl = RunControl::new(1000.0, 200);
        ctrl.sample_interval = 1.0;
        std::thread::scope(|scope| {
            let handles: Vec<_> = cfgs
                .iter()
                .map(|(p, h0)| {
                    let classifier = &classifier;
                    let ctrl = &ctrl;
                    scope.spawn(move || {
                        let init = InitialData::cosine(*h0, 0.5, 0.5).unwrap();
                        let (_, class) = classifier.run_and_classify(p, &init, &tent(), ctrl, &ClassifyOptions::default()).unwrap();
                        (*p, class)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    })
}

fn vanishing_bound() -> Outcome {
    let batch = vanishing_batch();
    let vanishing: Vec<_> = batch.iter().filter(|(_, c)| c.verdict == Verdict::Vanishing).collect();
    let mut worst: f64 = f64::NEG_INFINITY;
    for (p, c) in &vanishing {
        let e = &c.evidence;
        worst = worst.max(e.final_length - (PI * p.d2.sqrt() + 2.0 * e.grid_spacing));
    }
    let pass = vanishing.len() == batch.len() && worst <= 0.0;
    (
        pass,
        format!("{}/{} runs vanish; max final length minus (pi*sqrt(d2) + 2 dx) = {worst:.4}", vanishing.len(), batch.len()),
    )
}

fn dichotomy_evidence() -> Outcome {
    let batch = vanishing_batch();
    let mut checked = 0;
    let mut worst_sup: f64 = 0.0;
    let mut worst_speed: f64 = 0.0;
    let mut worst_lambda = f64::NEG_INFINITY;
    for (p, c) in batch.iter().filter(|(_, c)| c.verdict == Verdict::Vanishing) {
        let e = &c.evidence;
        worst_sup = worst_sup.max(e.sup_u).max(e.sup_v);
        worst_speed = worst_speed.max(e.gdot.abs()).max(e.hdot.abs());
        let l = e.final_length;
        // Recomputed at twice the classifier's eigen resolution.
        let prob = EigenProblem::with_spacing(p.d1, p.a, (0.0, l), 1.0 / 64.0, tent()).unwrap();
        worst_lambda = worst_lambda.max(lambda_p(&prob).unwrap().lambda_p);
        checked += 1;
    }
    let pass = checked > 0 && worst_sup < 1e-3 && worst_speed < 1e-3 && worst_lambda <= 1e-2;
    (
        pass,
        format!("{checked} vanishing runs: max sup {worst_sup:.1e}, max |front speed| {worst_speed:.1e}, max lambda_p(final) {worst_lambda:.4}"),
    )
}

fn center_probe(p: &ModelParams) -> (f64, f64) {
    let init = InitialData::cosine(2.0, 0.5, 0.5).unwrap();
    let traj = run(p, &init, &tent(), &RunControl::new(300.0, 400)).unwrap();
    let s = &traj.final_state;
    let x = s.nodes();
    (interp(&x, &s.w, 0.0), interp(&x, &s.z, 0.0))
}

fn long_time_limits() -> Outcome {
    let comp = ModelParams::new(InteractionKind::Competition, 1.0, 1.0, 0.8, 0.5, 0.5, 0.2, 0.2).unwrap();
    let pred = ModelParams::new(InteractionKind::Predation, 1.0, 1.0, 2.0, 0.5, 0.5, 0.2, 0.2).unwrap();
    // Constant steady states of the kinetics, solved by hand.
    let comp_target = ((0.8 - 0.5) / (1.0 - 0.25), (1.0 - 0.8 * 0.5) / (1.0 - 0.25));
    let pred_target = ((2.0 - 0.5) / (1.0 + 0.25), (1.0 + 2.0 * 0.5) / (1.0 + 0.25));
    let (c, q) = std::thread::scope(|scope| {
        let a = scope.spawn(|| center_probe(&comp));
        let b = scope.spawn(|| center_probe(&pred));
        (a.join().unwrap(), b.join().unwrap())
    });
    let within = |got: (f64, f64), want: (f64, f64)| {
        (got.0 - want.0).abs() <= 0.05 * want.0 && (got.1 - want.1).abs() <= 0.05 * want.1
    };
    let pass = comp.weak_competition() && pred.weak_predation() && within(c, comp_target) && within(q, pred_target);
    (
        pass,
        format!(
            "competition (u,v)(0,300) = ({:.5}, {:.5}) vs ({:.1}, {:.1}); predation ({:.5}, {:.5}) vs ({:.1}, {:.1})",
            c.0, c.1, comp_target.0, comp_target.1, q.0, q.1, pred_target.0, pred_target.1
        ),
    )
}

fn threshold_existence() -> Outcome {
    let p = competition(0.5, 1.0, 1.0);
    let init = InitialData::cosine(0.3, 0.5, 0.5).unwrap();
    let mut run = RunControl::new(1000.0, 200);
    run.sample_interval = 1.0;
    let ctrl = ThresholdControl::new(run);
    let est = match estimate_threshold(&p, &init, &tent(), (1.0, 1.0), &ctrl) {
        Ok(e) => e,
        Err(e) => return (false, format!("estimate failed: {e}")),
    };
    let verdict_at = |s: f64| est.evaluations.iter().find(|e| e.0 == s).map(|e| e.1);
    let pass = 0.0 < est.lower
        && est.lower <= est.upper
        && est.upper.is_finite()
        && verdict_at(1e-6) == Some(Verdict::Vanishing)
        && verdict_at(1e3) == Some(Verdict::Spreading);
    (
        pass,
        format!(
            "lower {:.3e}, upper {:.3e}, monotone {}; scale 1e-6: {:?}, scale 1e3: {:?}",
            est.lower,
            est.upper,
            est.monotone_flag,
            verdict_at(1e-6),
            verdict_at(1e3)
        ),
    )
}

fn domination_run(build: impl Fn(&ModelParams) -> SuperSolution, p: ModelParams) -> (f64, f64, bool, f64) {
    let lambda0 = build(&p).lambda0;
    let q = p.with_front(0.5 * lambda0, 0.5 * lambda0);
    let upper = build(&q);
    let init = InitialData::cosine(0.3, 0.5, 0.5).unwrap();
    let mut ctrl = RunControl::new(100.0, 200);
    ctrl.sample_interval = 0.01;
    ctrl.snapshot_interval = Some(0.5);
    let traj = run(&q, &init, &tent(), &ctrl).unwrap();
    let r = check_domination(&upper, &traj, 1e-6).unwrap();
    let worst = r.max_u_excess.max(r.max_v_excess).max(r.max_h_excess).max(r.max_g_excess);
    (lambda0, worst, r.dominated && upper.admissible(), r.snapshots_checked as f64)
}

fn supersolution_domination() -> Outcome {
    let init = InitialData::cosine(0.3, 0.5, 0.5).unwrap();
    let k = tent();
    let (c, q) = std::thread::scope(|scope| {
        let a = scope.spawn(|| {
            domination_run(|p| build_vanishing_supersolution(p, &init, &k, 0.4).unwrap(), competition(0.3, 1.0, 1.0))
        });
        let b = scope.spawn(|| {
            domination_run(|p| build_predation_supersolution(p, &init, &k, 0.4).unwrap(), predation(0.3, 1.0, 1.0))
        });
        (a.join().unwrap(), b.join().unwrap())
    });
    let pass = c.2 && q.2 && c.1 <= 1e-6 && q.1 <= 1e-6;
    (
        pass,
        format!(
            "competition Lambda0 = {:.4e}, max excess {:.2e} over {} snapshots; predation Lambda0 = {:.4e}, max excess {:.2e} over {} snapshots",
            c.0, c.1, c.3, q.0, q.1, q.3
        ),
    )
}

fn kernel_invariants() -> (bool, String) {
    let mut ok = true;
    let mut worst_mass: f64 = 0.0;
    for family in [KernelFamily::Tent, KernelFamily::ParabolicBump, KernelFamily::TruncatedGaussian] {
        for r in [0.5, 1.0, 3.0] {
            let k = Kernel::new(family, r).unwrap();
            // Composite Simpson on [-R, R]; the kink of the tent sits on a node.
            let m = 200_000;
            let h = 2.0 * r / m as f64;
            let mass: f64 = (0..=m)
                .map(|i| {
                    let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                    w * k.eval(-r + i as f64 * h)
                })
                .sum::<f64>()
                * h
                / 3.0;
            worst_mass = worst_mass.max((mass - 1.0).abs());
            for s in [0.0, 0.1 * r, 0.37 * r, 0.9 * r, 1.2 * r] {
                ok &= k.eval(s) == k.eval(-s);
            }
            ok &= (k.tail_mass(-r) - 1.0).abs() <= 1e-12 && (k.tail_mass(0.0) - 0.5).abs() <= 1e-12 && k.tail_mass(r) == 0.0;
        }
    }
    (ok && worst_mass <= 1e-10, format!("kernels symmetric with tail anchors {ok}, worst mass error {worst_mass:.1e}"))
}

fn asymmetric_profile(tilt: f64, mirrored: bool) -> Profile {
    let m = 32;
    let mut values: Vec<f64> = (0..=m)
        .map(|i| {
            let y = -1.0 + 2.0 * i as f64 / m as f64;
            (0.5 * PI * y).cos().max(0.0) * (1.0 + tilt * y) * 0.6
        })
        .collect();
    values[0] = 0.0;
    values[m] = 0.0;
    if mirrored {
        values.reverse();
    }
    Profile::Sampled { values, rule: Interpolation::Linear }
}

fn reflection_equivariance() -> (bool, String) {
    let p = competition(0.8, 1.0, 1.0);
    let k = tent();
    let mut ctrl = RunControl::new(3.0, 100);
    ctrl.time_step = TimeStep::Fixed(0.0025);
    ctrl.sample_interval = 0.1;
    let init = InitialData::new(1.0, asymmetric_profile(0.7, false), asymmetric_profile(-0.4, false)).unwrap();
    let mirror = InitialData::new(1.0, asymmetric_profile(0.7, true), asymmetric_profile(-0.4, true)).unwrap();
    let a = run(&p, &init, &k, &ctrl).unwrap();
    let b = run(&p, &mirror, &k, &ctrl).unwrap();
    let mut worst: f64 = 0.0;
    for (x, y) in a.samples.iter().zip(&b.samples) {
        worst = worst.max((x.g + y.h).abs()).max((x.h + y.g).abs());
    }
    let rev = |f: &[f64]| f.iter().rev().cloned().collect::<Vec<_>>();
    worst = worst.max(max_abs_diff(&a.final_state.w, &rev(&b.final_state.w)));
    worst = worst.max(max_abs_diff(&a.final_state.z, &rev(&b.final_state.z)));

    let even = run(&p, &InitialData::cosine(1.0, 0.5, 0.5).unwrap(), &k, &ctrl).unwrap();
    let mut worst_even: f64 = 0.0;
    for s in &even.samples {
        worst_even = worst_even.max((s.g + s.h).abs());
    }
    let f = &even.final_state;
    worst_even = worst_even.max(max_abs_diff(&f.w, &rev(&f.w))).max(max_abs_diff(&f.z, &rev(&f.z)));
    (worst <= 1e-10 && worst_even <= 1e-10, format!("mirrored data deviation {worst:.1e}, even data deviation {worst_even:.1e}"))
}

fn positivity_and_bounds() -> (bool, String) {
    let k = tent();
    let init = InitialData::cosine(1.0, 0.5, 0.5).unwrap();
    let mut ok = true;
    let mut steps = 0;
    for p in [competition(0.8, 1.0, 1.0), predation(2.0, 1.0, 1.0)] {
        let b = bounds(&p, &init);
        let solver = Solver::new(p, k.clone(), &init, 100).unwrap().without_bound_checks();
        let mut s = solver.initial_state(&init);
        while s.t < 20.0 {
            let (gdot, hdot) = solver.velocities(&s).unwrap();
            let dt = (0.02f64).min(0.5 * solver.stability_limit(&s, gdot, hdot).unwrap());
            let next = solver.step(&s, dt).unwrap();
            ok &= gdot < 0.0 && hdot > 0.0 && next.g <= s.g && next.h >= s.h && next.g <= -1.0 && next.h >= 1.0;
            ok &= next.w.iter().all(|&w| (0.0..=b.k1 * (1.0 + 1e-8)).contains(&w));
            ok &= next.z.iter().all(|&z| (0.0..=b.k2 * (1.0 + 1e-8)).contains(&z));
            s = next;
            steps += 1;
        }
    }
    (ok, format!("{steps} steps checked for 0 <= u <= k1, 0 <= v <= k2 and monotone fronts: {ok}"))
}

fn richardson() -> (bool, String) {
    let p = competition(0.8, 1.0, 1.0);
    let init = InitialData::cosine(1.0, 0.5, 0.5).unwrap();
    let hs: Vec<f64> = (0..4)
        .map(|r| {
            let mut ctrl = RunControl::new(2.0, 40 << r);
            ctrl.time_step = TimeStep::Fixed(0.02 / f64::from(1 << r));
            run(&p, &init, &tent(), &ctrl).unwrap().final_state.h
        })
        .collect();
    let d: Vec<f64> = hs.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let ratios = [d[0] / d[1], d[1] / d[2]];
    (ratios.iter().all(|&r| r >= 1.8), format!("h(2) successive difference ratios {:.3}, {:.3}", ratios[0], ratios[1]))
}

fn sweep_determinism() -> (bool, String) {
    let mut run = RunControl::new(5.0, 40);
    run.sample_interval = 0.5;
    let plan = PhasePlan {
        kernel: tent(),
        base: competition(0.5, 1.0, 1.0),
        a: vec![0.5, 1.0],
        d1: vec![1.0],
        d2: vec![1.0],
        h0: vec![0.3, 1.0],
        fronts: vec![(0.01, 0.01), (1.0, 1.0)],
        kinds: vec![InteractionKind::Competition, InteractionKind::Predation],
        u0_amplitude: 0.5,
        v0_amplitude: 0.5,
        run,
        classify: ClassifyOptions::default(),
    };
    let one = sweep(&plan, 1).unwrap().to_csv();
    let many = sweep(&plan, 8).unwrap().to_csv();
    (one == many, format!("{} cells, csv identical with 1 and 8 workers: {}", plan.cells().len(), one == many))
}

fn property_suites() -> Outcome {
    let parts = [kernel_invariants(), reflection_equivariance(), positivity_and_bounds(), richardson(), sweep_determinism()];
    let pass = parts.iter().all(|p| p.0);
    (pass, parts.iter().map(|p| p.1.as_str()).collect::<Vec<_>>().join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("eigenvalue limits", eigenvalue_limits),
        ("translation invariance", translation_invariance),
        ("critical length consistency", critical_length_consistency),
        ("unconditional spreading", unconditional_spreading),
        ("vanishing length bound", vanishing_bound),
        ("dichotomy evidence", dichotomy_evidence),
        ("long-time limits", long_time_limits),
        ("threshold existence", threshold_existence),
        ("super-solution domination", supersolution_domination),
        ("property suites", property_suites),
    ];
    let results: Vec<(Outcome, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|(_, f)| {
                scope.spawn(move || {
                    let start = Instant::now();
                    let out = f();
                    (out, start.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = Vec::new();
    for (i, ((name, _), ((pass, detail), secs))) in criteria.iter().zip(&results).enumerate() {
        let tag = if *pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {:>2} {name}: {detail} ({secs:.1} s)", i + 1);
        if !pass {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
