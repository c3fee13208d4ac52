//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line (visible with `--nocapture`).  Grid conventions: "S = 512" means
//! 512 uniform intervals, i.e. 513 samples.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use scaleflow::axioms::{axiom_suite, AxiomConfig};
use scaleflow::bundled;
use scaleflow::catalog::Catalog;
use scaleflow::compactness::tails::{tail_threshold, tail_verify, ScaleCurve};
use scaleflow::fields::{
    c1_prime_closed_form, check_growth_condition, conjugated_remainder, vf_diff, vf_eval,
    ConstantI, FieldSpec, QuadraticHamiltonian, RemainderRoute,
};
use scaleflow::flow::{
    closed_form_linear_flow, energy_identity_check, gradient_check, integrate, DerivPolicy,
    FlowConfig,
};
use scaleflow::frames::{frame_apply, frame_differential, ScalarRotationFrame, TrivialFrame};
use scaleflow::loops::{
    check_lagrangian_bc, random_path, random_path_exp, reflect_to_loop, restrict_to_path, Boundary,
    FourierPath,
};
use scaleflow::numerics::log_log_slope;
use scaleflow::scale::{ScaleVector, SignMap, WeightFn};
use scaleflow::scenario::{parse_scenario, run_scenario, Context};

fn criterion(number: u32, label: &str, pass: bool) {
    println!(
        "[{}] criterion {number}: {label}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {number} failed: {label}");
}

fn linear_floer(gamma: f64) -> FieldSpec {
    FieldSpec::floer(
        Arc::new(ConstantI { n: 1 }),
        Arc::new(QuadraticHamiltonian::plain(1, gamma)),
    )
    .unwrap()
}

fn bumped_floer(gamma: f64, amplitude: f64) -> FieldSpec {
    let ham = QuadraticHamiltonian {
        n: 1,
        gamma,
        bumps: vec![scaleflow::fields::Bump {
            amplitude,
            center: vec![[0.2, -0.1]],
            radius: 2.0,
            time_modulated: true,
        }],
        declared_c: 10.0,
    };
    FieldSpec::floer(Arc::new(ConstantI { n: 1 }), Arc::new(ham)).unwrap()
}

fn run_bundled(name: &str) -> scaleflow::scenario::ScenarioReport {
    let scenario = parse_scenario(bundled::find(name).expect("bundled scenario")).unwrap();
    let budget = scenario.runtime_budget_secs;
    let catalog = Catalog::builtin();
    let ctx = Context::resolve(scenario, &catalog).unwrap();
    let report = run_scenario(&ctx);
    assert!(
        report.meta.duration_secs <= budget as f64,
        "{name} exceeded its declared runtime budget: {:.1}s > {budget}s",
        report.meta.duration_secs
    );
    report
}

#[test]
fn criterion_1_isometry_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    // abstract fundamental operator on 1000 random scale vectors
    for trial in 0..1000 {
        let (weight, zeta) = match trial % 3 {
            0 => (WeightFn::power(1.0).unwrap(), SignMap::Plus),
            1 => (WeightFn::power(2.0).unwrap(), SignMap::Minus),
            _ => (
                WeightFn::floer_periodic(1).unwrap(),
                SignMap::FloerPeriodic { n: 1 },
            ),
        };
        let pairs: Vec<(u64, f64)> = (0..40)
            .map(|_| (rng.gen_range(1..=256u64), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut seen = std::collections::BTreeSet::new();
        let pairs: Vec<_> = pairs
            .into_iter()
            .filter(|(nu, _)| seen.insert(*nu))
            .collect();
        let x = ScaleVector::new(weight, pairs).unwrap();
        let fx = x.fundamental_apply(&zeta);
        for k in -2..=2 {
            let expect = x.level_norm(k + 1);
            if expect > 0.0 {
                worst = worst.max((fx.level_norm(k) - expect).abs() / expect);
            }
        }
    }
    // concrete fundamental operator on 1000 random paths, both boundaries
    for trial in 0..1000 {
        let boundary = if trial % 2 == 0 {
            Boundary::Periodic
        } else {
            Boundary::Lagrangian
        };
        let x = random_path(&mut rng, 2, boundary, 16, 1.0, 0.7);
        let fx = x.floer_fundamental();
        for k in -1..=1 {
            let expect = x.sobolev_norm(k + 1);
            worst = worst.max((fx.sobolev_norm(k) - expect).abs() / expect.max(1e-300));
        }
    }
    criterion(
        1,
        &format!("isometry relative error {worst:.2e} <= 1e-12"),
        worst <= 1e-12,
    );
}

#[test]
fn criterion_2_tail_mechanism() {
    let weight = WeightFn::power(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_violation: f64 = 0.0;
    for _ in 0..1000 {
        let pairs: Vec<(u64, f64)> = (1..=96u64)
            .map(|nu| (nu, rng.gen_range(-1.0..1.0)))
            .collect();
        let x = ScaleVector::new(weight.clone(), pairs).unwrap();
        for n_cut in 0..=64u64 {
            for k in -1..=2i32 {
                let lhs = x.tail_norm(n_cut, k - 1);
                let rhs = weight.eval(n_cut + 1).powf(-0.5) * x.tail_norm(n_cut, k);
                worst_violation = worst_violation.max(lhs - rhs * (1.0 + 1e-14));
            }
        }
    }
    let exact = worst_violation <= 0.0;

    // synthetic-decay family against the threshold, and the halving of the
    // threshold itself on a short window
    let t_half = 0.1;
    let family: Vec<ScaleCurve> = (0..4)
        .map(|m| {
            let samples = 129;
            let states = (0..samples)
                .map(|i| {
                    let s = -t_half + i as f64 * 2.0 * t_half / (samples - 1) as f64;
                    let profile = 1.0 + 0.3 * ((1.0 + m as f64 / 4.0) * s).sin();
                    let pairs: Vec<(u64, f64)> = (1..=96u64)
                        .map(|nu| (nu, profile / weight.eval(nu)))
                        .collect();
                    ScaleVector::new(weight.clone(), pairs).unwrap()
                })
                .collect();
            ScaleCurve::new(t_half, states).unwrap()
        })
        .collect();
    let report = tail_verify(&family, 2.0, 2, &[8, 16, 32, 64], None).unwrap();
    let eps8 = tail_threshold(report.bound_c, t_half, 2.0, &weight, 8).unwrap();
    let eps64 = tail_threshold(report.bound_c, t_half, 2.0, &weight, 64).unwrap();
    let halves = eps64 < 0.5 * eps8;

    criterion(
        2,
        &format!(
            "exact tail inequality ({}), family verified ({}), eps(64)/eps(8) = {:.3} < 1/2",
            exact,
            report.pass,
            eps64 / eps8
        ),
        exact && report.pass && halves,
    );
}

#[test]
fn criterion_3_axiom_suite() {
    // trivial frame: c0 = 1 exactly
    let cfg = AxiomConfig::new(1, 1.0, vec![8, 16], 31);
    let trivial = axiom_suite(&TrivialFrame { n: 1 }, None, &cfg, None, None).unwrap();
    let trivial_ok = trivial.pass && (trivial.c0 - 1.0).abs() <= 1e-12;

    // rotation frame: ladder-stable c0 at kappa = 1 across 8, 16, 32
    let mut cfg = AxiomConfig::new(1, 1.0, vec![8, 16, 32], 32);
    cfg.offset = 1;
    cfg.samples = 16;
    let frame = ScalarRotationFrame {
        n: 1,
        strength: 1.0,
    };
    let rotation = axiom_suite(&frame, None, &cfg, None, None).unwrap();

    // elementary linear field: closed-form constant from the measured
    // growth data (pure linear field: measured c = |gamma| = 1, so
    // max{1, 2c, c + 2|gamma|}/min{1, |gamma|} = 3)
    let spec = linear_floer(1.0);
    let growth = check_growth_condition(&spec, 3.0, 200, 33);
    let c1p = c1_prime_closed_form(growth.gamma, growth.measured_c);
    let formula_is_3 = (c1p - 3.0).abs() <= 1e-9;
    let cfg = AxiomConfig::new(1, 1.0, vec![8, 16], 34);
    let elem = axiom_suite(&TrivialFrame { n: 1 }, Some(&spec), &cfg, None, Some(c1p)).unwrap();
    let v3p = elem.v3_prime.as_ref().unwrap();

    criterion(
        3,
        &format!(
            "trivial c0 = {:.3e}; rotation c0 stable = {}; c1' = {c1p} with V3' pass = {}",
            trivial.c0, rotation.c0_stable, v3p.pass
        ),
        trivial_ok && rotation.pass && formula_is_3 && elem.pass && v3p.pass,
    );
}

#[test]
fn criterion_4_differential_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);

    // frame differential order
    let frame = ScalarRotationFrame {
        n: 1,
        strength: 1.0,
    };
    let x = random_path_exp(&mut rng, 1, Boundary::Periodic, 8, 0.5, 2.0);
    let h = random_path_exp(&mut rng, 1, Boundary::Periodic, 8, 1.0, 2.0);
    let v = random_path_exp(&mut rng, 1, Boundary::Periodic, 8, 1.0, 2.0);
    let fv = frame_apply(&frame, &x, &v).unwrap();
    let dfv = frame_differential(&frame, &x, &h, &v).unwrap();
    let mut pts = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
        let xp = FourierPath::lincomb(&[(1.0, &x), (eps, &h)]).unwrap();
        let fvp = frame_apply(&frame, &xp, &v).unwrap();
        let defect = FourierPath::lincomb(&[(1.0, &fvp), (-1.0, &fv), (-eps, &dfv)])
            .unwrap()
            .sobolev_norm(0);
        pts.push((eps, defect));
    }
    let frame_slope = log_log_slope(&pts);

    // field differential order on the bumped catalog field
    let spec = bumped_floer(1.0, 0.4);
    let x = random_path_exp(&mut rng, 1, Boundary::Periodic, 6, 0.4, 1.0);
    let xh = random_path_exp(&mut rng, 1, Boundary::Periodic, 6, 1.0, 1.0);
    let vx = vf_eval(&spec, &x).unwrap();
    let dv = vf_diff(&spec, &x, &xh).unwrap();
    let mut pts = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
        let xp = FourierPath::lincomb(&[(1.0, &x), (eps, &xh)]).unwrap();
        let vp = vf_eval(&spec, &xp).unwrap();
        let defect = FourierPath::lincomb(&[(1.0, &vp), (-1.0, &vx), (-eps, &dv)])
            .unwrap()
            .sobolev_norm(0);
        pts.push((eps, defect));
    }
    let field_slope = log_log_slope(&pts);

    // gradient certification on the catalog Hamiltonians
    let dirs: Vec<FourierPath> = (0..3)
        .map(|_| random_path_exp(&mut rng, 1, Boundary::Periodic, 6, 1.0, 1.0))
        .collect();
    let quad_report = gradient_check(&linear_floer(1.0), &x, &dirs).unwrap();
    let bump_report = gradient_check(&spec, &x, &dirs).unwrap();
    let grad_ok = quad_report.max_agreement <= 1e-6
        && bump_report.max_agreement <= 1e-6
        && bump_report.min_slope.map_or(false, |s| s >= 1.9);

    criterion(
        4,
        &format!(
            "frame slope {frame_slope:.2}, field slope {field_slope:.2}, gradient agreement {:.2e}",
            bump_report.max_agreement
        ),
        frame_slope >= 1.9 && field_slope >= 1.9 && grad_ok,
    );
}

#[test]
fn criterion_5_conjugation_identity() {
    let spec = linear_floer(1.0);
    let frame = ScalarRotationFrame {
        n: 1,
        strength: 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let master_x = random_path_exp(&mut rng, 1, Boundary::Periodic, 32, 0.5, 1.0);
    let master_h = random_path_exp(&mut rng, 1, Boundary::Periodic, 32, 1.0, 1.0);
    let mut gaps = Vec::new();
    for order in [8usize, 16, 32] {
        let x = master_x.with_order(order);
        let xh = master_h.with_order(order);
        let a = conjugated_remainder(&spec, &frame, &x, &xh, RemainderRoute::Explicit).unwrap();
        let b = conjugated_remainder(&spec, &frame, &x, &xh, RemainderRoute::Conjugation).unwrap();
        gaps.push(
            FourierPath::lincomb(&[(1.0, &a), (-1.0, &b)])
                .unwrap()
                .sobolev_norm(0),
        );
    }
    let mid_ok = gaps[1] <= 1e-9;
    let shrink = gaps[0] / gaps[2].max(1e-300);
    criterion(
        5,
        &format!(
            "route gap at N=16 is {:.2e}; shrink 8->32 is {shrink:.1}x",
            gaps[1]
        ),
        mid_ok && shrink >= 10.0,
    );
}

#[test]
fn criterion_6_energy_identity() {
    // closed form: T = 1, gamma = 1, mode 0: both sides (e^2 - e^{-2})/2
    let spec = linear_floer(1.0);
    let x0 =
        FourierPath::single_mode(1, Boundary::Periodic, 2, 0, &[Complex64::new(1.0, 0.0)]).unwrap();
    let w = integrate(&spec, &x0, 1.0, 513, &FlowConfig::etd(2f64.powi(-8), 1e7))
        .unwrap()
        .with_policy(DerivPolicy::FromField);
    let report = energy_identity_check(&spec, &w).unwrap();
    let exact = 0.5 * (2.0f64.exp() - (-2.0f64).exp());
    let closed_ok =
        (report.action_drop - exact).abs() <= 1e-8 && (report.energy - exact).abs() <= 1e-8;

    // random data on the bumped catalog field
    let spec = bumped_floer(1.0, 0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x0 = random_path_exp(&mut rng, 1, Boundary::Periodic, 3, 0.1, 1.5);
    let w = integrate(&spec, &x0, 0.5, 513, &FlowConfig::adaptive(1e-10, 1e7))
        .unwrap()
        .with_policy(DerivPolicy::FromField);
    let random_report = energy_identity_check(&spec, &w).unwrap();

    criterion(
        6,
        &format!(
            "closed form drop {:.10} vs {exact:.10}; random mismatch {:.2e}",
            report.action_drop, random_report.relative_mismatch
        ),
        closed_ok && random_report.relative_mismatch <= 1e-6,
    );
}

#[test]
fn criterion_7_flow_oracle() {
    let unit = [Complex64::new(1.0, 0.0)];
    let cfg = FlowConfig::etd(2f64.powi(-8), 1e7);

    // local field over |s| <= 1
    let mut worst: f64 = 0.0;
    let spec = linear_floer(1.0);
    for j in [-1i64, 0, 1] {
        let x0 = FourierPath::single_mode(1, Boundary::Periodic, 2, j, &unit).unwrap();
        let w = integrate(&spec, &x0, 1.0, 257, &cfg).unwrap();
        for i in 0..w.samples() {
            let expect = closed_form_linear_flow(j, 1.0, 0.0, &unit, w.s_at(i));
            let err = (w.state(i).mode(j)[0] - expect[0]).norm() / expect[0].norm();
            worst = worst.max(err);
        }
    }

    // delay tau = 1/2 over |s| <= 1 (mode-1 rate 2 pi + gamma)
    let gamma = 0.7;
    let delay = FieldSpec::delay(vec![scaleflow::fields::DelayTerm {
        tau: 0.5,
        field: Arc::new(scaleflow::fields::LinearField { n: 1, gamma }),
    }])
    .unwrap();
    let x0 = FourierPath::single_mode(1, Boundary::Periodic, 2, 1, &unit).unwrap();
    let w = integrate(&delay, &x0, 1.0, 257, &cfg).unwrap();
    for i in 0..w.samples() {
        let expect = closed_form_linear_flow(1, gamma, 0.5, &unit, w.s_at(i));
        let err = (w.state(i).mode(1)[0] - expect[0]).norm() / expect[0].norm();
        worst = worst.max(err);
    }

    // observed order with the diagonal part folded into the remainder
    let x0 = FourierPath::single_mode(1, Boundary::Periodic, 2, 0, &unit).unwrap();
    let mut pts = Vec::new();
    for k in 4..=8 {
        let mut cfg = FlowConfig::etd(2f64.powi(-k), 1e7);
        cfg.fold_linear_part = true;
        let w = integrate(&spec, &x0, 1.0, 5, &cfg).unwrap();
        let expect = closed_form_linear_flow(0, 1.0, 0.0, &unit, 1.0)[0];
        pts.push((
            2f64.powi(-k),
            (w.state(4).mode(0)[0] - expect).norm() / expect.norm(),
        ));
    }
    let slope = log_log_slope(&pts);

    criterion(
        7,
        &format!("worst closed-form error {worst:.2e}; observed order {slope:.2}"),
        worst <= 1e-8 && slope >= 3.8,
    );
}

#[test]
fn criterion_8_ledger_suites() {
    // the bundled 32-member families: S = 512 intervals with defects
    // improving at least 8x at S = 1024 intervals
    let bootstrap = run_bundled("bootstrap-ledger-family");
    let elementary = run_bundled("elementary-ledger-family");
    let refine = |report: &scaleflow::scenario::ScenarioReport| -> f64 {
        report.checks[0]
            .rows
            .iter()
            .find(|r| r.quantity == "defect_refinement_factor")
            .map(|r| r.measured)
            .unwrap_or(0.0)
    };
    criterion(
        8,
        &format!(
            "framed pass = {} (refine {:.1}x), elementary pass = {} (refine {:.1}x)",
            bootstrap.pass,
            refine(&bootstrap),
            elementary.pass,
            refine(&elementary)
        ),
        bootstrap.pass
            && elementary.pass
            && refine(&bootstrap) >= 8.0
            && refine(&elementary) >= 8.0,
    );
}

#[test]
fn criterion_9_compactness_demo() {
    let report = run_bundled("compactness-extract");
    let residuals: Vec<f64> = report
        .checks
        .iter()
        .flat_map(|c| c.rows.iter())
        .filter(|r| r.quantity == "limit_residual")
        .map(|r| r.measured)
        .collect();
    criterion(
        9,
        &format!(
            "both planted families recovered; limit residuals {:?} <= 1e-6",
            residuals
        ),
        report.pass && residuals.iter().all(|r| *r <= 1e-6),
    );
}

#[test]
fn criterion_10_lagrangian_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst_roundtrip: f64 = 0.0;
    let mut worst_bc: f64 = 0.0;
    for _ in 0..100 {
        let x = random_path(&mut rng, 2, Boundary::Lagrangian, 8, 1.0, 1.0);
        let gamma = reflect_to_loop(&x).unwrap();
        let back = restrict_to_path(&gamma, 1e-13).unwrap();
        let err = FourierPath::lincomb(&[(1.0, &back), (-1.0, &x)])
            .unwrap()
            .sobolev_norm(0);
        worst_roundtrip = worst_roundtrip.max(err);
        let report = check_lagrangian_bc(&back, 3, 1e-10).unwrap();
        worst_bc = worst_bc.max(report.max_distance);
    }
    // negative control: purely imaginary candidate fails at order 0
    let bad = FourierPath::single_mode(
        2,
        Boundary::Periodic,
        4,
        0,
        &[Complex64::new(0.0, 1.0), Complex64::new(0.0, -0.5)],
    )
    .unwrap();
    let bad_report = check_lagrangian_bc(&bad, 1, 1e-10).unwrap();

    criterion(
        10,
        &format!(
            "roundtrip {worst_roundtrip:.2e} <= 1e-13; bc distance {worst_bc:.2e}; control fails = {}",
            !bad_report.pass
        ),
        worst_roundtrip <= 1e-13 && worst_bc <= 1e-10 && !bad_report.pass,
    );
}
