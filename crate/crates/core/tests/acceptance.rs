//! One line per acceptance criterion, at the contract tolerances.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use fracq_core::grid::{
    build_hamiltonian, solve_eigen, Potential, DEFAULT_N_INTERIOR, DEFAULT_PADDING,
};
use fracq_core::oscillator::{
    airy_energy, airy_spectrum, asymptotic_root, root_error_percent, shoot_spectrum, wkb_energy,
    wkb_spectrum,
};
use fracq_core::riesz::{
    fourier_forward, riesz_apply, riesz_apply_with, Boundary, SampledFunction, Space, Symbol,
};
use fracq_core::well::{
    df_dalpha, f_of_alpha, f_of_alpha_tol, interior_points, phi0_closed_form,
    proportionality_defect, psi0,
};
use fracq_core::PhysParams;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

struct Outcome {
    id: u32,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn check(id: u32, body: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (pass, detail) = body();
    Outcome {
        id,
        pass,
        detail,
        elapsed: start.elapsed(),
    }
}

fn f_at_zero() -> (bool, String) {
    let start = Instant::now();
    let f = f_of_alpha(0.0).unwrap();
    let t = start.elapsed();
    (
        f.value.abs() <= 1e-6 && t < Duration::from_secs(5),
        format!("|f(0)| = {:.2e}", f.value.abs()),
    )
}

fn monotone() -> (bool, String) {
    let start = Instant::now();
    let grid: Vec<f64> = (1..=17).map(|k| -0.95 + 1.9 * k as f64 / 18.0).collect();
    let f: Vec<f64> = grid.iter().map(|&a| f_of_alpha(a).unwrap().value).collect();
    let ordered = f.windows(2).all(|w| w[1] > w[0]);
    let min_gap = f
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    (
        ordered && start.elapsed() < Duration::from_secs(60),
        format!("17 points, smallest step {min_gap:.3e}"),
    )
}

fn derivative() -> (bool, String) {
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    for a in [-0.5, 0.3, 0.7] {
        let fd = (f_of_alpha_tol(a + h, 1e-12).unwrap().value
            - f_of_alpha_tol(a - h, 1e-12).unwrap().value)
            / (2.0 * h);
        let d = df_dalpha(a).unwrap().value;
        worst = worst.max(((fd - d) / d).abs());
    }
    (worst <= 1e-4, format!("worst relative gap {worst:.2e}"))
}

fn disproof() -> (bool, String) {
    let floors = [(0.25, 0.15), (0.5, 0.30), (0.75, 0.455)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (alpha, floor) in floors {
        let p = PhysParams::natural(alpha);
        let d = proportionality_defect(&p, &interior_points(&p, 39))
            .unwrap()
            .defect;
        ok &= d > floor;
        parts.push(format!("a={alpha}: {d:.4} > {floor}"));
    }
    for alpha in [0.0, 2.0] {
        let p = PhysParams::natural(alpha);
        let d = proportionality_defect(&p, &interior_points(&p, 39))
            .unwrap()
            .defect;
        ok &= d <= 1e-8;
        parts.push(format!("a={alpha}: {d:.1e}"));
    }
    (ok, parts.join(", "))
}

fn transform() -> (bool, String) {
    let p = PhysParams::natural(1.0);
    let psi = SampledFunction::from_real(Space::Position, 8.0, 1 << 18, |x| psi0(x, &p)).unwrap();
    let phi = fourier_forward(&psi, &p).unwrap().function;
    let worst = phi
        .coordinates()
        .iter()
        .zip(&phi.samples)
        .filter(|(q, _)| q.abs() <= 20.0)
        .map(|(&q, v)| (v - Complex64::new(phi0_closed_form(q, &p), 0.0)).norm())
        .fold(0.0, f64::max);
    (worst <= 1e-8, format!("sup error {worst:.2e} on |p| <= 20"))
}

fn root_table() -> (bool, String) {
    let quoted = [8.7, 0.77, 0.41];
    let got: Vec<f64> = (0..3).map(|n| root_error_percent(n).unwrap()).collect();
    let ok = got.iter().zip(&quoted).all(|(g, q)| (g - q).abs() <= 0.05);
    (
        ok,
        format!(
            "{:.3}%, {:.3}%, {:.3}% (denominator: approximate root)",
            got[0], got[1], got[2]
        ),
    )
}

fn wkb_airy_identity() -> (bool, String) {
    let p = PhysParams::natural(1.0);
    let worst = (0..=20)
        .map(|n| {
            let a = airy_energy(asymptotic_root(n), &p);
            ((wkb_energy(n, &p).unwrap() - a) / a).abs()
        })
        .fold(0.0, f64::max);
    (
        worst <= 1e-12,
        format!("worst relative gap {worst:.1e} over n = 0..20"),
    )
}

fn shooting() -> (bool, String) {
    let start = Instant::now();
    let p1 = PhysParams::natural(1.0);
    let shot = shoot_spectrum(6, &p1).unwrap().energies();
    let airy = airy_spectrum(6, &p1).unwrap().spectrum.energies();
    let g1 = shot
        .iter()
        .zip(&airy)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let p2 = PhysParams::natural(2.0).with_d_alpha(0.5);
    let shot2 = shoot_spectrum(6, &p2).unwrap().energies();
    let g2 = shot2
        .iter()
        .enumerate()
        .map(|(n, e)| (e - (n as f64 + 0.5)).abs())
        .fold(0.0, f64::max);
    let t = start.elapsed();
    (
        g1 <= 1e-6 && g2 <= 1e-6 && t < Duration::from_secs(30),
        format!("alpha=1 gap {g1:.1e}, alpha=2 gap {g2:.1e}"),
    )
}

fn grid_alpha_two() -> (bool, String) {
    let p = PhysParams::natural(2.0);
    let h = build_hamiltonian(Potential::Well, &p, DEFAULT_N_INTERIOR, DEFAULT_PADDING).unwrap();
    let r = solve_eigen(&h, 1).unwrap();
    let gap = (r.energies[0] - 0.25 * PI * PI).abs();
    let (overlap, _) = r.cosine_comparison(p.well_halfwidth);
    (
        gap <= 1e-3 && overlap >= 0.9999,
        format!(
            "E0 = {:.8}, gap {gap:.1e}, overlap {overlap:.8}",
            r.energies[0]
        ),
    )
}

fn grid_alpha_one() -> (bool, String) {
    let solve = |alpha: f64| {
        let p = PhysParams::natural(alpha);
        let h =
            build_hamiltonian(Potential::Well, &p, DEFAULT_N_INTERIOR, DEFAULT_PADDING).unwrap();
        let r = solve_eigen(&h, 1).unwrap();
        let cos: Vec<f64> = h.grid.iter().map(|x| (0.5 * PI * x).cos()).collect();
        let rq = h.rayleigh_quotient(&cos);
        (r.cosine_comparison(1.0).1, r.energies[0], rq)
    };
    let (d1, e1, rq1) = solve(1.0);
    let (d2, _, _) = solve(2.0);
    (
        d1 >= 10.0 * d2 && rq1 >= e1 - 1e-8,
        format!("defect {d1:.3e} vs {d2:.3e}; cosine quotient {rq1:.6} >= E0 {e1:.6}"),
    )
}

fn bump(center: f64, width: f64, x: f64) -> f64 {
    let u = (x - center) / width;
    if u.abs() < 1.0 {
        (1.0 - u * u).powi(4)
    } else {
        0.0
    }
}

fn property_suites() -> (bool, String) {
    let mut failures = Vec::new();

    let mut honest = 0;
    for c in common::corpus() {
        let r = common::run(&c, 1e-10);
        if (r.value - c.exact).abs() <= 10.0 * r.abs_err_estimate {
            honest += 1;
        } else {
            failures.push(format!("quadrature {}", c.name));
        }
    }

    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 48,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    let self_adjoint = runner.run(
        &(0.0f64..4.0, -3.0f64..3.0, -3.0f64..3.0, any::<bool>()),
        |(alpha, c1, c2, whole)| {
            let params = PhysParams::natural(alpha);
            let f = SampledFunction::from_real(Space::Position, 8.0, 256, |x| bump(c1, 0.8, x))
                .unwrap();
            let g = SampledFunction::from_real(Space::Position, 8.0, 256, |x| bump(c2, 1.3, x))
                .unwrap();
            let b = if whole {
                Boundary::WholeLine
            } else {
                Boundary::Periodic
            };
            let rf = riesz_apply_with(&f, &params, Symbol::Spectral, b)
                .unwrap()
                .function;
            let rg = riesz_apply_with(&g, &params, Symbol::Spectral, b)
                .unwrap()
                .function;
            let dot = |u: &SampledFunction, v: &SampledFunction| -> Complex64 {
                u.samples
                    .iter()
                    .zip(&v.samples)
                    .map(|(a, b)| a.conj() * b)
                    .sum()
            };
            let scale = rf.max_abs().max(rg.max_abs()).max(1.0) * 256.0;
            prop_assert!((dot(&f, &rg) - dot(&rf, &g)).norm() <= 1e-10 * scale);
            Ok(())
        },
    );
    if self_adjoint.is_err() {
        failures.push("riesz self-adjointness".into());
    }
    let parity = runner.run(
        &(0.0f64..4.0, 0.2f64..2.0, any::<bool>()),
        |(alpha, c, odd)| {
            let s = if odd { -1.0 } else { 1.0 };
            let f = SampledFunction::from_real(Space::Position, 8.0, 512, |x| {
                bump(c, 0.7, x) + s * bump(-c, 0.7, x)
            })
            .unwrap();
            let out = riesz_apply(&f, &PhysParams::natural(alpha))
                .unwrap()
                .function;
            let scale = (PI * 512.0 / 16.0).powf(alpha).max(1.0) * f.max_abs();
            prop_assert!(out.parity_defect(odd) <= 1e-13 * scale);
            Ok(())
        },
    );
    if parity.is_err() {
        failures.push("riesz parity".into());
    }
    let semigroup = runner.run(&(-20i32..20, 0.0f64..2.0, 0.0f64..2.0), |(m, a, b)| {
        let l = 5.0;
        let p0 = PI * m as f64 / l;
        let wave = SampledFunction::from_fn(Space::Position, l, 128, |x| {
            Complex64::from_polar(1.0, p0 * x)
        })
        .unwrap();
        let twice = riesz_apply(
            &riesz_apply(&wave, &PhysParams::natural(a))
                .unwrap()
                .function,
            &PhysParams::natural(b),
        )
        .unwrap()
        .function;
        let once = riesz_apply(&wave, &PhysParams::natural(a + b))
            .unwrap()
            .function;
        let scale = p0.abs().powf(a + b).max(1.0);
        for (u, v) in twice.samples.iter().zip(&once.samples) {
            prop_assert!((u - v).norm() <= 1e-9 * scale);
        }
        Ok(())
    });
    if semigroup.is_err() {
        failures.push("riesz semigroup".into());
    }
    let spectra = runner.run(&(0.2f64..3.5), |alpha| {
        let e = wkb_spectrum(12, &PhysParams::natural(alpha))
            .unwrap()
            .energies();
        prop_assert!(e[0] > 0.0 && e.windows(2).all(|w| w[1] > w[0]));
        Ok(())
    });
    if spectra.is_err() {
        failures.push("wkb spectrum ordering".into());
    }
    let p1 = PhysParams::natural(1.0);
    for e in [
        airy_spectrum(10, &p1).unwrap().spectrum.energies(),
        shoot_spectrum(6, &PhysParams::natural(1.5))
            .unwrap()
            .energies(),
    ] {
        if !(e[0] > 0.0 && e.windows(2).all(|w| w[1] > w[0])) {
            failures.push("spectrum ordering".into());
        }
    }

    (
        failures.is_empty(),
        if failures.is_empty() {
            format!("{honest}/50 honest integrals; riesz and spectrum properties hold")
        } else {
            format!("failed: {}", failures.join(", "))
        },
    )
}

#[test]
fn acceptance() {
    let start = Instant::now();
    let outcomes = vec![
        check(1, f_at_zero),
        check(2, monotone),
        check(3, derivative),
        check(4, disproof),
        check(5, transform),
        check(6, root_table),
        check(7, wkb_airy_identity),
        check(8, shooting),
        check(9, grid_alpha_two),
        check(10, grid_alpha_one),
        check(11, property_suites),
    ];
    for o in &outcomes {
        println!(
            "criterion {:>2}: {} ({:.2} s) {}",
            o.id,
            if o.pass { "PASS" } else { "FAIL" },
            o.elapsed.as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance total {:.1} s", start.elapsed().as_secs_f64());
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
