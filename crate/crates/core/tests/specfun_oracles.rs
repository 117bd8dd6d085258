use std::f64::consts::PI;

use fracq_core::quadrature::integrate_semi_infinite;
use fracq_core::specfun::{airy_ai, airy_roots, RootKind};
use fracq_core::Integrand;

/// Ai(x) = (1/pi) ∫_0^∞ cos(t³/3 + x t) dt, rewritten with u = t³/3 + t so the
/// phase is linear and the integrand has period 2π in u.
#[test]
fn ai_at_one_matches_integral_representation() {
    let t_of = |u: f64| {
        let c = (1.5 * u + (2.25 * u * u + 1.0).sqrt()).cbrt();
        c - 1.0 / c
    };
    let f = Integrand::new(move |u: f64| {
        let t = t_of(u);
        u.cos() / (t * t + 1.0)
    })
    .period(2.0 * PI)
    .decay(-2.0 / 3.0);
    let r = integrate_semi_infinite(&f, 0.0, 1e-12).unwrap();
    let oracle = r.value / PI;
    let v = airy_ai(1.0).ai;
    assert!(
        (v - oracle).abs() < 1e-10 * v.abs(),
        "{v} vs {oracle}, {r:?}"
    );
}

fn d5(g: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (g(x - 2.0 * h) - 8.0 * g(x - h) + 8.0 * g(x + h) - g(x + 2.0 * h)) / (12.0 * h)
}

#[test]
fn airy_ode_residual_on_grid() {
    let h = 1e-3;
    for i in 0..=300 {
        let x = -10.0 + 0.05 * i as f64;
        let second = d5(|y| airy_ai(y).ai_prime, x, h);
        let v = airy_ai(x);
        assert!(
            (second - x * v.ai).abs() <= 1e-8,
            "x = {x}: {second} vs {}",
            x * v.ai
        );
        let first = d5(|y| airy_ai(y).ai, x, h);
        assert!((first - v.ai_prime).abs() <= 1e-8, "x = {x}");
    }
}

#[test]
fn roots_by_bisection_oracle() {
    let bisect = |g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(lo) * g(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let a1 = bisect(&|x| airy_ai(x).ai, -3.0, -2.0);
    let ap1 = bisect(&|x| airy_ai(x).ai_prime, -2.0, -0.5);
    assert!((airy_roots(RootKind::AiZero, 1).unwrap().roots[0] - a1).abs() < 1e-10);
    assert!((airy_roots(RootKind::AiPrimeZero, 1).unwrap().roots[0] - ap1).abs() < 1e-10);
    assert!(airy_ai(-2.338107).ai.abs() < 1e-6);
}

#[test]
fn roots_interlace_and_vanish() {
    let a = airy_roots(RootKind::AiZero, 20).unwrap().roots;
    let ap = airy_roots(RootKind::AiPrimeZero, 20).unwrap().roots;
    for k in 0..20 {
        assert!(ap[k] > a[k]);
        if k + 1 < 20 {
            assert!(a[k] > ap[k + 1] && a[k] > a[k + 1] && ap[k] > ap[k + 1]);
        }
        assert!(airy_ai(a[k]).ai.abs() <= 1e-10);
        assert!(airy_ai(ap[k]).ai_prime.abs() <= 1e-10);
    }
}
