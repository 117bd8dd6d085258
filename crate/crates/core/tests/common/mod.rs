//! Closed-form integrals shared by the quadrature property suite and the
//! acceptance run.

use std::f64::consts::{E, PI};

use fracq_core::quadrature::{integrate_finite, integrate_semi_infinite};
use fracq_core::{Integrand, QuadResult};

pub enum Range {
    Finite(f64, f64),
    From(f64),
}

pub struct Case {
    pub name: String,
    pub f: Integrand<'static>,
    pub range: Range,
    pub exact: f64,
}

fn case(name: impl Into<String>, f: Integrand<'static>, range: Range, exact: f64) -> Case {
    Case {
        name: name.into(),
        f,
        range,
        exact,
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

pub fn corpus() -> Vec<Case> {
    let mut c = Vec::new();
    for k in 0..10 {
        c.push(case(
            format!("x^{k}"),
            Integrand::new(move |x: f64| x.powi(k)),
            Range::Finite(0.0, 1.0),
            1.0 / f64::from(k + 1),
        ));
    }
    for k in 1..=10 {
        let w = f64::from(k);
        c.push(case(
            format!("cos({k}x)"),
            Integrand::new(move |x: f64| (w * x).cos()),
            Range::Finite(0.0, 1.0),
            w.sin() / w,
        ));
    }
    for a in [-0.5, -0.25, 0.3, 1.5, 2.5] {
        c.push(case(
            format!("x^{a}"),
            Integrand::new(move |x: f64| x.powf(a)).lo_power(a),
            Range::Finite(0.0, 1.0),
            1.0 / (a + 1.0),
        ));
    }
    for s in [0.5, 1.0, 2.0, 3.0, 5.0] {
        c.push(case(
            format!("exp(-{s}x)"),
            Integrand::new(move |x: f64| (-s * x).exp()).decay(f64::NEG_INFINITY),
            Range::From(0.0),
            1.0 / s,
        ));
    }
    for s in [1.5, 2.0, 2.5, 3.0, 4.0] {
        c.push(case(
            format!("x^-{s}"),
            Integrand::new(move |x: f64| x.powf(-s)).decay(-s),
            Range::From(1.0),
            1.0 / (s - 1.0),
        ));
    }
    for k in 1..=4 {
        c.push(case(
            format!("x^{k} exp(-x)"),
            Integrand::new(move |x: f64| x.powi(k as i32) * (-x).exp()).decay(f64::NEG_INFINITY),
            Range::From(0.0),
            factorial(k),
        ));
    }
    c.push(case(
        "lorentzian",
        Integrand::new(|x: f64| 1.0 / (1.0 + x * x)).decay(-2.0),
        Range::From(0.0),
        PI / 2.0,
    ));
    c.push(case(
        "sinc",
        Integrand::new(|x: f64| if x == 0.0 { 1.0 } else { x.sin() / x })
            .period(2.0 * PI)
            .decay(-1.0),
        Range::From(0.0),
        PI / 2.0,
    ));
    c.push(case(
        "cos over lorentzian",
        Integrand::new(|x: f64| x.cos() / (1.0 + x * x))
            .period(2.0 * PI)
            .decay(-2.0)
            .tail_step(2.0),
        Range::From(0.0),
        PI / (2.0 * E),
    ));
    c.push(case(
        "gaussian",
        Integrand::new(|x: f64| (-x * x).exp()).decay(f64::NEG_INFINITY),
        Range::From(0.0),
        PI.sqrt() / 2.0,
    ));
    c.push(case(
        "x gaussian",
        Integrand::new(|x: f64| x * (-x * x).exp()).decay(f64::NEG_INFINITY),
        Range::From(0.0),
        0.5,
    ));
    c.push(case(
        "ln x",
        Integrand::new(|x: f64| x.ln()).lo_power(0.0),
        Range::Finite(0.0, 1.0),
        -1.0,
    ));
    c.push(case(
        "ln^2 x",
        Integrand::new(|x: f64| x.ln().powi(2)).lo_power(0.0),
        Range::Finite(0.0, 1.0),
        2.0,
    ));
    c.push(case(
        "runge",
        Integrand::new(|x: f64| 1.0 / (1.0 + 25.0 * x * x)),
        Range::Finite(-1.0, 1.0),
        0.4 * 5f64.atan(),
    ));
    c.push(case(
        "quarter disc",
        Integrand::new(|x: f64| (1.0 - x * x).max(0.0).sqrt()),
        Range::Finite(0.0, 1.0),
        PI / 4.0,
    ));
    c.push(case(
        "cos^2",
        Integrand::new(|x: f64| x.cos().powi(2)),
        Range::Finite(0.0, 2.0 * PI),
        PI,
    ));
    c.push(case(
        "removable sinc",
        Integrand::new(|x: f64| (PI * (x - 1.0)).sin() / (PI * (x - 1.0))).singular_at(1.0),
        Range::Finite(1.0 - 0.5, 1.5),
        2.0 * 1.370_762_168_154_488 / PI,
    ));
    c
}

pub fn run(c: &Case, tol: f64) -> QuadResult {
    match c.range {
        Range::Finite(a, b) => integrate_finite(&c.f, a, b, tol),
        Range::From(a) => integrate_semi_infinite(&c.f, a, tol),
    }
    .unwrap_or_else(|e| panic!("{}: {e}", c.name))
}
