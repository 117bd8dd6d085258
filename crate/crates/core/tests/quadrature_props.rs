mod common;

use std::f64::consts::PI;

use common::{corpus, run};
use fracq_core::quadrature::{integrate_finite, DEFAULT_TOL};
use fracq_core::Integrand;
use proptest::prelude::*;

#[test]
fn error_estimates_are_honest_on_closed_form_corpus() {
    let corpus = corpus();
    assert_eq!(corpus.len(), 50);
    for tol in [1e-6, 1e-10] {
        for c in &corpus {
            let r = run(c, tol);
            let err = (r.value - c.exact).abs();
            assert!(
                err <= 10.0 * r.abs_err_estimate,
                "{} at tol {tol}: error {err:e}, estimate {:e}",
                c.name,
                r.abs_err_estimate
            );
            assert!(r.converged, "{}: {r:?}", c.name);
        }
    }
}

#[test]
fn log_weighted_removable_integrand_matches_midpoint_rule() {
    let g = |p: f64| p.sqrt() * p.ln() / (p * p - 1.0) * (PI * p / 2.0).cos().powi(2);
    let f = Integrand::new(g).singular_at(1.0).lo_power(0.5);
    let r = integrate_finite(&f, 0.0, 2.0, DEFAULT_TOL).unwrap();
    let n = 10_000_000;
    let h = 2.0 / n as f64;
    let mid: f64 = (0..n).map(|i| g((i as f64 + 0.5) * h)).sum::<f64>() * h;
    assert!((r.value - mid).abs() < 1e-6, "{} vs {mid}", r.value);
}

fn poly_cos(c: [f64; 3], w: f64) -> impl Fn(f64) -> f64 + Send + Sync + Copy {
    move |x: f64| (c[0] + c[1] * x + c[2] * x * x) * (w * x).cos()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linearity(
        cf in prop::array::uniform3(-3.0..3.0f64),
        cg in prop::array::uniform3(-3.0..3.0f64),
        wf in 0.0..20.0f64,
        wg in 0.0..20.0f64,
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
    ) {
        let (f, g) = (poly_cos(cf, wf), poly_cos(cg, wg));
        let tol = 1e-11;
        let rf = integrate_finite(&Integrand::new(f), -1.0, 2.0, tol).unwrap();
        let rg = integrate_finite(&Integrand::new(g), -1.0, 2.0, tol).unwrap();
        let rs = integrate_finite(&Integrand::new(move |x| a * f(x) + b * g(x)), -1.0, 2.0, tol).unwrap();
        let bound = a.abs() * rf.abs_err_estimate + b.abs() * rg.abs_err_estimate + rs.abs_err_estimate + 1e-14;
        prop_assert!((rs.value - a * rf.value - b * rg.value).abs() <= bound);
    }

    #[test]
    fn subdivision_consistency(
        c in prop::array::uniform3(-3.0..3.0f64),
        w in 0.0..30.0f64,
        t in 0.01..0.99f64,
    ) {
        let f = Integrand::new(poly_cos(c, w));
        let (lo, hi) = (-0.5, 3.0);
        let m = lo + t * (hi - lo);
        let tol = 1e-11;
        let whole = integrate_finite(&f, lo, hi, tol).unwrap();
        let left = integrate_finite(&f, lo, m, tol).unwrap();
        let right = integrate_finite(&f, m, hi, tol).unwrap();
        let bound = 2.0 * (whole.abs_err_estimate + left.abs_err_estimate + right.abs_err_estimate) + 1e-14;
        prop_assert!((whole.value - left.value - right.value).abs() <= bound);
    }
}
