//! Audit of the piecewise cosine ground state of the fractional infinite
//! square well.
//!
//! For `ψ₀ = A cos(πx/2a)` on `|x| <= a` to solve the eigenvalue problem,
//! its Riesz derivative must vanish as `x → a⁻`. That limit is proportional
//! to `f(α) = ∫_0^∞ p^α cos²(πp/2)/(p²-1) dp`, which is zero only at `α = 0`
//! and strictly increasing on `(-1, 1)` because its α-derivative has an
//! everywhere positive integrand.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::io::{csv_table, sci};
use crate::params::PhysParams;
use crate::quadrature::{integrate_semi_infinite, Integrand, QuadResult, DEFAULT_TOL};
use crate::riesz::riesz_pointwise_psi0_tol;

/// Threshold below which audit quantities count as zero.
pub const AUDIT_TOL: f64 = 1e-6;

/// Fraction of the half-width covered by the proportionality test.
pub const INTERIOR_FRACTION: f64 = 0.95;

pub fn psi0(x: f64, params: &PhysParams) -> f64 {
    let a = params.well_halfwidth;
    if x.abs() <= a {
        params.amplitude * (0.5 * PI * x / a).cos()
    } else {
        0.0
    }
}

/// Fourier transform of [`psi0`],
/// `-(Aπħ²/a) cos(ap/ħ)/(p² - (πħ/2a)²)`.
///
/// Evaluated as `A [a sinc(a(q-|p|)/ħ) + ħ cos(ap/ħ)/(q+|p|)]`, `q = πħ/2a`,
/// which has no removable point.
pub fn phi0_closed_form(p: f64, params: &PhysParams) -> f64 {
    let a = params.well_halfwidth;
    let hbar = params.hbar;
    let q = PI * hbar / (2.0 * a);
    let p = p.abs();
    let d = a * (q - p) / hbar;
    let sinc = if d.abs() < 1e-4 {
        1.0 - d * d / 6.0
    } else {
        d.sin() / d
    };
    params.amplitude * (a * sinc + hbar * (a * p / hbar).cos() / (q + p))
}

fn check_window(alpha: f64) -> Result<()> {
    if alpha > -1.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange {
            alpha,
            window: "(-1, 1); the integral diverges outside it",
        })
    }
}

fn moment(alpha: f64, log_power: u32, tol: f64) -> Result<QuadResult> {
    check_window(alpha)?;
    let f = move |p: f64| {
        let s = (0.5 * PI * (1.0 - p)).sin();
        let base = p.powf(alpha) * s * s / (p * p - 1.0);
        match log_power {
            0 => base,
            m => base * p.ln().powi(m as i32),
        }
    };
    let integrand = Integrand::new(f)
        .singular_at_with_limit(1.0, 0.0)
        .decay(alpha - 2.0)
        .log_power(log_power)
        .period(2.0)
        .lo_power(alpha)
        .tail_step(2.0);
    integrate_semi_infinite(&integrand, 0.0, tol)
}

/// `f(α) = ∫_0^∞ p^α cos²(πp/2)/(p²-1) dp` for `-1 < α < 1`.
pub fn f_of_alpha(alpha: f64) -> Result<QuadResult> {
    f_of_alpha_tol(alpha, DEFAULT_TOL)
}

pub fn f_of_alpha_tol(alpha: f64, tol: f64) -> Result<QuadResult> {
    moment(alpha, 0, tol)
}

/// `df/dα = ∫_0^∞ p^α ln p cos²(πp/2)/(p²-1) dp`.
pub fn df_dalpha(alpha: f64) -> Result<QuadResult> {
    df_dalpha_tol(alpha, DEFAULT_TOL)
}

pub fn df_dalpha_tol(alpha: f64, tol: f64) -> Result<QuadResult> {
    moment(alpha, 1, tol)
}

/// `-(2A/π)(πħ/2a)^α`, the factor relating the boundary value to `f(α)`.
pub fn boundary_prefactor(params: &PhysParams) -> f64 {
    -(2.0 * params.amplitude / PI)
        * (PI * params.hbar / (2.0 * params.well_halfwidth)).powf(params.alpha)
}

/// The Riesz derivative of `ψ₀` evaluated at the wall `x = a`.
pub fn boundary_limit(params: &PhysParams) -> Result<QuadResult> {
    check_window(params.alpha)?;
    riesz_pointwise_psi0_tol(params.well_halfwidth, params, DEFAULT_TOL)
}

/// `n` evenly spaced abscissae on `[-0.95a, 0.95a]`.
pub fn interior_points(params: &PhysParams, n: usize) -> Vec<f64> {
    let x_max = INTERIOR_FRACTION * params.well_halfwidth;
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..n)
            .map(|j| -x_max + 2.0 * x_max * j as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Relative residual of the best scalar fit `R[ψ₀] ≈ c ψ₀` on `points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportionality {
    pub defect: f64,
    /// Least-squares coefficient `c`.
    pub coefficient: f64,
    /// `sup |R[ψ₀]|` over the points.
    pub scale: f64,
}

/// `sup|R[ψ₀] - cψ₀| / sup|R[ψ₀]|` over `points`, `c` fitted by least squares.
///
/// For `-1 < α < 1` the Riesz derivative comes from quadrature. For the even
/// integers `α = 2, 4` the cosine is an exact eigenfunction with eigenvalue
/// `(πħ/2a)^α` and that value is used directly.
pub fn proportionality_defect(params: &PhysParams, points: &[f64]) -> Result<Proportionality> {
    params.validate()?;
    let alpha = params.alpha;
    let a = params.well_halfwidth;
    if points.is_empty() {
        return invalid("need at least one interior point");
    }
    if let Some(&x) = points
        .iter()
        .find(|x| !(x.abs() <= INTERIOR_FRACTION * a * (1.0 + 1e-12)))
    {
        return invalid(format!(
            "point {x} lies outside |x| <= {INTERIOR_FRACTION}a"
        ));
    }
    let values: Vec<f64> = if alpha == 2.0 || alpha == 4.0 {
        let lambda = (PI * params.hbar / (2.0 * a)).powf(alpha);
        points.iter().map(|&x| lambda * psi0(x, params)).collect()
    } else if alpha > -1.0 && alpha < 1.0 {
        points
            .par_iter()
            .map(|&x| riesz_pointwise_psi0_tol(x, params, 1e-11).map(|r| r.value))
            .collect::<Result<_>>()?
    } else {
        return Err(Error::AlphaOutOfRange {
            alpha,
            window: "(-1, 1) by quadrature, or exactly 2 or 4",
        });
    };
    let psi: Vec<f64> = points.iter().map(|&x| psi0(x, params)).collect();
    Ok(fit_defect(&values, &psi))
}

/// Best scalar fit of `r ≈ c v` and its sup-norm residual relative to `sup|r|`.
pub fn fit_defect(r: &[f64], v: &[f64]) -> Proportionality {
    let num: f64 = r.iter().zip(v).map(|(a, b)| a * b).sum();
    let den: f64 = v.iter().map(|b| b * b).sum();
    let c = if den > 0.0 { num / den } else { 0.0 };
    let scale = r.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let resid = r
        .iter()
        .zip(v)
        .map(|(a, b)| (a - c * b).abs())
        .fold(0.0, f64::max);
    Proportionality {
        defect: if scale > 0.0 { resid / scale } else { 0.0 },
        coefficient: c,
        scale,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Fails,
    Passes,
    OutOfValidity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditPoint {
    pub alpha: f64,
    pub f: Option<f64>,
    pub f_err: Option<f64>,
    pub df: Option<f64>,
    pub df_err: Option<f64>,
    pub boundary_limit: Option<f64>,
    pub defect: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub params: PhysParams,
    pub alpha_grid: Vec<f64>,
    pub f_values: Vec<Option<f64>>,
    /// Strictly increasing over the in-window points, in grid order.
    pub f_monotone: bool,
    /// Root of `f` located by bisection inside the first sign change.
    pub f_zero_crossing: Option<f64>,
    /// Boundary value at the first in-window grid point.
    pub boundary_limit_value: Option<f64>,
    /// Largest defect over the in-window points.
    pub proportionality_defect: Option<f64>,
    pub validity_range: (f64, f64),
    pub tolerance: f64,
    pub points: Vec<AuditPoint>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditOptions {
    pub tol: f64,
    pub quad_tol: f64,
    /// Number of abscissae used for the proportionality defect.
    pub defect_points: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            tol: AUDIT_TOL,
            quad_tol: DEFAULT_TOL,
            defect_points: 39,
        }
    }
}

pub fn run_audit(alpha_grid: &[f64], params: &PhysParams) -> Result<AuditReport> {
    run_audit_with(alpha_grid, params, AuditOptions::default())
}

pub fn run_audit_with(
    alpha_grid: &[f64],
    params: &PhysParams,
    opts: AuditOptions,
) -> Result<AuditReport> {
    if alpha_grid.is_empty() {
        return invalid("alpha grid is empty");
    }
    if let Some(a) = alpha_grid.iter().find(|a| !a.is_finite()) {
        return invalid(format!("non-finite alpha {a}"));
    }
    let points: Vec<AuditPoint> = alpha_grid
        .par_iter()
        .map(|&alpha| audit_point(alpha, params, opts))
        .collect::<Result<_>>()?;

    let valid: Vec<&AuditPoint> = points.iter().filter(|p| p.f.is_some()).collect();
    let f_monotone = valid
        .windows(2)
        .all(|w| w[1].f > w[0].f && w[1].alpha > w[0].alpha);
    let f_zero_crossing = zero_crossing(&valid, opts.quad_tol)?;
    let verdict = if valid.is_empty() {
        Verdict::OutOfValidity
    } else if valid.iter().all(|p| p.verdict == Verdict::Passes) {
        Verdict::Passes
    } else {
        Verdict::Fails
    };
    Ok(AuditReport {
        params: *params,
        alpha_grid: alpha_grid.to_vec(),
        f_values: points.iter().map(|p| p.f).collect(),
        f_monotone,
        f_zero_crossing,
        boundary_limit_value: valid.first().and_then(|p| p.boundary_limit),
        proportionality_defect: valid.iter().filter_map(|p| p.defect).reduce(f64::max),
        validity_range: (-1.0, 1.0),
        tolerance: opts.tol,
        points,
        verdict,
    })
}

fn audit_point(alpha: f64, params: &PhysParams, opts: AuditOptions) -> Result<AuditPoint> {
    if !(alpha > -1.0 && alpha < 1.0) {
        return Ok(AuditPoint {
            alpha,
            f: None,
            f_err: None,
            df: None,
            df_err: None,
            boundary_limit: None,
            defect: None,
            verdict: Verdict::OutOfValidity,
        });
    }
    let p = params.with_alpha(alpha);
    let f = f_of_alpha_tol(alpha, opts.quad_tol)?;
    let df = df_dalpha_tol(alpha, opts.quad_tol)?;
    for (what, r) in [("f(alpha)", &f), ("df/dalpha", &df)] {
        if !r.converged {
            return Err(Error::NonConvergence {
                what,
                detail: format!("alpha = {alpha}, error estimate {:e}", r.abs_err_estimate),
            });
        }
    }
    let boundary = boundary_limit(&p)?;
    let defect = proportionality_defect(&p, &interior_points(&p, opts.defect_points))?.defect;
    let verdict = if f.value.abs() <= opts.tol && defect <= opts.tol {
        Verdict::Passes
    } else {
        Verdict::Fails
    };
    Ok(AuditPoint {
        alpha,
        f: Some(f.value),
        f_err: Some(f.abs_err_estimate),
        df: Some(df.value),
        df_err: Some(df.abs_err_estimate),
        boundary_limit: Some(boundary.value),
        defect: Some(defect),
        verdict,
    })
}

fn zero_crossing(valid: &[&AuditPoint], tol: f64) -> Result<Option<f64>> {
    // A grid value indistinguishable from zero is the crossing itself.
    for p in valid {
        if let (Some(f), Some(e)) = (p.f, p.f_err) {
            if f.abs() <= e {
                return Ok(Some(p.alpha));
            }
        }
    }
    let bracket = valid.windows(2).find(|w| {
        let (a, b) = (w[0].f.unwrap_or(0.0), w[1].f.unwrap_or(0.0));
        a * b < 0.0
    });
    let Some(w) = bracket else {
        return Ok(None);
    };
    let (mut lo, mut hi) = (w[0].alpha, w[1].alpha);
    let mut f_lo = w[0].f.unwrap_or(0.0);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        let r = f_of_alpha_tol(mid, tol)?;
        let fm = r.value;
        if fm.abs() <= r.abs_err_estimate {
            return Ok(Some(mid));
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

impl AuditReport {
    /// Flat table with columns `alpha,f,df,defect`; out-of-window rows are empty.
    pub fn to_csv(&self) -> String {
        let cell = |v: Option<f64>| v.map(sci).unwrap_or_default();
        csv_table(
            &["alpha", "f", "df", "defect"],
            self.points
                .iter()
                .map(|p| vec![sci(p.alpha), cell(p.f), cell(p.df), cell(p.defect)]),
        )
    }
}
