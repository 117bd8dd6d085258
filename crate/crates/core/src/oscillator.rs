//! Spectra of the fractional harmonic oscillator `H = D_α|p|^α + ½kx²`.
//!
//! In momentum space the potential term becomes `-(kħ²/2) d²/dp²`, so the
//! stationary problem is the ordinary differential equation
//! `(kħ²/2) φ'' = (D_α|p|^α - E) φ` with the roles of kinetic and potential
//! energy exchanged.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::io::{csv_table, sci};
use crate::params::PhysParams;
use crate::quadrature::{integrate_finite, Integrand};
use crate::specfun::{airy_ai, airy_roots, gamma_fn, merged_asymptotic_root, RootKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Wkb,
    AiryExact,
    Shooting,
    WkbNumeric,
    Grid,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Wkb => "wkb",
            Method::AiryExact => "airy_exact",
            Method::Shooting => "shooting",
            Method::WkbNumeric => "wkb_numeric",
            Method::Grid => "grid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub n: usize,
    pub energy: f64,
    /// Absolute accuracy estimate where the method provides one.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub method: Method,
    pub levels: Vec<Level>,
    pub params: PhysParams,
}

impl Spectrum {
    pub fn new(method: Method, levels: Vec<Level>, params: PhysParams) -> Result<Self> {
        let s = Spectrum {
            method,
            levels,
            params,
        };
        s.check_ordering()?;
        Ok(s)
    }

    /// Energies positive and strictly increasing in `n`.
    pub fn check_ordering(&self) -> Result<()> {
        for l in &self.levels {
            if !(l.energy > 0.0 && l.energy.is_finite()) {
                return Err(Error::MissedLevel(format!(
                    "{} level {} has non-positive energy {}",
                    self.method.name(),
                    l.n,
                    l.energy
                )));
            }
        }
        for w in self.levels.windows(2) {
            if !(w[1].n > w[0].n && w[1].energy > w[0].energy) {
                return Err(Error::MissedLevel(format!(
                    "{} levels {} and {} are out of order",
                    self.method.name(),
                    w[0].n,
                    w[1].n
                )));
            }
        }
        Ok(())
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    /// `method,n,E` rows.
    pub fn to_csv(&self) -> String {
        csv_table(
            &["method", "n", "E"],
            self.levels.iter().map(|l| {
                vec![
                    self.method.name().to_string(),
                    l.n.to_string(),
                    sci(l.energy),
                ]
            }),
        )
    }
}

/// Momentum-space turning points `±(E/D_α)^(1/α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurningPoints {
    pub p1: f64,
    pub p2: f64,
}

pub fn turning_points(energy: f64, params: &PhysParams) -> Result<TurningPoints> {
    check_positive_alpha(params)?;
    if !(energy > 0.0) {
        return invalid(format!("energy must be positive, got {energy}"));
    }
    let p2 = (energy / params.d_alpha).powf(1.0 / params.alpha);
    Ok(TurningPoints { p1: -p2, p2 })
}

fn check_positive_alpha(params: &PhysParams) -> Result<()> {
    params.validate()?;
    if !(params.alpha > 0.0) {
        return Err(Error::AlphaOutOfRange {
            alpha: params.alpha,
            window: "(0, 4] for the oscillator",
        });
    }
    Ok(())
}

/// Closed-form WKB level
/// `E_n = [(n+½) ħπ√k D^(1/α) Γ(3/2+1/α) / (2√2 Γ(3/2) Γ(1+1/α))]^(2α/(2+α))`.
pub fn wkb_energy(n: usize, params: &PhysParams) -> Result<f64> {
    check_positive_alpha(params)?;
    let a = params.alpha;
    let inv = 1.0 / a;
    let base = (n as f64 + 0.5)
        * params.hbar
        * PI
        * params.spring_k.sqrt()
        * params.d_alpha.powf(inv)
        * gamma_fn(1.5 + inv)?
        / (2.0 * 2f64.sqrt() * gamma_fn(1.5)? * gamma_fn(1.0 + inv)?);
    Ok(base.powf(2.0 * a / (2.0 + a)))
}

pub fn wkb_spectrum(count: usize, params: &PhysParams) -> Result<Spectrum> {
    check_count(count)?;
    let levels = (0..count)
        .map(|n| {
            Ok(Level {
                n,
                energy: wkb_energy(n, params)?,
                accuracy: None,
            })
        })
        .collect::<Result<_>>()?;
    Spectrum::new(Method::Wkb, levels, *params)
}

fn check_count(count: usize) -> Result<()> {
    if count == 0 {
        return invalid("level count must be at least 1");
    }
    Ok(())
}

/// Phase-space action `∫_{p1}^{p2} √((2/k)(E - D|p|^α)) dp` by quadrature.
pub fn wkb_action(energy: f64, params: &PhysParams) -> Result<f64> {
    let tp = turning_points(energy, params)?;
    let alpha = params.alpha;
    let p2 = tp.p2;
    // p = p2 (1 - s²) removes the square-root endpoint at the turning point.
    let g = move |s: f64| {
        let u = (1.0 - s * s).powf(alpha);
        2.0 * s * (1.0 - u).max(0.0).sqrt()
    };
    let shape = integrate_finite(&Integrand::new(g), 0.0, 1.0, 1e-13)?;
    if !shape.converged {
        return Err(Error::NonConvergence {
            what: "WKB action",
            detail: format!("error estimate {:e}", shape.abs_err_estimate),
        });
    }
    Ok(2.0 * (2.0 / params.spring_k).sqrt() * energy.sqrt() * p2 * shape.value)
}

/// Solves the quantization condition `action(E) = (n+½)πħ` by bisection.
pub fn wkb_energy_numeric(n: usize, params: &PhysParams) -> Result<f64> {
    check_positive_alpha(params)?;
    let target = (n as f64 + 0.5) * PI * params.hbar;
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while wkb_action(hi, params)? < target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::NonConvergence {
                what: "WKB bracket",
                detail: format!("no bracket found up to [{lo:e}, {hi:e}]"),
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 * hi {
            break;
        }
        if wkb_action(mid, params)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn wkb_numeric_spectrum(count: usize, params: &PhysParams) -> Result<Spectrum> {
    check_count(count)?;
    let levels = (0..count)
        .into_par_iter()
        .map(|n| {
            Ok(Level {
                n,
                energy: wkb_energy_numeric(n, params)?,
                accuracy: None,
            })
        })
        .collect::<Result<_>>()?;
    Spectrum::new(Method::WkbNumeric, levels, *params)
}

/// Leading-order asymptotic root `-(3π/4 (n+½))^(2/3)`.
pub fn asymptotic_root(n: usize) -> f64 {
    merged_asymptotic_root(n as f64)
}

/// Exact merged roots: Ai' zeros for even `n`, Ai zeros for odd `n`.
pub fn exact_roots(count: usize) -> Result<Vec<f64>> {
    check_count(count)?;
    let prime = airy_roots(RootKind::AiPrimeZero, count.div_ceil(2))?;
    let plain = if count > 1 {
        airy_roots(RootKind::AiZero, count / 2)?.roots
    } else {
        vec![]
    };
    Ok((0..count)
        .map(|n| {
            if n % 2 == 0 {
                prime.roots[n / 2]
            } else {
                plain[n / 2]
            }
        })
        .collect())
}

/// Relative deviation of the asymptotic root, in percent of the asymptotic value.
pub fn root_error_percent(n: usize) -> Result<f64> {
    let exact = *exact_roots(n + 1)?.last().expect("nonempty");
    let approx = asymptotic_root(n);
    Ok(100.0 * (exact - approx).abs() / approx.abs())
}

/// `-(kħ²D₁²/2)^(1/3) r` for an α = 1 root `r`.
pub fn airy_energy(root: f64, params: &PhysParams) -> f64 {
    -(params.spring_k * params.hbar.powi(2) * params.d_alpha.powi(2) / 2.0).cbrt() * root
}

/// `κ = (2D₁/(kħ²))^(1/3)`.
pub fn airy_kappa(params: &PhysParams) -> f64 {
    (2.0 * params.d_alpha / (params.spring_k * params.hbar.powi(2))).cbrt()
}

fn check_alpha_one(params: &PhysParams) -> Result<()> {
    params.validate()?;
    if params.alpha != 1.0 {
        return Err(Error::AlphaOutOfRange {
            alpha: params.alpha,
            window: "{1}; the Airy solution exists only for alpha = 1",
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AirySpectrum {
    pub spectrum: Spectrum,
    pub kappa: f64,
    pub roots: Vec<f64>,
}

pub fn airy_spectrum(count: usize, params: &PhysParams) -> Result<AirySpectrum> {
    check_alpha_one(params)?;
    let roots = exact_roots(count)?;
    let levels = roots
        .iter()
        .enumerate()
        .map(|(n, &r)| Level {
            n,
            energy: airy_energy(r, params),
            accuracy: Some(1e-10 * airy_energy(-1.0, params)),
        })
        .collect();
    Ok(AirySpectrum {
        spectrum: Spectrum::new(Method::AiryExact, levels, *params)?,
        kappa: airy_kappa(params),
        roots,
    })
}

/// Momentum wavefunction `φ_n(p) = (sgn p)^n Ai(κ|p| + r_n)` of the α = 1
/// oscillator. The normalization constant is not applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryState {
    pub n: usize,
    pub root: f64,
    pub kappa: f64,
    pub energy: f64,
    pub normalized: bool,
}

impl AiryState {
    pub fn new(n: usize, params: &PhysParams) -> Result<Self> {
        check_alpha_one(params)?;
        let root = exact_roots(n + 1)?[n];
        Ok(AiryState {
            n,
            root,
            kappa: airy_kappa(params),
            energy: airy_energy(root, params),
            normalized: false,
        })
    }

    pub fn value(&self, p: f64) -> f64 {
        if self.n % 2 == 1 && p == 0.0 {
            return 0.0;
        }
        let v = airy_ai(self.kappa * p.abs() + self.root).ai;
        if self.n % 2 == 1 && p < 0.0 {
            -v
        } else {
            v
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    /// Numerov steps on `[0, P]`.
    pub steps: usize,
    /// Overrides the automatic cutoff `P`.
    pub cutoff: Option<f64>,
    /// Required forbidden-region action between the turning point and `P`.
    pub min_action: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            steps: 40_000,
            cutoff: None,
            min_action: 25.0,
        }
    }
}

struct Shooter {
    alpha: f64,
    d: f64,
    c: f64,
    cutoff: f64,
    steps: usize,
}

impl Shooter {
    fn q(&self, p: f64, e: f64) -> f64 {
        self.c * (self.d * p.powf(self.alpha) - e)
    }

    /// `φ(h), φ'(h)` from the parity data at the origin by fine RK4, which
    /// copes with the non-smooth `p^α` at the first grid cell.
    fn first_step(&self, e: f64, odd: bool, h: f64) -> f64 {
        const SUB: usize = 256;
        let dt = h / SUB as f64;
        let (mut y, mut v) = if odd { (0.0, 1.0) } else { (1.0, 0.0) };
        for i in 0..SUB {
            let p = i as f64 * dt;
            let acc = |p: f64, y: f64| self.q(p, e) * y;
            let k1y = v;
            let k1v = acc(p, y);
            let k2y = v + 0.5 * dt * k1v;
            let k2v = acc(p + 0.5 * dt, y + 0.5 * dt * k1y);
            let k3y = v + 0.5 * dt * k2v;
            let k3v = acc(p + 0.5 * dt, y + 0.5 * dt * k2y);
            let k4y = v + dt * k3v;
            let k4v = acc(p + dt, y + dt * k3y);
            y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        }
        y
    }

    /// Nodes of the half-line solution on `(0, P]`.
    fn nodes(&self, e: f64, odd: bool) -> usize {
        let h = self.cutoff / self.steps as f64;
        let h2 = h * h / 12.0;
        let phi_prev = if odd { 0.0 } else { 1.0 };
        let mut phi = self.first_step(e, odd, h);
        let mut w_prev = (1.0 - h2 * self.q(0.0, e)) * phi_prev;
        let mut q = self.q(h, e);
        let mut w = (1.0 - h2 * q) * phi;
        let mut nodes = 0;
        if phi_prev * phi < 0.0 {
            nodes += 1;
        }
        for i in 1..self.steps {
            let w_next = 2.0 * w - w_prev + 12.0 * h2 * q * phi;
            let q_next = self.q((i + 1) as f64 * h, e);
            let phi_next = w_next / (1.0 - h2 * q_next);
            if phi_next == 0.0 || phi_next * phi < 0.0 {
                nodes += 1;
            }
            w_prev = w;
            w = w_next;
            q = q_next;
            phi = phi_next;
            if phi.abs() > 1e200 {
                w *= 1e-200;
                w_prev *= 1e-200;
                phi *= 1e-200;
            }
        }
        nodes
    }

    /// `∫_{p_t}^{P} √Q dp` at energy `e`, by the midpoint rule.
    fn forbidden_action(&self, e: f64) -> f64 {
        let pt = (e / self.d).powf(1.0 / self.alpha);
        if pt >= self.cutoff {
            return 0.0;
        }
        let n = 2000;
        let h = (self.cutoff - pt) / n as f64;
        (0..n)
            .map(|i| self.q(pt + (i as f64 + 0.5) * h, e).max(0.0).sqrt() * h)
            .sum()
    }
}

/// Smallest `P >= 3 p_t(e)` whose forbidden-region action at `e` reaches `action`.
fn auto_cutoff(e: f64, params: &PhysParams, action: f64) -> f64 {
    let c = 2.0 / (params.spring_k * params.hbar.powi(2));
    let pt = (e / params.d_alpha).powf(1.0 / params.alpha);
    let mut p = pt;
    let mut acc = 0.0;
    let dp = pt / 1000.0;
    while acc < action {
        let mid = p + 0.5 * dp;
        acc += (c * (params.d_alpha * mid.powf(params.alpha) - e))
            .max(0.0)
            .sqrt()
            * dp;
        p += dp;
    }
    p.max(3.0 * pt)
}

/// Levels `0..count` of the momentum-space equation by Numerov shooting with
/// node counting; even and odd levels use the two parity conditions at p = 0.
pub fn shoot_spectrum(count: usize, params: &PhysParams) -> Result<Spectrum> {
    shoot_spectrum_with(count, params, ShootOptions::default())
}

pub fn shoot_spectrum_with(
    count: usize,
    params: &PhysParams,
    opts: ShootOptions,
) -> Result<Spectrum> {
    check_positive_alpha(params)?;
    check_count(count)?;
    if opts.steps < 100 {
        return invalid(format!("need at least 100 steps, got {}", opts.steps));
    }
    let wkb: Vec<f64> = (0..count)
        .map(|n| wkb_energy(n, params))
        .collect::<Result<_>>()?;
    // Brackets never exceed twice the highest WKB level.
    let ceiling = 2.0 * wkb[count - 1] + wkb[0];
    let cutoff = match opts.cutoff {
        Some(p) if p > 0.0 && p.is_finite() => p,
        Some(p) => return invalid(format!("cutoff must be positive, got {p}")),
        None => auto_cutoff(ceiling, params, opts.min_action),
    };
    let shooter = Shooter {
        alpha: params.alpha,
        d: params.d_alpha,
        c: 2.0 / (params.spring_k * params.hbar.powi(2)),
        cutoff,
        steps: opts.steps,
    };

    let levels: Vec<Level> = (0..count)
        .into_par_iter()
        .map(|n| solve_level(&shooter, n, &wkb, ceiling))
        .collect::<Result<_>>()?;
    for l in &levels {
        let action = shooter.forbidden_action(l.energy);
        if action < opts.min_action {
            return Err(Error::CutoffTooSmall(format!(
                "level {} at E = {} has forbidden action {action:.1} < {} before P = {cutoff}; increase P",
                l.n, l.energy, opts.min_action
            )));
        }
    }
    Spectrum::new(Method::Shooting, levels, *params)
}

fn solve_level(shooter: &Shooter, n: usize, wkb: &[f64], ceiling: f64) -> Result<Level> {
    let odd = n % 2 == 1;
    let m = n / 2;
    let mut lo = 0.0;
    let mut hi = wkb[n];
    // Grow the upper end until it holds more than m nodes.
    while shooter.nodes(hi, odd) <= m {
        lo = hi;
        hi *= 1.25;
        if hi > 2.0 * ceiling {
            return Err(Error::MissedLevel(format!(
                "no bracket for level {n} below E = {hi}"
            )));
        }
    }
    // Shrink the lower end until it holds at most m nodes.
    while shooter.nodes(lo, odd) > m {
        hi = lo;
        lo *= 0.8;
        if lo < 1e-12 * wkb[0] {
            lo = 0.0;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        if shooter.nodes(mid, odd) <= m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let gap = shooter.nodes(hi, odd) - shooter.nodes(lo, odd);
    if gap != 1 {
        return Err(Error::MissedLevel(format!(
            "level {n}: node count jumps by {gap} across [{lo}, {hi}]"
        )));
    }
    Ok(Level {
        n,
        energy: 0.5 * (lo + hi),
        accuracy: Some(hi - lo),
    })
}
