//! The quantum Riesz fractional derivative `(-ħ²Δ)^(α/2)`.
//!
//! Sampled functions live on the uniform periodic grid
//! `x_j = -L + j (2L/N)`, `j = 0..N`. The forward transform uses the kernel
//! `e^(-ipx/ħ)` with no prefactor and the inverse carries `1/(2πħ)`, so the
//! discrete pair is a Riemann-sum approximation of the continuous one on the
//! conjugate grid `p_k = πħk/L`. The Riesz operator multiplies the transform
//! by a symbol and transforms back.

use std::f64::consts::PI;
use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::params::PhysParams;
use crate::quadrature::{
    integrate_finite, integrate_semi_infinite, Integrand, QuadResult, DEFAULT_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Position,
    Momentum,
}

/// A function on the uniform grid `-L + j (2L/N)`, `j = 0..N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub space: Space,
    pub halfwidth: f64,
    pub samples: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(space: Space, halfwidth: f64, samples: Vec<Complex64>) -> Result<Self> {
        let f = SampledFunction {
            space,
            halfwidth,
            samples,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn from_fn(
        space: Space,
        halfwidth: f64,
        n_points: usize,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        if !(halfwidth > 0.0) {
            return invalid(format!("halfwidth must be positive, got {halfwidth}"));
        }
        let h = 2.0 * halfwidth / n_points as f64;
        let samples = (0..n_points)
            .map(|j| f(-halfwidth + j as f64 * h))
            .collect();
        Self::new(space, halfwidth, samples)
    }

    pub fn from_real(
        space: Space,
        halfwidth: f64,
        n_points: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        Self::from_fn(space, halfwidth, n_points, |x| Complex64::new(f(x), 0.0))
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.samples.len();
        if n < 2 || !n.is_multiple_of(2) {
            return invalid(format!("n_points must be even and >= 2, got {n}"));
        }
        if !(self.halfwidth > 0.0 && self.halfwidth.is_finite()) {
            return invalid(format!(
                "halfwidth must be positive, got {}",
                self.halfwidth
            ));
        }
        if let Some(j) = self
            .samples
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return invalid(format!("non-finite sample at index {j}"));
        }
        Ok(())
    }

    pub fn n_points(&self) -> usize {
        self.samples.len()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.halfwidth / self.n_points() as f64
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        -self.halfwidth + j as f64 * self.spacing()
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n_points()).map(|j| self.coordinate(j)).collect()
    }

    /// Index whose coordinate is closest to `x`.
    pub fn index_of(&self, x: f64) -> usize {
        let j = ((x + self.halfwidth) / self.spacing()).round();
        (j.max(0.0) as usize).min(self.n_points() - 1)
    }

    /// Largest |f(x_j) - s f(-x_j)| over the symmetric pairs, with
    /// `s = 1` for even and `s = -1` for odd.
    pub fn parity_defect(&self, odd: bool) -> f64 {
        let n = self.n_points();
        let s = if odd { -1.0 } else { 1.0 };
        (1..n)
            .map(|j| (self.samples[j] - self.samples[n - j] * s).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Output of [`fourier_forward`] or [`fourier_inverse`].
#[derive(Debug, Clone, PartialEq)]
pub struct Transform {
    pub function: SampledFunction,
    /// Set when the input had not decayed at the grid edge.
    pub aliasing_warning: bool,
}

fn edge_warning(f: &SampledFunction) -> bool {
    let n = f.n_points();
    let peak = f.max_abs();
    let edge = f.samples[0].norm().max(f.samples[n - 1].norm());
    edge > 1e-12_f64.max(1e-12 * peak)
}

fn fft_pair(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
}

/// `φ(p) = ∫ ψ(x) e^(-ipx/ħ) dx` on the conjugate grid `p_k = πħk/L`,
/// stored in ascending order of `p`.
pub fn fourier_forward(psi: &SampledFunction, params: &PhysParams) -> Result<Transform> {
    psi.validate()?;
    if psi.space != Space::Position {
        return invalid("fourier_forward expects a position-space function");
    }
    let n = psi.n_points();
    let (fwd, _) = fft_pair(n);
    let mut buf = psi.samples.clone();
    fwd.process(&mut buf);
    let dx = psi.spacing();
    let half = n / 2;
    // φ(p_k) = Δx (-1)^k FFT[ψ]_k, k = -N/2 .. N/2-1, stored at j = k + N/2.
    let samples = (0..n)
        .map(|j| {
            let k = j as isize - half as isize;
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            buf[k.rem_euclid(n as isize) as usize] * (dx * sign)
        })
        .collect();
    let p_half = PI * params.hbar * n as f64 / (2.0 * psi.halfwidth);
    Ok(Transform {
        function: SampledFunction::new(Space::Momentum, p_half, samples)?,
        aliasing_warning: edge_warning(psi),
    })
}

/// `ψ(x) = (1/2πħ) ∫ φ(p) e^(ipx/ħ) dp`, the exact inverse of [`fourier_forward`].
pub fn fourier_inverse(phi: &SampledFunction, params: &PhysParams) -> Result<Transform> {
    phi.validate()?;
    if phi.space != Space::Momentum {
        return invalid("fourier_inverse expects a momentum-space function");
    }
    let n = phi.n_points();
    let (_, inv) = fft_pair(n);
    let half = n / 2;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (j, &v) in phi.samples.iter().enumerate() {
        let k = j as isize - half as isize;
        let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        buf[k.rem_euclid(n as isize) as usize] = v * sign;
    }
    inv.process(&mut buf);
    let l = PI * params.hbar * n as f64 / (2.0 * phi.halfwidth);
    let dx = 2.0 * l / n as f64;
    let scale = 1.0 / (n as f64 * dx);
    for z in &mut buf {
        *z *= scale;
    }
    Ok(Transform {
        function: SampledFunction::new(Space::Position, l, buf)?,
        aliasing_warning: edge_warning(phi),
    })
}

/// Default half-width of the padded grid, in units of the support half-width.
pub const DEFAULT_PADDING: f64 = 16.0;
/// Default number of grid points.
pub const DEFAULT_POINTS: usize = 1 << 14;

/// Momentum-space multiplier defining the discrete operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symbol {
    /// `|p|^α`, the continuum symbol sampled on the grid.
    Spectral,
    /// `|(2ħ/h) sin(ph/2ħ)|^α`, the symbol of the centred lattice
    /// difference; its α = 2 case is the three-point Laplacian stencil.
    Lattice,
}

impl Symbol {
    fn eval(self, p: f64, alpha: f64, hbar: f64, h: f64) -> f64 {
        let q = match self {
            Symbol::Spectral => p.abs(),
            Symbol::Lattice => (2.0 * hbar / h * (p * h / (2.0 * hbar)).sin()).abs(),
        };
        if alpha == 0.0 {
            1.0
        } else if q == 0.0 {
            0.0
        } else {
            q.powf(alpha)
        }
    }
}

/// How the grid operator treats the region outside `[-L, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// The multiplier acts on the periodic extension of the samples.
    Periodic,
    /// The periodic images of the far-field kernel are subtracted, so a
    /// function vanishing outside the grid sees the whole-line operator.
    WholeLine,
}

/// Coefficient `c` of the off-diagonal Riesz kernel `-c/|x|^(1+α)`,
/// `c = ħ^α Γ(1+α) sin(πα/2)/π`; zero for the local cases α = 0, 2, 4.
pub fn kernel_coefficient(alpha: f64, hbar: f64) -> f64 {
    if alpha.fract() == 0.0 && (alpha as i64) % 2 == 0 {
        return 0.0;
    }
    let g = crate::specfun::gamma_fn(1.0 + alpha).unwrap_or(f64::NAN);
    hbar.powf(alpha) * g * (0.5 * PI * alpha).sin() / PI
}

struct ImageCorrection {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Transformed image kernel on the doubled grid, including 1/(2N).
    kernel: Vec<Complex64>,
}

/// Reusable discrete Riesz operator for one grid.
pub struct RieszOperator {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    multiplier: Vec<f64>,
    images: Option<ImageCorrection>,
}

impl RieszOperator {
    pub fn new(
        n_points: usize,
        halfwidth: f64,
        params: &PhysParams,
        symbol: Symbol,
    ) -> Result<Self> {
        Self::with_boundary(n_points, halfwidth, params, symbol, Boundary::Periodic)
    }

    pub fn with_boundary(
        n_points: usize,
        halfwidth: f64,
        params: &PhysParams,
        symbol: Symbol,
        boundary: Boundary,
    ) -> Result<Self> {
        params.validate()?;
        check_apply_alpha(params.alpha)?;
        // Odd sizes are allowed here so that padded grids can be centred on
        // an arbitrary interior; SampledFunction itself keeps N even.
        if n_points < 2 {
            return invalid(format!("n_points must be at least 2, got {n_points}"));
        }
        if !(halfwidth > 0.0 && halfwidth.is_finite()) {
            return invalid(format!("halfwidth must be positive, got {halfwidth}"));
        }
        let (forward, inverse) = fft_pair(n_points);
        let h = 2.0 * halfwidth / n_points as f64;
        let dp = PI * params.hbar / halfwidth;
        let n = n_points as isize;
        let multiplier = (0..n)
            .map(|k| {
                let kk = if k <= n / 2 { k } else { k - n };
                symbol.eval(kk as f64 * dp, params.alpha, params.hbar, h) / n_points as f64
            })
            .collect();
        let c = kernel_coefficient(params.alpha, params.hbar);
        let images = if boundary == Boundary::WholeLine && c != 0.0 {
            Some(image_correction(n_points, halfwidth, params.alpha, c)?)
        } else {
            None
        };
        Ok(RieszOperator {
            forward,
            inverse,
            multiplier,
            images,
        })
    }

    pub fn len(&self) -> usize {
        self.multiplier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multiplier.is_empty()
    }

    /// Applies the operator in place.
    pub fn apply_in_place(&self, buf: &mut [Complex64]) {
        let correction = self.images.as_ref().map(|img| {
            let n = buf.len();
            let mut wide = vec![Complex64::new(0.0, 0.0); 2 * n];
            wide[..n].copy_from_slice(buf);
            img.forward.process(&mut wide);
            for (z, k) in wide.iter_mut().zip(&img.kernel) {
                *z *= k;
            }
            img.inverse.process(&mut wide);
            wide.truncate(n);
            wide
        });
        self.forward.process(buf);
        for (z, &m) in buf.iter_mut().zip(&self.multiplier) {
            *z *= m;
        }
        self.inverse.process(buf);
        if let Some(corr) = correction {
            for (z, c) in buf.iter_mut().zip(corr) {
                *z -= c;
            }
        }
    }
}

/// Sum of the far-field kernel over the periodic images `s - 2mL`, `m != 0`,
/// as a linear-convolution kernel on the doubled grid:
/// `G(s) = -c h (2L)^(-1-α) [ζ(1+α, 1 + s/2L) + ζ(1+α, 1 - s/2L)]`.
fn image_correction(n: usize, halfwidth: f64, alpha: f64, c: f64) -> Result<ImageCorrection> {
    let h = 2.0 * halfwidth / n as f64;
    let period = 2.0 * halfwidth;
    let s_exp = 1.0 + alpha;
    let pre = -c * h * period.powf(-s_exp);
    let g = |k: isize| -> Result<f64> {
        let u = k as f64 / n as f64;
        Ok(pre
            * (crate::specfun::hurwitz_zeta(s_exp, 1.0 + u)?
                + crate::specfun::hurwitz_zeta(s_exp, 1.0 - u)?))
    };
    let mut kernel = vec![Complex64::new(0.0, 0.0); 2 * n];
    for k in 0..n as isize {
        kernel[k as usize] = Complex64::new(g(k)?, 0.0);
        if k > 0 {
            kernel[2 * n - k as usize] = Complex64::new(g(-k)?, 0.0);
        }
    }
    let (forward, inverse) = fft_pair(2 * n);
    forward.process(&mut kernel);
    let scale = 1.0 / (2 * n) as f64;
    for z in &mut kernel {
        *z *= scale;
    }
    Ok(ImageCorrection {
        forward,
        inverse,
        kernel,
    })
}

fn check_apply_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=PhysParams::ALPHA_MAX).contains(&alpha) {
        return Err(Error::AlphaOutOfRange {
            alpha,
            window: "[0, 4] for the grid operator",
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RieszOutput {
    pub function: SampledFunction,
    /// Indices away from the outer 10% of the grid on either side.
    pub reliable: Range<usize>,
}

/// Riesz derivative of `psi` with the continuum symbol `|p|^α`.
pub fn riesz_apply(psi: &SampledFunction, params: &PhysParams) -> Result<RieszOutput> {
    riesz_apply_with(psi, params, Symbol::Spectral, Boundary::Periodic)
}

pub fn riesz_apply_with(
    psi: &SampledFunction,
    params: &PhysParams,
    symbol: Symbol,
    boundary: Boundary,
) -> Result<RieszOutput> {
    psi.validate()?;
    if psi.space != Space::Position {
        return invalid("riesz_apply expects a position-space function");
    }
    let op = RieszOperator::with_boundary(psi.n_points(), psi.halfwidth, params, symbol, boundary)?;
    let mut buf = psi.samples.clone();
    op.apply_in_place(&mut buf);
    let n = psi.n_points();
    let margin = n / 10;
    Ok(RieszOutput {
        function: SampledFunction::new(Space::Position, psi.halfwidth, buf)?,
        reliable: margin..n - margin,
    })
}

/// Closed-form single-integral representation of the Riesz derivative of
/// the cosine ansatz `A cos(πx/2a)` (zero outside `|x| <= a`):
///
/// `-(2A/π)(πħ/2a)^α ∫_0^∞ p^α/(p²-1) cos(πp/2) cos(πpx/2a) dp`.
///
/// The integral converges absolutely only for `-1 < α < 1`.
pub fn riesz_pointwise_psi0(x: f64, params: &PhysParams) -> Result<QuadResult> {
    riesz_pointwise_psi0_tol(x, params, DEFAULT_TOL)
}

pub fn riesz_pointwise_psi0_tol(x: f64, params: &PhysParams, tol: f64) -> Result<QuadResult> {
    let alpha = params.alpha;
    if !(alpha > -1.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange {
            alpha,
            window: "(-1, 1), where the integral converges absolutely",
        });
    }
    params.validate()?;
    let a = params.well_halfwidth;
    if !(x.abs() <= 2.0 * a) {
        return invalid(format!("|x| must not exceed 2a = {}, got x = {x}", 2.0 * a));
    }
    let s = x / a;
    let scale = -(2.0 * params.amplitude / PI) * (PI * params.hbar / (2.0 * a)).powf(alpha);
    let integral = pointwise_integral(alpha, s, tol / scale.abs().max(1e-300))?;
    Ok(integral.scaled(scale))
}

/// `∫_0^∞ p^α/(p²-1) cos(πp/2) cos(πps/2) dp`.
fn pointwise_integral(alpha: f64, s: f64, tol: f64) -> Result<QuadResult> {
    const HEAD: f64 = 2.0;
    let full = move |p: f64| {
        // cos(πp/2) written as sin(π(1-p)/2) to keep the zero at p = 1 exact.
        p.powf(alpha) * (0.5 * PI * (1.0 - p)).sin() * (0.5 * PI * p * s).cos() / (p * p - 1.0)
    };
    let limit = -0.25 * PI * (0.5 * PI * s).cos();
    let head_f = Integrand::new(full)
        .singular_at_with_limit(1.0, limit)
        .lo_power(alpha);
    let head = integrate_finite(&head_f, 0.0, HEAD, tol / 3.0)?;

    // Beyond the pole the product splits into two single-frequency pieces.
    let mut total = head;
    for omega in [0.5 * PI * (1.0 + s), 0.5 * PI * (1.0 - s)] {
        let w = omega.abs();
        let piece = move |p: f64| 0.5 * p.powf(alpha) * (w * p).cos() / (p * p - 1.0);
        let integrand = if w == 0.0 {
            Integrand::new(piece).decay(alpha - 2.0).tail_step(2.0)
        } else {
            Integrand::new(piece)
                .decay(alpha - 2.0)
                .period(2.0 * PI / w)
        };
        let r = integrate_semi_infinite(&integrand, HEAD, tol / 3.0)?;
        total = QuadResult {
            value: total.value + r.value,
            abs_err_estimate: total.abs_err_estimate + r.abs_err_estimate,
            converged: total.converged && r.converged,
            evaluations: total.evaluations + r.evaluations,
        };
    }
    total.converged &= total.abs_err_estimate <= tol;
    Ok(total)
}

/// Writes `coordinate,re,im` rows with 12 significant digits.
pub fn to_csv(f: &SampledFunction) -> String {
    let mut out = String::from("coordinate,re,im\n");
    for (j, z) in f.samples.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            crate::io::sci(f.coordinate(j)),
            crate::io::sci(z.re),
            crate::io::sci(z.im)
        ));
    }
    out
}

/// Parses the CSV written by [`to_csv`]; the grid must be uniform and of the
/// `-L + j (2L/N)` form.
pub fn from_csv(text: &str, space: Space) -> Result<SampledFunction> {
    let mut coords = Vec::new();
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("coordinate")) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return invalid(format!("line {}: expected 3 columns", i + 1));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("line {}: {e}", i + 1)))
        };
        coords.push(parse(cols[0])?);
        samples.push(Complex64::new(parse(cols[1])?, parse(cols[2])?));
    }
    let n = coords.len();
    if n < 2 {
        return invalid("need at least two samples");
    }
    let h = coords[1] - coords[0];
    let halfwidth = -coords[0];
    if !(h > 0.0) || ((n as f64) * h - 2.0 * halfwidth).abs() > 1e-9 * halfwidth.abs().max(1.0) {
        return invalid("coordinates do not form the grid -L + j(2L/N)");
    }
    for (j, &c) in coords.iter().enumerate() {
        if (c - (-halfwidth + j as f64 * h)).abs() > 1e-9 * halfwidth.max(1.0) {
            return invalid(format!("non-uniform coordinate at row {}", j + 1));
        }
    }
    SampledFunction::new(space, halfwidth, samples)
}
