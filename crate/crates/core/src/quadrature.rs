//! Adaptive Gauss–Kronrod integration for finite, semi-infinite and
//! oscillatory integrands with removable interior singularities.
//!
//! Finite intervals use a global adaptive 7/15-point Gauss–Kronrod scheme.
//! Semi-infinite integrals integrate an adaptive head and then treat the
//! tail in one of three ways:
//!
//! * rapidly decaying integrands are truncated once an envelope bound on the
//!   remaining mass drops below the tolerance;
//! * oscillatory integrands whose half-period cell integrals alternate in
//!   sign are summed cell by cell with Euler (repeated averaging)
//!   acceleration;
//! * slowly decaying power-law tails (oscillatory or not) are extrapolated
//!   in the cutoff `P`, using the known asymptotic form
//!   `S(P) = I - sum_j c_j P^(d+1-j) (ln P)^l` sampled on a period-locked
//!   geometric lattice of cutoffs.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default absolute tolerance for every integration entry point.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Maximum number of integrand evaluations per call.
pub const EVAL_BUDGET: usize = 1_000_000;

/// Points closer than this (relative to max(1, |s|)) to a declared
/// singular point `s` are replaced by the limit value.
pub const SINGULAR_RADIUS: f64 = 1e-8;

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Number of power-law terms kept in the tail model per log power.
const TAIL_TERMS: usize = 6;

/// Result of a definite integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err_estimate: f64,
    pub converged: bool,
    pub evaluations: usize,
}

impl QuadResult {
    fn combine(self, other: QuadResult, tol: f64) -> QuadResult {
        let err = self.abs_err_estimate + other.abs_err_estimate;
        QuadResult {
            value: self.value + other.value,
            abs_err_estimate: err,
            converged: self.converged && other.converged && err <= tol,
            evaluations: self.evaluations + other.evaluations,
        }
    }

    /// Multiplies value and error estimate by `s`.
    pub fn scaled(self, s: f64) -> QuadResult {
        QuadResult {
            value: self.value * s,
            abs_err_estimate: self.abs_err_estimate * s.abs(),
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct SingularPoint {
    at: f64,
    limit: Option<f64>,
}

/// A real integrand together with the analytic facts the integrator needs.
///
/// * `singular_at` declares an interior point where the formula is 0/0 but
///   the limit is finite;
/// * `decay` gives the exponent `d` of the magnitude envelope `|f| ~ p^d`;
/// * `log_power` declares an extra `(ln p)^m` factor in that envelope;
/// * `period` marks the integrand as oscillatory with period `T`;
/// * `lo_power` declares `f ~ (p - lo)^beta` at the lower endpoint;
/// * `tail_step` sets the exponent spacing of the tail expansion.
pub struct Integrand<'a> {
    evaluator: Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>,
    singular: Vec<SingularPoint>,
    decay_exponent: Option<f64>,
    log_power: u32,
    period: Option<f64>,
    lo_power: Option<f64>,
    tail_step: f64,
}

impl<'a> Integrand<'a> {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'a) -> Self {
        Integrand {
            evaluator: Box::new(f),
            singular: Vec::new(),
            decay_exponent: None,
            log_power: 0,
            period: None,
            lo_power: None,
            tail_step: 1.0,
        }
    }

    /// Removable singularity at `p`; the limit is estimated numerically.
    pub fn singular_at(mut self, p: f64) -> Self {
        self.singular.push(SingularPoint { at: p, limit: None });
        self
    }

    /// Removable singularity at `p` with a known limit value.
    pub fn singular_at_with_limit(mut self, p: f64, limit: f64) -> Self {
        self.singular.push(SingularPoint {
            at: p,
            limit: Some(limit),
        });
        self
    }

    pub fn decay(mut self, exponent: f64) -> Self {
        self.decay_exponent = Some(exponent);
        self
    }

    pub fn log_power(mut self, m: u32) -> Self {
        self.log_power = m;
        self
    }

    pub fn period(mut self, t: f64) -> Self {
        self.period = Some(t);
        self
    }

    pub fn lo_power(mut self, beta: f64) -> Self {
        self.lo_power = Some(beta);
        self
    }

    /// Spacing of the exponents in the tail expansion at period-locked
    /// cutoffs. Even functions of `p` times a period-locked cosine expand in
    /// steps of 2.
    pub fn tail_step(mut self, step: f64) -> Self {
        self.tail_step = step;
        self
    }

    pub fn decay_exponent(&self) -> Option<f64> {
        self.decay_exponent
    }

    pub fn singular_points(&self) -> Vec<f64> {
        self.singular.iter().map(|s| s.at).collect()
    }

    /// Raw evaluation, bypassing the singular-point rule.
    pub fn eval_raw(&self, p: f64) -> f64 {
        (self.evaluator)(p)
    }
}

/// Evaluation context: resolved singular limits plus an evaluation counter.
struct Evaluator<'i, 'a> {
    f: &'i Integrand<'a>,
    limits: Vec<(f64, f64)>,
    count: usize,
}

impl<'i, 'a> Evaluator<'i, 'a> {
    fn new(f: &'i Integrand<'a>) -> Result<Self> {
        let mut ev = Evaluator {
            f,
            limits: Vec::with_capacity(f.singular.len()),
            count: 0,
        };
        for s in &f.singular {
            let limit = match s.limit {
                Some(l) => l,
                None => ev.estimate_limit(s.at)?,
            };
            ev.limits.push((s.at, limit));
        }
        Ok(ev)
    }

    /// Richardson extrapolation of the two-sided average, whose error
    /// expansion is even in the offset.
    fn estimate_limit(&mut self, s: f64) -> Result<f64> {
        let scale = s.abs().max(1.0);
        let h = 1e-3 * scale;
        let avg =
            |ev: &mut Self, h: f64| -> Result<f64> { Ok(0.5 * (ev.raw(s - h)? + ev.raw(s + h)?)) };
        let g1 = avg(self, h)?;
        let g2 = avg(self, 0.5 * h)?;
        let g3 = avg(self, 0.25 * h)?;
        let r1 = (4.0 * g2 - g1) / 3.0;
        let r2 = (4.0 * g3 - g2) / 3.0;
        Ok((16.0 * r2 - r1) / 15.0)
    }

    fn raw(&mut self, p: f64) -> Result<f64> {
        self.count += 1;
        let v = (self.f.evaluator)(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteIntegrand { abscissa: p })
        }
    }

    fn value(&mut self, p: f64) -> Result<f64> {
        for &(s, limit) in &self.limits {
            if (p - s).abs() <= SINGULAR_RADIUS * s.abs().max(1.0) {
                self.count += 1;
                return Ok(limit);
            }
        }
        self.raw(p)
    }
}

/// Change of variables applied to one segment.
#[derive(Debug, Clone, Copy)]
enum Mapping {
    Identity,
    /// p = origin + scale * t^m for t in [0, 1].
    Power {
        origin: f64,
        scale: f64,
        m: f64,
    },
}

impl Mapping {
    fn eval(&self, ev: &mut Evaluator<'_, '_>, t: f64) -> Result<f64> {
        match *self {
            Mapping::Identity => ev.value(t),
            Mapping::Power { origin, scale, m } => {
                let tm = t.powf(m);
                // Below this the mapped point collapses onto the endpoint;
                // the integrable remainder is beneath any usable tolerance.
                if tm * scale < f64::MIN_POSITIVE * 1e8 {
                    return Ok(0.0);
                }
                let p = origin + scale * tm;
                let jac = scale * m * tm / t;
                Ok(ev.value(p)? * jac)
            }
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    map: usize,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk15(ev: &mut Evaluator<'_, '_>, map: &Mapping, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = map.eval(ev, center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = map.eval(ev, center - dx)?;
        let f2 = map.eval(ev, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

/// Global adaptive bisection over a set of mapped segments.
fn adaptive(
    ev: &mut Evaluator<'_, '_>,
    segments: &[(f64, f64, Mapping)],
    tol: f64,
    budget: usize,
) -> Result<QuadResult> {
    let start = ev.count;
    let maps: Vec<Mapping> = segments.iter().map(|s| s.2).collect();
    let mut heap = BinaryHeap::new();
    let mut frozen_value = 0.0;
    let mut frozen_err = 0.0;
    for (i, &(a, b, map)) in segments.iter().enumerate() {
        let (value, err) = gk15(ev, &map, a, b)?;
        heap.push(Panel {
            a,
            b,
            map: i,
            value,
            err,
        });
    }
    let totals = |heap: &BinaryHeap<Panel>| -> (f64, f64) {
        heap.iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err))
    };
    let mut total_err = totals(&heap).1;
    let mut iter = 0usize;
    while total_err + frozen_err > tol && ev.count - start < budget {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let width = (worst.b - worst.a).abs();
        if width <= 1e-13 * worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE) * 10.0
            || mid <= worst.a
            || mid >= worst.b
        {
            frozen_value += worst.value;
            frozen_err += worst.err;
            total_err -= worst.err;
            continue;
        }
        let map = maps[worst.map];
        let (v1, e1) = gk15(ev, &map, worst.a, mid)?;
        let (v2, e2) = gk15(ev, &map, mid, worst.b)?;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            map: worst.map,
            value: v1,
            err: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            map: worst.map,
            value: v2,
            err: e2,
        });
        iter += 1;
        if iter.is_multiple_of(512) {
            total_err = totals(&heap).1;
        }
    }
    let (v, e) = totals(&heap);
    let err = e + frozen_err;
    Ok(QuadResult {
        value: v + frozen_value,
        abs_err_estimate: err,
        converged: err <= tol,
        evaluations: ev.count - start,
    })
}

fn finite_segments(f: &Integrand<'_>, lo: f64, hi: f64, map_lo: bool) -> Vec<(f64, f64, Mapping)> {
    let mut cuts: Vec<f64> = f
        .singular
        .iter()
        .map(|s| s.at)
        .filter(|&s| s > lo && s < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(lo);
    edges.extend(cuts);
    edges.push(hi);

    let mut segs = Vec::with_capacity(edges.len());
    for (i, w) in edges.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        match f.lo_power {
            Some(beta) if map_lo && i == 0 && beta < 0.0 => {
                // p = lo + span * t^m with m = 1/(1+beta) turns (p - lo)^beta
                // into a bounded factor in t.
                let span = (b - a).min(1.0_f64.max(a.abs()));
                let m = (1.0 / (1.0 + beta)).max(1.0);
                segs.push((
                    0.0,
                    1.0,
                    Mapping::Power {
                        origin: a,
                        scale: span,
                        m,
                    },
                ));
                if a + span < b {
                    segs.push((a + span, b, Mapping::Identity));
                }
            }
            _ => segs.push((a, b, Mapping::Identity)),
        }
    }
    segs
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol.is_finite()) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    Ok(())
}

/// Adaptive estimate of `∫_lo^hi f`.
///
/// Fails hard only when the integrand produces a non-finite value; running
/// out of the evaluation budget returns `converged = false` with the best
/// estimate.
pub fn integrate_finite(f: &Integrand<'_>, lo: f64, hi: f64, tol: f64) -> Result<QuadResult> {
    check_tol(tol)?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return invalid(format!("need finite lo < hi, got [{lo}, {hi}]"));
    }
    let mut ev = Evaluator::new(f)?;
    let segs = finite_segments(f, lo, hi, true);
    let mut res = adaptive(&mut ev, &segs, tol, EVAL_BUDGET)?;
    res.evaluations = ev.count;
    Ok(res)
}

fn integrate_piece(
    ev: &mut Evaluator<'_, '_>,
    f: &Integrand<'_>,
    lo: f64,
    hi: f64,
    tol: f64,
    budget: usize,
) -> Result<QuadResult> {
    let segs = finite_segments(f, lo, hi, true);
    adaptive(ev, &segs, tol, budget)
}

/// Like [`integrate_piece`] for a piece away from the lower limit, where the
/// endpoint behaviour declared by `lo_power` does not apply.
fn integrate_cell(
    ev: &mut Evaluator<'_, '_>,
    f: &Integrand<'_>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<QuadResult> {
    let segs = finite_segments(f, lo, hi, false);
    let budget = remaining(ev);
    adaptive(ev, &segs, tol, budget)
}

/// Evaluations left in the per-call budget. Once it is spent, each further
/// piece gets only its initial Kronrod panels and reports non-convergence
/// through its error estimate.
fn remaining(ev: &Evaluator<'_, '_>) -> usize {
    EVAL_BUDGET.saturating_sub(ev.count)
}

/// `∫_lo^∞ f`, dispatching on the integrand's declared tail behaviour.
///
/// Requires either a period (oscillatory tail) or a decay exponent below -1;
/// anything else is rejected as a non-convergent input.
pub fn integrate_semi_infinite(f: &Integrand<'_>, lo: f64, tol: f64) -> Result<QuadResult> {
    check_tol(tol)?;
    if !lo.is_finite() {
        return invalid("lower limit must be finite");
    }
    let mut ev = Evaluator::new(f)?;
    let sing_max = f
        .singular
        .iter()
        .map(|s| s.at.abs())
        .fold(0.0_f64, f64::max);
    let res = match (f.period, f.decay_exponent) {
        (Some(t), _) => {
            if !(t > 0.0 && t.is_finite()) {
                return invalid(format!("period must be positive, got {t}"));
            }
            oscillatory(&mut ev, f, lo, t, sing_max, tol)?
        }
        (None, Some(d)) if d < -1.0 => decaying(&mut ev, f, lo, d, sing_max, tol)?,
        (None, Some(d)) => {
            return invalid(format!(
                "integrand envelope p^{d} is not integrable at infinity and no period was supplied"
            ))
        }
        (None, None) => {
            return invalid("semi-infinite integral needs a decay exponent below -1 or a period")
        }
    };
    Ok(QuadResult {
        evaluations: ev.count,
        ..res
    })
}

fn head_end(lo: f64, sing_max: f64, min_len: f64) -> f64 {
    (lo + min_len).max(4.0 * sing_max.max(1.0)).max(16.0)
}

fn decaying(
    ev: &mut Evaluator<'_, '_>,
    f: &Integrand<'_>,
    lo: f64,
    d: f64,
    sing_max: f64,
    tol: f64,
) -> Result<QuadResult> {
    let mut cut = head_end(lo, sing_max, 1.0);
    if d.is_finite() && f.log_power == 0 {
        // Envelope constant from samples on [cut, 2 cut].
        let c = (0..=8)
            .map(|i| {
                let p = cut * (1.0 + i as f64 / 8.0);
                ev.value(p).map(|v| v.abs() / p.powf(d))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0_f64, f64::max);
        // Smallest cutoff whose envelope tail mass is below tol/10.
        let needed = if c > 0.0 {
            (tol / 10.0 * (-d - 1.0) / c).powf(1.0 / (d + 1.0))
        } else {
            cut
        };
        if needed <= 1e4 * cut {
            let cut = needed.max(cut);
            let head = integrate_piece(ev, f, lo, cut, 0.9 * tol, remaining(ev))?;
            let tail_bound = c * cut.powf(d + 1.0) / (-d - 1.0);
            return Ok(QuadResult {
                abs_err_estimate: head.abs_err_estimate + tail_bound,
                converged: head.converged && head.abs_err_estimate + tail_bound <= tol,
                ..head
            });
        }
        let head = integrate_piece(ev, f, lo, cut, 0.25 * tol, remaining(ev))?;
        let tail = power_tail(ev, f, cut, None, d, 0.75 * tol)?;
        return Ok(head.combine(tail, tol));
    }
    if d.is_finite() {
        let head = integrate_piece(ev, f, lo, cut, 0.25 * tol, remaining(ev))?;
        let tail = power_tail(ev, f, cut, None, d, 0.75 * tol)?;
        return Ok(head.combine(tail, tol));
    }
    // Faster than any power: double the cutoff until a doubling adds nothing.
    let mut total = integrate_piece(ev, f, lo, cut, 0.5 * tol, remaining(ev))?;
    loop {
        let next = integrate_cell(ev, f, cut, 2.0 * cut, 0.1 * tol)?;
        total = total.combine(next, tol);
        cut *= 2.0;
        if next.value.abs() <= 0.05 * tol || ev.count > EVAL_BUDGET || cut > 1e300 {
            total.converged = total.converged && next.value.abs() <= 0.05 * tol;
            return Ok(total);
        }
    }
}

fn oscillatory(
    ev: &mut Evaluator<'_, '_>,
    f: &Integrand<'_>,
    lo: f64,
    period: f64,
    sing_max: f64,
    tol: f64,
) -> Result<QuadResult> {
    let target = head_end(lo, sing_max, 4.0 * period);
    let cells_to_start = ((target - lo) / period).ceil().max(1.0);
    let start = lo + cells_to_start * period;
    let head = integrate_piece(ev, f, lo, start, 0.25 * tol, remaining(ev))?;

    let half = 0.5 * period;
    let cell_tol = 1e-3 * tol;
    let mut probe = Vec::with_capacity(12);
    for k in 0..12 {
        let a = start + k as f64 * half;
        probe.push(integrate_cell(ev, f, a, a + half, cell_tol)?);
    }
    let alternating = probe.windows(2).all(|w| w[0].value * w[1].value < 0.0);
    let tail = if alternating {
        euler_tail(ev, f, start, half, probe, 0.75 * tol)?
    } else {
        match f.decay_exponent {
            Some(d) if d.is_finite() => power_tail(ev, f, start, Some(period), d, 0.75 * tol)?,
            _ => {
                return invalid(
                    "oscillatory tail cells do not alternate and no power-law decay exponent was supplied",
                )
            }
        }
    };
    Ok(head.combine(tail, tol))
}

/// Repeated averaging of partial sums over half-period cells.
fn euler_tail(
    ev: &mut Evaluator<'_, '_>,
    f: &Integrand<'_>,
    start: f64,
    half: f64,
    mut cells: Vec<QuadResult>,
    tol: f64,
) -> Result<QuadResult> {
    const MAX_CELLS: usize = 4000;
    let euler = |cells: &[QuadResult]| -> f64 {
        let mut row: Vec<f64> = cells
            .iter()
            .scan(0.0, |s, c| {
                *s += c.value;
                Some(*s)
            })
            .collect();
        while row.len() > 1 {
            row = row.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        }
        row[0]
    };
    let mut prev = euler(&cells[..cells.len() - 1]);
    let mut prev_diff = f64::INFINITY;
    loop {
        let est = euler(&cells);
        let diff = (est - prev).abs();
        let cell_err: f64 = cells.iter().map(|c| c.abs_err_estimate).sum();
        let err = diff.max(prev_diff) + cell_err;
        if err <= tol || cells.len() >= MAX_CELLS || ev.count > EVAL_BUDGET {
            return Ok(QuadResult {
                value: est,
                abs_err_estimate: err,
                converged: err <= tol,
                evaluations: 0,
            });
        }
        prev = est;
        prev_diff = diff;
        let a = start + cells.len() as f64 * half;
        cells.push(integrate_cell(ev, f, a, a + half, 1e-3 * tol)?);
    }
}

/// Extrapolation of `S(P) = ∫_start^P f` to `P → ∞` for power-law tails.
///
/// Cutoffs form a geometric sequence snapped onto the period lattice so the
/// oscillatory contribution to the tail is phase locked and itself a power
/// series in `P`.
fn power_tail(
    ev: &mut Evaluator<'_, '_>,
    f: &Integrand<'_>,
    start: f64,
    period: Option<f64>,
    d: f64,
    tol: f64,
) -> Result<QuadResult> {
    let logs = f.log_power as usize + 1;
    let step = f.tail_step;
    let n_exp = match (logs, step >= 2.0) {
        (1, _) => TAIL_TERMS,
        (_, true) => TAIL_TERMS - 2,
        (_, false) => TAIL_TERMS - 1,
    };
    let n_points = n_exp * logs + 1;
    let ratio = 2.0_f64;

    let mut cutoffs = Vec::with_capacity(n_points);
    // Log-weighted tails need the lattice further out for the same accuracy.
    let first = if logs > 1 { 2.0 * start } else { start };
    for j in 0..n_points {
        let raw = first * ratio.powi(j as i32);
        let snapped = match period {
            Some(t) => start + ((raw - start) / t).round() * t,
            None => raw,
        };
        if let Some(&last) = cutoffs.last() {
            if snapped <= last {
                return invalid("tail lattice collapsed; period too large for the cutoff range");
            }
        }
        cutoffs.push(snapped);
    }

    // Partial integrals S(P_j), accumulated cell by cell.
    let mut sums = Vec::with_capacity(n_points);
    let mut acc = 0.0;
    let mut acc_err = 0.0;
    let mut all_converged = true;
    let mut left = start;
    for &p in &cutoffs {
        if p > left {
            let pieces: Vec<(f64, f64)> = match period {
                Some(t) => {
                    let half = 0.5 * t;
                    let n = ((p - left) / half).round() as usize;
                    (0..n)
                        .map(|k| (left + k as f64 * half, left + (k + 1) as f64 * half))
                        .collect()
                }
                None => vec![(left, p)],
            };
            for (a, b) in pieces {
                let b = b.min(p);
                let r = integrate_cell(ev, f, a, b, 1e-4 * tol)?;
                acc += r.value;
                acc_err += r.abs_err_estimate;
                all_converged &= r.converged;
            }
            left = p;
        }
        sums.push(acc);
    }

    let basis = |p: f64, n_exp: usize| -> Vec<f64> {
        let lp = p.ln();
        let mut out = Vec::with_capacity(n_exp * logs);
        for i in 0..n_exp {
            let base = p.powf(d + 1.0 - step * i as f64);
            for l in 0..logs {
                out.push(base * lp.powi(l as i32));
            }
        }
        out
    };
    let solve = |n_exp: usize| -> Result<f64> {
        let k = n_exp * logs;
        let pts = &cutoffs[n_points - (k + 1)..];
        let vals = &sums[n_points - (k + 1)..];
        // Columns scaled by their value at the largest cutoff.
        let ref_row = basis(*pts.last().unwrap(), n_exp);
        let mut m = DMatrix::<f64>::zeros(k + 1, k + 1);
        let mut rhs = DVector::<f64>::zeros(k + 1);
        for (r, (&p, &s)) in pts.iter().zip(vals).enumerate() {
            m[(r, 0)] = 1.0;
            for (c, v) in basis(p, n_exp).into_iter().enumerate() {
                m[(r, c + 1)] = v / ref_row[c];
            }
            rhs[r] = s;
        }
        let sol = m.lu().solve(&rhs).ok_or_else(|| Error::NonConvergence {
            what: "tail extrapolation",
            detail: "singular cutoff system".into(),
        })?;
        Ok(sol[0])
    };
    let full = solve(n_exp)?;
    let reduced = solve(n_exp - 1)?;
    let err = (full - reduced).abs() + 10.0 * acc_err;
    Ok(QuadResult {
        value: full,
        abs_err_estimate: err,
        converged: all_converged && err <= tol,
        evaluations: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let f = Integrand::new(|p| p * p);
        let r = integrate_finite(&f, 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn removable_point_inside_interval() {
        let f =
            Integrand::new(|p: f64| (PI * p / 2.0).cos().powi(2) / (p * p - 1.0)).singular_at(1.0);
        let r = integrate_finite(&f, 0.0, 2.0, 1e-10).unwrap();
        assert!(r.value.is_finite());
        assert!(r.converged);
    }

    #[test]
    fn nan_names_the_abscissa() {
        let f = Integrand::new(|p: f64| if p > 0.5 { f64::NAN } else { 1.0 });
        match integrate_finite(&f, 0.0, 1.0, 1e-8) {
            Err(Error::NonFiniteIntegrand { abscissa }) => assert!(abscissa > 0.5),
            other => panic!("expected NaN error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_intervals_and_tolerances() {
        let f = Integrand::new(|p| p);
        assert!(integrate_finite(&f, 1.0, 0.0, 1e-8).is_err());
        assert!(integrate_finite(&f, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn exponential_tail() {
        let f = Integrand::new(|p: f64| (-p).exp()).decay(f64::NEG_INFINITY);
        let r = integrate_semi_infinite(&f, 0.0, 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn slow_power_tail_without_period() {
        // ∫_1^∞ p^-1.5 dp = 2
        let f = Integrand::new(|p: f64| p.powf(-1.5)).decay(-1.5);
        let r = integrate_semi_infinite(&f, 1.0, 1e-10).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn non_integrable_envelope_rejected() {
        let f = Integrand::new(|p: f64| 1.0 / (1.0 + p)).decay(-1.0);
        assert!(integrate_semi_infinite(&f, 0.0, 1e-8).is_err());
        let g = Integrand::new(|p: f64| 1.0 / (1.0 + p));
        assert!(integrate_semi_infinite(&g, 0.0, 1e-8).is_err());
    }

    #[test]
    fn alternating_tail_uses_euler() {
        // ∫_0^∞ sin(p)/p dp = π/2
        let f = Integrand::new(|p: f64| if p == 0.0 { 1.0 } else { p.sin() / p })
            .period(2.0 * PI)
            .decay(-1.0);
        let r = integrate_semi_infinite(&f, 0.0, 1e-10).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn principal_value_pair_vanishes() {
        let f = Integrand::new(|p: f64| {
            let c = (PI * (1.0 - p) / 2.0).sin();
            c * c / (p * p - 1.0)
        })
        .singular_at_with_limit(1.0, 0.0)
        .decay(-2.0)
        .period(2.0);
        let r = integrate_semi_infinite(&f, 0.0, 1e-10).unwrap();
        assert!(r.value.abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn unreachable_tolerance_spends_bounded_work() {
        let f = Integrand::new(|p: f64| p.sqrt() * (PI * p / 2.0).cos().powi(2) / (p * p - 1.0))
            .singular_at(1.0)
            .period(2.0)
            .decay(-1.5)
            .tail_step(2.0);
        let r = integrate_semi_infinite(&f, 0.0, 1e-17).unwrap();
        assert!(!r.converged);
        assert!(r.evaluations < 3 * EVAL_BUDGET, "{}", r.evaluations);
        let g = Integrand::new(|p: f64| (1.0 / p).sin());
        let r = integrate_finite(&g, 1e-9, 1.0, 1e-15).unwrap();
        assert!(!r.converged && r.evaluations <= EVAL_BUDGET + 30);
    }
}
