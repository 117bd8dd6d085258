//! Airy function of the first kind, its derivative, their negative zeros,
//! and the Gamma function on the positive axis.
//!
//! Ai is evaluated three ways depending on the argument:
//!
//! * Maclaurin series on `[-4.5, 2]`;
//! * the large-|x| asymptotic expansions for `|x| >= 12`;
//! * in between, Taylor continuation of the Airy ODE `y'' = x y` from the
//!   asymptotic anchor at `±12`. On the positive axis the continuation runs
//!   toward smaller `x`, where the decaying solution grows, so it is stable.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Ai(0) = 3^(-2/3) / Γ(2/3)
pub const AI0: f64 = 0.355_028_053_887_817_239_260_063_186_004_183_176_397_979_174_199_177;
/// Ai'(0) = -3^(-1/3) / Γ(1/3)
pub const AIP0: f64 = -0.258_819_403_792_806_798_405_183_560_189_203_963_479_091_138_354_934;

const SERIES_NEG: f64 = -4.5;
const SERIES_POS: f64 = 2.0;
const ASYMPTOTIC: f64 = 12.0;
const MAX_STEP: f64 = 0.5;
/// Arguments beyond this magnitude are flagged.
pub const RANGE_LIMIT: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryValue {
    pub argument: f64,
    pub ai: f64,
    pub ai_prime: f64,
    /// Set when |x| exceeds [`RANGE_LIMIT`]; values may have underflowed.
    pub out_of_range: bool,
}

/// Taylor step of `y'' = x y` from `center` by `dt`, returning `(y, y')`.
fn taylor_step(center: f64, y0: f64, yp0: f64, dt: f64) -> (f64, f64) {
    // Coefficients of y(center + t) = sum a_n t^n satisfy
    // (n+2)(n+1) a_{n+2} = center a_n + a_{n-1}.
    let mut a_prev2 = 0.0; // a_{n-1}
    let mut a_prev = y0; // a_n at n = 0
    let mut a_cur = yp0; // a_{n+1}
    let mut y = y0 + yp0 * dt;
    let mut yp = yp0;
    let mut pow_n = dt; // dt^(n+1) for the term a_{n+1}
    let scale = y0.abs().max(yp0.abs()).max(f64::MIN_POSITIVE);
    let mut quiet = 0;
    for n in 0..400usize {
        // next coefficient a_{n+2}
        let a_next = (center * a_prev + a_prev2) / ((n as f64 + 2.0) * (n as f64 + 1.0));
        let pow_next = pow_n * dt; // dt^(n+2)
        let term = a_next * pow_next;
        let dterm = (n as f64 + 2.0) * a_next * pow_n;
        y += term;
        yp += dterm;
        if term.abs() <= 1e-18 * scale && dterm.abs() <= 1e-18 * scale {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
        a_prev2 = a_prev;
        a_prev = a_cur;
        a_cur = a_next;
        pow_n = pow_next;
    }
    (y, yp)
}

fn continue_to(mut x0: f64, mut y: f64, mut yp: f64, x: f64) -> (f64, f64) {
    let n = ((x - x0).abs() / MAX_STEP).ceil().max(1.0) as usize;
    let h = (x - x0) / n as f64;
    for _ in 0..n {
        (y, yp) = taylor_step(x0, y, yp, h);
        x0 += h;
    }
    (y, yp)
}

/// Coefficients u_k of the Airy asymptotic expansion, with v_k = -(6k+1)/(6k-1) u_k.
fn asymptotic_coefficients(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0; n];
    let mut v = vec![1.0; n];
    for k in 1..n {
        let kf = k as f64;
        u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        v[k] = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u[k];
    }
    (u, v)
}

/// Sums sum_k (-1)^k c_k / zeta^k up to the smallest term.
fn asym_sum(c: &[f64], zeta: f64, stride: usize, offset: usize) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut sign = 1.0;
    let mut k = offset;
    while k < c.len() {
        let term = c[k] / zeta.powi(k as i32);
        if term.abs() > last {
            break;
        }
        sum += sign * term;
        last = term.abs();
        if last < 1e-17 * sum.abs() {
            break;
        }
        sign = -sign;
        k += stride;
    }
    sum
}

fn asymptotic_positive(x: f64) -> (f64, f64) {
    let (u, v) = asymptotic_coefficients(40);
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let q = x.powf(0.25);
    let e = (-zeta).exp();
    let s_ai = asym_sum(&u, zeta, 1, 0);
    let s_aip = asym_sum(&v, zeta, 1, 0);
    (
        e / (2.0 * PI.sqrt() * q) * s_ai,
        -q * e / (2.0 * PI.sqrt()) * s_aip,
    )
}

fn asymptotic_negative(x: f64) -> (f64, f64) {
    let z = -x;
    let (u, v) = asymptotic_coefficients(40);
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let q = z.powf(0.25);
    let theta = zeta - PI / 4.0;
    let (s, c) = theta.sin_cos();
    let u_even = asym_sum(&u, zeta, 2, 0);
    let u_odd = asym_sum(&u, zeta, 2, 1);
    let v_even = asym_sum(&v, zeta, 2, 0);
    let v_odd = asym_sum(&v, zeta, 2, 1);
    let ai = (c * u_even + s * u_odd) / (PI.sqrt() * q);
    let aip = q / PI.sqrt() * (s * v_even - c * v_odd);
    (ai, aip)
}

/// Ai(x) and Ai'(x).
pub fn airy_ai(x: f64) -> AiryValue {
    let out_of_range = x.abs() > RANGE_LIMIT;
    let (ai, ai_prime) = if x.is_nan() {
        (f64::NAN, f64::NAN)
    } else if (SERIES_NEG..=SERIES_POS).contains(&x) {
        taylor_step(0.0, AI0, AIP0, x)
    } else if x >= ASYMPTOTIC {
        asymptotic_positive(x)
    } else if x <= -ASYMPTOTIC {
        asymptotic_negative(x)
    } else if x > 0.0 {
        let (y, yp) = asymptotic_positive(ASYMPTOTIC);
        continue_to(ASYMPTOTIC, y, yp, x)
    } else {
        let (y, yp) = asymptotic_negative(-ASYMPTOTIC);
        continue_to(-ASYMPTOTIC, y, yp, x)
    };
    AiryValue {
        argument: x,
        ai,
        ai_prime,
        out_of_range,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    AiZero,
    AiPrimeZero,
}

impl RootKind {
    fn name(self) -> &'static str {
        match self {
            RootKind::AiZero => "Ai",
            RootKind::AiPrimeZero => "Ai'",
        }
    }

    /// Position of the s-th root (1-based) in the merged sequence
    /// a'_1 > a_1 > a'_2 > a_2 > ...
    fn merged_index(self, s: usize) -> usize {
        match self {
            RootKind::AiPrimeZero => 2 * (s - 1),
            RootKind::AiZero => 2 * s - 1,
        }
    }

    fn value(self, x: f64) -> (f64, f64) {
        let v = airy_ai(x);
        match self {
            RootKind::AiZero => (v.ai, v.ai_prime),
            RootKind::AiPrimeZero => (v.ai_prime, x * v.ai),
        }
    }
}

/// First `count` negative zeros of Ai or Ai', indexed from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootTable {
    pub kind: RootKind,
    pub roots: Vec<f64>,
}

impl RootTable {
    /// The s-th root, 1-based.
    pub fn root(&self, s: usize) -> Option<f64> {
        s.checked_sub(1).and_then(|i| self.roots.get(i).copied())
    }
}

/// Leading-order asymptotic location of the merged n-th root:
/// -(3π/4 (n + 1/2))^(2/3); even n are Ai' zeros, odd n Ai zeros.
pub fn merged_asymptotic_root(n: f64) -> f64 {
    -(0.75 * PI * (n + 0.5)).powf(2.0 / 3.0)
}

pub fn airy_roots(kind: RootKind, count: usize) -> Result<RootTable> {
    if count == 0 {
        return invalid("root count must be at least 1");
    }
    let roots = (1..=count)
        .map(|s| polish_root(kind, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(RootTable { kind, roots })
}

fn polish_root(kind: RootKind, s: usize) -> Result<f64> {
    let fail = |detail: String| Error::RootPolish {
        kind: kind.name(),
        index: s,
        detail,
    };
    let n = kind.merged_index(s) as f64;
    // The merged asymptotic formula at half-integer offsets brackets the root.
    let mut hi = if n == 0.0 {
        0.0
    } else {
        merged_asymptotic_root(n - 0.5)
    };
    let mut lo = merged_asymptotic_root(n + 0.5);
    let g = |x: f64| kind.value(x).0;
    let (mut g_lo, g_hi) = (g(lo), g(hi));
    if g_lo * g_hi > 0.0 {
        return Err(fail(format!("no sign change on [{lo}, {hi}]")));
    }
    // Bisection down to a narrow bracket, then safeguarded Newton.
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm * g_lo > 0.0 {
            lo = mid;
            g_lo = gm;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..60 {
        let (val, slope) = kind.value(x);
        if val == 0.0 {
            break;
        }
        if val * g_lo > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - val / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - x).abs() <= 4.0 * f64::EPSILON * x.abs();
        x = next;
        if done {
            break;
        }
    }
    let residual = g(x).abs();
    if residual > 1e-10 {
        return Err(fail(format!("residual {residual:e} at x = {x}")));
    }
    Ok(x)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for x > 0 (Lanczos, g = 7).
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return invalid(format!(
            "gamma_fn needs a finite positive argument, got {x}"
        ));
    }
    if x < 0.5 {
        return Ok(gamma_fn(x + 1.0)? / x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    Ok((2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc)
}

/// Hurwitz zeta `ζ(s, q) = Σ_{k>=0} (q+k)^(-s)` for `s > 1`, `q > 0`
/// (Euler-Maclaurin with twelve explicit terms).
pub fn hurwitz_zeta(s: f64, q: f64) -> Result<f64> {
    if !(s > 1.0 && s.is_finite()) || !(q > 0.0 && q.is_finite()) {
        return invalid(format!(
            "hurwitz_zeta needs s > 1 and q > 0, got s = {s}, q = {q}"
        ));
    }
    // B_2j / (2j)!
    const B: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
        1.0 / 74724249600.0,
    ];
    const M: usize = 12;
    let mut sum: f64 = (0..M).map(|k| (q + k as f64).powf(-s)).sum();
    let w = q + M as f64;
    sum += w.powf(1.0 - s) / (s - 1.0) + 0.5 * w.powf(-s);
    // Rising factorial s (s+1) ... (s+2j-2) times w^(-s-2j+1).
    let mut term = s * w.powf(-s - 1.0);
    for (j, &b) in B.iter().enumerate() {
        sum += b * term;
        let k = 2.0 * j as f64;
        term *= (s + k + 1.0) * (s + k + 2.0) / (w * w);
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
        (a - b).abs() <= (rel * b.abs()).max(abs)
    }

    #[test]
    fn values_at_origin() {
        let v = airy_ai(0.0);
        let g23 = gamma_fn(2.0 / 3.0).unwrap();
        let g13 = gamma_fn(1.0 / 3.0).unwrap();
        assert!(close(v.ai, 3f64.powf(-2.0 / 3.0) / g23, 1e-13, 0.0));
        assert!(close(
            v.ai_prime,
            -(3f64.powf(-1.0 / 3.0)) / g13,
            1e-13,
            0.0
        ));
    }

    #[test]
    fn continuous_across_switchovers() {
        for &x0 in &[SERIES_NEG, SERIES_POS, ASYMPTOTIC, -ASYMPTOTIC] {
            let a = airy_ai(x0 - 1e-13);
            let b = airy_ai(x0 + 1e-13);
            assert!(close(a.ai, b.ai, 1e-10, 1e-13), "{x0}: {a:?} {b:?}");
            assert!(
                close(a.ai_prime, b.ai_prime, 1e-10, 1e-13),
                "{x0}: {a:?} {b:?}"
            );
        }
    }

    #[test]
    fn reference_values() {
        // 25-digit reference values
        let cases = [
            (1.0, 0.135_292_416_312_881_4, -0.159_147_441_296_793_2),
            (-1.0, 0.535_560_883_292_352_12, -0.010_160_567_116_645_209),
            (5.0, 1.083_444_281_360_744_2e-4, -2.474_138_908_684_624_8e-4),
            (-5.0, 0.350_761_009_024_114_32, 0.327_192_818_554_443_14),
            (
                10.0,
                1.104_753_255_289_868_6e-10,
                -3.520_633_676_738_923_6e-10,
            ),
            (-10.0, 0.040_241_238_486_443_191, 0.996_265_044_132_790_06),
        ];
        for (x, ai, aip) in cases {
            let v = airy_ai(x);
            assert!(close(v.ai, ai, 1e-10, 1e-13), "Ai({x}) = {} vs {ai}", v.ai);
            assert!(
                close(v.ai_prime, aip, 1e-10, 1e-13),
                "Ai'({x}) = {} vs {aip}",
                v.ai_prime
            );
        }
    }

    #[test]
    fn out_of_range_flagged() {
        let v = airy_ai(120.0);
        assert!(v.out_of_range);
        assert!(v.ai >= 0.0 && v.ai < 1e-300);
        assert!(!airy_ai(49.0).out_of_range);
    }

    #[test]
    fn first_roots() {
        let a = airy_roots(RootKind::AiZero, 1).unwrap();
        assert!((a.roots[0] + 2.338_107_410_459_767).abs() < 1e-10);
        let ap = airy_roots(RootKind::AiPrimeZero, 1).unwrap();
        assert!((ap.roots[0] + 1.018_792_971_647_471).abs() < 1e-10);
        assert_eq!(a.root(1), Some(a.roots[0]));
        assert_eq!(a.root(0), None);
    }

    #[test]
    fn zero_count_rejected() {
        assert!(airy_roots(RootKind::AiZero, 0).is_err());
    }

    #[test]
    fn gamma_closed_forms() {
        let sp = PI.sqrt();
        assert!(close(gamma_fn(1.5).unwrap(), sp / 2.0, 1e-13, 0.0));
        assert!(close(gamma_fn(2.0).unwrap(), 1.0, 1e-13, 0.0));
        assert!(close(gamma_fn(2.5).unwrap(), 0.75 * sp, 1e-13, 0.0));
        assert!(close(gamma_fn(0.5).unwrap(), sp, 1e-13, 0.0));
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
    }

    #[test]
    fn gamma_recurrence() {
        for &x in &[0.1, 0.5, 1.7, 3.3, 9.9] {
            let lhs = gamma_fn(x + 1.0).unwrap();
            let rhs = x * gamma_fn(x).unwrap();
            assert!(close(lhs, rhs, 1e-12, 0.0), "x = {x}");
        }
    }

    #[test]
    fn hurwitz_zeta_values() {
        let z = |s, q| hurwitz_zeta(s, q).unwrap();
        assert!(close(z(2.0, 1.0), PI * PI / 6.0, 1e-14, 0.0));
        assert!(close(z(2.0, 0.5), PI * PI / 2.0, 1e-14, 0.0));
        assert!(close(z(3.0, 1.0), 1.202_056_903_159_594_3, 1e-14, 0.0));
        assert!(close(z(1.5, 1.0), 2.612_375_348_685_488, 1e-14, 0.0));
        for &(s, q) in &[(1.25, 0.01), (1.9, 0.7), (2.75, 1.3), (4.5, 0.2)] {
            assert!(
                close(z(s, q), q.powf(-s) + z(s, q + 1.0), 1e-13, 0.0),
                "s = {s}, q = {q}"
            );
        }
        assert!(hurwitz_zeta(1.0, 1.0).is_err());
        assert!(hurwitz_zeta(2.0, 0.0).is_err());
    }
}
