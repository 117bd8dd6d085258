//! Dense eigen-decomposition of the fractional Hamiltonian restricted to a
//! bounded interior.
//!
//! The whole-line Riesz operator is applied to each interior delta on a
//! padded grid and read back on the interior, so the exterior is identically
//! zero. This is the restriction of the nonlocal operator, not a fractional
//! power of the Dirichlet Laplacian.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::io::{csv_table, sci};
use crate::oscillator::{Level, Method, Spectrum};
use crate::params::PhysParams;
use crate::riesz::{Boundary, RieszOperator, Symbol};
use crate::well::fit_defect;

pub const DEFAULT_N_INTERIOR: usize = 256;
pub const DEFAULT_PADDING: f64 = 16.0;
/// Half-width of the oscillator box in natural units.
pub const DEFAULT_BOX: f64 = 10.0;
/// Largest accepted `‖Hv - Ev‖ / ‖v‖`.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Potential {
    Well,
    Oscillator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    pub symbol: Symbol,
    pub boundary: Boundary,
    /// Half-width of the interior; defaults to `a` for the well and
    /// [`DEFAULT_BOX`] for the oscillator.
    pub halfwidth: Option<f64>,
}

impl GridOptions {
    /// Lattice symbol for the well (exact three-point stencil at α = 2),
    /// continuum symbol for the oscillator; whole-line exterior for both.
    pub fn for_potential(tag: Potential) -> Self {
        GridOptions {
            symbol: match tag {
                Potential::Well => Symbol::Lattice,
                Potential::Oscillator => Symbol::Spectral,
            },
            boundary: Boundary::WholeLine,
            halfwidth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteHamiltonian {
    pub potential: Potential,
    pub params: PhysParams,
    pub n_interior: usize,
    pub padding: f64,
    pub spacing: f64,
    /// Interior abscissae `-X + (i+1) h`, `h = 2X/(n+1)`.
    pub grid: Vec<f64>,
    pub matrix: DMatrix<f64>,
}

impl DiscreteHamiltonian {
    pub fn asymmetry(&self) -> f64 {
        let m = &self.matrix;
        let n = m.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        worst
    }

    /// Largest deviation from a constant-diagonal structure.
    pub fn toeplitz_defect(&self) -> f64 {
        let m = &self.matrix;
        let n = m.nrows();
        let mut worst: f64 = 0.0;
        for i in 1..n {
            for j in 1..n {
                worst = worst.max((m[(i, j)] - m[(i - 1, j - 1)]).abs());
            }
        }
        worst
    }

    pub fn rayleigh_quotient(&self, v: &[f64]) -> f64 {
        let v = DVector::from_column_slice(v);
        let hv = &self.matrix * &v;
        v.dot(&hv) / v.dot(&v)
    }

    /// Full matrix as CSV rows, for external inspection.
    pub fn to_csv(&self) -> String {
        let n = self.n_interior;
        let mut out = String::from("x");
        for j in 0..n {
            out.push_str(&format!(",c{j}"));
        }
        out.push('\n');
        for i in 0..n {
            out.push_str(&sci(self.grid[i]));
            for j in 0..n {
                out.push(',');
                out.push_str(&sci(self.matrix[(i, j)]));
            }
            out.push('\n');
        }
        out
    }
}

pub fn build_hamiltonian(
    potential: Potential,
    params: &PhysParams,
    n_interior: usize,
    padding: f64,
) -> Result<DiscreteHamiltonian> {
    build_hamiltonian_with(
        potential,
        params,
        n_interior,
        padding,
        GridOptions::for_potential(potential),
    )
}

pub fn build_hamiltonian_with(
    potential: Potential,
    params: &PhysParams,
    n_interior: usize,
    padding: f64,
    opts: GridOptions,
) -> Result<DiscreteHamiltonian> {
    params.validate()?;
    let alpha = params.alpha;
    if !(0.0..=2.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange {
            alpha,
            window: "[0, 2] for the grid solver",
        });
    }
    if n_interior < 16 {
        return invalid(format!("n_interior must be at least 16, got {n_interior}"));
    }
    if !(padding >= 4.0 && padding.is_finite()) {
        return invalid(format!(
            "padding must be at least 4, got {padding}; periodization error dominates below that"
        ));
    }
    let x_half = match (opts.halfwidth, potential) {
        (Some(w), _) if w > 0.0 && w.is_finite() => w,
        (Some(w), _) => return invalid(format!("interior half-width must be positive, got {w}")),
        (None, Potential::Well) => params.well_halfwidth,
        (None, Potential::Oscillator) => DEFAULT_BOX,
    };
    let h = 2.0 * x_half / (n_interior + 1) as f64;
    // Padded grid -L + j h with the walls at j = m and j = m + n + 1.
    let m = ((padding - 1.0) * x_half / h).ceil() as usize;
    let n_big = n_interior + 1 + 2 * m;
    let big_half = 0.5 * n_big as f64 * h;
    let op = RieszOperator::with_boundary(n_big, big_half, params, opts.symbol, opts.boundary)?;

    let columns: Vec<Vec<f64>> = (0..n_interior)
        .into_par_iter()
        .map(|i| {
            let mut buf = vec![Complex64::new(0.0, 0.0); n_big];
            buf[m + 1 + i] = Complex64::new(1.0, 0.0);
            op.apply_in_place(&mut buf);
            (0..n_interior)
                .map(|k| params.d_alpha * buf[m + 1 + k].re)
                .collect()
        })
        .collect();
    let grid: Vec<f64> = (0..n_interior)
        .map(|i| -x_half + (i + 1) as f64 * h)
        .collect();
    let mut matrix = DMatrix::from_fn(n_interior, n_interior, |k, i| columns[i][k]);
    if potential == Potential::Oscillator {
        for (i, &x) in grid.iter().enumerate() {
            matrix[(i, i)] += 0.5 * params.spring_k * x * x;
        }
    }
    Ok(DiscreteHamiltonian {
        potential,
        params: *params,
        n_interior,
        padding,
        spacing: h,
        grid,
        matrix,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub energies: Vec<f64>,
    /// Eigenvectors sampled on `grid`, scaled so that `h Σ v² = 1`.
    pub states: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub grid: Vec<f64>,
}

impl EigenResult {
    pub fn spectrum(&self, params: &PhysParams) -> Result<Spectrum> {
        let levels = self
            .energies
            .iter()
            .zip(&self.residuals)
            .enumerate()
            .map(|(n, (&energy, &r))| Level {
                n,
                energy,
                accuracy: Some(r),
            })
            .collect();
        Spectrum::new(Method::Grid, levels, *params)
    }

    /// Overlap `|<v0, c>| / (|v0| |c|)` and proportionality defect of the
    /// ground state against `cos(pi x / 2a)`.
    pub fn cosine_comparison(&self, halfwidth: f64) -> (f64, f64) {
        let v = &self.states[0];
        let c: Vec<f64> = self
            .grid
            .iter()
            .map(|x| (0.5 * std::f64::consts::PI * x / halfwidth).cos())
            .collect();
        let dot: f64 = v.iter().zip(&c).map(|(a, b)| a * b).sum();
        let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let nc: f64 = c.iter().map(|a| a * a).sum::<f64>().sqrt();
        (dot.abs() / (nv * nc), fit_defect(v, &c).defect)
    }

    /// `x,v0,v1,...` rows.
    pub fn states_csv(&self) -> String {
        let mut header = vec!["x".to_string()];
        header.extend((0..self.states.len()).map(|k| format!("v{k}")));
        let refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
        csv_table(
            &refs,
            self.grid.iter().enumerate().map(|(i, &x)| {
                let mut row = vec![sci(x)];
                row.extend(self.states.iter().map(|v| sci(v[i])));
                row
            }),
        )
    }
}

/// Lowest `count` eigenpairs by dense symmetric decomposition.
pub fn solve_eigen(h: &DiscreteHamiltonian, count: usize) -> Result<EigenResult> {
    if count == 0 || count > h.n_interior {
        return invalid(format!(
            "count must lie in 1..={}, got {count}",
            h.n_interior
        ));
    }
    let eig = SymmetricEigen::try_new(h.matrix.clone(), f64::EPSILON, 10_000).ok_or_else(|| {
        Error::NonConvergence {
            what: "symmetric eigensolver",
            detail: "iteration budget exhausted".into(),
        }
    })?;
    let mut order: Vec<usize> = (0..h.n_interior).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let norm = h.spacing.sqrt();
    let mut energies = Vec::with_capacity(count);
    let mut states = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    for &k in order.iter().take(count) {
        let e = eig.eigenvalues[k];
        let v = eig.eigenvectors.column(k).into_owned();
        let r = (&h.matrix * &v - &v * e).norm() / v.norm();
        if r > RESIDUAL_TOL {
            return Err(Error::NonConvergence {
                what: "symmetric eigensolver",
                detail: format!("residual {r:e} for eigenvalue {e}"),
            });
        }
        // Sign fixed by the first component within 1e-8 of the peak.
        let peak = v.amax();
        let lead = v
            .iter()
            .find(|c| c.abs() >= peak * (1.0 - 1e-8))
            .copied()
            .unwrap_or(1.0);
        let s = lead.signum() / (norm * v.norm());
        energies.push(e);
        states.push(v.iter().map(|c| c * s).collect());
        residuals.push(r);
    }
    Ok(EigenResult {
        energies,
        states,
        residuals,
        grid: h.grid.clone(),
    })
}

/// Sign changes of a sampled state, ignoring components below `1e-9` of its peak.
pub fn count_nodes(v: &[f64]) -> usize {
    let peak = v.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let mut last = 0.0;
    let mut nodes = 0;
    for &c in v {
        if c.abs() <= 1e-9 * peak {
            continue;
        }
        if last != 0.0 && c.signum() != last {
            nodes += 1;
        }
        last = c.signum();
    }
    nodes
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_interior: usize,
    pub padding: f64,
    pub spacing: f64,
    pub e0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub potential: Potential,
    pub params: PhysParams,
    pub rows: Vec<ConvergenceRow>,
    /// Richardson limit from the three finest resolutions at the largest padding.
    pub extrapolated: Option<f64>,
    /// Observed order in the grid spacing.
    pub observed_order: Option<f64>,
    /// Spread of E₀ over the paddings at the finest resolution.
    pub padding_spread: f64,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        csv_table(
            &["n_interior", "padding", "h", "E0"],
            self.rows.iter().map(|r| {
                vec![
                    r.n_interior.to_string(),
                    sci(r.padding),
                    sci(r.spacing),
                    sci(r.e0),
                ]
            }),
        )
    }

    /// E₀ along the resolutions at the largest padding, coarse to fine.
    pub fn finest_padding_sequence(&self) -> Vec<ConvergenceRow> {
        let pad = self.rows.iter().map(|r| r.padding).fold(f64::MIN, f64::max);
        let mut seq: Vec<ConvergenceRow> = self
            .rows
            .iter()
            .copied()
            .filter(|r| r.padding == pad)
            .collect();
        seq.sort_by(|a, b| b.spacing.total_cmp(&a.spacing));
        seq
    }
}

pub fn convergence_study(
    potential: Potential,
    params: &PhysParams,
    resolutions: &[usize],
    paddings: &[f64],
) -> Result<ConvergenceTable> {
    convergence_study_with(
        potential,
        params,
        resolutions,
        paddings,
        GridOptions::for_potential(potential),
    )
}

pub fn convergence_study_with(
    potential: Potential,
    params: &PhysParams,
    resolutions: &[usize],
    paddings: &[f64],
    opts: GridOptions,
) -> Result<ConvergenceTable> {
    if resolutions.is_empty() || paddings.is_empty() {
        return invalid("resolutions and paddings must be nonempty");
    }
    let mut rows = Vec::with_capacity(resolutions.len() * paddings.len());
    for &n in resolutions {
        for &pad in paddings {
            let h = build_hamiltonian_with(potential, params, n, pad, opts)?;
            let e0 = solve_eigen(&h, 1)?.energies[0];
            rows.push(ConvergenceRow {
                n_interior: n,
                padding: pad,
                spacing: h.spacing,
                e0,
            });
        }
    }
    let mut table = ConvergenceTable {
        potential,
        params: *params,
        rows,
        extrapolated: None,
        observed_order: None,
        padding_spread: 0.0,
    };
    let seq = table.finest_padding_sequence();
    if seq.len() >= 3 {
        let t = &seq[seq.len() - 3..];
        if let Some((limit, order)) = richardson(
            [t[0].spacing, t[1].spacing, t[2].spacing],
            [t[0].e0, t[1].e0, t[2].e0],
        ) {
            table.extrapolated = Some(limit);
            table.observed_order = Some(order);
        }
    }
    let finest = table
        .rows
        .iter()
        .map(|r| r.spacing)
        .fold(f64::INFINITY, f64::min);
    let at_finest: Vec<f64> = table
        .rows
        .iter()
        .filter(|r| r.spacing == finest)
        .map(|r| r.e0)
        .collect();
    table.padding_spread = at_finest.iter().copied().fold(f64::MIN, f64::max)
        - at_finest.iter().copied().fold(f64::MAX, f64::min);
    Ok(table)
}

/// Fits `E(h) = E∞ + C h^p` through three points; returns `(E∞, p)`.
pub fn richardson(h: [f64; 3], e: [f64; 3]) -> Option<(f64, f64)> {
    let d1 = e[0] - e[1];
    let d2 = e[1] - e[2];
    if d1 == 0.0 || d2 == 0.0 || d1.signum() != d2.signum() {
        return None;
    }
    let target = d1 / d2;
    let ratio = |p: f64| (h[0].powf(p) - h[1].powf(p)) / (h[1].powf(p) - h[2].powf(p));
    let (mut lo, mut hi) = (1e-3, 12.0);
    if (ratio(lo) - target) * (ratio(hi) - target) > 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (ratio(lo) - target) * (ratio(mid) - target) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    let limit = e[2] - d2 * h[2].powf(p) / (h[1].powf(p) - h[2].powf(p));
    Some((limit, p))
}
