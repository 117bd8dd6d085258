use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracq_core::grid::{
    build_hamiltonian, convergence_study, solve_eigen, Potential, DEFAULT_N_INTERIOR,
    DEFAULT_PADDING,
};
use fracq_core::io::{csv_table, sci, to_json, write_atomic};
use fracq_core::oscillator::{
    airy_spectrum, shoot_spectrum, wkb_numeric_spectrum, wkb_spectrum, Spectrum,
};
use fracq_core::quadrature::DEFAULT_TOL;
use fracq_core::riesz::{self, riesz_apply_with, Boundary, SampledFunction, Space, Symbol};
use fracq_core::well::{self, run_audit_with, AuditOptions, AUDIT_TOL};
use fracq_core::{Error, PhysParams};
use serde::Serialize;

use crate::plot::{self, PlotKind};

#[derive(Debug, Parser)]
#[command(
    name = "fracq",
    version,
    about = "Fractional Schrödinger equation toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Directory receiving the output tables.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(
        long,
        global = true,
        default_value_t = 0.5,
        allow_negative_numbers = true
    )]
    pub alpha: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub hbar: f64,
    /// Coefficient D_alpha of the kinetic term.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub d_alpha: f64,
    /// Well half-width a.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub halfwidth: f64,
    /// Oscillator spring constant k.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub spring: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WkbMethod {
    Closed,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PotentialArg {
    Well,
    Oscillator,
}

impl From<PotentialArg> for Potential {
    fn from(p: PotentialArg) -> Self {
        match p {
            PotentialArg::Well => Potential::Well,
            PotentialArg::Oscillator => Potential::Oscillator,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryArg {
    Periodic,
    WholeLine,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Audit the cosine ansatz for the infinite well over an alpha grid.
    AuditWell {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha_grid: Option<Vec<f64>>,
        /// Tolerance for "is zero" verdicts.
        #[arg(long, default_value_t = AUDIT_TOL)]
        audit_tol: f64,
    },
    /// Tabulate f(alpha) and its derivative.
    FAlpha {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha_grid: Option<Vec<f64>>,
    },
    /// Apply the Riesz derivative to the cosine ansatz on a padded grid.
    RieszApply {
        #[arg(long, default_value_t = riesz::DEFAULT_POINTS)]
        points: usize,
        /// Grid half-width in units of the well half-width.
        #[arg(long, default_value_t = riesz::DEFAULT_PADDING)]
        padding: f64,
        #[arg(long, value_enum, default_value_t = BoundaryArg::Periodic)]
        boundary: BoundaryArg,
    },
    /// Exact alpha = 1 oscillator spectrum from Airy zeros.
    AirySpectrum {
        #[arg(long, default_value_t = 5)]
        levels: usize,
    },
    /// Semiclassical oscillator spectrum.
    Wkb {
        #[arg(long, default_value_t = 5)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = WkbMethod::Closed)]
        method: WkbMethod,
    },
    /// Oscillator spectrum by momentum-space shooting.
    Shoot {
        #[arg(long, default_value_t = 5)]
        levels: usize,
    },
    /// Lowest eigenpairs of the discretized Hamiltonian.
    SolveGrid {
        #[arg(long, value_enum, default_value_t = PotentialArg::Well)]
        potential: PotentialArg,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, default_value_t = DEFAULT_N_INTERIOR)]
        n_interior: usize,
        #[arg(long, default_value_t = DEFAULT_PADDING)]
        padding: f64,
        /// Also write the Hamiltonian matrix.
        #[arg(long)]
        dump_matrix: bool,
    },
    /// Ground-state energy over resolutions and paddings.
    Converge {
        #[arg(long, value_enum, default_value_t = PotentialArg::Well)]
        potential: PotentialArg,
        #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
        resolutions: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
        paddings: Vec<f64>,
    },
    /// Write a gnuplot script for a table produced by another command.
    Plot {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
    },
}

#[derive(Debug)]
pub enum Failure {
    Domain(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_domain() {
            Failure::Domain(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

type Outcome = Result<Vec<PathBuf>, Failure>;

fn domain<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Domain(msg.into()))
}

impl Common {
    fn params(&self) -> Result<PhysParams, Failure> {
        let p = PhysParams::natural(self.alpha)
            .with_hbar(self.hbar)
            .with_d_alpha(self.d_alpha)
            .with_halfwidth(self.halfwidth)
            .with_spring(self.spring);
        p.validate()?;
        Ok(p)
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf, Failure> {
        let path = self.out.join(name);
        write_atomic(&path, contents)
            .map_err(|e| Failure::Domain(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }

    /// Writes `stem.csv` or `stem.json` depending on `--format`.
    fn emit<T: Serialize>(
        &self,
        stem: &str,
        value: &T,
        csv: impl FnOnce() -> String,
    ) -> Result<PathBuf, Failure> {
        match self.format {
            Format::Csv => self.write(&format!("{stem}.csv"), &csv()),
            Format::Json => self.write(&format!("{stem}.json"), &to_json(value)?),
        }
    }
}

fn default_alpha_grid() -> Vec<f64> {
    (1..=17).map(|k| -0.95 + 1.9 * k as f64 / 18.0).collect()
}

fn check_levels(levels: usize) -> Result<(), Failure> {
    if levels == 0 {
        return domain("--levels must be at least 1");
    }
    Ok(())
}

pub fn dispatch(cli: &Cli) -> Outcome {
    let c = &cli.common;
    if !(c.tol > 0.0 && c.tol.is_finite()) {
        return domain(format!("--tol must be positive, got {}", c.tol));
    }
    let params = c.params()?;
    match &cli.command {
        Command::AuditWell {
            alpha_grid,
            audit_tol,
        } => {
            let grid = alpha_grid.clone().unwrap_or_else(default_alpha_grid);
            let opts = AuditOptions {
                tol: *audit_tol,
                quad_tol: c.tol,
                ..AuditOptions::default()
            };
            let report = run_audit_with(&grid, &params, opts)?;
            Ok(vec![c.emit("audit", &report, || report.to_csv())?])
        }
        Command::FAlpha { alpha_grid } => {
            let grid = alpha_grid.clone().unwrap_or_else(|| vec![c.alpha]);
            let rows = f_table(&grid, c.tol)?;
            Ok(vec![c.emit("f_alpha", &rows, || {
                csv_table(
                    &["alpha", "f", "f_err", "df", "df_err"],
                    rows.iter().map(|r| {
                        vec![
                            sci(r.alpha),
                            sci(r.f),
                            sci(r.f_err),
                            sci(r.df),
                            sci(r.df_err),
                        ]
                    }),
                )
            })?])
        }
        Command::RieszApply {
            points,
            padding,
            boundary,
        } => {
            if padding.is_nan() || *padding <= 1.0 {
                return domain(format!("--padding must exceed 1, got {padding}"));
            }
            let psi = SampledFunction::from_real(
                Space::Position,
                padding * params.well_halfwidth,
                *points,
                |x| well::psi0(x, &params),
            )?;
            let b = match boundary {
                BoundaryArg::Periodic => Boundary::Periodic,
                BoundaryArg::WholeLine => Boundary::WholeLine,
            };
            let out = riesz_apply_with(&psi, &params, Symbol::Spectral, b)?;
            Ok(vec![c.write("riesz.csv", &riesz::to_csv(&out.function))?])
        }
        Command::AirySpectrum { levels } => {
            check_levels(*levels)?;
            let s = airy_spectrum(*levels, &params)?;
            Ok(vec![c.emit("spectrum_airy", &s, || s.spectrum.to_csv())?])
        }
        Command::Wkb { levels, method } => {
            check_levels(*levels)?;
            let s = match method {
                WkbMethod::Closed => wkb_spectrum(*levels, &params)?,
                WkbMethod::Numeric => wkb_numeric_spectrum(*levels, &params)?,
            };
            Ok(vec![emit_spectrum(c, "spectrum_wkb", &s)?])
        }
        Command::Shoot { levels } => {
            check_levels(*levels)?;
            let s = shoot_spectrum(*levels, &params)?;
            Ok(vec![emit_spectrum(c, "spectrum_shoot", &s)?])
        }
        Command::SolveGrid {
            potential,
            levels,
            n_interior,
            padding,
            dump_matrix,
        } => {
            check_levels(*levels)?;
            let h = build_hamiltonian((*potential).into(), &params, *n_interior, *padding)?;
            let r = solve_eigen(&h, *levels)?;
            let spectrum = r.spectrum(&params)?;
            let mut paths = vec![
                emit_spectrum(c, "spectrum_grid", &spectrum)?,
                c.emit("states_grid", &r, || r.states_csv())?,
            ];
            if *dump_matrix {
                paths.push(c.write("hamiltonian.csv", &h.to_csv())?);
            }
            Ok(paths)
        }
        Command::Converge {
            potential,
            resolutions,
            paddings,
        } => {
            let t = convergence_study((*potential).into(), &params, resolutions, paddings)?;
            let mut paths = vec![c.emit("convergence", &t, || t.to_csv())?];
            if c.format == Format::Csv {
                let summary = csv_table(
                    &["extrapolated", "observed_order", "padding_spread"],
                    [vec![
                        t.extrapolated.map(sci).unwrap_or_default(),
                        t.observed_order.map(sci).unwrap_or_default(),
                        sci(t.padding_spread),
                    ]],
                );
                paths.push(c.write("convergence_summary.csv", &summary)?);
            }
            Ok(paths)
        }
        Command::Plot { table, kind } => Ok(vec![emit_plot(c, table, *kind)?]),
    }
}

fn emit_spectrum(c: &Common, stem: &str, s: &Spectrum) -> Result<PathBuf, Failure> {
    c.emit(stem, s, || s.to_csv())
}

#[derive(Debug, Serialize)]
struct FRow {
    alpha: f64,
    f: f64,
    f_err: f64,
    df: f64,
    df_err: f64,
}

fn f_table(grid: &[f64], tol: f64) -> Result<Vec<FRow>, Failure> {
    use rayon::prelude::*;
    if grid.is_empty() {
        return domain("--alpha-grid must not be empty");
    }
    grid.par_iter()
        .map(|&alpha| {
            let f = well::f_of_alpha_tol(alpha, tol)?;
            let df = well::df_dalpha_tol(alpha, tol)?;
            for (what, r) in [("f(alpha)", &f), ("df/dalpha", &df)] {
                if !r.converged {
                    return Err(Failure::Numerical(format!(
                        "{what} at alpha = {alpha} did not reach tolerance {tol:e} (estimate {:e})",
                        r.abs_err_estimate
                    )));
                }
            }
            Ok(FRow {
                alpha,
                f: f.value,
                f_err: f.abs_err_estimate,
                df: df.value,
                df_err: df.abs_err_estimate,
            })
        })
        .collect()
}

fn emit_plot(c: &Common, table: &Path, kind: PlotKind) -> Result<PathBuf, Failure> {
    if !table.is_file() {
        return domain(format!("table {} does not exist", table.display()));
    }
    let script = plot::script(table, kind, c.halfwidth);
    let stem = table
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "table".into());
    let path = table.with_file_name(format!("{stem}.gp"));
    write_atomic(&path, &script)
        .map_err(|e| Failure::Domain(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}
