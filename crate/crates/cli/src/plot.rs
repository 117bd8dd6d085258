//! Deterministic gnuplot scripts for the CSV tables.

use std::path::Path;

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    /// f(alpha) curve from `f-alpha` or `audit-well` output.
    FAlpha,
    /// E_n against n from any spectrum table.
    Spectrum,
    /// Grid ground state overlaid on the cosine ansatz.
    GroundState,
}

pub fn script(table: &Path, kind: PlotKind, halfwidth: f64) -> String {
    let file = table
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let stem = table
        .file_stem()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key top left\n");
    s.push_str("set grid\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str(&format!("set output '{stem}.png'\n"));
    match kind {
        PlotKind::FAlpha => {
            s.push_str("set xlabel 'alpha'\nset ylabel 'f(alpha)'\n");
            s.push_str(&format!(
                "plot '{file}' using 1:2 skip 1 with linespoints title 'f'\n"
            ));
        }
        PlotKind::Spectrum => {
            s.push_str("set xlabel 'n'\nset ylabel 'E_n'\n");
            s.push_str(&format!(
                "plot '{file}' using 2:3 skip 1 with points pt 7 title columnhead(1)\n"
            ));
        }
        PlotKind::GroundState => {
            s.push_str("set xlabel 'x'\nset ylabel 'psi'\n");
            s.push_str(&format!("a = {halfwidth:?}\n"));
            // Cosine ansatz with the same unit L2 norm as the grid state.
            s.push_str("cosine(x) = abs(x) <= a ? cos(pi*x/(2*a))/sqrt(a) : 0\n");
            s.push_str(&format!(
                "plot '{file}' using 1:2 skip 1 with lines lw 2 title 'grid v0', cosine(x) with lines dt 2 title 'cosine ansatz'\n"
            ));
        }
    }
    s
}
