//! Parameter sets of the four preset figures.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use quench_core::analysis::fit_scaling;
use quench_core::EntropySeries;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::run::run;
use crate::table::ResultTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
}

pub const FIG1_TARGETS: [f64; 3] = [2.15, 2.06, 2.01];
pub const FIG2_TARGETS: [f64; 3] = [0.3, 0.1, 0.01];
pub const FIG3_SIZES: [usize; 5] = [4, 6, 10, 16, 20];
/// Sizes expected to collapse onto a common `S_1 / ln N`.
pub const COLLAPSE_SIZES: [usize; 3] = [10, 16, 20];

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub name: String,
    pub label: String,
    pub config: RunConfig,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
        }
    }

    pub fn default_t_max(self) -> f64 {
        match self {
            Figure::Fig1 | Figure::Fig2 => 100.0,
            Figure::Fig3 | Figure::Fig4 => 200.0,
        }
    }

    /// One configuration per plotted curve, with the figure's default grid.
    pub fn curves(self) -> Vec<Curve> {
        let mut curves: Vec<Curve> = match self {
            Figure::Fig1 => FIG1_TARGETS
                .iter()
                .map(|&w| Curve {
                    name: format!("fig1_omega_bh_f_{w}"),
                    label: format!("omega_BH(f) = {w}"),
                    config: RunConfig::bose_hubbard(3.0, w, 2.0),
                })
                .collect(),
            Figure::Fig2 => FIG2_TARGETS
                .iter()
                .map(|&w| Curve {
                    name: format!("fig2_omega_f_{w}"),
                    label: format!("omega(f) = {w}"),
                    config: RunConfig::oscillator(4, (3.0, 2.0), (w, 2.5)),
                })
                .collect(),
            Figure::Fig3 | Figure::Fig4 => FIG3_SIZES
                .iter()
                .map(|&n| Curve {
                    name: format!("{}_n{n}", self.name()),
                    label: format!("N = {n}"),
                    config: RunConfig::oscillator(n, (3.0, 2.0), (0.01, 2.5)),
                })
                .collect(),
        };
        for c in &mut curves {
            c.config.entropy.alphas = vec![1, 2];
            c.config.time.t_max = self.default_t_max();
            c.config = c
                .config
                .clone()
                .normalized()
                .expect("figure configs are valid");
        }
        curves
    }
}

/// Figure curves with optional grid overrides.
pub fn figure_curves(fig: Figure, t_max: Option<f64>, dt: Option<f64>) -> Result<Vec<Curve>> {
    fig.curves()
        .into_iter()
        .map(|mut c| {
            c.config = c.config.with_time(t_max, dt)?;
            Ok(c)
        })
        .collect()
}

/// Computes every curve of a figure; tables are in curve order.
pub fn figure_tables(curves: &[Curve]) -> Result<Vec<ResultTable>> {
    curves.par_iter().map(|c| run(&c.config)).collect()
}

fn s1_series(table: &ResultTable) -> EntropySeries {
    let mut entropies = std::collections::BTreeMap::new();
    entropies.insert(1, table.column("S_1").expect("S_1 column"));
    EntropySeries {
        times: table.column("t").expect("t column"),
        spectra: Vec::new(),
        entropies,
    }
}

/// `S_1 / ln N` for every size plus the relative collapse spread over
/// [`COLLAPSE_SIZES`] and over all sizes.
pub fn ratio_table(curves: &[Curve], tables: &[ResultTable]) -> Result<ResultTable> {
    let sizes: Vec<usize> = curves
        .iter()
        .map(|c| c.config.model.n.unwrap_or(2))
        .collect();
    let series: Vec<EntropySeries> = tables.iter().map(s1_series).collect();
    let all: Vec<&EntropySeries> = series.iter().collect();
    let large: Vec<&EntropySeries> = sizes
        .iter()
        .zip(&series)
        .filter(|(n, _)| COLLAPSE_SIZES.contains(n))
        .map(|(_, s)| s)
        .collect();
    let large_sizes: Vec<usize> = sizes
        .iter()
        .copied()
        .filter(|n| COLLAPSE_SIZES.contains(n))
        .collect();
    let fit_all = fit_scaling(&sizes, &all).map_err(|e| CliError::numerical("fig4 ratio", e))?;
    let fit_large =
        fit_scaling(&large_sizes, &large).map_err(|e| CliError::numerical("fig4 ratio", e))?;

    let mut columns = vec!["t".to_string()];
    columns.extend(sizes.iter().map(|n| format!("ratio_n{n}")));
    columns.push("spread_large".into());
    columns.push("spread_all".into());
    let rows = (0..series[0].len())
        .map(|k| {
            let mut row = vec![series[0].times[k]];
            row.extend(
                sizes
                    .iter()
                    .zip(&series)
                    .map(|(&n, s)| s.s1().expect("S_1")[k] / (n as f64).ln()),
            );
            row.push(fit_large.relative_spread[k]);
            row.push(fit_all.relative_spread[k]);
            row
        })
        .collect();
    let names: Vec<&str> = curves.iter().map(|c| c.name.as_str()).collect();
    let echo = serde_json::json!({ "figure": "fig4", "derived_from": names, "sizes": sizes });
    Ok(ResultTable {
        config: echo.to_string(),
        columns,
        rows,
    })
}

fn gnuplot_script(fig: Figure, entries: &[(String, String, usize)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set terminal pngcairo size 900,600");
    let _ = writeln!(s, "set output '{}.png'", fig.name());
    let _ = writeln!(s, "set xlabel 't'");
    let ylabel = if fig == Figure::Fig4 {
        "S_1 / ln N"
    } else {
        "S_1"
    };
    let _ = writeln!(s, "set ylabel '{ylabel}'");
    let plots: Vec<String> = entries
        .iter()
        .map(|(file, label, col)| {
            format!("'{file}' skip 3 using 1:{col} with lines title '{label}'")
        })
        .collect();
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}

/// Writes one CSV per curve (plus the ratio table for fig4) and a gnuplot
/// script into `outdir`; returns the written paths.
pub fn write_figure(
    fig: Figure,
    outdir: &Path,
    t_max: Option<f64>,
    dt: Option<f64>,
) -> Result<Vec<PathBuf>> {
    let curves = figure_curves(fig, t_max, dt)?;
    let tables = figure_tables(&curves)?;
    std::fs::create_dir_all(outdir).map_err(|e| CliError::write(outdir, e))?;
    let mut written = Vec::new();
    let mut entries = Vec::new();
    for (curve, table) in curves.iter().zip(&tables) {
        let file = format!("{}.csv", curve.name);
        let path = outdir.join(&file);
        table.save(&path, curve.config.output.precision)?;
        let col = 1 + table.columns.iter().position(|c| c == "S_1").expect("S_1");
        entries.push((file, curve.label.clone(), col));
        written.push(path);
    }
    if fig == Figure::Fig4 {
        let ratio = ratio_table(&curves, &tables)?;
        let file = "fig4_ratio.csv".to_string();
        let path = outdir.join(&file);
        ratio.save(&path, crate::config::DEFAULT_PRECISION)?;
        written.push(path);
        entries = curves
            .iter()
            .enumerate()
            .map(|(i, c)| (file.clone(), c.label.clone(), i + 2))
            .collect();
    }
    let script = outdir.join(format!("{}.gp", fig.name()));
    std::fs::write(&script, gnuplot_script(fig, &entries))
        .map_err(|e| CliError::write(&script, e))?;
    written.push(script);
    Ok(written)
}
