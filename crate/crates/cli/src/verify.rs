//! Closed-form pipeline against the covariance oracle.

use quench_core::oracles::{
    entropy_from_symplectic, reduced_symplectic, schedule_covariances, CovarianceOracle,
};
use quench_core::{entropy_series, ChainProtocol, TimeGrid};
use rayon::prelude::*;

use crate::config::Job;
use crate::error::{CliError, Result};
use crate::figures::{Curve, Figure};

pub const VERIFY_TOLERANCE: f64 = 1e-8;
pub const VERIFY_POINTS: usize = 1000;
pub const VERIFY_T_MAX: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub label: String,
    /// Max absolute deviation per Renyi order.
    pub max_by_alpha: Vec<(u32, f64)>,
}

impl Deviation {
    pub fn worst(&self) -> f64 {
        self.max_by_alpha
            .iter()
            .map(|(_, d)| *d)
            .fold(0.0, f64::max)
    }

    pub fn passes(&self) -> bool {
        self.worst() < VERIFY_TOLERANCE
    }
}

/// Curves of the first three figures.
pub fn reference_curves() -> Vec<Curve> {
    [Figure::Fig1, Figure::Fig2, Figure::Fig3]
        .into_iter()
        .flat_map(Figure::curves)
        .collect()
}

/// Oracle entropies for every grid point, one vector per order.
pub fn oracle_entropies(job: &Job) -> Result<Vec<Vec<f64>>> {
    let ctx = |e| CliError::numerical("oracle", e);
    let rows: Vec<Vec<f64>> = match &job.protocol {
        ChainProtocol::Sudden => {
            let oracle = CovarianceOracle::new(&job.spec).map_err(ctx)?;
            (0..job.grid.len())
                .into_par_iter()
                .map(|k| oracle.entropies(&job.partition, job.grid.time(k), &job.alphas))
                .collect::<quench_core::Result<_>>()
                .map_err(ctx)?
        }
        ChainProtocol::Schedule(ps) => schedule_covariances(&job.spec, ps, &job.grid)
            .map_err(ctx)?
            .par_iter()
            .map(|cov| {
                let nu = reduced_symplectic(cov, &job.partition)?;
                job.alphas
                    .iter()
                    .map(|&a| entropy_from_symplectic(&nu, a))
                    .collect()
            })
            .collect::<quench_core::Result<_>>()
            .map_err(ctx)?,
    };
    Ok((0..job.alphas.len())
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect())
}

pub fn deviation(label: &str, job: &Job) -> Result<Deviation> {
    let series = entropy_series(
        &job.spec,
        &job.protocol,
        &job.partition,
        &job.grid,
        &job.alphas,
    )
    .map_err(|e| CliError::numerical(label, e))?;
    let oracle = oracle_entropies(job)?;
    let max_by_alpha = job
        .alphas
        .iter()
        .zip(&oracle)
        .map(|(&a, o)| {
            let s = series.get(a).expect("requested order");
            let d = s
                .iter()
                .zip(o)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            (
                a,
                if s.iter().chain(o).all(|v| v.is_finite()) {
                    d
                } else {
                    f64::INFINITY
                },
            )
        })
        .collect();
    Ok(Deviation {
        label: label.to_string(),
        max_by_alpha,
    })
}

/// Deviations for every reference curve at the acceptance grid, `S_1` and `S_2`.
pub fn verify_reference() -> Result<Vec<Deviation>> {
    let grid = TimeGrid::with_points(VERIFY_T_MAX, VERIFY_POINTS)
        .map_err(|e| CliError::numerical("grid", e))?;
    reference_curves()
        .par_iter()
        .map(|c| {
            let mut job = c.config.job()?;
            job.grid = grid;
            job.alphas = vec![1, 2];
            deviation(&c.name, &job)
        })
        .collect()
}

pub fn report(devs: &[Deviation]) -> String {
    let mut out = String::new();
    for d in devs {
        let cols: Vec<String> = d
            .max_by_alpha
            .iter()
            .map(|(a, v)| format!("max|dS_{a}| = {v:.3e}"))
            .collect();
        let status = if d.passes() { "ok" } else { "FAIL" };
        out.push_str(&format!("{:<24} {}  {status}\n", d.label, cols.join("  ")));
    }
    out
}
