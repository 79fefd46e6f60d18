use quench_core::entropy_series;

use crate::config::{Job, RunConfig};
use crate::error::{CliError, Result};
use crate::table::ResultTable;

pub fn run_job(job: &Job, config_echo: String) -> Result<ResultTable> {
    let series = entropy_series(
        &job.spec,
        &job.protocol,
        &job.partition,
        &job.grid,
        &job.alphas,
    )
    .map_err(|e| CliError::numerical("model", e))?;
    let m = job.partition.kept().len();
    let mut columns = vec!["t".to_string()];
    columns.extend((1..=m).map(|j| format!("xi_{j}")));
    columns.extend(job.alphas.iter().map(|a| format!("S_{a}")));
    let mut rows = Vec::with_capacity(series.len());
    for (k, &t) in series.times.iter().enumerate() {
        let mut row = Vec::with_capacity(columns.len());
        row.push(t);
        row.extend_from_slice(&series.spectra[k].xi);
        for a in &job.alphas {
            row.push(series.get(*a).expect("requested order")[k]);
        }
        if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
            return Err(CliError::numerical(
                format!("row at t = {t}"),
                quench_core::Error::InconsistentSeries(format!("non-finite value {bad}")),
            ));
        }
        rows.push(row);
    }
    Ok(ResultTable {
        config: config_echo,
        columns,
        rows,
    })
}

/// Runs a validated configuration.
pub fn run(config: &RunConfig) -> Result<ResultTable> {
    run_job(&config.job()?, config.canonical_json())
}
