//! Cartesian sweeps over configuration keys.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde_json::Value;

use crate::config::{parse_value, RunConfig};
use crate::error::{CliError, Result};
use crate::run::run;

/// `key=v1,v2,..` with a dotted key such as `model.omega_f`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepParam {
    pub key: String,
    pub values: Vec<Value>,
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (key, list) = s
            .split_once('=')
            .ok_or_else(|| format!("expected key=v1,v2,.. in `{s}`"))?;
        let key = key.trim();
        if key.is_empty() || key.split('.').any(str::is_empty) {
            return Err(format!("malformed key `{key}`"));
        }
        let values: Vec<Value> = list
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(|v| serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string())))
            .collect();
        if values.is_empty() {
            return Err(format!("no values for `{key}`"));
        }
        Ok(Self {
            key: key.to_string(),
            values,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    /// `(key, value)` in sorted key order.
    pub assignments: Vec<(String, Value)>,
    pub config: RunConfig,
}

fn set_path(doc: &mut Value, key: &str, value: Value) -> Result<()> {
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node.as_object_mut().ok_or_else(|| {
            CliError::config(
                parts[..i].join("."),
                "cannot sweep inside a non-object value",
            )
        })?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("keys have at least one part")
}

/// Every combination of the parameter values. Keys are visited in sorted
/// order with the last key varying fastest.
pub fn sweep_points(
    base: &Value,
    params: &[SweepParam],
    t_max: Option<f64>,
    dt: Option<f64>,
) -> Result<Vec<SweepPoint>> {
    let mut grid: BTreeMap<&str, &[Value]> = BTreeMap::new();
    for p in params {
        if grid.insert(&p.key, &p.values).is_some() {
            return Err(CliError::config(&p.key, "swept more than once"));
        }
    }
    let axes: Vec<(&str, &[Value])> = grid.into_iter().collect();
    let total: usize = axes.iter().map(|(_, v)| v.len()).product();
    (0..total)
        .map(|index| {
            let mut rest = index;
            let mut assignments = vec![(String::new(), Value::Null); axes.len()];
            for (slot, (key, values)) in assignments.iter_mut().zip(&axes).rev() {
                *slot = (key.to_string(), values[rest % values.len()].clone());
                rest /= values.len();
            }
            let mut doc = base.clone();
            for (k, v) in &assignments {
                set_path(&mut doc, k, v.clone())?;
            }
            let config = parse_value(doc)?.with_time(t_max, dt)?;
            Ok(SweepPoint {
                index,
                assignments,
                config,
            })
        })
        .collect()
}

/// Runs all points in parallel and writes `point_NNNN.csv` files plus an
/// `index.csv` mapping point numbers to parameter values.
pub fn run_sweep(points: &[SweepPoint], outdir: &Path) -> Result<Vec<PathBuf>> {
    let tables = points
        .par_iter()
        .map(|p| run(&p.config))
        .collect::<Result<Vec<_>>>()?;
    std::fs::create_dir_all(outdir).map_err(|e| CliError::write(outdir, e))?;
    let mut written = Vec::with_capacity(points.len() + 1);
    let mut index = String::from("point");
    if let Some(first) = points.first() {
        for (k, _) in &first.assignments {
            index.push(',');
            index.push_str(k);
        }
    }
    index.push('\n');
    for (p, table) in points.iter().zip(&tables) {
        let name = format!("point_{:04}.csv", p.index);
        let path = outdir.join(&name);
        table.save(&path, p.config.output.precision)?;
        written.push(path);
        let _ = write!(index, "{:04}", p.index);
        for (_, v) in &p.assignments {
            let _ = write!(index, ",{v}");
        }
        index.push('\n');
    }
    let path = outdir.join("index.csv");
    std::fs::write(&path, index).map_err(|e| CliError::write(&path, e))?;
    written.push(path);
    Ok(written)
}
