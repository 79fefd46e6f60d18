//! Run configuration: a JSON document with blocks `model`, `quench`,
//! `partition`, `time`, `entropy` and `output`.

use std::path::Path;

use quench_core::bose_hubbard::BoseHubbardSpec;
use quench_core::entanglement::ParameterSchedule;
use quench_core::ermakov::Interpolation;
use quench_core::{Boundary, ChainProtocol, ChainSpec, Partition, TimeGrid};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_T_MAX: f64 = 100.0;
pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_PRECISION: usize = 12;
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub quench: QuenchConfig,
    #[serde(default)]
    pub partition: PartitionConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub entropy: EntropyConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Oscillator,
    BoseHubbard,
}

/// Oscillator mode uses `n`, `boundary`, `omega_i`, `k_i`, `omega_f`, `k_f`;
/// Bose-Hubbard mode uses `omega_bh_i`, `omega_bh_f`, `hopping` and is always
/// an open pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Boundary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_i: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_i: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_bh_i: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_bh_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hopping: Option<f64>,
}

impl ModelConfig {
    pub fn oscillator(n: usize, (omega_i, k_i): (f64, f64), (omega_f, k_f): (f64, f64)) -> Self {
        Self {
            mode: Mode::Oscillator,
            n: Some(n),
            boundary: Some(Boundary::Periodic),
            omega_i: Some(omega_i),
            k_i: Some(k_i),
            omega_f: Some(omega_f),
            k_f: Some(k_f),
            omega_bh_i: None,
            omega_bh_f: None,
            hopping: None,
        }
    }

    pub fn bose_hubbard(omega_bh_i: f64, omega_bh_f: f64, hopping: f64) -> Self {
        Self {
            mode: Mode::BoseHubbard,
            n: None,
            boundary: None,
            omega_i: None,
            k_i: None,
            omega_f: None,
            k_f: None,
            omega_bh_i: Some(omega_bh_i),
            omega_bh_f: Some(omega_bh_f),
            hopping: Some(hopping),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuenchKind {
    #[default]
    Sudden,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolationConfig {
    #[default]
    PiecewiseConstant,
    Linear,
}

impl From<InterpolationConfig> for Interpolation {
    fn from(i: InterpolationConfig) -> Self {
        match i {
            InterpolationConfig::PiecewiseConstant => Interpolation::PiecewiseConstant,
            InterpolationConfig::Linear => Interpolation::Linear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleRow {
    pub t: f64,
    pub omega: f64,
    pub k: f64,
}

/// `sudden` jumps to the model's post-quench values; `general` follows
/// `table` (oscillator mode only).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuenchConfig {
    #[serde(default)]
    pub kind: QuenchKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interpolation: Option<InterpolationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<ScheduleRow>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Traced {
    /// Only `"second_half"` is accepted.
    Named(String),
    /// 1-based site numbers.
    Sites(Vec<usize>),
}

impl Default for Traced {
    fn default() -> Self {
        Self::Named("second_half".into())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    #[serde(default)]
    pub traced: Traced,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            t_max: DEFAULT_T_MAX,
            dt: DEFAULT_DT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyConfig {
    /// Renyi orders; 1 is von Neumann.
    #[serde(default = "default_alphas")]
    pub alphas: Vec<u32>,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        Self {
            alphas: default_alphas(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Significant digits per CSV field.
    #[serde(default = "default_precision")]
    pub precision: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            path: None,
            precision: DEFAULT_PRECISION,
        }
    }
}

fn default_t_max() -> f64 {
    DEFAULT_T_MAX
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_alphas() -> Vec<u32> {
    vec![1]
}

fn default_precision() -> usize {
    DEFAULT_PRECISION
}

/// Everything needed to compute one entropy table.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub spec: ChainSpec,
    pub protocol: ChainProtocol,
    pub partition: Partition,
    pub grid: TimeGrid,
    pub alphas: Vec<u32>,
}

/// Parses and validates a JSON document; the returned config has its
/// defaults filled in.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(path, e.into_inner().to_string())
    })?;
    config.normalized()
}

pub fn parse_value(value: serde_json::Value) -> Result<RunConfig> {
    let config: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(path, e.into_inner().to_string())
    })?;
    config.normalized()
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Read {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}

fn require(value: Option<f64>, path: &str) -> Result<f64> {
    match value {
        Some(v) if v.is_finite() => Ok(v),
        Some(v) => Err(CliError::config(path, format!("must be finite, got {v}"))),
        None => Err(CliError::config(path, "missing required key")),
    }
}

fn forbid<T>(value: &Option<T>, path: &str, why: &str) -> Result<()> {
    match value {
        Some(_) => Err(CliError::config(path, why)),
        None => Ok(()),
    }
}

impl RunConfig {
    pub fn oscillator(n: usize, pre: (f64, f64), post: (f64, f64)) -> Self {
        Self::with_model(ModelConfig::oscillator(n, pre, post))
    }

    pub fn bose_hubbard(omega_bh_i: f64, omega_bh_f: f64, hopping: f64) -> Self {
        Self::with_model(ModelConfig::bose_hubbard(omega_bh_i, omega_bh_f, hopping))
    }

    fn with_model(model: ModelConfig) -> Self {
        Self {
            model,
            quench: QuenchConfig::default(),
            partition: PartitionConfig::default(),
            time: TimeConfig::default(),
            entropy: EntropyConfig::default(),
            output: OutputConfig::default(),
        }
    }

    /// Applies command-line time overrides and revalidates.
    pub fn with_time(mut self, t_max: Option<f64>, dt: Option<f64>) -> Result<Self> {
        if let Some(t) = t_max {
            self.time.t_max = t;
        }
        if let Some(d) = dt {
            self.time.dt = d;
        }
        self.normalized()
    }

    /// Fills defaults that depend on other fields and validates the result.
    pub fn normalized(mut self) -> Result<Self> {
        if self.model.mode == Mode::Oscillator && self.model.boundary.is_none() {
            self.model.boundary = Some(Boundary::Periodic);
        }
        if self.quench.kind == QuenchKind::General {
            self.quench
                .interpolation
                .get_or_insert(InterpolationConfig::default());
            self.quench.tolerance.get_or_insert(DEFAULT_TOLERANCE);
        }
        self.job()?;
        Ok(self)
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    fn chain_spec(&self) -> Result<ChainSpec> {
        let m = &self.model;
        let general = self.quench.kind == QuenchKind::General;
        match m.mode {
            Mode::Oscillator => {
                let bh = "belongs to bose_hubbard mode";
                forbid(&m.omega_bh_i, "model.omega_bh_i", bh)?;
                forbid(&m.omega_bh_f, "model.omega_bh_f", bh)?;
                forbid(&m.hopping, "model.hopping", bh)?;
                let n =
                    m.n.ok_or_else(|| CliError::config("model.n", "missing required key"))?;
                if n < 2 {
                    return Err(CliError::config(
                        "model.n",
                        format!("need at least 2 sites, got {n}"),
                    ));
                }
                let omega_i = require(m.omega_i, "model.omega_i")?;
                let k_i = require(m.k_i, "model.k_i")?;
                if omega_i <= 0.0 {
                    return Err(CliError::config("model.omega_i", "must be positive"));
                }
                if k_i < 0.0 {
                    return Err(CliError::config("model.k_i", "must be non-negative"));
                }
                let (omega_f, k_f) = if general {
                    let why = "general quenches take post-quench values from quench.table";
                    forbid(&m.omega_f, "model.omega_f", why)?;
                    forbid(&m.k_f, "model.k_f", why)?;
                    let last = self
                        .schedule_rows()?
                        .last()
                        .copied()
                        .expect("non-empty table");
                    (last.omega, last.k)
                } else {
                    (
                        require(m.omega_f, "model.omega_f")?,
                        require(m.k_f, "model.k_f")?,
                    )
                };
                if omega_f < 0.0 {
                    return Err(CliError::config("model.omega_f", "must be non-negative"));
                }
                if k_f < 0.0 {
                    return Err(CliError::config("model.k_f", "must be non-negative"));
                }
                let boundary = m.boundary.unwrap_or(Boundary::Periodic);
                ChainSpec::new(n, (omega_i, k_i), (omega_f, k_f), boundary)
                    .map_err(|e| CliError::config("model", e.to_string()))
            }
            Mode::BoseHubbard => {
                let osc = "belongs to oscillator mode";
                forbid(&m.omega_i, "model.omega_i", osc)?;
                forbid(&m.k_i, "model.k_i", osc)?;
                forbid(&m.omega_f, "model.omega_f", osc)?;
                forbid(&m.k_f, "model.k_f", osc)?;
                if m.n.is_some_and(|n| n != 2) {
                    return Err(CliError::config(
                        "model.n",
                        "bose_hubbard mode is a two-site model",
                    ));
                }
                if m.boundary.is_some_and(|b| b != Boundary::Open) {
                    return Err(CliError::config(
                        "model.boundary",
                        "bose_hubbard mode is an open pair",
                    ));
                }
                if general {
                    return Err(CliError::config(
                        "quench.kind",
                        "general quenches are only available in oscillator mode",
                    ));
                }
                let spec = BoseHubbardSpec {
                    omega_bh_i: require(m.omega_bh_i, "model.omega_bh_i")?,
                    omega_bh_f: require(m.omega_bh_f, "model.omega_bh_f")?,
                    hopping: require(m.hopping, "model.hopping")?,
                };
                spec.to_chain_spec()
                    .map_err(|e| CliError::config("model", e.to_string()))
            }
        }
    }

    fn schedule_rows(&self) -> Result<&[ScheduleRow]> {
        match &self.quench.table {
            Some(rows) if !rows.is_empty() => Ok(rows),
            Some(_) => Err(CliError::config("quench.table", "table is empty")),
            None => Err(CliError::config("quench.table", "missing required key")),
        }
    }

    fn protocol(&self) -> Result<ChainProtocol> {
        let q = &self.quench;
        match q.kind {
            QuenchKind::Sudden => {
                let why = "only used by general quenches";
                forbid(&q.table, "quench.table", why)?;
                forbid(&q.interpolation, "quench.interpolation", why)?;
                forbid(&q.tolerance, "quench.tolerance", why)?;
                Ok(ChainProtocol::Sudden)
            }
            QuenchKind::General => {
                let rows = self.schedule_rows()?;
                if rows[0].t != 0.0 {
                    return Err(CliError::config(
                        "quench.table[0].t",
                        "table must start at t = 0",
                    ));
                }
                for (i, w) in rows.windows(2).enumerate() {
                    if !(w[1].t > w[0].t) {
                        return Err(CliError::config(
                            format!("quench.table[{}].t", i + 1),
                            "times must be strictly increasing",
                        ));
                    }
                }
                for (i, r) in rows.iter().enumerate() {
                    if !(r.omega.is_finite() && r.omega >= 0.0) {
                        return Err(CliError::config(
                            format!("quench.table[{i}].omega"),
                            "must be finite and non-negative",
                        ));
                    }
                    if !(r.k.is_finite() && r.k >= 0.0) {
                        return Err(CliError::config(
                            format!("quench.table[{i}].k"),
                            "must be finite and non-negative",
                        ));
                    }
                }
                let tolerance = q.tolerance.unwrap_or(DEFAULT_TOLERANCE);
                if !(tolerance > 0.0 && tolerance.is_finite()) {
                    return Err(CliError::config("quench.tolerance", "must be positive"));
                }
                Ok(ChainProtocol::Schedule(ParameterSchedule {
                    times: rows.iter().map(|r| r.t).collect(),
                    omega: rows.iter().map(|r| r.omega).collect(),
                    k: rows.iter().map(|r| r.k).collect(),
                    interpolation: q.interpolation.unwrap_or_default().into(),
                    tolerance,
                }))
            }
        }
    }

    fn partition(&self, n: usize) -> Result<Partition> {
        match &self.partition.traced {
            Traced::Named(name) if name == "second_half" => Partition::second_half(n)
                .map_err(|e| CliError::config("partition.traced", e.to_string())),
            Traced::Named(name) => Err(CliError::config(
                "partition.traced",
                format!("expected \"second_half\" or a list of sites, got \"{name}\""),
            )),
            Traced::Sites(sites) => {
                if let Some(&s) = sites.iter().find(|&&s| s == 0 || s > n) {
                    return Err(CliError::config(
                        "partition.traced",
                        format!("site {s} outside 1..={n}"),
                    ));
                }
                Partition::from_one_based(n, sites)
                    .map_err(|e| CliError::config("partition.traced", e.to_string()))
            }
        }
    }

    /// Validates the whole document and lowers it to library types.
    pub fn job(&self) -> Result<Job> {
        let protocol = self.protocol()?;
        let spec = self.chain_spec()?;
        let partition = self.partition(spec.n)?;
        let grid = TimeGrid::new(self.time.t_max, self.time.dt).map_err(|e| {
            let path = if self.time.dt > 0.0 {
                "time.t_max"
            } else {
                "time.dt"
            };
            CliError::config(path, e.to_string())
        })?;
        let alphas = &self.entropy.alphas;
        if alphas.is_empty() {
            return Err(CliError::config(
                "entropy.alphas",
                "at least one order required",
            ));
        }
        if alphas.contains(&0) {
            return Err(CliError::config(
                "entropy.alphas",
                "orders must be positive integers",
            ));
        }
        let mut sorted = alphas.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != alphas.len() {
            return Err(CliError::config(
                "entropy.alphas",
                "orders must be distinct",
            ));
        }
        if !(1..=17).contains(&self.output.precision) {
            return Err(CliError::config("output.precision", "must lie in 1..=17"));
        }
        Ok(Job {
            spec,
            protocol,
            partition,
            grid,
            alphas: alphas.clone(),
        })
    }
}
