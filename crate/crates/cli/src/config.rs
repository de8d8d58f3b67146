//! Experiment configuration: presets, TOML files and `key=value` overrides
//! merged into one validated [`ExperimentConfig`].

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};
use std::fmt;
use std::path::Path;

use anyladder_core::ModelParams;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::CliError;
use crate::presets;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    CountsVsJp,
    MaximHeatmap,
    #[serde(rename = "threshold_vs_L")]
    ThresholdVsL,
    SpectrumVsJp,
    Quench,
    ImDos,
    SymmetryResiduals,
    CommutatorCheck,
    PerturbationCheck,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant serializes");
        f.write_str(s.as_str().expect("unit variant is a string"))
    }
}

/// Scalar model couplings. Angles are in units of π.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(rename = "L", default = "default_l")]
    pub l: usize,
    #[serde(rename = "N", default = "default_n")]
    pub n: usize,
    #[serde(default = "default_j")]
    pub j: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub jp: f64,
    #[serde(default = "default_u")]
    pub u: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default)]
    pub theta_pi: f64,
    /// Defaults to `N`.
    #[serde(default)]
    pub n_cap: Option<u8>,
}

fn default_l() -> usize {
    10
}
fn default_n() -> usize {
    2
}
fn default_j() -> f64 {
    FRAC_1_SQRT_2
}
fn default_alpha() -> f64 {
    -0.5 * LN_2
}
fn default_u() -> f64 {
    16.0
}
fn default_mu() -> f64 {
    4.0
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            l: default_l(),
            n: default_n(),
            j: default_j(),
            alpha: default_alpha(),
            jp: 0.0,
            u: default_u(),
            mu: default_mu(),
            theta_pi: 0.0,
            n_cap: None,
        }
    }
}

impl ModelSpec {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            l: self.l,
            n: self.n,
            j: self.j,
            alpha: self.alpha,
            jp: self.jp,
            u: self.u,
            mu: self.mu,
            theta: self.theta_pi * PI,
            n_cap: self.n_cap.unwrap_or(self.n.min(u8::MAX as usize) as u8),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Log,
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JpGrid {
    pub scale: Scale,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl JpGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let steps = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                let s = k as f64 / steps;
                match self.scale {
                    Scale::Log => (self.min.ln() + s * (self.max.ln() - self.min.ln())).exp(),
                    Scale::Linear => self.min + s * (self.max - self.min),
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Statistical angles in units of π.
    #[serde(default)]
    pub theta_pi: Vec<f64>,
    #[serde(default)]
    pub jp: Option<JpGrid>,
    #[serde(rename = "L", default)]
    pub l: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuenchPair {
    pub theta_pi: f64,
    pub j_ini: f64,
    pub j_fin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuenchSpec {
    pub pairs: Vec<QuenchPair>,
    #[serde(default = "default_t_min")]
    pub t_min: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    /// Log-spaced points after `t = 0`.
    #[serde(default = "default_t_points")]
    pub points: usize,
}

fn default_t_min() -> f64 {
    0.1
}
fn default_t_max() -> f64 {
    1e5
}
fn default_t_points() -> usize {
    200
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DosSpec {
    pub jp: Vec<f64>,
    #[serde(default = "default_bins")]
    pub bins: usize,
    /// Shared Im E histogram range; per-spectrum automatic range when absent.
    #[serde(default)]
    pub range: Option<[f64; 2]>,
}

fn default_bins() -> usize {
    40
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: String,
}

fn default_dir() -> String {
    "out".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: default_dir() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub quench: Option<QuenchSpec>,
    #[serde(default)]
    pub dos: Option<DosSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config { field: field.into(), message: message.into() }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.model.params().validated().map_err(|e| invalid("model", e.to_string()))?;
        let needs_theta = matches!(
            self.kind,
            Kind::CountsVsJp
                | Kind::MaximHeatmap
                | Kind::ThresholdVsL
                | Kind::SpectrumVsJp
                | Kind::ImDos
                | Kind::SymmetryResiduals
                | Kind::CommutatorCheck
                | Kind::PerturbationCheck
        );
        if needs_theta && self.grid.theta_pi.is_empty() {
            return Err(invalid("grid.theta_pi", "must not be empty"));
        }
        if self.grid.theta_pi.iter().any(|t| !t.is_finite()) {
            return Err(invalid("grid.theta_pi", "values must be finite"));
        }
        if matches!(self.kind, Kind::CountsVsJp | Kind::MaximHeatmap | Kind::ThresholdVsL | Kind::SpectrumVsJp) {
            let g = self.grid.jp.as_ref().ok_or_else(|| invalid("grid.jp", "required for this kind"))?;
            if g.points == 0 {
                return Err(invalid("grid.jp.points", "must be at least 1"));
            }
            if !(g.min.is_finite() && g.max.is_finite()) || (g.points > 1 && !(g.max > g.min)) {
                return Err(invalid("grid.jp", "must be strictly increasing (max > min)"));
            }
            if g.scale == Scale::Log && !(g.min > 0.0) {
                return Err(invalid("grid.jp.min", "log grid needs min > 0"));
            }
            if g.min < 0.0 {
                return Err(invalid("grid.jp.min", "Jp must be non-negative"));
            }
            if self.kind == Kind::SpectrumVsJp && g.points < 3 {
                return Err(invalid("grid.jp.points", "crossing tracking needs at least 3 points"));
            }
        }
        if self.kind == Kind::ThresholdVsL {
            if self.grid.l.is_empty() {
                return Err(invalid("grid.L", "must not be empty"));
            }
            if self.grid.l.contains(&0) {
                return Err(invalid("grid.L", "rung counts must be positive"));
            }
        }
        if self.kind == Kind::Quench {
            let q = self.quench.as_ref().ok_or_else(|| invalid("quench", "required for kind quench"))?;
            if q.pairs.is_empty() {
                return Err(invalid("quench.pairs", "must not be empty"));
            }
            if q.points == 0 || !(q.t_min > 0.0) || !(q.t_max > q.t_min) {
                return Err(invalid("quench", "need 0 < t_min < t_max and points >= 1"));
            }
            if q.pairs.iter().any(|p| !(p.j_ini >= 0.0 && p.j_fin >= 0.0)) {
                return Err(invalid("quench.pairs", "couplings must be non-negative"));
            }
        }
        if self.kind == Kind::ImDos {
            let d = self.dos.as_ref().ok_or_else(|| invalid("dos", "required for kind im_dos"))?;
            if d.jp.is_empty() {
                return Err(invalid("dos.jp", "must not be empty"));
            }
            if d.bins == 0 {
                return Err(invalid("dos.bins", "must be at least 1"));
            }
            if let Some([lo, hi]) = d.range {
                if !(hi > lo) {
                    return Err(invalid("dos.range", "needs hi > lo"));
                }
            }
        }
        if self.kind == Kind::PerturbationCheck && self.model.n != 2 {
            return Err(invalid("model.N", "perturbation checks use the two-particle sector"));
        }
        Ok(())
    }

    pub fn jp_values(&self) -> Vec<f64> {
        self.grid.jp.as_ref().map(JpGrid::values).unwrap_or_default()
    }
}

/// Where the base configuration comes from.
#[derive(Clone, Debug)]
pub enum Source {
    Preset(String),
    File(std::path::PathBuf),
}

impl Source {
    /// Preset names win over paths; anything containing a path separator or
    /// ending in `.toml` is treated as a file.
    pub fn parse(s: &str) -> Self {
        if presets::find(s).is_some() && !s.ends_with(".toml") {
            Source::Preset(s.to_string())
        } else {
            Source::File(s.into())
        }
    }
}

fn merge(base: &mut Table, top: Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn preset_table(name: &str) -> Result<Table, CliError> {
    let p = presets::find(name).ok_or_else(|| invalid("preset", format!("unknown preset '{name}'")))?;
    p.body.parse::<Table>().map_err(|e| invalid("preset", format!("preset '{name}' does not parse: {e}")))
}

/// Parses `a.b.c=value`; the value is read as a TOML literal, falling back to a
/// bare string.
pub fn parse_override(s: &str) -> Result<(Vec<String>, Value), CliError> {
    let (key, raw) = s.split_once('=').ok_or_else(|| invalid(s, "override must look like key=value"))?;
    let path: Vec<String> = key.trim().split('.').map(str::to_string).collect();
    if path.iter().any(String::is_empty) {
        return Err(invalid(key, "empty key segment"));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((path, value))
}

fn set_path(table: &mut Table, path: &[String], value: Value) -> Result<(), CliError> {
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cur = table;
    for (depth, seg) in parents.iter().enumerate() {
        let entry = cur.entry(seg.clone()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| invalid(&path[..=depth].join("."), "is not a section"))?;
    }
    cur.insert(last.clone(), value);
    Ok(())
}

/// Merges preset defaults, file values and overrides (in that precedence
/// order, last wins) and validates the result.
pub fn resolve(source: &Source, overrides: &[String], out_dir: Option<&Path>) -> Result<ExperimentConfig, CliError> {
    let mut table = match source {
        Source::Preset(name) => {
            let mut t = preset_table(name)?;
            t.insert("name".into(), Value::String(name.clone()));
            t
        }
        Source::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| invalid("config", format!("cannot read {}: {e}", path.display())))?;
            let mut file: Table = text.parse().map_err(|e| invalid("config", format!("{}: {e}", path.display())))?;
            match file.remove("preset") {
                Some(Value::String(name)) => {
                    let mut base = preset_table(&name)?;
                    base.insert("name".into(), Value::String(name));
                    merge(&mut base, file);
                    base
                }
                Some(_) => return Err(invalid("preset", "must be a string")),
                None => file,
            }
        }
    };
    for o in overrides {
        let (path, value) = parse_override(o)?;
        set_path(&mut table, &path, value)?;
    }
    if let Some(dir) = out_dir {
        set_path(&mut table, &["output".into(), "dir".into()], Value::String(dir.display().to_string()))?;
    }
    let cfg: ExperimentConfig = Value::Table(table).try_into().map_err(|e: toml::de::Error| {
        invalid("config", e.message().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}
