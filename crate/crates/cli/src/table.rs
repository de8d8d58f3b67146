use std::io::{self, Write};

use crate::config::ExperimentConfig;

pub const TOOL_VERSION: &str = concat!("anyladder ", env!("CARGO_PKG_VERSION"));

/// One output CSV: a `#` comment header followed by the column line and rows.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub file: String,
    /// Extra `#` lines, e.g. the model of this particular file.
    pub notes: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl SweepTable {
    pub fn new(file: impl Into<String>, columns: &[&'static str]) -> Self {
        Self { file: file.into(), notes: Vec::new(), columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn note(mut self, line: impl Into<String>) -> Self {
        self.notes.push(line.into());
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, cfg: &ExperimentConfig, mut w: W) -> io::Result<()> {
        writeln!(w, "# {TOOL_VERSION}")?;
        writeln!(w, "# kind={} name={}", cfg.kind, cfg.name)?;
        writeln!(w, "# model: {}", cfg.model.params())?;
        for n in &self.notes {
            writeln!(w, "# {n}")?;
        }
        writeln!(w, "# config: {}", crate::cache::canonical_json(cfg))?;
        writeln!(w, "{}", self.columns.join(","))?;
        for r in &self.rows {
            writeln!(w, "{}", r.join(","))?;
        }
        Ok(())
    }

    pub fn to_bytes(&self, cfg: &ExperimentConfig) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write(cfg, &mut buf).expect("writing to memory");
        buf
    }
}

/// Shortest round-trip float representation, `nan`/`inf` spelled out.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:e}")
    }
}

/// Angle label for file names, e.g. `0.4` → `theta0.4`.
pub fn theta_tag(theta_pi: f64) -> String {
    format!("theta{theta_pi}")
}
