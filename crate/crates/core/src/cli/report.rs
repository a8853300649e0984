//! `report.json` and `points.csv` writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::config::{Command, ConfigError, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CSV_HEADER: &str =
    "px1,px2,px3,qx1,qx2,qx3,conformal_defect,sig_plus,sig_minus,sig_zero,effectiveness_defect";

/// Per-sample geometry record of the sweep commands.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub index: usize,
    pub x: [f64; 3],
    pub xbar: [f64; 3],
    pub conformal_factor: Option<f64>,
    pub conformal_defect: Option<f64>,
    /// `(plus, minus, zero)` of the LR metric.
    pub lr_signature: Option<[usize; 3]>,
    pub kmw_signature: Option<[usize; 3]>,
    pub effectiveness_defect: Option<f64>,
    /// Relative distance between the contraction metric and its closed form.
    pub closed_form_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= tolerance`; a NaN value fails.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub schema_version: u32,
    pub toolkit_version: &'static str,
    pub command: Command,
    pub config: RunConfig,
    pub points: Vec<PointRecord>,
    pub aggregates: serde_json::Value,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl StructureReport {
    pub fn new(
        config: &RunConfig,
        points: Vec<PointRecord>,
        aggregates: serde_json::Value,
        checks: Vec<Check>,
    ) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self {
            schema_version: SCHEMA_VERSION,
            toolkit_version: TOOLKIT_VERSION,
            command: config.command,
            config: config.clone(),
            points,
            aggregates,
            checks,
            pass,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.points.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        let opt = |v: Option<f64>| v.map(|v| format!("{v:e}")).unwrap_or_default();
        for p in &self.points {
            let sig = p.lr_signature.map(|s| s.map(|k| k.to_string()));
            let [sp, sm, sz] = sig.unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                p.x[0],
                p.x[1],
                p.x[2],
                p.xbar[0],
                p.xbar[1],
                p.xbar[2],
                opt(p.conformal_defect),
                sp,
                sm,
                sz,
                opt(p.effectiveness_defect),
            );
        }
        out
    }

    /// Writes `report.json`, and `points.csv` when enabled, under `dir`.
    pub fn write(&self, dir: &Path, points_csv: bool) -> Result<(), ConfigError> {
        let write_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| ConfigError::Write { path, source }
        };
        fs::create_dir_all(dir).map_err(write_err(dir))?;
        let json = dir.join("report.json");
        fs::write(&json, self.to_json()).map_err(write_err(&json))?;
        if points_csv {
            let csv = dir.join("points.csv");
            fs::write(&csv, self.to_csv()).map_err(write_err(&csv))?;
        }
        Ok(())
    }
}
