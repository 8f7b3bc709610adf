use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::error::Result;

use super::config::{ExperimentKind, ExperimentSpec};

/// How a measured value is compared with its expectation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|measured − expected| ≤ tolerance`.
    Absolute,
    /// `|measured − expected| ≤ tolerance · |expected|`.
    Relative,
    /// `measured ≤ expected` (the tolerance field repeats the bound).
    AtMost,
    /// `measured > expected`.
    Above,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        measured: f64,
        expected: f64,
        tolerance: f64,
        comparison: Comparison,
    ) -> Self {
        let passed = match comparison {
            Comparison::Absolute => (measured - expected).abs() <= tolerance,
            Comparison::Relative => (measured - expected).abs() <= tolerance * expected.abs(),
            Comparison::AtMost => measured <= expected,
            Comparison::Above => measured > expected,
        };
        Check { name: name.into(), measured, expected, tolerance, comparison, passed }
    }

    pub fn absolute(name: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Self {
        Check::new(name, measured, expected, tolerance, Comparison::Absolute)
    }

    pub fn relative(name: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Self {
        Check::new(name, measured, expected, tolerance, Comparison::Relative)
    }

    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Check::new(name, measured, bound, bound, Comparison::AtMost)
    }

    pub fn above(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Check::new(name, measured, bound, 0.0, Comparison::Above)
    }

    /// A yes/no condition recorded as `1`/`0` against an expected `1`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check::absolute(name, if ok { 1.0 } else { 0.0 }, 1.0, 0.0)
    }
}

/// Blow-up that ended a run early.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlowUpRecord {
    pub time: f64,
    pub max_amplitude: f64,
}

/// Outcome of one experiment, written as `<name>.json` into the output directory.
///
/// Wall-clock time is kept out of the JSON so reruns are byte-identical.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub experiment: ExperimentKind,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Output files, relative to the output directory.
    pub files: Vec<String>,
    pub notes: Vec<String>,
    pub data: serde_json::Value,
    pub blow_up: Option<BlowUpRecord>,
    pub config: ExperimentSpec,
    #[serde(skip)]
    pub wall_clock: Duration,
}

impl Report {
    pub fn new(config: &ExperimentSpec) -> Self {
        Report {
            experiment: config.name,
            passed: true,
            checks: Vec::new(),
            files: Vec::new(),
            notes: Vec::new(),
            data: serde_json::Value::Null,
            blow_up: None,
            config: config.clone(),
            wall_clock: Duration::ZERO,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn file_name(&self) -> String {
        format!("{}.json", self.experiment.name())
    }

    /// Registers an output file written to `dir`.
    pub fn add_file(&mut self, dir: &Path, path: &Path) {
        let rel = path.strip_prefix(dir).unwrap_or(path);
        self.files.push(rel.to_string_lossy().replace('\\', "/"));
    }

    /// `0` success, `1` failed check, `3` blow-up.
    pub fn exit_code(&self) -> i32 {
        if self.blow_up.is_some() {
            3
        } else if self.passed {
            0
        } else {
            1
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(self.file_name());
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }

    /// Human-readable summary, one line per check.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            let rule = match c.comparison {
                Comparison::Absolute => format!("expected {:.6e} ± {:.1e}", c.expected, c.tolerance),
                Comparison::Relative => format!("expected {:.6e} ± {:.1e} rel", c.expected, c.tolerance),
                Comparison::AtMost => format!("bound {:.1e}", c.expected),
                Comparison::Above => format!("must exceed {:.1e}", c.expected),
            };
            out.push_str(&format!("{mark} {:<40} {:>14.6e}  ({rule})\n", c.name, c.measured));
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        if let Some(b) = self.blow_up {
            out.push_str(&format!("blow-up at t = {} (max |u| = {:e})\n", b.time, b.max_amplitude));
        }
        out
    }
}
