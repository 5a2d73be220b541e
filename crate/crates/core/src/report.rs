//! Check rows and the files that carry them.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

/// Which side of the tolerance a value must fall on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// `value < tolerance`; residuals and drifts.
    Below,
    /// `value > tolerance`; negative controls.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub suite: String,
    pub check: String,
    /// The relation being checked, in words.
    pub tag: String,
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
    /// Ungated rows are measured and reported but never fail a run.
    pub gated: bool,
    pub pass: bool,
}

impl CheckRow {
    pub fn new(
        suite: &str,
        check: &str,
        tag: &str,
        value: f64,
        tolerance: f64,
        bound: Bound,
        gated: bool,
    ) -> Self {
        let pass = match bound {
            Bound::Below => value < tolerance,
            Bound::Above => value > tolerance,
        };
        Self {
            suite: suite.into(),
            check: check.into(),
            tag: tag.into(),
            value,
            tolerance,
            bound,
            gated,
            pass,
        }
    }

    pub fn fails_gate(&self) -> bool {
        self.gated && !self.pass
    }

    /// One human-readable line.
    pub fn summary_line(&self) -> String {
        let verdict = match (self.pass, self.gated) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "info",
        };
        let op = match self.bound {
            Bound::Below => "<",
            Bound::Above => ">",
        };
        format!(
            "{verdict:4} {}/{}: {:.3e} {op} {:.1e}{}  [{}]",
            self.suite,
            self.check,
            self.value,
            self.tolerance,
            if self.gated { "" } else { " (not gated)" },
            self.tag
        )
    }
}

/// Rows plus suite-specific details, written as one JSON file.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub rows: Vec<CheckRow>,
    pub details: serde_json::Value,
}

impl SuiteReport {
    pub fn new(suite: &str) -> Self {
        Self {
            suite: suite.into(),
            rows: Vec::new(),
            details: serde_json::Value::Object(Default::default()),
        }
    }

    pub fn row(&mut self, check: &str, tag: &str, value: f64, tolerance: f64, gated: bool) {
        self.rows.push(CheckRow::new(
            &self.suite,
            check,
            tag,
            value,
            tolerance,
            Bound::Below,
            gated,
        ));
    }

    pub fn control(&mut self, check: &str, tag: &str, value: f64, tolerance: f64) {
        self.rows.push(CheckRow::new(
            &self.suite,
            check,
            tag,
            value,
            tolerance,
            Bound::Above,
            true,
        ));
    }

    pub fn detail<T: Serialize>(&mut self, key: &str, value: &T) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        if let serde_json::Value::Object(map) = &mut self.details {
            map.insert(key.into(), v);
        }
    }

    pub fn passed(&self) -> bool {
        !self.rows.iter().any(CheckRow::fails_gate)
    }

    pub fn write_json(&self, path: &Path) -> std::io::Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        f.flush()
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write a table with a header row; every value uses [`fmt_f64`].
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|x| fmt_f64(*x)))?;
    }
    w.flush()
}
