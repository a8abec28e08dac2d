//! CSV output and assertion bookkeeping.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Lossless float formatting: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{x:.16e}")
}

/// A CSV table with a fixed header, written in one go.
#[derive(Clone, Debug)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self, timestamp: bool) -> String {
        let mut out = String::new();
        if timestamp {
            let _ = writeln!(out, "# generated {}", chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn write(&self, dir: &Path, name: &str, timestamp: bool) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let path = dir.join(name);
        let mut file = std::fs::File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        file.write_all(self.render(timestamp).as_bytes())
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

/// A named check with its measured value and bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub measured: f64,
    pub bound: String,
    pub passed: bool,
}

impl Assertion {
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), measured, bound: format!("≤ {bound:e}"), passed: measured <= bound }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), measured, bound: format!("≥ {bound:e}"), passed: measured >= bound }
    }

    /// Strictly positive margin, as for an ordering that must hold strictly.
    pub fn positive(name: impl Into<String>, measured: f64) -> Self {
        Self { name: name.into(), measured, bound: "> 0".into(), passed: measured > 0.0 }
    }

    /// A yes/no property; `measured` is 1 when it holds.
    pub fn holds(name: impl Into<String>, passed: bool) -> Self {
        Self { name: name.into(), measured: if passed { 1.0 } else { 0.0 }, bound: "holds".into(), passed }
    }

    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!("{status} {}: measured {:e}, bound {}", self.name, self.measured, self.bound)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 123456.789] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(0.0), "0");
    }

    #[test]
    fn timestamp_line_is_optional() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        assert_eq!(t.render(false), "a,b\n1,2\n");
        assert!(t.render(true).starts_with("# generated "));
    }

    #[test]
    fn assertion_lines() {
        assert!(Assertion::at_most("x", 1e-9, 1e-8).line().starts_with("PASS x"));
        assert!(Assertion::at_least("y", -1.0, 0.0).line().starts_with("FAIL y"));
    }
}
