//! Pass/fail tables and CSV helpers.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub computed: f64,
    pub expected: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, computed: f64, expected: f64, tolerance: f64) -> Self {
        Self { name: name.into(), computed, expected, tolerance }
    }

    /// A check on a quantity that must not exceed `tolerance`.
    pub fn at_most(name: impl Into<String>, computed: f64, tolerance: f64) -> Self {
        Self::new(name, computed, 0.0, tolerance)
    }

    pub fn error(&self) -> f64 {
        (self.computed - self.expected).abs()
    }

    pub fn passed(&self) -> bool {
        self.error() <= self.tolerance
    }
}

/// What a subcommand produced.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub summary: Vec<String>,
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
}

impl Report {
    pub fn line(&mut self, s: impl Into<String>) {
        self.summary.push(s.into());
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    /// Writes `contents` to `dir/name` and records the file.
    pub fn write(&mut self, dir: &Path, name: &str, contents: &[u8]) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.files.push(path);
        Ok(())
    }

    pub fn checks_csv(&self) -> String {
        let mut s = String::from("check,computed,expected,error,tolerance,status\n");
        for c in &self.checks {
            s += &format!(
                "{},{},{},{},{},{}\n",
                c.name,
                c.computed,
                c.expected,
                c.error(),
                c.tolerance,
                if c.passed() { "pass" } else { "fail" }
            );
        }
        s
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.summary {
            writeln!(f, "{l}")?;
        }
        if !self.checks.is_empty() {
            let w = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0).max(5);
            writeln!(f)?;
            writeln!(f, "{:<w$}  {:>22}  {:>22}  {:>10}  {:>9}  status", "check", "computed", "expected", "error", "tol")?;
            for c in &self.checks {
                writeln!(
                    f,
                    "{:<w$}  {:>22.15e}  {:>22.15e}  {:>10.2e}  {:>9.1e}  {}",
                    c.name,
                    c.computed,
                    c.expected,
                    c.error(),
                    c.tolerance,
                    if c.passed() { "PASS" } else { "FAIL" }
                )?;
            }
        }
        for p in &self.files {
            writeln!(f, "wrote {}", p.display())?;
        }
        Ok(())
    }
}
