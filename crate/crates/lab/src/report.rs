//! Assertions, per-experiment results and the bundle summary.

use std::fmt::Write as _;

use serde::Serialize;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// `|measured - expected| <= tolerance`.
    Abs,
    /// `|measured - expected| <= tolerance · |expected|`.
    Rel,
    /// `measured <= expected`.
    AtMost,
    /// `measured >= expected`.
    AtLeast,
    /// `measured > expected`.
    Above,
}

#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub check: Check,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Assertion {
    fn new(
        name: impl Into<String>,
        check: Check,
        measured: f64,
        expected: f64,
        tolerance: f64,
    ) -> Self {
        let pass = match check {
            Check::Abs => (measured - expected).abs() <= tolerance,
            Check::Rel => (measured - expected).abs() <= tolerance * expected.abs(),
            Check::AtMost => measured <= expected,
            Check::AtLeast => measured >= expected,
            Check::Above => measured > expected,
        };
        Self {
            name: name.into(),
            check,
            measured,
            expected,
            tolerance,
            pass,
        }
    }

    pub fn abs(name: impl Into<String>, measured: f64, expected: f64, tol: f64) -> Self {
        Self::new(name, Check::Abs, measured, expected, tol)
    }

    pub fn rel(name: impl Into<String>, measured: f64, expected: f64, tol: f64) -> Self {
        Self::new(name, Check::Rel, measured, expected, tol)
    }

    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, Check::AtMost, measured, bound, 0.0)
    }

    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, Check::AtLeast, measured, bound, 0.0)
    }

    pub fn above(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::new(name, Check::Above, measured, bound, 0.0)
    }

    /// `passing` out of `total` items hold.
    pub fn all_of(name: impl Into<String>, passing: usize, total: usize) -> Self {
        Self::new(name, Check::Abs, passing as f64, total as f64, 0.0)
    }

    /// A yes/no property; recorded as `1` or `0` against `1`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::all_of(name, ok as usize, 1)
    }
}

/// A number worth keeping that carries no pass/fail.
#[derive(Debug, Clone, Serialize)]
pub struct Reported {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub name: String,
    pub kind: &'static str,
    /// Paths relative to the bundle root.
    pub files: Vec<String>,
    pub assertions: Vec<Assertion>,
    pub reported: Vec<Reported>,
    pub pass: bool,
}

impl ExperimentResult {
    pub fn new(name: &str, kind: &'static str) -> Self {
        Self {
            name: name.to_string(),
            kind,
            files: Vec::new(),
            assertions: Vec::new(),
            reported: Vec::new(),
            pass: true,
        }
    }

    pub fn assert(&mut self, a: Assertion) {
        self.pass &= a.pass;
        self.assertions.push(a);
    }

    pub fn report(&mut self, name: impl Into<String>, value: f64) {
        self.reported.push(Reported {
            name: name.into(),
            value,
        });
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub lab: &'static str,
    pub core: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub versions: Versions,
    pub config: ExperimentConfig,
    pub experiments: Vec<ExperimentResult>,
    pub pass: bool,
}

impl Summary {
    pub fn new(config: ExperimentConfig, experiments: Vec<ExperimentResult>) -> Self {
        let pass = experiments.iter().all(|e| e.pass);
        Self {
            versions: Versions {
                lab: env!("CARGO_PKG_VERSION"),
                core: blowup_core::VERSION,
            },
            config,
            experiments,
            pass,
        }
    }

    pub fn experiment(&self, name: &str) -> Option<&ExperimentResult> {
        self.experiments.iter().find(|e| e.name == name)
    }

    pub fn failures(&self) -> usize {
        self.experiments
            .iter()
            .flat_map(|e| &e.assertions)
            .filter(|a| !a.pass)
            .count()
    }

    /// Fixed-width table, one line per assertion.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<22} {:<44} {:>14} {:>8} {:>14} {:>10}  result",
            "experiment", "assertion", "measured", "check", "expected", "tol"
        );
        for e in &self.experiments {
            for a in &e.assertions {
                let check = match a.check {
                    Check::Abs => "abs",
                    Check::Rel => "rel",
                    Check::AtMost => "<=",
                    Check::AtLeast => ">=",
                    Check::Above => ">",
                };
                let _ = writeln!(
                    out,
                    "{:<22} {:<44} {:>14.6e} {:>8} {:>14.6e} {:>10.2e}  {}",
                    e.name,
                    a.name,
                    a.measured,
                    check,
                    a.expected,
                    a.tolerance,
                    if a.pass { "PASS" } else { "FAIL" }
                );
            }
            for r in &e.reported {
                let _ = writeln!(
                    out,
                    "{:<22} {:<44} {:>14.6e}  (reported)",
                    e.name, r.name, r.value
                );
            }
        }
        let _ = writeln!(out, "overall: {}", if self.pass { "PASS" } else { "FAIL" });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks() {
        assert!(Assertion::abs("a", 1.0 + 1e-13, 1.0, 1e-12).pass);
        assert!(!Assertion::rel("r", 1.3, 1.0, 0.2).pass);
        assert!(Assertion::rel("r", -1.9, -2.0, 0.1).pass);
        assert!(Assertion::at_most("m", 2.0, 2.0).pass);
        assert!(!Assertion::above("z", 0.0, 0.0).pass);
        assert!(!Assertion::abs("nan", f64::NAN, 0.0, 1.0).pass);
        assert!(!Assertion::all_of("c", 19, 20).pass);
    }

    #[test]
    fn one_failure_fails_the_experiment() {
        let mut e = ExperimentResult::new("x", "curves-scan");
        e.assert(Assertion::holds("ok", true));
        e.assert(Assertion::holds("bad", false));
        assert!(!e.pass);
        let s = Summary::new(ExperimentConfig::default(), vec![e]);
        assert_eq!(s.failures(), 1);
        assert!(s.table().contains("FAIL"));
    }
}
