//! `memheat verify <suite>`: grouped numerical checks with a CSV record.

use std::path::{Path, PathBuf};

use crate::checks::{self, Check};
use crate::output::{fmt_f64, Cell, OutputDir, Table};
use crate::{CliError, ConfigError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Volterra,
    Spectral,
    Routes,
    Control,
    Obstruction,
    All,
}

type CheckFn = fn() -> Result<Vec<Check>, CliError>;

impl Suite {
    pub const NAMES: [&'static str; 6] = ["volterra", "spectral", "routes", "control", "obstruction", "all"];

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "volterra" => Suite::Volterra,
            "spectral" => Suite::Spectral,
            "routes" => Suite::Routes,
            "control" => Suite::Control,
            "obstruction" => Suite::Obstruction,
            "all" => Suite::All,
            other => {
                return Err(ConfigError::new("suite", format!("unknown suite '{other}' (expected one of {})", Self::NAMES.join(", "))))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Volterra => "volterra",
            Suite::Spectral => "spectral",
            Suite::Routes => "routes",
            Suite::Control => "control",
            Suite::Obstruction => "obstruction",
            Suite::All => "all",
        }
    }

    /// The `H_n` shape ratios (criterion 4) are not part of any suite; they are
    /// reported by the `audit` experiment and the acceptance run.
    fn members(&self) -> Vec<(Suite, CheckFn)> {
        match self {
            Suite::Volterra => vec![(*self, checks::criterion_1), (*self, checks::criterion_2), (*self, checks::criterion_3)],
            Suite::Spectral => vec![(*self, checks::spectral)],
            Suite::Routes => vec![(*self, checks::criterion_5), (*self, checks::criterion_6), (*self, checks::criterion_7)],
            Suite::Control => vec![(*self, checks::criterion_8), (*self, checks::criterion_9)],
            Suite::Obstruction => {
                vec![(*self, checks::criterion_10), (*self, checks::criterion_11), (*self, checks::audit_band)]
            }
            Suite::All => [Suite::Volterra, Suite::Spectral, Suite::Routes, Suite::Control, Suite::Obstruction]
                .iter()
                .flat_map(|s| s.members())
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteRow {
    pub suite: Suite,
    pub check: Check,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub suite: Suite,
    pub rows: Vec<SuiteRow>,
    pub csv: PathBuf,
}

impl VerifyReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.check.passed()).count()
    }
}

pub fn run_checks(suite: Suite) -> Result<Vec<SuiteRow>, CliError> {
    let mut rows = vec![];
    for (s, f) in suite.members() {
        rows.extend(f()?.into_iter().map(|check| SuiteRow { suite: s, check }));
    }
    Ok(rows)
}

pub fn to_table(rows: &[SuiteRow]) -> Table {
    let mut table = Table::new(["suite", "criterion", "check", "value", "bound", "passed"]);
    for r in rows {
        let criterion = if r.check.criterion == 0 { Cell::Text(String::new()) } else { Cell::Int(r.check.criterion as i64) };
        table.push(vec![
            r.suite.name().into(),
            criterion,
            r.check.name.clone().into(),
            r.check.value.into(),
            r.check.bound.describe().into(),
            r.check.passed().into(),
        ]);
    }
    table
}

/// Human-readable summary, one line per check.
pub fn render(rows: &[SuiteRow]) -> String {
    let width = rows.iter().map(|r| r.check.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for r in rows {
        let status = if r.check.passed() { "PASS" } else { "FAIL" };
        s.push_str(&format!(
            "{status}  {:<12} {:<width$}  {:>24}  {}\n",
            r.suite.name(),
            r.check.name,
            fmt_f64(r.check.value),
            r.check.bound.describe()
        ));
    }
    s
}

pub fn verify(suite: Suite, out: &Path) -> Result<VerifyReport, CliError> {
    let rows = run_checks(suite)?;
    let mut dir = OutputDir::new(out)?;
    let csv = dir.csv(&format!("verify_{}.csv", suite.name()), &to_table(&rows))?;
    Ok(VerifyReport { suite, rows, csv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::Bound;

    #[test]
    fn suite_names_round_trip() {
        for name in Suite::NAMES {
            assert_eq!(Suite::parse(name).unwrap().name(), name);
        }
        let err = Suite::parse("nope").unwrap_err();
        assert!(err.to_string().contains("unknown suite"));
    }

    #[test]
    fn all_covers_every_other_suite() {
        let n = |s: Suite| s.members().len();
        let parts = [Suite::Volterra, Suite::Spectral, Suite::Routes, Suite::Control, Suite::Obstruction];
        assert_eq!(n(Suite::All), parts.iter().map(|s| n(*s)).sum::<usize>());
    }

    #[test]
    fn table_and_render() {
        let rows = vec![
            SuiteRow { suite: Suite::Volterra, check: Check::new(1, "a", 1e-9, Bound::AtMost(1e-8)) },
            SuiteRow { suite: Suite::Spectral, check: Check::new(0, "b", 5.0, Bound::Within(1.0, 2.0)) },
        ];
        let text = String::from_utf8(to_table(&rows).to_bytes().unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "volterra,1,a,1.0000000000000001e-9,<= 1e-8,1");
        assert_eq!(lines[2], "spectral,,b,5.0000000000000000e0,\"in [1, 2]\",0");
        let shown = render(&rows);
        assert!(shown.lines().next().unwrap().starts_with("PASS"));
        assert!(shown.lines().nth(1).unwrap().starts_with("FAIL"));
    }
}
