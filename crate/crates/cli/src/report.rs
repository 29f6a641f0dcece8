//! Suite reports, their JSON envelope and the CSV summary table.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;

/// At most this many failures and skips are kept verbatim per suite.
pub const MAX_RECORDED: usize = 200;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseNote {
    pub check: String,
    pub inputs: Value,
    pub detail: String,
}

/// Counts for one named check.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckTally {
    pub cases: u64,
    pub failures: u64,
    pub skipped: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: u64,
    pub checks: BTreeMap<String, CheckTally>,
    pub failure_count: u64,
    pub failures: Vec<CaseNote>,
    pub skip_count: u64,
    pub skipped: Vec<CaseNote>,
    /// Suite-specific tables and counts.
    pub summary: Value,
    pub timing_ms: Option<u64>,
    pub config: RunConfig,
    pub version: String,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    pub fn tally(&self, check: &str) -> CheckTally {
        self.checks.get(check).copied().unwrap_or_default()
    }
}

/// Accumulates cases while a suite runs.
#[derive(Debug)]
pub struct SuiteBuilder {
    suite: String,
    cases: u64,
    checks: BTreeMap<String, CheckTally>,
    failure_count: u64,
    failures: Vec<CaseNote>,
    skip_count: u64,
    skipped: Vec<CaseNote>,
}

impl SuiteBuilder {
    pub fn new(suite: &str) -> Self {
        SuiteBuilder {
            suite: suite.to_string(),
            cases: 0,
            checks: BTreeMap::new(),
            failure_count: 0,
            failures: Vec::new(),
            skip_count: 0,
            skipped: Vec::new(),
        }
    }

    /// Records one asserted case.
    pub fn check(&mut self, ok: bool, check: &str, inputs: impl FnOnce() -> Value, detail: impl FnOnce() -> String) {
        self.cases += 1;
        self.checks.entry(check.to_string()).or_default().cases += 1;
        if !ok {
            self.fail(check, inputs(), detail());
        }
    }

    /// A failure that is not tied to a counted case, such as an evaluation error.
    pub fn fail(&mut self, check: &str, inputs: Value, detail: String) {
        self.failure_count += 1;
        self.checks.entry(check.to_string()).or_default().failures += 1;
        if self.failures.len() < MAX_RECORDED {
            self.failures.push(CaseNote {
                check: check.to_string(),
                inputs,
                detail,
            });
        }
    }

    pub fn skip(&mut self, check: &str, inputs: Value, reason: String) {
        self.skip_count += 1;
        self.checks.entry(check.to_string()).or_default().skipped += 1;
        if self.skipped.len() < MAX_RECORDED {
            self.skipped.push(CaseNote {
                check: check.to_string(),
                inputs,
                detail: reason,
            });
        }
    }

    pub fn cases(&self) -> u64 {
        self.cases
    }

    pub fn failure_count(&self) -> u64 {
        self.failure_count
    }

    pub fn finish(self, summary: Value, config: &RunConfig, timing_ms: Option<u64>) -> SuiteReport {
        SuiteReport {
            suite: self.suite,
            cases: self.cases,
            checks: self.checks,
            failure_count: self.failure_count,
            failures: self.failures,
            skip_count: self.skip_count,
            skipped: self.skipped,
            summary,
            timing_ms,
            config: config.clone(),
            version: VERSION.to_string(),
        }
    }
}

/// Everything one invocation produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub passed: bool,
    pub config: RunConfig,
    pub suites: Vec<SuiteReport>,
}

impl RunReport {
    pub fn new(config: &RunConfig, suites: Vec<SuiteReport>) -> Self {
        RunReport {
            version: VERSION.to_string(),
            passed: suites.iter().all(SuiteReport::passed),
            config: config.clone(),
            suites,
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn write_csv(&self, path: &Path) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        self.csv_rows(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// One row per suite, then one per recorded failure or skip.
    pub fn csv_rows<W: Write>(&self, w: &mut csv::Writer<W>) -> anyhow::Result<()> {
        w.write_record(["suite", "kind", "check", "cases", "failures", "skipped", "detail"])?;
        for s in &self.suites {
            w.write_record([
                s.suite.as_str(),
                "summary",
                "",
                &s.cases.to_string(),
                &s.failure_count.to_string(),
                &s.skip_count.to_string(),
                if s.passed() { "pass" } else { "fail" },
            ])?;
            for (kind, notes) in [("failure", &s.failures), ("skip", &s.skipped)] {
                for n in notes {
                    w.write_record([
                        s.suite.as_str(),
                        kind,
                        &n.check,
                        "",
                        "",
                        "",
                        &format!("{} {}", n.inputs, n.detail),
                    ])?;
                }
            }
        }
        Ok(())
    }
}
