//! Batch front-end for the verification suites.

pub mod config;
pub mod report;
pub mod suites;

use std::time::Instant;

use epsilon_core::scalar::{BackendMode, CycNumber, FloatScalar, Scalar};

use config::RunConfig;
use report::{RunReport, SuiteReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteName {
    Gauss,
    Stability,
    Kloosterman,
    Bessel,
}

impl SuiteName {
    pub const ALL: [SuiteName; 4] = [
        SuiteName::Gauss,
        SuiteName::Stability,
        SuiteName::Kloosterman,
        SuiteName::Bessel,
    ];

    fn run_with<S: Scalar>(self, cfg: &RunConfig) -> SuiteReport {
        match self {
            SuiteName::Gauss => suites::gauss::run::<S>(cfg),
            SuiteName::Stability => suites::stability::run::<S>(cfg),
            SuiteName::Kloosterman => suites::kloosterman::run::<S>(cfg),
            SuiteName::Bessel => suites::bessel::run::<S>(cfg),
        }
    }
}

/// Runs one suite in the configured backend.
pub fn run_suite(name: SuiteName, cfg: &RunConfig) -> SuiteReport {
    let start = Instant::now();
    let mut report = match cfg.backend {
        BackendMode::Exact => name.run_with::<CycNumber>(cfg),
        BackendMode::Float => name.run_with::<FloatScalar>(cfg),
    };
    if cfg.timing {
        report.timing_ms = Some(start.elapsed().as_millis() as u64);
    }
    report
}

pub fn run(names: &[SuiteName], cfg: &RunConfig) -> RunReport {
    RunReport::new(cfg, names.iter().map(|n| run_suite(*n, cfg)).collect())
}
