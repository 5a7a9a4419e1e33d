//! Experiment runner: configuration, the round loop, regret bookkeeping and CSV output.

pub mod config;
pub mod log;
pub mod run;

use std::fmt;
use std::str::FromStr;

use crate::baselines::BaselineKind;
use crate::error::{Error, Result};
use crate::msafeopt::Case;

pub use config::{ConfigOverrides, ExperimentConfig};
pub use log::{read_csv, write_csv, RegretLog, RoundRecord};
pub use run::{problem_spec, run_experiment, run_on, run_seed, run_seed_observed, ExperimentResult, SeedRun};

/// Every algorithm the harness can drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    MSafeOpt(Case),
    Baseline(BaselineKind),
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::MSafeOpt(Case::Case1),
        Algorithm::MSafeOpt(Case::Case2),
        Algorithm::MSafeOpt(Case::Case3),
        Algorithm::MSafeOpt(Case::MSafeUcb),
        Algorithm::Baseline(BaselineKind::SafeOptMc),
        Algorithm::Baseline(BaselineKind::PredVar),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::MSafeOpt(Case::Case1) => "case1",
            Algorithm::MSafeOpt(Case::Case2) => "case2",
            Algorithm::MSafeOpt(Case::Case3) => "case3",
            Algorithm::MSafeOpt(Case::MSafeUcb) => "msafeucb",
            Algorithm::Baseline(BaselineKind::SafeOptMc) => "safeopt-mc",
            Algorithm::Baseline(BaselineKind::PredVar) => "predvar",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        let key = key.strip_prefix("msafeopt-").unwrap_or(&key);
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == key)
            .or(match key {
                "safeopt" | "safeoptmc" => Some(Algorithm::Baseline(BaselineKind::SafeOptMc)),
                "m-safeucb" => Some(Algorithm::MSafeOpt(Case::MSafeUcb)),
                _ => None,
            })
            .ok_or_else(|| {
                Error::usage(format!(
                    "unknown algorithm '{s}' (expected case1, case2, case3, msafeucb, safeopt-mc or predvar)"
                ))
            })
    }
}
