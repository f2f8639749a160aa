//! Run configuration for one catalog experiment.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::Execution;
use crate::scheme::SizeLimits;

/// Output format for a report file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Parse(format!("unknown format '{other}' (expected json or csv)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

/// Everything `run_experiment` needs. Unset fields take the experiment's defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: String,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub trials: Option<u64>,
    pub k: Option<usize>,
    pub eta: Option<f64>,
    /// Overrides the exact-check tolerance (default 1e−9).
    pub tol: Option<f64>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub exec: Execution,
    pub limits: SizeLimits,
}

impl RunConfig {
    pub fn new(experiment: impl Into<String>, seed: u64) -> Self {
        RunConfig {
            experiment: experiment.into(),
            m: None,
            n: None,
            trials: None,
            k: None,
            eta: None,
            tol: None,
            seed,
            out: None,
            format: Format::Json,
            exec: Execution::default(),
            limits: SizeLimits::from_env(),
        }
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = Some(trials);
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = Some(eta);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn tolerance(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }

    /// Rejects zero trials, non-positive tolerances and η outside (0, 1].
    pub fn validate(&self) -> Result<()> {
        if self.trials == Some(0) {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidConfig(format!("tolerance {t} must be positive")));
            }
        }
        if let Some(e) = self.eta {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::OutOfRange { name: "eta", value: e });
            }
        }
        Ok(())
    }
}

pub const DEFAULT_TOL: f64 = 1e-9;
/// p-value floor for equivalence tests.
pub const P_FLOOR: f64 = 0.001;
