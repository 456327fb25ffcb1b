use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use crofton_core::montecarlo::ZeroCountEstimate;
use crofton_core::predictor::Prediction;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Default absolute slack in [`report_compare`], for estimates with zero stderr.
pub const DEFAULT_ABS_TOL: f64 = 1e-9;

/// Machine-readable result of one run. Everything except `timestamp` is a
/// function of the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub inputs: Value,
    pub result: Value,
    /// Unix seconds.
    pub timestamp: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Report {
    pub fn new(command: &str, pass: bool, inputs: Value, result: Value) -> Self {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self {
            command: command.to_string(),
            status: if pass { Status::Pass } else { Status::Fail },
            inputs,
            result,
            timestamp,
        }
    }

    pub fn pass(&self) -> bool {
        self.status == Status::Pass
    }

    /// 0 on pass, 2 when a check failed.
    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            0
        } else {
            2
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        std::fs::write(path, self.to_json()).with_context(|| format!("writing {}", path.display()))
    }
}

/// Prediction against a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub prediction: f64,
    pub mean: f64,
    pub stderr: f64,
    pub abs_tol: f64,
    pub deviation: f64,
    /// `3 stderr + abs_tol`
    pub threshold: f64,
    /// Deviation in units of stderr; absent when stderr is zero.
    pub z_score: Option<f64>,
    pub pass: bool,
}

/// Pass iff `|prediction - mean| <= 3 stderr + abs_tol`.
pub fn report_compare(prediction: &Prediction, estimate: &ZeroCountEstimate, abs_tol: f64) -> Verdict {
    let deviation = (prediction.value - estimate.mean).abs();
    let threshold = 3.0 * estimate.stderr + abs_tol;
    Verdict {
        prediction: prediction.value,
        mean: estimate.mean,
        stderr: estimate.stderr,
        abs_tol,
        deviation,
        threshold,
        z_score: (estimate.stderr > 0.0).then(|| deviation / estimate.stderr),
        pass: deviation <= threshold,
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: predicted {:.6}, simulated {:.6} ± {:.6} (|diff| {:.3e}, threshold {:.3e})",
            if self.pass { "pass" } else { "FAIL" },
            self.prediction,
            self.mean,
            self.stderr,
            self.deviation,
            self.threshold
        )
    }
}
