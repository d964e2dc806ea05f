//! Check reports: named residual statistics over a sample sweep.
//!
//! Every verification produces a `CheckReport`. The invariant `pass <=>
//! max_residual <= tolerance` holds for all checks; agreement checks encode
//! disagreement as residual 1.0, and non-degeneracy checks report
//! `max(0, threshold - min_value)` against tolerance 0. Skipped checks carry
//! a non-empty reason and never count against an outcome.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub suite: String,
    pub check: String,
    /// The identity or claim verified, in plain ASCII notation.
    pub identity: String,
    pub status: CheckStatus,
    pub max_residual: f64,
    pub mean_residual: f64,
    /// Max residual relative to the magnitude of the quantities compared.
    pub rel_residual: f64,
    pub tolerance: f64,
    pub points: usize,
    pub worst_point: Vec<f64>,
    pub worst_label: String,
    pub skip_reason: String,
}

impl CheckReport {
    pub fn skip(
        suite: &str,
        check: &str,
        identity: &str,
        reason: impl Into<String>,
    ) -> CheckReport {
        CheckReport {
            suite: suite.into(),
            check: check.into(),
            identity: identity.into(),
            status: CheckStatus::Skip,
            max_residual: 0.0,
            mean_residual: 0.0,
            rel_residual: 0.0,
            tolerance: 0.0,
            points: 0,
            worst_point: Vec::new(),
            worst_label: String::new(),
            skip_reason: reason.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    pub fn skipped(&self) -> bool {
        self.status == CheckStatus::Skip
    }

    pub fn text_line(&self) -> String {
        match self.status {
            CheckStatus::Skip => format!(
                "[skip] {}/{}  ({})",
                self.suite, self.check, self.skip_reason
            ),
            _ => {
                let mut line = format!(
                    "[{}] {}/{}  max {:.3e}  mean {:.3e}  tol {:.1e}  ({})",
                    if self.passed() { "PASS" } else { "FAIL" },
                    self.suite,
                    self.check,
                    self.max_residual,
                    self.mean_residual,
                    self.tolerance,
                    self.identity,
                );
                if !self.passed() && !self.worst_point.is_empty() {
                    line.push_str(&format!(
                        "\n       worst at {:?} {}",
                        self.worst_point, self.worst_label
                    ));
                }
                line
            }
        }
    }

    pub fn json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialization")
    }
}

/// Residual accumulator for a sweep over sample points.
#[derive(Debug, Clone)]
pub struct Sweep {
    max: f64,
    sum: f64,
    count: usize,
    scale: f64,
    worst_point: Vec<f64>,
    worst_label: String,
    points_seen: usize,
}

impl Sweep {
    pub fn new() -> Sweep {
        Sweep {
            max: 0.0,
            sum: 0.0,
            count: 0,
            scale: 0.0,
            worst_point: Vec::new(),
            worst_label: String::new(),
            points_seen: 0,
        }
    }

    /// Record one residual entry; `label` is only rendered when the entry
    /// becomes the new worst. Non-finite residuals count as hard failures
    /// and keep the report serializable.
    pub fn record(&mut self, point: &[f64], value: f64, label: impl FnOnce() -> String) {
        let v = if value.is_finite() { value.abs() } else { f64::MAX };
        self.sum += v;
        self.count += 1;
        if v > self.max || self.count == 1 {
            self.max = v;
            self.worst_point = point.to_vec();
            self.worst_label = label();
        }
    }

    /// Track the magnitude of the quantities being compared, for the
    /// relative residual figure.
    pub fn record_scale(&mut self, value: f64) {
        self.scale = self.scale.max(value.abs());
    }

    pub fn bump_points(&mut self) {
        self.points_seen += 1;
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn finish(self, suite: &str, check: &str, identity: &str, tol: f64) -> CheckReport {
        let mean = if self.count > 0 {
            self.sum / self.count as f64
        } else {
            0.0
        };
        let status = if self.max <= tol {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        CheckReport {
            suite: suite.into(),
            check: check.into(),
            identity: identity.into(),
            status,
            max_residual: self.max,
            mean_residual: mean,
            rel_residual: self.max / (1.0 + self.scale),
            tolerance: tol,
            points: self.points_seen,
            worst_point: self.worst_point,
            worst_label: self.worst_label,
            skip_reason: String::new(),
        }
    }
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep::new()
    }
}

/// Agreement check: both sides of a biconditional observed equal.
pub fn agreement_report(
    suite: &str,
    check: &str,
    identity: &str,
    agree: bool,
    label: String,
) -> CheckReport {
    CheckReport {
        suite: suite.into(),
        check: check.into(),
        identity: identity.into(),
        status: if agree { CheckStatus::Pass } else { CheckStatus::Fail },
        max_residual: if agree { 0.0 } else { 1.0 },
        mean_residual: if agree { 0.0 } else { 1.0 },
        rel_residual: if agree { 0.0 } else { 1.0 },
        tolerance: 0.0,
        points: 0,
        worst_point: Vec::new(),
        worst_label: label,
        skip_reason: String::new(),
    }
}

/// Non-degeneracy check: `min_value` must stay at or above `threshold`.
pub fn nondegeneracy_report(
    suite: &str,
    check: &str,
    identity: &str,
    min_value: f64,
    threshold: f64,
    worst_point: Vec<f64>,
) -> CheckReport {
    let residual = (threshold - min_value).max(0.0);
    CheckReport {
        suite: suite.into(),
        check: check.into(),
        identity: identity.into(),
        status: if residual == 0.0 {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        max_residual: residual,
        mean_residual: residual,
        rel_residual: residual / (1.0 + min_value.abs()),
        tolerance: 0.0,
        points: 0,
        worst_point,
        worst_label: format!("min value {min_value:.6e}, threshold {threshold:.1e}"),
        skip_reason: String::new(),
    }
}
