//! Serializable verification reports. All floating-point payloads are
//! rendered as fixed-format decimal strings so byte-identical runs
//! produce byte-identical JSON regardless of locale, and field order is
//! fixed by the struct definitions.

use serde::Serialize;

/// Canonical decimal rendering used everywhere a float enters a report.
pub fn dec(x: f64) -> String {
    format!("{x:.17e}")
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioInfo {
    pub command: String,
    pub space: String,
    pub dim: usize,
    /// Half-dimension of the space carrying sigma (the submanifold in
    /// geometric mode, the model itself in synthetic mode).
    pub half_dim: usize,
    pub params: crate::contact::GssfParams,
    pub embedding: Option<String>,
    pub sigma_mode: Option<String>,
    pub sigma_seed: Option<u64>,
    pub theorem_id: Option<String>,
    pub direction: Option<String>,
    pub samples: usize,
    pub tol: String,
    pub seed: u64,
    pub l1: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PreconditionRow {
    pub name: String,
    pub value: String,
    pub satisfied: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResultRow {
    pub name: String,
    pub residual: String,
    pub verdict: String,
    pub worst_point: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool_version: String,
    pub scenario: ScenarioInfo,
    pub preconditions: Vec<PreconditionRow>,
    pub results: Vec<ResultRow>,
    pub max_residual: String,
    pub verdict: String,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    /// Process exit code mandated by the report verdict.
    pub fn exit_code(&self) -> i32 {
        match self.verdict.as_str() {
            "pass" => 0,
            "fail" => 1,
            _ => 2,
        }
    }
}

pub const VERDICT_PASS: &str = "pass";
pub const VERDICT_FAIL: &str = "fail";
pub const VERDICT_INCONCLUSIVE: &str = "inconclusive";

/// Aggregate row verdicts: any conclusive failure dominates, then any
/// inconclusive row, then pass.
pub fn aggregate_verdict(rows: &[ResultRow]) -> &'static str {
    if rows.iter().any(|r| r.verdict == VERDICT_FAIL) {
        VERDICT_FAIL
    } else if rows.iter().any(|r| r.verdict == VERDICT_INCONCLUSIVE) {
        VERDICT_INCONCLUSIVE
    } else {
        VERDICT_PASS
    }
}
