//! Report structures emitted by the CLI, plus the float rounding that
//! keeps the output stable across runs and platforms.

use alphashift_core::formats::{ModelFile, ShiftStepRecord};
use serde::Serialize;

/// Round to 12 significant digits. Reports quote every float through
/// this so that reruns produce byte-identical output; twelve digits is
/// far tighter than any tolerance the tool works at, so nothing the
/// reader can act on is lost. Rounding goes through the decimal
/// representation rather than a power-of-ten factor, which stays exact
/// at every magnitude.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted floats parse back")
}

pub fn sig12_vec(values: &[f64]) -> Vec<f64> {
    values.iter().copied().map(sig12).collect()
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports always serialize");
    text.push('\n');
    text
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub command: &'static str,
    pub tolerance: f64,
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_labels: Option<Vec<String>>,
    pub col_labels: Option<Vec<String>>,
    pub dominant_a: Option<usize>,
    pub dominant_b: Option<usize>,
    pub pure_equilibria: Vec<PureCell>,
    pub mixed: MixedReport,
}

#[derive(Debug, Serialize)]
pub struct PureCell {
    pub row: usize,
    pub col: usize,
    pub passed: bool,
    pub worst_violation: f64,
}

#[derive(Debug, Serialize)]
pub struct MixedReport {
    pub status: &'static str,
    pub p: Option<Vec<f64>>,
    pub q: Option<Vec<f64>>,
    pub passed: Option<bool>,
    pub worst_violation: Option<f64>,
}

impl MixedReport {
    pub fn absent(status: &'static str) -> Self {
        Self {
            status,
            p: None,
            q: None,
            passed: None,
            worst_violation: None,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    pub tolerance: f64,
    pub passed: bool,
    pub worst_violation: f64,
}

#[derive(Debug, Serialize)]
pub struct InvertReport {
    pub command: &'static str,
    pub n: usize,
    pub smoothing_alpha: f64,
    pub target_n: Option<usize>,
    pub queries_distinct: usize,
    pub answers_distinct: usize,
    pub queries_tail_merged: bool,
    pub answers_tail_merged: bool,
    pub labels: Vec<String>,
    pub answer_labels: Vec<String>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub model: ModelFile,
    pub verification: InvertVerification,
}

/// Round-trip check: the reconstructed model's own equilibrium is
/// compared against the distributions it was built from.
#[derive(Debug, Serialize)]
pub struct InvertVerification {
    pub tolerance: f64,
    pub max_p_deviation: f64,
    pub max_q_deviation: f64,
    pub passed: bool,
}

/// Render a float exactly as it would appear in the JSON reports, so
/// the two formats always agree on the same value.
fn num(x: f64) -> String {
    serde_json::to_string(&x).expect("report floats are finite")
}

pub fn shift_csv(records: &[ShiftStepRecord]) -> String {
    let mut out = String::from(
        "step,gain_before,gain_after,predicted_delta,actual_delta,threshold_w,q_weighted_estimate\n",
    );
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.step,
            num(r.gain_before),
            num(r.gain_after),
            num(r.predicted_delta),
            num(r.actual_delta),
            num(r.threshold_w),
            num(r.q_weighted_estimate),
        ));
    }
    out
}

pub fn invert_csv(report: &InvertReport) -> Result<String, String> {
    let mut out = String::from("label,a,b\n");
    for ((label, a), b) in report
        .labels
        .iter()
        .zip(&report.model.a)
        .zip(&report.model.b)
    {
        if label.contains(',') || label.contains('\n') {
            return Err(format!(
                "label {label:?} cannot be written as csv; use --format json"
            ));
        }
        out.push_str(&format!("{label},{},{}\n", num(*a), num(*b)));
    }
    Ok(out)
}
