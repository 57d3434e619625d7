//! Artifact files. Floats are written as `{:.16e}` (17 significant digits)
//! with LF line endings so identical runs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use super::curves::{EvalCurve, ThresholdCurve};
use crate::baseline::{LmStatus, StartResult};
use crate::cgn::{ClusterState, RunTrace};
use crate::linalg::Matrix;
use crate::problem::ResidualScale;

pub const CLUSTER_FINAL: &str = "cluster_final.csv";
pub const TRACE: &str = "trace.csv";
pub const THRESHOLD_CURVE: &str = "threshold_curve.csv";
pub const EVAL_CURVE: &str = "eval_curve.csv";
pub const SUMMARY: &str = "summary.json";
pub const SPEC: &str = "spec.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub problem: String,
    pub solver: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    pub residual_scale: ResidualScale,
    pub total_evals: u64,
    pub acceptable_count: usize,
    pub truth_ssr: f64,
    /// Acceptance threshold; final SSR must be strictly below it.
    pub threshold: f64,
    pub best_ssr: f64,
    /// SHA-256 of the start matrix.
    pub start_hash: String,
    pub iterations: usize,
    /// CGN: frozen members. LM: runs that stopped on the damping limit.
    pub frozen_count: usize,
}

impl Summary {
    pub fn read(dir: &Path) -> Result<Self, HarnessError> {
        let path = dir.join(SUMMARY);
        let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))
    }
}

/// Hex SHA-256 of the column-major little-endian bytes of `starts`,
/// prefixed by its shape.
pub fn start_hash(starts: &Matrix) -> String {
    let mut h = Sha256::new();
    h.update((starts.nrows() as u64).to_le_bytes());
    h.update((starts.ncols() as u64).to_le_bytes());
    for v in starts.iter() {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), HarnessError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| HarnessError::io(&path, e))
}

fn x_header(n: usize) -> String {
    (1..=n).map(|l| format!("x{l}")).collect::<Vec<_>>().join(",")
}

fn status_name(s: LmStatus) -> &'static str {
    match s {
        LmStatus::Converged => "converged",
        LmStatus::EvalBudget => "eval_budget",
        LmStatus::Stalled => "stalled",
        LmStatus::Failed => "failed",
    }
}

pub fn cgn_cluster_csv(state: &ClusterState) -> String {
    let n = state.x.nrows();
    let mut s = format!("index,{},ssr,lambda,frozen,status\n", x_header(n));
    for i in 0..state.len() {
        let xs: Vec<String> = state.x.column(i).iter().map(|&v| num(v)).collect();
        let status = if state.frozen[i] { "frozen" } else { "active" };
        let _ = writeln!(
            s,
            "{i},{},{},{},{},{status}",
            xs.join(","),
            num(state.ssr[i]),
            num(state.lambda[i]),
            state.frozen[i]
        );
    }
    s
}

pub fn lm_cluster_csv(results: &[StartResult], n: usize) -> String {
    let mut s = format!("index,{},ssr,lambda,frozen,status\n", x_header(n));
    for r in results {
        let xs: Vec<String> = r.x.iter().map(|&v| num(v)).collect();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.start_index,
            xs.join(","),
            num(r.ssr),
            num(r.lambda),
            r.status == LmStatus::Stalled,
            status_name(r.status)
        );
    }
    s
}

pub fn cgn_trace_csv(trace: &RunTrace) -> String {
    let mut s = String::from("iteration,member,ssr,lambda,accepted,cum_evals\n");
    for r in &trace.records {
        for i in 0..r.ssr.len() {
            let _ = writeln!(
                s,
                "{},{i},{},{},{},{}",
                r.iteration,
                num(r.ssr[i]),
                num(r.lambda[i]),
                r.accepted[i],
                r.cum_evals
            );
        }
    }
    s
}

/// For LM `cum_evals` counts the evaluations of that start only.
pub fn lm_trace_csv(results: &[StartResult], lambda_init: f64) -> String {
    let mut s = String::from("iteration,member,ssr,lambda,accepted,cum_evals\n");
    for r in results {
        let first = r.ssr_by_eval.first().copied().unwrap_or(f64::INFINITY);
        let _ = writeln!(s, "0,{},{},{},false,1", r.start_index, num(first), num(lambda_init));
        for (k, st) in r.steps.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                k + 1,
                r.start_index,
                num(st.ssr),
                num(st.lambda),
                st.accepted,
                st.evaluations
            );
        }
    }
    s
}

pub fn threshold_csv(curve: &ThresholdCurve) -> String {
    let mut s = String::from("threshold,count\n");
    for &(t, c) in &curve.points {
        let _ = writeln!(s, "{},{c}", num(t));
    }
    s
}

pub fn eval_csv(curve: &EvalCurve) -> String {
    let mut s = String::from("evaluations,acceptable\n");
    for &(e, c) in &curve.points {
        let _ = writeln!(s, "{e},{c}");
    }
    s
}

pub fn summary_json(summary: &Summary) -> String {
    serde_json::to_string_pretty(summary).expect("summary serializes") + "\n"
}
