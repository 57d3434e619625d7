//! SSR-threshold and evaluation-count curves.

use crate::baseline::StartResult;
use crate::cgn::RunTrace;

pub const THRESHOLD_POINTS: usize = 200;
pub const THRESHOLD_MIN: f64 = 1e-4;
pub const THRESHOLD_MAX: f64 = 1e2;

/// `(threshold, number of final SSRs strictly below it)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCurve {
    pub points: Vec<(f64, usize)>,
}

/// `(cumulative evaluations, acceptable minimizers found so far)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalCurve {
    pub points: Vec<(u64, usize)>,
}

/// Logarithmically spaced thresholds from `THRESHOLD_MIN` to `THRESHOLD_MAX`.
pub fn threshold_grid() -> Vec<f64> {
    let (a, b) = (THRESHOLD_MIN.log10(), THRESHOLD_MAX.log10());
    let last = (THRESHOLD_POINTS - 1) as f64;
    (0..THRESHOLD_POINTS)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / last))
        .collect()
}

pub fn threshold_curve(final_ssr: &[f64]) -> ThresholdCurve {
    let mut sorted: Vec<f64> = final_ssr.iter().copied().filter(|v| !v.is_nan()).collect();
    sorted.sort_by(f64::total_cmp);
    let points = threshold_grid()
        .into_iter()
        .map(|t| (t, sorted.partition_point(|&s| s < t)))
        .collect();
    ThresholdCurve { points }
}

/// One point per iteration record.
pub fn cgn_eval_curve(trace: &RunTrace, truth_ssr: f64) -> EvalCurve {
    let points = trace
        .records
        .iter()
        .map(|r| (r.cum_evals, r.ssr.iter().filter(|&&s| s < truth_ssr).count()))
        .collect();
    EvalCurve { points }
}

/// Starts are run one after another in index order; a start counts as
/// acceptable from the evaluation at which its best SSR first drops below
/// `truth_ssr`. One point per start boundary and per change in the count.
pub fn lm_eval_curve(results: &[StartResult], truth_ssr: f64) -> EvalCurve {
    let mut points = vec![(0, 0)];
    let mut offset = 0u64;
    let mut found = 0usize;
    for r in results {
        if let Some(k) = r.ssr_by_eval.iter().position(|&s| s < truth_ssr) {
            found += 1;
            points.push((offset + k as u64 + 1, found));
        }
        offset += r.evaluations;
        if points.last().map(|p| p.0) != Some(offset) {
            points.push((offset, found));
        }
    }
    EvalCurve { points }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = threshold_grid();
        assert_eq!(g.len(), 200);
        assert!((g[0] - 1e-4).abs() < 1e-18);
        assert!((g[199] - 1e2).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn counts_strictly_below() {
        let c = threshold_curve(&[1e-3, 1e-3, 5.0, f64::INFINITY]);
        let at = |t: f64| c.points.iter().find(|p| p.0 >= t).unwrap().1;
        assert_eq!(at(1e-4), 0);
        assert_eq!(at(2e-3), 2);
        assert_eq!(c.points.last().unwrap().1, 3);
    }
}
