use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::artifacts::{self, Summary, write_file};
use super::curves::{self, ThresholdCurve};
use super::spec::{ExperimentSpec, Solver};
use super::HarnessError;
use crate::baseline::{lm_multistart, LmStatus, StartResult};
use crate::cgn::{create_initial_cluster, run_from_state, ClusterState, RunTrace};
use crate::linalg::{Matrix, Vector};
use crate::problems::{self, Dataset, DataOptions, ProblemId, ProblemInstance};

/// Result of one run, also written to disk.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub summary: Summary,
    pub final_ssr: Vec<f64>,
    pub threshold_curve: ThresholdCurve,
    pub cgn: Option<(ClusterState, RunTrace)>,
    pub lm: Option<Vec<StartResult>>,
}

/// Problem instance and start cluster for `spec`; both solvers start from
/// the same cluster for a given seed and `n`.
pub fn prepare(spec: &ExperimentSpec) -> Result<(ProblemInstance, ClusterState), HarnessError> {
    let spec = &effective(spec);
    spec.validate()?;
    let instance = match &spec.data {
        Some(dir) => problems::instance_from_dataset(spec.problem, Dataset::read(dir)?)?,
        None => problems::build(spec.problem, &spec.data_options())?,
    };
    let start = match spec.problem.pinned_starts().filter(|_| spec.pinned_starts) {
        Some(points) => {
            let cols: Vec<Vector> = points.into_iter().map(Vector::from_vec).collect();
            ClusterState::from_points(&instance.problem, &Matrix::from_columns(&cols), &spec.cgn_config())?
        }
        None => create_initial_cluster(&instance.problem, &spec.cgn_config())?,
    };
    Ok((instance, start))
}

/// `spec` with `n` replaced by the pinned start count when pinned starts
/// are requested.
fn effective(spec: &ExperimentSpec) -> ExperimentSpec {
    let mut s = spec.clone();
    if let Some(p) = spec.problem.pinned_starts().filter(|_| spec.pinned_starts) {
        s.n = p.len();
    }
    s
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunOutcome, HarnessError> {
    let spec = &effective(spec);
    let (instance, start) = prepare(spec)?;
    let out = spec.out.clone();
    fs::create_dir_all(&out).map_err(|e| HarnessError::io(&out, e))?;
    write_file(&out, artifacts::SPEC, &spec.to_json())?;

    let truth_ssr = instance.truth_ssr();
    let hash = artifacts::start_hash(&start.x);
    let n_params = instance.problem.dim_x();
    let mut summary = Summary {
        problem: spec.problem.to_string(),
        solver: spec.solver.to_string(),
        n: spec.n,
        seed: spec.seed,
        residual_scale: instance.problem.scale(),
        total_evals: 0,
        acceptable_count: 0,
        truth_ssr,
        threshold: truth_ssr,
        best_ssr: f64::INFINITY,
        start_hash: hash,
        iterations: 0,
        frozen_count: 0,
    };

    let (final_ssr, eval_curve, cgn, lm) = match spec.solver {
        Solver::Cgn => {
            let (state, trace) = run_from_state(&instance.problem, start, &spec.cgn_config())?;
            write_file(&out, artifacts::CLUSTER_FINAL, &artifacts::cgn_cluster_csv(&state))?;
            write_file(&out, artifacts::TRACE, &artifacts::cgn_trace_csv(&trace))?;
            summary.total_evals = trace.total_evals();
            summary.iterations = trace.iterations();
            summary.frozen_count = state.frozen_count();
            let curve = curves::cgn_eval_curve(&trace, truth_ssr);
            (state.ssr.clone(), curve, Some((state, trace)), None)
        }
        Solver::Lm | Solver::LmDef => {
            let lm_cfg = spec.lm_config();
            let results = lm_multistart(&instance.problem, &start.x, &lm_cfg);
            write_file(&out, artifacts::CLUSTER_FINAL, &artifacts::lm_cluster_csv(&results, n_params))?;
            write_file(&out, artifacts::TRACE, &artifacts::lm_trace_csv(&results, lm_cfg.lambda_init))?;
            summary.total_evals = results.iter().map(|r| r.evaluations).sum();
            summary.iterations = results.iter().map(|r| r.iterations).max().unwrap_or(0);
            summary.frozen_count = results.iter().filter(|r| r.status == LmStatus::Stalled).count();
            let curve = curves::lm_eval_curve(&results, truth_ssr);
            (results.iter().map(|r| r.ssr).collect::<Vec<_>>(), curve, None, Some(results))
        }
    };

    summary.acceptable_count = final_ssr.iter().filter(|&&s| s < truth_ssr).count();
    summary.best_ssr = final_ssr.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold_curve = curves::threshold_curve(&final_ssr);
    write_file(&out, artifacts::THRESHOLD_CURVE, &artifacts::threshold_csv(&threshold_curve))?;
    write_file(&out, artifacts::EVAL_CURVE, &artifacts::eval_csv(&eval_curve))?;
    write_file(&out, artifacts::SUMMARY, &artifacts::summary_json(&summary))?;
    log::info!(
        "{} on {}: {} evaluations, {} of {} acceptable (truth SSR {:.4e})",
        summary.solver,
        summary.problem,
        summary.total_evals,
        summary.acceptable_count,
        summary.n,
        truth_ssr
    );
    Ok(RunOutcome { out_dir: out, summary, final_ssr, threshold_curve, cgn, lm })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Gamma,
    LambdaInit,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Gamma => "gamma",
            SweepAxis::LambdaInit => "lambda_init",
        }
    }

    fn apply(self, spec: &mut ExperimentSpec, v: f64) {
        match self {
            SweepAxis::Gamma => spec.gamma = v,
            SweepAxis::LambdaInit => spec.lambda_init = v,
        }
    }
}

impl FromStr for SweepAxis {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gamma" => Ok(SweepAxis::Gamma),
            "lambda-init" | "lambda_init" => Ok(SweepAxis::LambdaInit),
            _ => Err(HarnessError::Config(format!("unknown sweep parameter {s:?}"))),
        }
    }
}

/// One run per value in `<out>/<axis>_<value>`, all sharing the dataset and
/// start cluster of `base`. Every value is validated before anything runs.
pub fn sweep(base: &ExperimentSpec, axis: SweepAxis, values: &[f64]) -> Result<Vec<RunOutcome>, HarnessError> {
    if values.is_empty() {
        return Err(HarnessError::Config("sweep needs at least one value".into()));
    }
    let specs: Vec<ExperimentSpec> = values
        .iter()
        .map(|&v| {
            let mut s = base.clone();
            axis.apply(&mut s, v);
            s.out = base.out.join(format!("{}_{v}", axis.as_str()));
            s.validate().map(|_| s)
        })
        .collect::<Result<_, _>>()?;
    let outcomes = specs.iter().map(run_experiment).collect::<Result<Vec<_>, _>>()?;

    let mut csv = format!("{},threshold,count\n", axis.as_str());
    for (v, o) in values.iter().zip(&outcomes) {
        for &(t, c) in &o.threshold_curve.points {
            let _ = writeln!(csv, "{v},{t:.16e},{c}");
        }
    }
    fs::create_dir_all(&base.out).map_err(|e| HarnessError::io(&base.out, e))?;
    write_file(&base.out, "sweep_threshold_curves.csv", &csv)?;
    Ok(outcomes)
}

/// Tabulates the summaries found in `dirs`; directories without a summary
/// are skipped with a warning.
pub fn compare(dirs: &[PathBuf]) -> Result<String, HarnessError> {
    if dirs.is_empty() {
        return Err(HarnessError::Config("compare needs at least one directory".into()));
    }
    let mut csv = String::from("dir,solver,problem,N,total_evals,acceptable_count,truth_ssr,best_ssr,start_hash\n");
    let mut rows = 0;
    for dir in dirs {
        match Summary::read(dir) {
            Ok(s) => {
                rows += 1;
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{:.16e},{:.16e},{}",
                    dir.display(),
                    s.solver,
                    s.problem,
                    s.n,
                    s.total_evals,
                    s.acceptable_count,
                    s.truth_ssr,
                    s.best_ssr,
                    s.start_hash
                );
            }
            Err(e) => log::warn!("skipping {}: {e}", dir.display()),
        }
    }
    if rows == 0 {
        return Err(HarnessError::Runtime("no summary.json found in any directory".into()));
    }
    Ok(csv)
}

/// Writes `dataset.csv` and `dataset.json` for `id` into `out`.
pub fn make_data(id: ProblemId, opts: &DataOptions, out: &Path) -> Result<Dataset, HarnessError> {
    if !(opts.noise_sd_frac.is_finite() && opts.noise_sd_frac >= 0.0) {
        return Err(HarnessError::Config(format!("noise must be non-negative, got {}", opts.noise_sd_frac)));
    }
    let data = problems::generate_dataset(id, opts)?;
    data.write(out)?;
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_spec(out: &Path) -> ExperimentSpec {
        ExperimentSpec {
            problem: ProblemId::Toy1d,
            n: 20,
            k_max: 15,
            out: out.to_path_buf(),
            ..Default::default()
        }
    }

    #[test]
    fn writes_all_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let o = run_experiment(&toy_spec(dir.path())).unwrap();
        for f in ["cluster_final.csv", "trace.csv", "threshold_curve.csv", "eval_curve.csv", "summary.json", "spec.json"] {
            assert!(dir.path().join(f).is_file(), "{f}");
        }
        assert_eq!(Summary::read(dir.path()).unwrap(), o.summary);
        assert_eq!(o.summary.total_evals, o.cgn.unwrap().1.total_evals());
    }

    #[test]
    fn lm_and_cgn_share_starts() {
        let dir = tempfile::tempdir().unwrap();
        let a = run_experiment(&toy_spec(&dir.path().join("a"))).unwrap();
        let b = run_experiment(&ExperimentSpec { solver: Solver::Lm, ..toy_spec(&dir.path().join("b")) }).unwrap();
        assert_eq!(a.summary.start_hash, b.summary.start_hash);
        assert_eq!(b.lm.unwrap().len(), 20);
    }

    #[test]
    fn sweep_rejects_before_running() {
        let dir = tempfile::tempdir().unwrap();
        let err = sweep(&toy_spec(dir.path()), SweepAxis::LambdaInit, &[0.01, 0.0]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(!dir.path().join("lambda_init_0.01").exists());
    }

    #[test]
    fn compare_skips_missing() {
        let dir = tempfile::tempdir().unwrap();
        run_experiment(&toy_spec(&dir.path().join("a"))).unwrap();
        let csv = compare(&[dir.path().join("a"), dir.path().join("missing")]).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(compare(&[]).is_err());
    }
}
