//! Synthetic observation sets with multiplicative Gaussian noise.

use std::fs;
use std::io;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::linalg::Vector;
use crate::problem::{Model, ResidualScale};

/// Noise draws are truncated at this many standard deviations.
pub const NOISE_CLIP: f64 = 5.0;

/// Stream of the dataset generator; member streams start from zero so the
/// two never overlap.
const NOISE_STREAM: u64 = u64::MAX;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("model is not evaluable at the generating parameters")]
    TruthNotEvaluable,
    #[error("{0} labels given for {1} observations")]
    Labels(usize, usize),
    #[error("noise fraction must be finite and non-negative, got {0}")]
    Noise(f64),
    #[error("observation {0} is not positive, incompatible with log residuals")]
    NonPositive(usize),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed dataset csv line {0}: {1}")]
    Csv(usize, String),
}

/// Time and dose label of one observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationLabel {
    pub time: f64,
    pub dose_level: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub problem: String,
    pub y_star: Vec<f64>,
    pub labels: Vec<ObservationLabel>,
    pub truth_x: Vec<f64>,
    pub seed: u64,
    pub noise_sd_frac: f64,
    pub residual_scale: ResidualScale,
    /// SSR of `truth_x` against `y_star` in `residual_scale`.
    pub truth_ssr: f64,
}

/// JSON sidecar written next to `dataset.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Sidecar {
    problem: String,
    truth_x: Vec<f64>,
    seed: u64,
    noise_sd_frac: f64,
    residual_scale: ResidualScale,
    truth_ssr: f64,
}

/// Standard normal draws by inverse CDF on the seeded uniform stream,
/// clipped to `±NOISE_CLIP`.
pub fn standard_normals(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(NOISE_STREAM);
    let normal = Normal::standard();
    (0..count)
        .map(|_| normal.inverse_cdf(rng.random::<f64>()).clamp(-NOISE_CLIP, NOISE_CLIP))
        .collect()
}

/// `y* = f(truth_x)·(1 + σ z)` with `z` from [`standard_normals`].
pub fn make_dataset(
    problem: &str,
    model: &dyn Model,
    truth_x: &[f64],
    labels: Vec<ObservationLabel>,
    noise_sd_frac: f64,
    seed: u64,
    residual_scale: ResidualScale,
) -> Result<Dataset, DatasetError> {
    if !(noise_sd_frac.is_finite() && noise_sd_frac >= 0.0) {
        return Err(DatasetError::Noise(noise_sd_frac));
    }
    let clean = model.eval(truth_x).ok_or(DatasetError::TruthNotEvaluable)?;
    if labels.len() != clean.len() {
        return Err(DatasetError::Labels(labels.len(), clean.len()));
    }
    let z = standard_normals(seed, clean.len());
    let y_star: Vec<f64> = clean
        .iter()
        .zip(&z)
        .map(|(&f, &zi)| f * (1.0 + noise_sd_frac * zi))
        .collect();
    if residual_scale == ResidualScale::Log10 {
        if let Some(k) = y_star.iter().position(|&v| !(v > 0.0)) {
            return Err(DatasetError::NonPositive(k));
        }
    }
    let truth_ssr = ssr(&clean, &y_star, residual_scale);
    Ok(Dataset {
        problem: problem.to_string(),
        y_star,
        labels,
        truth_x: truth_x.to_vec(),
        seed,
        noise_sd_frac,
        residual_scale,
        truth_ssr,
    })
}

fn ssr(model: &[f64], data: &[f64], scale: ResidualScale) -> f64 {
    let a = Vector::from_iterator(model.len(), model.iter().map(|&v| scale.apply(v)));
    let b = Vector::from_iterator(data.len(), data.iter().map(|&v| scale.apply(v)));
    (a - b).norm_squared()
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.y_star.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_star.is_empty()
    }

    /// Writes `dataset.csv` and `dataset.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), DatasetError> {
        fs::create_dir_all(dir)?;
        let mut csv = String::from("obs_index,time,dose_level,y_star\n");
        for (k, (label, y)) in self.labels.iter().zip(&self.y_star).enumerate() {
            csv.push_str(&format!("{k},{:.16e},{},{:.16e}\n", label.time, label.dose_level, y));
        }
        fs::write(dir.join("dataset.csv"), csv)?;
        let sidecar = Sidecar {
            problem: self.problem.clone(),
            truth_x: self.truth_x.clone(),
            seed: self.seed,
            noise_sd_frac: self.noise_sd_frac,
            residual_scale: self.residual_scale,
            truth_ssr: self.truth_ssr,
        };
        fs::write(dir.join("dataset.json"), serde_json::to_string_pretty(&sidecar)? + "\n")?;
        Ok(())
    }

    /// Reads a dataset written by [`Dataset::write`].
    pub fn read(dir: &Path) -> Result<Self, DatasetError> {
        let sidecar: Sidecar = serde_json::from_str(&fs::read_to_string(dir.join("dataset.json"))?)?;
        let text = fs::read_to_string(dir.join("dataset.csv"))?;
        let mut y_star = Vec::new();
        let mut labels = Vec::new();
        for (line_no, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(DatasetError::Csv(line_no + 1, line.to_string()));
            }
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| DatasetError::Csv(line_no + 1, line.to_string()));
            labels.push(ObservationLabel {
                time: parse(fields[1])?,
                dose_level: fields[2].trim().to_string(),
            });
            y_star.push(parse(fields[3])?);
        }
        Ok(Self {
            problem: sidecar.problem,
            y_star,
            labels,
            truth_x: sidecar.truth_x,
            seed: sidecar.seed,
            noise_sd_frac: sidecar.noise_sd_frac,
            residual_scale: sidecar.residual_scale,
            truth_ssr: sidecar.truth_ssr,
        })
    }
}
