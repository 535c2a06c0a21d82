use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::gam::TrainConfig;

use super::cv::CvResult;

/// Cross-validation outcome for one dataset and configuration. Contains no
/// timestamps, so identical runs produce identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub config_hash: String,
    pub seed: u64,
    pub folds: usize,
    pub n_rows: usize,
    pub config: TrainConfig,
    pub fold_mse: Vec<f64>,
    pub mean_mse: f64,
    pub std_mse: f64,
    pub mean_mse_raw: f64,
}

impl EvalReport {
    pub fn new(dataset: &str, cfg: &TrainConfig, n_rows: usize, cv: &CvResult) -> Self {
        Self {
            dataset: dataset.to_string(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
            folds: cv.folds.len(),
            n_rows,
            config: cfg.clone(),
            fold_mse: cv.folds.iter().map(|f| f.mse).collect(),
            mean_mse: cv.mean_mse,
            std_mse: cv.std_mse,
            mean_mse_raw: cv.mean_mse_raw,
        }
    }

    /// File-name key `<dataset>-<config hash>-seed<seed>`.
    pub fn key(&self) -> String {
        format!("{}-{}-seed{}", self.dataset, self.config_hash, self.seed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "dataset {}  config {}  seed {}  rows {}", self.dataset, self.config_hash, self.seed, self.n_rows);
        let _ = writeln!(out, "{:>6}  {:>12}", "fold", "mse");
        for (i, m) in self.fold_mse.iter().enumerate() {
            let _ = writeln!(out, "{:>6}  {:>12.6}", i, m);
        }
        let _ = writeln!(out, "{:>6}  {:>12.6}  (std {:.6}, raw-unit mse {:.6})", "mean", self.mean_mse, self.std_mse, self.mean_mse_raw);
        out
    }
}
