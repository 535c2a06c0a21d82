use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSpec;
use crate::dataset::{apply_normalization, fit_normalization, Dataset, FoldPlan, NormStats};
use crate::error::{Error, Result};
use crate::gam::{train_normalized, TrainConfig};

use super::metrics::mse;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Held-out MSE in training target units (standardized when the config
    /// standardizes the target).
    pub mse: f64,
    /// Held-out MSE in raw target units.
    pub mse_raw: f64,
    pub final_train_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub folds: Vec<FoldResult>,
    pub mean_mse: f64,
    pub std_mse: f64,
    pub mean_mse_raw: f64,
}

/// Normalization statistics fitted on the training rows of `fold` only.
pub fn fold_normalization(d: &Dataset, plan: &FoldPlan, fold: usize, standardize_target: bool) -> Result<NormStats> {
    fit_normalization(&d.subset(&plan.train_rows(fold)), standardize_target)
}

fn run_fold(d: &Dataset, cfg: &TrainConfig, constraints: &[ConstraintSpec], plan: &FoldPlan, fold: usize) -> Result<FoldResult> {
    let train_rows = plan.train_rows(fold);
    let test_rows = plan.test_rows(fold);
    let train = d.subset(&train_rows);
    let norm = fit_normalization(&train, cfg.standardize_target)?;
    let dn = apply_normalization(&train, &norm)?;
    let model = train_normalized(&dn, norm, cfg, constraints, None)?;
    let test = d.subset(&test_rows);
    let pred = model.predict_dataset(&test)?;
    let ts = model.target_stats();
    let y_raw = test.raw_target();
    let y_t: Vec<f64> = y_raw.iter().map(|&v| ts.transform(v)).collect();
    let p_t: Vec<f64> = pred.iter().map(|&v| ts.transform(v)).collect();
    Ok(FoldResult {
        fold,
        n_train: train_rows.len(),
        n_test: test_rows.len(),
        mse: mse(&y_t, &p_t)?,
        mse_raw: mse(y_raw, &pred)?,
        final_train_loss: model.loss_trace().last().copied().unwrap_or(f64::NAN),
    })
}

/// K-fold cross-validation. Each fold fits its own normalization on its
/// training rows. Folds run in parallel; results are in fold order.
pub fn cross_validate(d: &Dataset, cfg: &TrainConfig, plan: &FoldPlan) -> Result<CvResult> {
    cross_validate_with(d, cfg, &[], plan)
}

pub fn cross_validate_with(
    d: &Dataset,
    cfg: &TrainConfig,
    constraints: &[ConstraintSpec],
    plan: &FoldPlan,
) -> Result<CvResult> {
    cfg.validate()?;
    if plan.k < 2 {
        return Err(Error::validation(format!("cross-validation needs at least 2 folds, got {}", plan.k)));
    }
    if plan.assignments.len() != d.n_rows() {
        return Err(Error::validation(format!(
            "fold plan covers {} rows, dataset has {}",
            plan.assignments.len(),
            d.n_rows()
        )));
    }
    let folds: Vec<FoldResult> = (0..plan.k)
        .into_par_iter()
        .map(|f| run_fold(d, cfg, constraints, plan, f))
        .collect::<Result<_>>()?;
    let k = folds.len() as f64;
    let mean_mse = folds.iter().map(|f| f.mse).sum::<f64>() / k;
    let std_mse = (folds.iter().map(|f| (f.mse - mean_mse).powi(2)).sum::<f64>() / k).sqrt();
    let mean_mse_raw = folds.iter().map(|f| f.mse_raw).sum::<f64>() / k;
    Ok(CvResult {
        folds,
        mean_mse,
        std_mse,
        mean_mse_raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> TrainConfig {
        TrainConfig {
            rounds: 10,
            grid_size: 16,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn one_result_per_fold() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let d = Dataset::new(vec!["x".into()], vec![x.clone()], x, None).unwrap();
        let plan = FoldPlan::new(10, 5, 3).unwrap();
        let r = cross_validate(&d, &small_cfg(), &plan).unwrap();
        assert_eq!(r.folds.len(), 5);
        assert_eq!(r, cross_validate(&d, &small_cfg(), &plan).unwrap());
    }

    #[test]
    fn plan_size_mismatch() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let d = Dataset::new(vec!["x".into()], vec![x.clone()], x, None).unwrap();
        let plan = FoldPlan::new(12, 3, 0).unwrap();
        assert!(cross_validate(&d, &small_cfg(), &plan).is_err());
    }
}
