use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_lengths(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.len() != yhat.len() {
        return Err(Error::validation(format!(
            "{} targets but {} predictions",
            y.len(),
            yhat.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::validation("metrics need at least one row"));
    }
    Ok(())
}

/// Mean squared error.
pub fn mse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_lengths(y, yhat)?;
    let s: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(s / y.len() as f64)
}

/// Root mean of squared relative errors. Every target must be nonzero.
pub fn rnmse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_lengths(y, yhat)?;
    if let Some(i) = y.iter().position(|&v| v == 0.0) {
        return Err(Error::validation(format!(
            "rnmse undefined: target is zero at row {}",
            i + 1
        )));
    }
    let s: f64 = y.iter().zip(yhat).map(|(a, b)| ((a - b) / a).powi(2)).sum();
    Ok((s / y.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentMetrics {
    pub rows: usize,
    pub mse: f64,
    pub rnmse: Option<f64>,
}

impl SegmentMetrics {
    pub fn compute(y: &[f64], yhat: &[f64]) -> Result<Self> {
        Ok(Self {
            rows: y.len(),
            mse: mse(y, yhat)?,
            rnmse: rnmse(y, yhat).ok(),
        })
    }
}

/// Overall metrics plus breakdowns over named row subsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mse: f64,
    /// `None` when some target is zero.
    pub rnmse: Option<f64>,
    pub segments: BTreeMap<String, SegmentMetrics>,
}

impl Metrics {
    pub fn compute(y: &[f64], yhat: &[f64]) -> Result<Self> {
        let all = SegmentMetrics::compute(y, yhat)?;
        Ok(Self {
            mse: all.mse,
            rnmse: all.rnmse,
            segments: BTreeMap::new(),
        })
    }

    /// Adds a breakdown over `rows` (indices into `y`).
    pub fn with_segment(mut self, name: &str, y: &[f64], yhat: &[f64], rows: &[usize]) -> Result<Self> {
        check_lengths(y, yhat)?;
        if let Some(&r) = rows.iter().find(|&&r| r >= y.len()) {
            return Err(Error::validation(format!("segment row {r} out of range")));
        }
        let ys: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
        let ps: Vec<f64> = rows.iter().map(|&r| yhat[r]).collect();
        self.segments.insert(name.to_string(), SegmentMetrics::compute(&ys, &ps)?);
        Ok(self)
    }
}
