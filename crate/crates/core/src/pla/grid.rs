use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Candidate knot locations for hinge basis functions, strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGrid {
    thresholds: Vec<f64>,
}

impl ThresholdGrid {
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.iter().any(|t| !t.is_finite()) {
            return Err(Error::validation("thresholds must be finite"));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation("thresholds must be strictly increasing"));
        }
        Ok(Self { thresholds })
    }

    pub fn empty() -> Self {
        Self {
            thresholds: Vec::new(),
        }
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }
}

/// Quantile grid: the values at ranks `l / (size + 1)`, `l = 1..=size`,
/// interpolated linearly between order statistics, deduplicated and kept
/// strictly inside `(min, max)`.
///
/// When every quantile collapses onto an extreme value (a heavily imbalanced
/// binary column, say), the midpoint between the minimum and the next distinct
/// value is used so the feature still gets one knot.
pub fn build_threshold_grid(values: &[f64], size: usize) -> Result<ThresholdGrid> {
    if values.len() < 2 {
        return Err(Error::validation("threshold grid needs at least 2 values"));
    }
    if size == 0 {
        return Err(Error::validation("grid size must be positive"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("threshold grid input must be finite"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    if lo == hi {
        return Err(Error::validation(format!(
            "all {} values equal {lo}; no thresholds possible",
            values.len()
        )));
    }

    let last = (sorted.len() - 1) as f64;
    let mut out: Vec<f64> = Vec::with_capacity(size);
    for l in 1..=size {
        let h = l as f64 / (size + 1) as f64 * last;
        let below = h.floor() as usize;
        let frac = h - below as f64;
        let q = if frac == 0.0 || below + 1 >= sorted.len() {
            sorted[below]
        } else {
            sorted[below] + frac * (sorted[below + 1] - sorted[below])
        };
        if q > lo && q < hi && out.last().is_none_or(|&prev| q > prev) {
            out.push(q);
        }
    }
    if out.is_empty() {
        let next = sorted.iter().copied().find(|&v| v > lo).unwrap_or(hi);
        let mid = lo + 0.5 * (next - lo);
        if mid > lo && mid < hi {
            out.push(mid);
        }
    }
    ThresholdGrid::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolated_median() {
        let g = build_threshold_grid(&[4.0, 2.0, 3.0, 1.0], 1).unwrap();
        assert_eq!(g.thresholds(), &[2.5]);
    }

    #[test]
    fn rank_quantiles_on_two_points() {
        let g = build_threshold_grid(&[0.0, 1.0], 3).unwrap();
        assert_eq!(g.thresholds(), &[0.25, 0.5, 0.75]);
    }

    #[test]
    fn constant_values_rejected() {
        assert!(build_threshold_grid(&[5.0, 5.0, 5.0], 4).is_err());
    }

    #[test]
    fn duplicates_removed_and_interior_only() {
        let vals = [0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 2.0, 2.0];
        let g = build_threshold_grid(&vals, 16).unwrap();
        let t = g.thresholds();
        assert!(t.windows(2).all(|w| w[0] < w[1]));
        assert!(t.iter().all(|&x| x > 0.0 && x < 2.0));
        assert!(t.len() <= 16);
    }

    #[test]
    fn imbalanced_binary_gets_midpoint() {
        let mut vals = vec![0.0; 95];
        vals.extend([1.0; 5]);
        let g = build_threshold_grid(&vals, 8).unwrap();
        assert_eq!(g.thresholds(), &[0.5]);
    }

    #[test]
    fn grid_rejects_unsorted() {
        assert!(ThresholdGrid::new(vec![1.0, 0.5]).is_err());
        assert!(ThresholdGrid::new(vec![1.0, 1.0]).is_err());
    }
}
