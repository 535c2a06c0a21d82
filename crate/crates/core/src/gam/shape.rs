use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A shape function stored as values on strictly increasing anchors.
///
/// Between anchors the function is the straight line through the neighbouring
/// values; outside the anchor span it continues the edge segment's slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeFunction {
    feature: usize,
    anchors: Vec<f64>,
    values: Vec<f64>,
}

impl ShapeFunction {
    pub fn new(feature: usize, anchors: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let s = Self {
            feature,
            anchors,
            values,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn zeros(feature: usize, anchors: Vec<f64>) -> Result<Self> {
        let values = vec![0.0; anchors.len()];
        Self::new(feature, anchors, values)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.anchors.is_empty() {
            return Err(Error::validation("shape function needs at least one anchor"));
        }
        if self.anchors.len() != self.values.len() {
            return Err(Error::validation(format!(
                "{} anchors but {} values",
                self.anchors.len(),
                self.values.len()
            )));
        }
        if self
            .anchors
            .iter()
            .chain(&self.values)
            .any(|v| !v.is_finite())
        {
            return Err(Error::validation("shape anchors and values must be finite"));
        }
        if self.anchors.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::validation("shape anchors must be strictly increasing"));
        }
        Ok(())
    }

    pub fn feature(&self) -> usize {
        self.feature
    }

    pub fn anchors(&self) -> &[f64] {
        &self.anchors
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.feature, self.anchors.clone(), values)
    }

    /// Index `j` of the segment `[a_j, a_{j+1}]` used to evaluate `x`;
    /// clamped to the edge segments outside the span.
    pub fn segment(&self, x: f64) -> usize {
        let m = self.anchors.len();
        if m < 2 {
            return 0;
        }
        let p = self.anchors.partition_point(|&a| a <= x);
        p.saturating_sub(1).min(m - 2)
    }

    /// Evaluates on a known segment (see [`ShapeFunction::segment`]).
    #[inline]
    pub fn evaluate_on(&self, j: usize, x: f64) -> f64 {
        if self.anchors.len() < 2 {
            return self.values[0];
        }
        let (a0, a1) = (self.anchors[j], self.anchors[j + 1]);
        let (v0, v1) = (self.values[j], self.values[j + 1]);
        if x == a0 {
            v0
        } else if x == a1 {
            v1
        } else {
            v0 + (v1 - v0) * ((x - a0) / (a1 - a0))
        }
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.evaluate_on(self.segment(x), x)
    }

    /// Slopes of the first and last segments (0 for a single anchor).
    pub fn edge_slopes(&self) -> (f64, f64) {
        let m = self.anchors.len();
        if m < 2 {
            return (0.0, 0.0);
        }
        let slope = |j: usize| {
            (self.values[j + 1] - self.values[j]) / (self.anchors[j + 1] - self.anchors[j])
        };
        (slope(0), slope(m - 2))
    }

    /// Number of samples per anchor-aligned bin `[a_j, a_{j+1})` (the last
    /// bin is closed). Samples outside the span go to the edge bins.
    pub fn bin_counts(&self, xs: &[f64]) -> Vec<u64> {
        let bins = self.anchors.len().saturating_sub(1).max(1);
        let mut counts = vec![0u64; bins];
        for &x in xs {
            counts[self.segment(x)] += 1;
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape() -> ShapeFunction {
        ShapeFunction::new(0, vec![0.0, 1.0, 3.0], vec![1.0, 3.0, 2.0]).unwrap()
    }

    #[test]
    fn interpolation_and_anchor_hits() {
        let s = shape();
        assert_eq!(s.evaluate(0.0), 1.0);
        assert_eq!(s.evaluate(1.0), 3.0);
        assert_eq!(s.evaluate(3.0), 2.0);
        assert_eq!(s.evaluate(0.5), 2.0);
        assert_eq!(s.evaluate(2.0), 2.5);
    }

    #[test]
    fn linear_extrapolation() {
        let s = shape();
        assert_eq!(s.evaluate(-1.0), -1.0);
        assert_eq!(s.evaluate(5.0), 1.0);
        assert_eq!(s.edge_slopes(), (2.0, -0.5));
    }

    #[test]
    fn single_anchor_is_constant() {
        let s = ShapeFunction::new(2, vec![4.0], vec![0.5]).unwrap();
        assert_eq!(s.evaluate(-10.0), 0.5);
        assert_eq!(s.evaluate(40.0), 0.5);
        assert_eq!(s.bin_counts(&[1.0, 2.0]), vec![2]);
    }

    #[test]
    fn bins_follow_segments() {
        let s = shape();
        assert_eq!(s.bin_counts(&[-5.0, 0.0, 0.5, 1.0, 2.9, 3.0, 10.0]), vec![3, 4]);
    }

    #[test]
    fn invalid_shapes_rejected() {
        assert!(ShapeFunction::new(0, vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(ShapeFunction::new(0, vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(ShapeFunction::new(0, vec![], vec![]).is_err());
        assert!(ShapeFunction::new(0, vec![0.0, 1.0], vec![f64::NAN, 1.0]).is_err());
    }
}
