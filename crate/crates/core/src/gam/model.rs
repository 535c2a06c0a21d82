use serde::{Deserialize, Serialize};

use crate::constraints::{anchor_window, is_feasible, ConstraintSpec};
use crate::dataset::{ColumnStats, Dataset, NormStats};
use crate::error::{Error, Result};

use super::config::TrainConfig;
use super::shape::ShapeFunction;

pub const MODEL_FORMAT: &str = "igam-model";
pub const MODEL_VERSION: u64 = 1;

/// Bookkeeping recorded by the trainer.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    /// Weighted MSE on the training rows after each round, raw target units.
    pub loss_trace: Vec<f64>,
    pub n_rows: usize,
    /// Per feature, training-row counts in each anchor-aligned bin.
    #[serde(default)]
    pub bin_counts: Vec<Vec<u64>>,
    /// Per feature, weighted mean contribution over the training rows.
    #[serde(default)]
    pub display_offsets: Vec<f64>,
    /// Seconds since the Unix epoch, when the caller records it.
    #[serde(default)]
    pub trained_at: Option<u64>,
}

/// Additive model: prediction is the sum of one shape function per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GamModel {
    pub feature_names: Vec<String>,
    pub shapes: Vec<ShapeFunction>,
    pub norm: NormStats,
    pub config: TrainConfig,
    pub constraints: Vec<ConstraintSpec>,
    /// Sum of the display offsets, normalized target units. Never used by
    /// prediction.
    pub display_intercept: f64,
    pub training: TrainingMeta,
}

/// A shape function prepared for display.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeView {
    pub feature: String,
    pub anchors: Vec<f64>,
    pub values: Vec<f64>,
    pub left_slope: f64,
    pub right_slope: f64,
    /// Amount subtracted from every value (0 unless centered).
    pub offset: f64,
    /// Constant that, added to the per-feature values summed over all
    /// features, gives the prediction in the same units.
    pub intercept: f64,
}

impl GamModel {
    pub fn n_features(&self) -> usize {
        self.shapes.len()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn target_stats(&self) -> ColumnStats {
        self.norm.target_stats()
    }

    pub fn loss_trace(&self) -> &[f64] {
        &self.training.loss_trace
    }

    /// Consistency checks applied after decoding.
    pub fn validate(&self) -> Result<()> {
        let d = self.feature_names.len();
        if self.shapes.len() != d || self.norm.features.len() != d {
            return Err(Error::validation(format!(
                "model has {d} feature names, {} shapes and {} normalization entries",
                self.shapes.len(),
                self.norm.features.len()
            )));
        }
        if self.norm.feature_names != self.feature_names {
            return Err(Error::validation("normalization feature names differ from model"));
        }
        for (j, s) in self.shapes.iter().enumerate() {
            if s.feature() != j {
                return Err(Error::validation(format!(
                    "shape at position {j} is tagged for feature {}",
                    s.feature()
                )));
            }
            s.validate()?;
        }
        for st in self.norm.features.iter().chain(self.norm.target.iter()) {
            if !(st.mean.is_finite() && st.scale.is_finite() && st.scale > 0.0) {
                return Err(Error::validation("invalid normalization statistics"));
            }
        }
        for c in &self.constraints {
            if c.feature >= d {
                return Err(Error::validation(format!(
                    "constraint '{}' refers to feature {} of {d}",
                    c.id, c.feature
                )));
            }
            c.check_range()?;
        }
        self.config.validate()
    }

    fn check_width(&self, got: usize) -> Result<()> {
        if got != self.n_features() {
            return Err(Error::validation(format!(
                "model expects {} features, input has {got}",
                self.n_features()
            )));
        }
        Ok(())
    }

    /// Sum of shape contributions for one row of normalized features.
    #[inline]
    pub fn predict_normalized_row(&self, z: &[f64]) -> f64 {
        let mut s = 0.0;
        for (shape, &x) in self.shapes.iter().zip(z) {
            s += shape.evaluate(x);
        }
        s
    }

    /// Predictions in raw target units for column-major raw features.
    pub fn predict(&self, columns: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check_width(columns.len())?;
        let n = columns.first().map_or(0, Vec::len);
        if let Some(c) = columns.iter().position(|c| c.len() != n) {
            return Err(Error::validation(format!(
                "feature '{}' has {} rows, expected {n}",
                self.feature_names[c],
                columns[c].len()
            )));
        }
        let ts = self.target_stats();
        let mut z = vec![0.0; self.n_features()];
        Ok((0..n)
            .map(|i| {
                for (j, col) in columns.iter().enumerate() {
                    z[j] = self.norm.features[j].transform(col[i]);
                }
                ts.inverse(self.predict_normalized_row(&z))
            })
            .collect())
    }

    /// Predictions for one raw feature row.
    pub fn predict_row(&self, row: &[f64]) -> Result<f64> {
        self.check_width(row.len())?;
        let z: Vec<f64> = row
            .iter()
            .zip(&self.norm.features)
            .map(|(&x, st)| st.transform(x))
            .collect();
        Ok(self.target_stats().inverse(self.predict_normalized_row(&z)))
    }

    /// Predictions on the raw features of `d`, which must share the schema.
    pub fn predict_dataset(&self, d: &Dataset) -> Result<Vec<f64>> {
        if d.feature_names() != self.feature_names.as_slice() {
            return Err(Error::validation(format!(
                "dataset features [{}] do not match model features [{}]",
                d.feature_names().join(","),
                self.feature_names.join(",")
            )));
        }
        let cols: Vec<Vec<f64>> = (0..d.n_features()).map(|j| d.raw_column(j).to_vec()).collect();
        self.predict(&cols)
    }

    /// Per-feature display data. With `raw_units` anchors are mapped back to
    /// feature units and values to target units; with `centered` values are
    /// shifted to zero weighted training mean.
    pub fn shape_values(&self, d: usize, raw_units: bool, centered: bool) -> Result<ShapeView> {
        let shape = self.shapes.get(d).ok_or_else(|| {
            Error::validation(format!("feature index {d} out of range (model has {})", self.n_features()))
        })?;
        let offset = if centered {
            self.training.display_offsets.get(d).copied().unwrap_or(0.0)
        } else {
            0.0
        };
        let intercept_norm = if centered { self.display_intercept } else { 0.0 };
        let (fs, ts) = if raw_units {
            (self.norm.features[d], self.target_stats())
        } else {
            (ColumnStats::IDENTITY, ColumnStats::IDENTITY)
        };
        let anchors: Vec<f64> = shape.anchors().iter().map(|&a| fs.inverse(a)).collect();
        let values: Vec<f64> = shape.values().iter().map(|&v| (v - offset) * ts.scale).collect();
        let (left_slope, right_slope) = edge_slopes(&anchors, &values);
        Ok(ShapeView {
            feature: self.feature_names[d].clone(),
            anchors,
            values,
            left_slope,
            right_slope,
            offset: offset * ts.scale,
            intercept: ts.inverse(intercept_norm),
        })
    }

    /// Descriptions of constraints whose anchor window is currently violated.
    pub fn constraint_violations(&self) -> Vec<String> {
        self.constraints
            .iter()
            .filter_map(|c| {
                let shape = self.shapes.get(c.feature)?;
                let (lo, hi) = c.normalized_range(&self.norm.features[c.feature]);
                match anchor_window(shape.anchors(), lo, hi) {
                    Ok(w) if is_feasible(c.kind, &shape.values()[w.clone()], &shape.anchors()[w.clone()]) => None,
                    Ok(_) => Some(format!("constraint '{}' ({}) is not satisfied", c.id, c.kind)),
                    Err(e) => Some(format!("constraint '{}': {e}", c.id)),
                }
            })
            .collect()
    }
}

fn edge_slopes(a: &[f64], v: &[f64]) -> (f64, f64) {
    let m = a.len();
    if m < 2 {
        return (0.0, 0.0);
    }
    (
        (v[1] - v[0]) / (a[1] - a[0]),
        (v[m - 1] - v[m - 2]) / (a[m - 1] - a[m - 2]),
    )
}

#[derive(Serialize)]
struct EnvelopeOut<'a> {
    format: &'a str,
    version: u64,
    model: &'a GamModel,
}

/// Serializes a model as a versioned JSON document.
pub fn save_model(m: &GamModel) -> Result<Vec<u8>> {
    serde_json::to_vec_pretty(&EnvelopeOut {
        format: MODEL_FORMAT,
        version: MODEL_VERSION,
        model: m,
    })
    .map_err(|e| Error::Decode(format!("cannot encode model: {e}")))
}

/// Decodes a document written by [`save_model`].
pub fn load_model(bytes: &[u8]) -> Result<GamModel> {
    let doc: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| Error::Decode(format!("model file is not valid JSON: {e}")))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::Decode("model file must be a JSON object".into()))?;
    match obj.get("format").and_then(|f| f.as_str()) {
        Some(MODEL_FORMAT) => {}
        Some(other) => return Err(Error::Decode(format!("unknown model format '{other}'"))),
        None => return Err(Error::Decode("model file has no format tag".into())),
    }
    let version = obj
        .get("version")
        .ok_or_else(|| Error::Decode("model file has no version".into()))?;
    let found = version
        .as_u64()
        .ok_or_else(|| Error::Decode(format!("model version must be an integer, got {version}")))?;
    if found != MODEL_VERSION {
        return Err(Error::Version {
            found,
            expected: MODEL_VERSION,
        });
    }
    let model = obj
        .get("model")
        .ok_or_else(|| Error::Decode("model file has no model payload".into()))?;
    let m: GamModel = GamModel::deserialize(model).map_err(|e| Error::Decode(format!("bad model payload: {e}")))?;
    m.validate().map_err(|e| Error::Decode(format!("inconsistent model: {e}")))?;
    Ok(m)
}
