//! Metrics, cross-validation and synthetic data.

mod cv;
mod metrics;
mod report;
mod synthetic;

pub use cv::{cross_validate, cross_validate_with, fold_normalization, CvResult, FoldResult};
pub use metrics::{mse, rnmse, Metrics, SegmentMetrics};
pub use report::EvalReport;
pub use synthetic::{
    gen_synthetic_load, heatwave_rows, temperature_response, HEATWAVE_TAG, LOAD_FEATURES, SLOTS_PER_DAY,
    START_DAY_OF_YEAR,
};
