//! Additive model of per-feature piecewise-linear shape functions, trained by
//! cyclic boosting with optional shape constraints.

mod config;
mod model;
mod shape;
mod train;

pub use config::TrainConfig;
pub use model::{load_model, save_model, GamModel, ShapeView, TrainingMeta, MODEL_FORMAT, MODEL_VERSION};
pub use shape::ShapeFunction;
pub use train::{
    boost_feature, compute_residuals, init_model, train, train_from, train_normalized, BoostState,
};
