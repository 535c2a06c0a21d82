//! Interpretable additive regression with piecewise-linear shape functions.
//!
//! Each feature gets a shape function learned by cyclic boosting; every
//! boosting increment is a sparse hinge expansion chosen by regularized
//! orthogonal matching pursuit. Shape functions can be constrained to be
//! increasing, decreasing, convex or concave over a range, and sample weights
//! can be edited between retrains.

pub mod constraints;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod gam;
pub mod pla;

pub use constraints::{ConstraintKind, ConstraintSpec};
pub use dataset::{load_csv, Dataset, FoldPlan, NormStats};
pub use error::{Error, Result};
pub use gam::{load_model, save_model, train, GamModel, ShapeFunction, TrainConfig};
