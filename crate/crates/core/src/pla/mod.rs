//! Piecewise-linear approximation of weighted residuals by hinge functions.

mod function;
mod grid;
mod kernels;
mod omp;

pub use function::{evaluate_pla, hinge, reverse_hinge, PiecewiseLinearFn};
pub use grid::{build_threshold_grid, ThresholdGrid};
pub use kernels::{breakpoints, weighted_correlations, weighted_norms, ColumnPair};
pub use omp::{
    fit_pla, fit_pla_with, select_basis, solve_weights, solve_weights_masked, Basis, PlaFit,
    PrefixStats, Selection, SelectionState,
};
