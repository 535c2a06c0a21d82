//! Regularized orthogonal matching pursuit over the design
//! `A = [1, A^h, A^r]`, solving
//!
//! ```text
//! min_q (1/N) ‖W^½ (r − A q)‖² + λ ‖q‖²   s.t. at most K selected columns
//! ```
//!
//! The constant column is always in the active set and its coefficient is
//! left unpenalized. Each round picks the column (or hinge/reverse-hinge pair)
//! with the largest objective reduction `(bᵀWa)² / (aᵀWa + λN)` and then
//! refits all active coefficients jointly.

use nalgebra::{DMatrix, DVector};

use super::function::{hinge, reverse_hinge, PiecewiseLinearFn};
use super::grid::ThresholdGrid;
use super::kernels::{breakpoints, weighted_correlations_at, weighted_norms_at, ColumnPair};
use crate::error::{Error, Result};

/// One column of the implicit design matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Constant,
    Hinge(usize),
    ReverseHinge(usize),
}

impl Basis {
    /// Position in `[1, A^h, A^r]` for a grid of `l` thresholds.
    pub fn column_index(self, l: usize) -> usize {
        match self {
            Basis::Constant => 0,
            Basis::Hinge(j) => 1 + j,
            Basis::ReverseHinge(j) => 1 + l + j,
        }
    }
}

/// What a selection round adds to the active set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Column(Basis),
    /// Hinge and reverse hinge at the same threshold.
    Pair(usize),
}

/// Samples sorted by feature value together with everything about the hinge
/// columns that does not depend on the residual: breakpoints and weighted
/// column norms. Valid for as long as the feature values and weights are.
#[derive(Debug, Clone)]
pub struct PrefixStats {
    order: Vec<usize>,
    x: Vec<f64>,
    w: Vec<f64>,
    thresholds: Vec<f64>,
    breakpoints: Vec<usize>,
    norms: ColumnPair,
    /// `1ᵀ W a` for every hinge column.
    ones: ColumnPair,
    weight_sum: f64,
}

impl PrefixStats {
    /// Sorts `(x, w)` by `x` (stable on ties) and precomputes column norms.
    pub fn new(x: &[f64], w: &[f64], grid: &ThresholdGrid) -> Self {
        assert_eq!(x.len(), w.len(), "x and w lengths differ");
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
        let xs: Vec<f64> = order.iter().map(|&i| x[i]).collect();
        let ws: Vec<f64> = order.iter().map(|&i| w[i]).collect();
        let bp = breakpoints(&xs, grid);
        let norms = weighted_norms_at(&xs, &ws, grid.thresholds(), &bp);
        let ones = weighted_correlations_at(&xs, &vec![1.0; xs.len()], &ws, grid.thresholds(), &bp);
        let weight_sum = ws.iter().sum();
        Self {
            order,
            x: xs,
            w: ws,
            thresholds: grid.thresholds().to_vec(),
            breakpoints: bp,
            norms,
            ones,
            weight_sum,
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn n_thresholds(&self) -> usize {
        self.thresholds.len()
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn norms(&self) -> &ColumnPair {
        &self.norms
    }

    /// Reorders a per-row vector into sorted order.
    pub fn gather(&self, v: &[f64]) -> Vec<f64> {
        self.order.iter().map(|&i| v[i]).collect()
    }

    pub fn correlations(&self, b_sorted: &[f64]) -> ColumnPair {
        weighted_correlations_at(&self.x, b_sorted, &self.w, &self.thresholds, &self.breakpoints)
    }

    /// Explicit column values in sorted order.
    pub fn column(&self, basis: Basis) -> Vec<f64> {
        match basis {
            Basis::Constant => vec![1.0; self.n()],
            Basis::Hinge(j) => {
                let eta = self.thresholds[j];
                self.x.iter().map(|&x| hinge(x, eta)).collect()
            }
            Basis::ReverseHinge(j) => {
                let eta = self.thresholds[j];
                self.x.iter().map(|&x| reverse_hinge(x, eta)).collect()
            }
        }
    }

    fn weighted_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.w)
            .map(|((a, b), w)| w * a * b)
            .sum()
    }
}

/// Active set, coefficients and current residual of a PLA fit. The residual
/// is stored in the sorted order of the associated [`PrefixStats`].
#[derive(Debug, Clone)]
pub struct SelectionState {
    pub selected: Vec<Basis>,
    pub coeffs: Vec<f64>,
    pub residual: Vec<f64>,
    pub objective_trace: Vec<f64>,
}

impl SelectionState {
    fn is_selected(&self, b: Basis) -> bool {
        self.selected.contains(&b)
    }
}

#[inline]
fn gain(corr: f64, norm: f64, ridge: f64) -> f64 {
    let denom = norm + ridge;
    if denom > 0.0 {
        corr * corr / denom
    } else {
        0.0
    }
}

/// Picks the next column (single mode) or threshold pair (pairwise mode).
///
/// Scores are `(bᵀWa)² / (aᵀWa + λN)`; the lowest column index wins ties.
/// Returns `None` when no unselected candidate would reduce the objective.
pub fn select_basis(
    state: &SelectionState,
    stats: &PrefixStats,
    lambda: f64,
    pairwise: bool,
) -> Option<Selection> {
    let corr = stats.correlations(&state.residual);
    let bwb = stats.weighted_dot(&state.residual, &state.residual);
    best_selection(&corr, stats, bwb, lambda, pairwise, |b| state.is_selected(b))
}

fn best_selection(
    corr: &ColumnPair,
    stats: &PrefixStats,
    bwb: f64,
    lambda: f64,
    pairwise: bool,
    is_selected: impl Fn(Basis) -> bool,
) -> Option<Selection> {
    let ridge = lambda * stats.n() as f64;
    let norms = stats.norms();
    let l = stats.n_thresholds();
    let mut best: Option<(Selection, f64)> = None;
    let mut offer = |sel: Selection, score: f64| {
        if score > best.map_or(0.0, |b| b.1) {
            best = Some((sel, score));
        }
    };
    if pairwise {
        for j in 0..l {
            if is_selected(Basis::Hinge(j)) || is_selected(Basis::ReverseHinge(j)) {
                continue;
            }
            let s = gain(corr.hinge[j], norms.hinge[j], ridge)
                + gain(corr.rhinge[j], norms.rhinge[j], ridge);
            offer(Selection::Pair(j), s);
        }
    } else {
        for j in 0..l {
            if !is_selected(Basis::Hinge(j)) {
                offer(
                    Selection::Column(Basis::Hinge(j)),
                    gain(corr.hinge[j], norms.hinge[j], ridge),
                );
            }
        }
        for j in 0..l {
            if !is_selected(Basis::ReverseHinge(j)) {
                offer(
                    Selection::Column(Basis::ReverseHinge(j)),
                    gain(corr.rhinge[j], norms.rhinge[j], ridge),
                );
            }
        }
    }
    // reductions at rounding level of bᵀWb carry no signal
    best.filter(|&(_, s)| s > 1e-20 * bwb).map(|b| b.0)
}

/// Solves `(AᵀWA + λN I) q = AᵀWr` for explicit columns, penalizing every
/// coefficient.
pub fn solve_weights(
    columns: &[Vec<f64>],
    r: &[f64],
    w: &[f64],
    lambda: f64,
    n: usize,
) -> Result<Vec<f64>> {
    let mask = vec![true; columns.len()];
    solve_weights_masked(columns, r, w, lambda, n, &mask)
}

/// As [`solve_weights`], with the ridge term applied only where `penalized`.
pub fn solve_weights_masked(
    columns: &[Vec<f64>],
    r: &[f64],
    w: &[f64],
    lambda: f64,
    n: usize,
    penalized: &[bool],
) -> Result<Vec<f64>> {
    if columns.is_empty() {
        return Err(Error::validation("no columns to solve for"));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::validation(format!("lambda must be >= 0, got {lambda}")));
    }
    let dot = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).zip(w).map(|((a, b), w)| w * a * b).sum()
    };
    let k = columns.len();
    let mut gram = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..=i {
            let v = dot(&columns[i], &columns[j]);
            gram[i][j] = v;
            gram[j][i] = v;
        }
    }
    let rhs: Vec<f64> = columns.iter().map(|c| dot(c, r)).collect();
    solve_normal_equations(&gram, &rhs, lambda * n as f64, penalized)
}

fn solve_normal_equations(
    gram: &[Vec<f64>],
    rhs: &[f64],
    ridge: f64,
    penalized: &[bool],
) -> Result<Vec<f64>> {
    let k = rhs.len();
    let m = DMatrix::from_fn(k, k, |i, j| {
        gram[i][j] + if i == j && penalized[i] { ridge } else { 0.0 }
    });
    let diag: Vec<f64> = (0..k).map(|i| m[(i, i)]).collect();
    let singular = || {
        Error::Solver(
            "normal equations are singular (collinear basis columns); use lambda > 0".into(),
        )
    };
    let chol = m.cholesky().ok_or_else(singular)?;
    let l = chol.l_dirty();
    for (i, d) in diag.iter().enumerate() {
        let piv = l[(i, i)];
        if !(piv * piv > 1e-12 * d) {
            return Err(singular());
        }
    }
    let q = chol.solve(&DVector::from_column_slice(rhs));
    Ok(q.iter().copied().collect())
}

/// Result of one PLA fit.
#[derive(Debug, Clone)]
pub struct PlaFit {
    pub function: PiecewiseLinearFn,
    pub selected: Vec<Basis>,
    /// Regularized objective after the intercept-only fit and after each round.
    pub objective_trace: Vec<f64>,
}

/// Fits a piecewise-linear function to weighted `(x, r)` pairs.
pub fn fit_pla(
    x: &[f64],
    r: &[f64],
    w: &[f64],
    grid: &ThresholdGrid,
    lambda: f64,
    k: usize,
    pairwise: bool,
) -> Result<PlaFit> {
    if x.len() != r.len() || x.len() != w.len() {
        return Err(Error::validation("x, r and w must have equal lengths"));
    }
    if x.is_empty() {
        return Err(Error::validation("PLA needs at least one sample"));
    }
    let stats = PrefixStats::new(x, w, grid);
    fit_pla_with(&stats, r, lambda, k, pairwise)
}

/// [`fit_pla`] on precomputed [`PrefixStats`]; `r` is in original row order.
pub fn fit_pla_with(
    stats: &PrefixStats,
    r: &[f64],
    lambda: f64,
    k: usize,
    pairwise: bool,
) -> Result<PlaFit> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::validation(format!("lambda must be >= 0, got {lambda}")));
    }
    let n = stats.n();
    let ridge = lambda * n as f64;
    let r_sorted = stats.gather(r);

    let mut active = ActiveSet::new(stats, &r_sorted, ridge);
    active.push(Basis::Constant, false);
    let (mut q, obj) = active.refit(lambda)?;
    let mut trace = vec![obj];

    for _ in 0..k {
        let corr = active.residual_correlations(&q);
        let bwb = active.residual_norm(&q);
        let Some(sel) = best_selection(&corr, stats, bwb, lambda, pairwise, |b| active.basis.contains(&b)) else {
            break;
        };
        let kept = active.basis.len();
        match sel {
            Selection::Column(b) => active.push(b, true),
            Selection::Pair(j) => {
                active.push(Basis::Hinge(j), true);
                active.push(Basis::ReverseHinge(j), true);
            }
        }
        let (next, obj) = match active.refit(lambda) {
            Ok(v) => v,
            // without a ridge the new columns can be collinear with the active ones
            Err(Error::Solver(_)) if ridge == 0.0 => {
                active.truncate(kept);
                break;
            }
            Err(e) => return Err(e),
        };
        q = next;
        trace.push(obj);
    }

    let mut g = PiecewiseLinearFn::default();
    for (b, &q) in active.basis.iter().zip(&q) {
        match *b {
            Basis::Constant => g.intercept = q,
            Basis::Hinge(j) => g.hinge_terms.push((stats.thresholds[j], q)),
            Basis::ReverseHinge(j) => g.rhinge_terms.push((stats.thresholds[j], q)),
        }
    }
    Ok(PlaFit {
        function: g,
        selected: active.basis,
        objective_trace: trace,
    })
}

/// Active columns represented by their weighted inner products with every
/// candidate column, so that Gram entries, right-hand sides and residual
/// correlations never touch the samples again.
struct ActiveSet<'a> {
    stats: &'a PrefixStats,
    ridge: f64,
    basis: Vec<Basis>,
    penalized: Vec<bool>,
    /// Per active column `a`: `aᵀ W a_l` for every hinge column `a_l`.
    cross: Vec<ColumnPair>,
    gram: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    r_corr: ColumnPair,
    r_sum: f64,
    rwr: f64,
}

fn pair_at(p: &ColumnPair, b: Basis) -> f64 {
    match b {
        Basis::Hinge(j) => p.hinge[j],
        Basis::ReverseHinge(j) => p.rhinge[j],
        Basis::Constant => unreachable!("constant column has no pair entry"),
    }
}

impl<'a> ActiveSet<'a> {
    fn new(stats: &'a PrefixStats, r: &[f64], ridge: f64) -> Self {
        Self {
            stats,
            ridge,
            basis: Vec::new(),
            penalized: Vec::new(),
            cross: Vec::new(),
            gram: Vec::new(),
            rhs: Vec::new(),
            r_corr: stats.correlations(r),
            r_sum: r.iter().zip(&stats.w).map(|(r, w)| w * r).sum(),
            rwr: stats.weighted_dot(r, r),
        }
    }

    /// `a_iᵀ W a_b` for active column `i`.
    fn dot_with(&self, i: usize, b: Basis) -> f64 {
        match (self.basis[i], b) {
            (Basis::Constant, Basis::Constant) => self.stats.weight_sum,
            (Basis::Constant, other) | (other, Basis::Constant) => pair_at(&self.stats.ones, other),
            (_, other) => pair_at(&self.cross[i], other),
        }
    }

    fn push(&mut self, b: Basis, penalized: bool) {
        let mut row: Vec<f64> = (0..self.basis.len()).map(|i| self.dot_with(i, b)).collect();
        let (diag, rhs, cross) = match b {
            Basis::Constant => (self.stats.weight_sum, self.r_sum, self.stats.ones.clone()),
            _ => (
                pair_at(&self.stats.norms, b),
                pair_at(&self.r_corr, b),
                self.stats.correlations(&self.stats.column(b)),
            ),
        };
        row.push(diag);
        for (existing, &v) in self.gram.iter_mut().zip(&row) {
            existing.push(v);
        }
        self.gram.push(row);
        self.rhs.push(rhs);
        self.cross.push(cross);
        self.basis.push(b);
        self.penalized.push(penalized);
    }

    fn truncate(&mut self, len: usize) {
        self.basis.truncate(len);
        self.penalized.truncate(len);
        self.cross.truncate(len);
        self.rhs.truncate(len);
        self.gram.truncate(len);
        for row in &mut self.gram {
            row.truncate(len);
        }
    }

    /// `Aᵀ W b` for every candidate column, with `b = r - A_Γ q`.
    fn residual_correlations(&self, q: &[f64]) -> ColumnPair {
        let mut c = self.r_corr.clone();
        for (cross, &qj) in self.cross.iter().zip(q) {
            for (ci, &x) in c.hinge.iter_mut().zip(&cross.hinge) {
                *ci -= qj * x;
            }
            for (ci, &x) in c.rhinge.iter_mut().zip(&cross.rhinge) {
                *ci -= qj * x;
            }
        }
        c
    }

    /// `bᵀ W b = rᵀWr - 2 qᵀ Aᵀ W r + qᵀ (AᵀWA) q`, clamped at zero.
    fn residual_norm(&self, q: &[f64]) -> f64 {
        let mut quad = 0.0;
        for (i, row) in self.gram.iter().enumerate() {
            let gi: f64 = row.iter().zip(q).map(|(g, q)| g * q).sum();
            quad += q[i] * (gi - 2.0 * self.rhs[i]);
        }
        (self.rwr + quad).max(0.0)
    }

    fn refit(&self, lambda: f64) -> Result<(Vec<f64>, f64)> {
        let q = solve_normal_equations(&self.gram, &self.rhs, self.ridge, &self.penalized)?;
        let n = self.stats.n() as f64;
        let penalty: f64 = q
            .iter()
            .zip(&self.penalized)
            .filter(|(_, &p)| p)
            .map(|(v, _)| v * v)
            .sum();
        let obj = self.residual_norm(&q) / n + lambda * penalty;
        Ok((q, obj))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_constant_column_is_weighted_mean() {
        let q = solve_weights(&[vec![1.0, 1.0]], &[2.0, 4.0], &[1.0, 1.0], 0.0, 2).unwrap();
        assert!((q[0] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn solve_with_ridge_closed_form() {
        let q = solve_weights(&[vec![1.0, 1.0]], &[2.0, 4.0], &[1.0, 1.0], 1.0, 2).unwrap();
        assert!((q[0] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn solve_zero_rhs() {
        let q = solve_weights(
            &[vec![1.0, 1.0, 1.0], vec![0.0, 1.0, 2.0]],
            &[0.0; 3],
            &[1.0; 3],
            0.0,
            3,
        )
        .unwrap();
        assert_eq!(q, vec![0.0, 0.0]);
    }

    #[test]
    fn singular_without_ridge_is_reported() {
        let err = solve_weights(
            &[vec![1.0, 1.0], vec![2.0, 2.0]],
            &[1.0, 2.0],
            &[1.0, 1.0],
            0.0,
            2,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Solver(_)));
        assert!(err.to_string().contains("lambda > 0"));
    }

    #[test]
    fn select_prefers_larger_score() {
        // a2 = [1, 1] is not a hinge column, so score the explicit columns
        let b = [1.0, 1.0];
        let cols = [[1.0, 0.0], [1.0, 1.0]];
        let scores: Vec<f64> = cols
            .iter()
            .map(|a| {
                let c: f64 = a.iter().zip(&b).map(|(a, b)| a * b).sum();
                let n: f64 = a.iter().map(|a| a * a).sum();
                gain(c, n, 0.0)
            })
            .collect();
        assert_eq!(scores, vec![1.0, 2.0]);
    }

    #[test]
    fn unregularized_pairs_stop_at_collinearity() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let r: Vec<f64> = x.iter().map(|v| (v - 5.0f64).abs() + (v - 12.0f64).max(0.0)).collect();
        let grid = ThresholdGrid::new(vec![5.0, 12.0]).unwrap();
        let fit = fit_pla(&x, &r, &[1.0; 20], &grid, 0.0, 3, true).unwrap();
        assert_eq!(fit.selected.len(), 3);
        assert_eq!(fit.objective_trace.len(), 2);
    }

    #[test]
    fn single_candidate_selected() {
        let grid = ThresholdGrid::new(vec![0.5]).unwrap();
        let stats = PrefixStats::new(&[0.0, 1.0, 2.0], &[1.0; 3], &grid);
        let state = SelectionState {
            selected: vec![Basis::Constant, Basis::ReverseHinge(0)],
            coeffs: vec![0.0, 0.0],
            residual: vec![-1.0, 0.0, 1.0],
            objective_trace: vec![],
        };
        assert_eq!(
            select_basis(&state, &stats, 0.0, false),
            Some(Selection::Column(Basis::Hinge(0)))
        );
    }

    #[test]
    fn orthogonal_residual_is_noop() {
        let grid = ThresholdGrid::new(vec![0.5]).unwrap();
        let stats = PrefixStats::new(&[0.0, 1.0, 2.0], &[1.0; 3], &grid);
        let state = SelectionState {
            selected: vec![Basis::Constant],
            coeffs: vec![0.0],
            residual: vec![0.0; 3],
            objective_trace: vec![],
        };
        assert_eq!(select_basis(&state, &stats, 0.0, true), None);
        assert_eq!(select_basis(&state, &stats, 0.0, false), None);
    }

    #[test]
    fn exact_single_hinge_recovery() {
        let grid = ThresholdGrid::new(vec![0.0]).unwrap();
        let fit = fit_pla(
            &[-1.0, 0.0, 1.0, 2.0],
            &[0.0, 0.0, 1.0, 2.0],
            &[1.0; 4],
            &grid,
            0.0,
            1,
            false,
        )
        .unwrap();
        let g = &fit.function;
        assert!(g.intercept.abs() < 1e-12);
        assert_eq!(g.hinge_terms.len(), 1);
        assert!((g.hinge_terms[0].1 - 1.0).abs() < 1e-12);
        assert!(g.rhinge_terms.is_empty());
    }

    #[test]
    fn zero_residual_gives_zero_function() {
        let grid = ThresholdGrid::new(vec![0.2, 0.4]).unwrap();
        let fit = fit_pla(&[0.0, 0.3, 0.6, 0.9], &[0.0; 4], &[1.0; 4], &grid, 1.0, 3, true).unwrap();
        assert!(fit.function.is_zero());
        assert_eq!(fit.selected, vec![Basis::Constant]);
    }

    #[test]
    fn huge_ridge_leaves_weighted_mean() {
        let grid = ThresholdGrid::new(vec![0.25, 0.5]).unwrap();
        let r = [1.0, -2.0, 5.0, 3.0];
        let w = [1.0, 2.0, 0.5, 1.5];
        let fit = fit_pla(&[0.0, 0.3, 0.6, 0.9], &r, &w, &grid, 1e9, 2, true).unwrap();
        let mean = r.iter().zip(&w).map(|(r, w)| r * w).sum::<f64>() / w.iter().sum::<f64>();
        let g = &fit.function;
        assert!((g.intercept - mean).abs() < 1e-6);
        for t in g.hinge_terms.iter().chain(&g.rhinge_terms) {
            assert!(t.1.abs() < 1e-8);
        }
    }

    #[test]
    fn empty_grid_is_constant_fit() {
        let fit = fit_pla(&[0.0, 1.0], &[1.0, 3.0], &[1.0, 1.0], &ThresholdGrid::empty(), 0.5, 4, true)
            .unwrap();
        assert_eq!(fit.function.term_count(), 0);
        assert!((fit.function.intercept - 2.0).abs() < 1e-14);
    }

    #[test]
    fn pairwise_adds_both_columns() {
        let grid = ThresholdGrid::new(vec![0.5]).unwrap();
        let fit = fit_pla(&[0.0, 0.4, 0.6, 1.0], &[1.0, 0.0, 0.0, 1.0], &[1.0; 4], &grid, 0.1, 1, true)
            .unwrap();
        assert_eq!(
            fit.selected,
            vec![Basis::Constant, Basis::Hinge(0), Basis::ReverseHinge(0)]
        );
        assert!(fit.function.term_count() <= 2);
    }
}
