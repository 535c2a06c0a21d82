use crate::constraints::{anchor_window, apply_constraint, is_feasible, ConstraintSpec};
use crate::dataset::{apply_normalization, fit_normalization, ColumnStats, Dataset, NormStats};
use crate::error::{Error, Result};
use crate::pla::{build_threshold_grid, fit_pla_with, PrefixStats};

use super::config::TrainConfig;
use super::model::{GamModel, TrainingMeta};
use super::shape::ShapeFunction;

const MAX_PROJECTION_PASSES: usize = 50;

struct FeatureCache {
    stats: PrefixStats,
    /// Segment index of each training row on this feature's anchors.
    segments: Vec<usize>,
}

/// Mutable trainer state between feature updates.
pub struct BoostState {
    /// `target - model` on the training rows, in training units.
    pub residuals: Vec<f64>,
    /// Completed boosting rounds.
    pub round: usize,
    caches: Vec<Option<FeatureCache>>,
    contributions: Vec<Vec<f64>>,
}

impl BoostState {
    /// Current contribution of feature `d` on every training row.
    pub fn contributions(&self, d: usize) -> &[f64] {
        &self.contributions[d]
    }
}

fn anchors_for(col: &[f64], grid_size: usize) -> Result<(Vec<f64>, Option<crate::pla::ThresholdGrid>)> {
    let (lo, hi) = col
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if !(lo < hi) {
        return Ok((vec![lo], None));
    }
    let grid = build_threshold_grid(col, grid_size)?;
    let mut anchors = Vec::with_capacity(grid.len() + 2);
    anchors.push(lo);
    anchors.extend_from_slice(grid.thresholds());
    anchors.push(hi);
    Ok((anchors, Some(grid)))
}

/// Zero model on the anchors of normalized dataset `d`, plus the state that
/// boosting starts from.
pub fn init_model(d: &Dataset, norm: NormStats, cfg: &TrainConfig) -> Result<(GamModel, BoostState)> {
    cfg.validate()?;
    if norm.feature_names != d.feature_names() {
        return Err(Error::validation("normalization statistics do not match the dataset"));
    }
    let mut shapes = Vec::with_capacity(d.n_features());
    let mut caches = Vec::with_capacity(d.n_features());
    for j in 0..d.n_features() {
        let col = d.column(j);
        let (anchors, grid) = anchors_for(col, cfg.grid_size)?;
        let shape = ShapeFunction::zeros(j, anchors)?;
        caches.push(grid.map(|g| FeatureCache {
            stats: PrefixStats::new(col, d.weights(), &g),
            segments: col.iter().map(|&x| shape.segment(x)).collect(),
        }));
        shapes.push(shape);
    }
    let model = GamModel {
        feature_names: d.feature_names().to_vec(),
        shapes,
        norm,
        config: cfg.clone(),
        constraints: Vec::new(),
        display_intercept: 0.0,
        training: TrainingMeta {
            n_rows: d.n_rows(),
            ..TrainingMeta::default()
        },
    };
    let state = BoostState {
        residuals: d.target().to_vec(),
        round: 0,
        caches,
        contributions: vec![vec![0.0; d.n_rows()]; d.n_features()],
    };
    Ok((model, state))
}

/// `y - sum_d f_d(x_d)` on the normalized rows of `d`.
pub fn compute_residuals(d: &Dataset, m: &GamModel) -> Result<Vec<f64>> {
    if d.feature_names() != m.feature_names.as_slice() {
        return Err(Error::validation(format!(
            "dataset features [{}] do not match model features [{}]",
            d.feature_names().join(","),
            m.feature_names.join(",")
        )));
    }
    let mut z = vec![0.0; d.n_features()];
    Ok((0..d.n_rows())
        .map(|i| {
            for (j, zj) in z.iter_mut().enumerate() {
                *zj = d.column(j)[i];
            }
            d.target()[i] - m.predict_normalized_row(&z)
        })
        .collect())
}

fn all_feasible(shape: &ShapeFunction, specs: &[&ConstraintSpec], stats: &ColumnStats) -> Result<bool> {
    for spec in specs {
        let (lo, hi) = spec.normalized_range(stats);
        let w = anchor_window(shape.anchors(), lo, hi)?;
        if !is_feasible(spec.kind, &shape.values()[w.clone()], &shape.anchors()[w]) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Applies every constraint in order, repeating while any is still violated.
fn project_all(shape: &ShapeFunction, specs: &[&ConstraintSpec], stats: &ColumnStats) -> Result<ShapeFunction> {
    let mut s = shape.clone();
    for _ in 0..MAX_PROJECTION_PASSES {
        for spec in specs {
            s = apply_constraint(&s, spec, stats)?;
        }
        if all_feasible(&s, specs, stats)? {
            break;
        }
    }
    Ok(s)
}

fn refresh_feature(state: &mut BoostState, data: &Dataset, shape: &ShapeFunction, d: usize) {
    let col = data.column(d);
    let contrib = &mut state.contributions[d];
    match &state.caches[d] {
        Some(cache) => {
            for ((c, &seg), &x) in contrib.iter_mut().zip(&cache.segments).zip(col) {
                *c = shape.evaluate_on(seg, x);
            }
        }
        None => contrib.iter_mut().zip(col).for_each(|(c, &x)| *c = shape.evaluate(x)),
    }
    let y = data.target();
    for (i, r) in state.residuals.iter_mut().enumerate() {
        let mut s = 0.0;
        for c in &state.contributions {
            s += c[i];
        }
        *r = y[i] - s;
    }
}

/// One boosting step on feature `d`. Returns whether the shape changed.
///
/// Unconstrained features take the plain step `f + step * g`; features with
/// constraints take `alpha * f + (1 - alpha) * P(f + step * g)`.
pub fn boost_feature(
    state: &mut BoostState,
    d: usize,
    m: &mut GamModel,
    cfg: &TrainConfig,
    constraints: &[&ConstraintSpec],
    data: &Dataset,
) -> Result<bool> {
    let Some(cache) = &state.caches[d] else {
        return Ok(false);
    };
    let fit = fit_pla_with(&cache.stats, &state.residuals, cfg.lambda, cfg.k_basis, cfg.pairwise)?;
    if fit.function.is_zero() {
        return Ok(false);
    }
    let shape = &m.shapes[d];
    let old = shape.values();
    let proposed: Vec<f64> = old
        .iter()
        .zip(shape.anchors())
        .map(|(&v, &a)| v + cfg.step * fit.function.evaluate(a))
        .collect();
    let mut next = shape.with_values(proposed)?;
    if !constraints.is_empty() {
        let stats = m.norm.features[d];
        let projected = project_all(&next, constraints, &stats)?;
        let a = cfg.alpha;
        let blended: Vec<f64> = old
            .iter()
            .zip(projected.values())
            .map(|(&f, &p)| a * f + (1.0 - a) * p)
            .collect();
        next = shape.with_values(blended)?;
        if !all_feasible(&next, constraints, &stats)? {
            next = project_all(&next, constraints, &stats)?;
        }
    }
    if next.values() == old {
        return Ok(false);
    }
    refresh_feature(state, data, &next, d);
    m.shapes[d] = next;
    Ok(true)
}

fn weighted_mse(r: &[f64], w: &[f64]) -> f64 {
    let (num, den) = r
        .iter()
        .zip(w)
        .fold((0.0, 0.0), |(n, s), (&r, &w)| (n + w * r * r, s + w));
    num / den
}

fn check_constraints(m: &GamModel, constraints: &[ConstraintSpec]) -> Result<()> {
    for c in constraints {
        let shape = m.shapes.get(c.feature).ok_or_else(|| {
            Error::validation(format!(
                "constraint '{}' refers to feature {} but the dataset has {}",
                c.id,
                c.feature,
                m.n_features()
            ))
        })?;
        c.check_range()?;
        let (lo, hi) = c.normalized_range(&m.norm.features[c.feature]);
        anchor_window(shape.anchors(), lo, hi)
            .map_err(|e| Error::validation(format!("constraint '{}' on '{}': {e}", c.id, m.feature_names[c.feature])))?;
    }
    Ok(())
}

/// Trains on normalized data `dn` whose statistics are `norm`.
///
/// `warm` supplies starting shapes; they are used only when their anchors
/// match the ones this data produces.
pub fn train_normalized(
    dn: &Dataset,
    norm: NormStats,
    cfg: &TrainConfig,
    constraints: &[ConstraintSpec],
    warm: Option<&GamModel>,
) -> Result<GamModel> {
    let (mut m, mut state) = init_model(dn, norm, cfg)?;
    check_constraints(&m, constraints)?;
    m.constraints = constraints.to_vec();
    let per_feature: Vec<Vec<&ConstraintSpec>> = (0..m.n_features())
        .map(|j| constraints.iter().filter(|c| c.feature == j).collect())
        .collect();

    if let Some(prev) = warm.filter(|p| p.feature_names == m.feature_names) {
        for j in 0..m.n_features() {
            if prev.shapes[j].anchors() != m.shapes[j].anchors() {
                continue;
            }
            let mut s = prev.shapes[j].clone();
            if !per_feature[j].is_empty() {
                s = project_all(&s, &per_feature[j], &m.norm.features[j])?;
            }
            refresh_feature(&mut state, dn, &s, j);
            m.shapes[j] = s;
        }
    }

    let t2 = m.target_stats().scale.powi(2);
    for _ in 0..cfg.rounds {
        for j in 0..m.n_features() {
            boost_feature(&mut state, j, &mut m, cfg, &per_feature[j], dn)?;
        }
        state.round += 1;
        m.training.loss_trace.push(weighted_mse(&state.residuals, dn.weights()) * t2);
    }

    let w = dn.weights();
    let wsum: f64 = w.iter().sum();
    m.training.display_offsets = state
        .contributions
        .iter()
        .map(|c| c.iter().zip(w).map(|(&c, &w)| c * w).sum::<f64>() / wsum)
        .collect();
    m.display_intercept = m.training.display_offsets.iter().sum();
    m.training.bin_counts = (0..m.n_features())
        .map(|j| m.shapes[j].bin_counts(dn.column(j)))
        .collect();
    Ok(m)
}

/// Fits normalization on `d`, then trains.
pub fn train(d: &Dataset, cfg: &TrainConfig, constraints: &[ConstraintSpec]) -> Result<GamModel> {
    train_from(d, cfg, constraints, None)
}

/// [`train`] that can continue from `prev` when `cfg.warm_start` is set.
pub fn train_from(
    d: &Dataset,
    cfg: &TrainConfig,
    constraints: &[ConstraintSpec],
    prev: Option<&GamModel>,
) -> Result<GamModel> {
    cfg.validate()?;
    let norm = fit_normalization(d, cfg.standardize_target)?;
    let dn = apply_normalization(d, &norm)?;
    let warm = if cfg.warm_start { prev } else { None };
    train_normalized(&dn, norm, cfg, constraints, warm)
}
