//! Shape constraints and their projections.
//!
//! A shape function is stored as values on anchor points, so every constraint
//! acts on the sub-vector of anchor values inside the constraint's range. The
//! monotone projection is the average of the tightest nondecreasing majorant
//! (running maximum) and minorant (suffix running minimum). Convex and concave
//! constraints project the segment slopes onto the monotone sets and
//! re-accumulate values from the left end of the window.
//!
//! All four feasible sets are convex, so a convex combination of the previous
//! (feasible) shape and a projected one stays feasible.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::ColumnStats;
use crate::error::{Error, Result};
use crate::gam::ShapeFunction;

/// Tolerance on the defining difference inequalities, relative to
/// `max(1, max |entry|)` of the differenced vector.
pub const FEASIBILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Increase,
    Decrease,
    Convex,
    Concave,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 4] = [
        ConstraintKind::Increase,
        ConstraintKind::Decrease,
        ConstraintKind::Convex,
        ConstraintKind::Concave,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintKind::Increase => "increase",
            ConstraintKind::Decrease => "decrease",
            ConstraintKind::Convex => "convex",
            ConstraintKind::Concave => "concave",
        }
    }

    fn opposite(self) -> Self {
        match self {
            ConstraintKind::Increase => ConstraintKind::Decrease,
            ConstraintKind::Decrease => ConstraintKind::Increase,
            ConstraintKind::Convex => ConstraintKind::Concave,
            ConstraintKind::Concave => ConstraintKind::Convex,
        }
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConstraintKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConstraintKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown constraint kind '{s}' (expected increase, decrease, convex or concave)"
                ))
            })
    }
}

/// A user constraint on one feature over a raw-unit range `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub id: String,
    pub feature: usize,
    pub kind: ConstraintKind,
    pub range: [f64; 2],
    #[serde(default)]
    pub created_at: u64,
}

impl ConstraintSpec {
    pub fn new(id: impl Into<String>, feature: usize, kind: ConstraintKind, lo: f64, hi: f64) -> Result<Self> {
        let spec = Self {
            id: id.into(),
            feature,
            kind,
            range: [lo, hi],
            created_at: 0,
        };
        spec.check_range()?;
        Ok(spec)
    }

    pub fn lo(&self) -> f64 {
        self.range[0]
    }

    pub fn hi(&self) -> f64 {
        self.range[1]
    }

    pub fn check_range(&self) -> Result<()> {
        let [lo, hi] = self.range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::validation(format!(
                "constraint range [{lo}, {hi}] must be finite with lo < hi"
            )));
        }
        Ok(())
    }

    /// Range converted to normalized feature units.
    pub fn normalized_range(&self, stats: &ColumnStats) -> (f64, f64) {
        (stats.transform(self.range[0]), stats.transform(self.range[1]))
    }
}

/// Feature given by position or by column name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureRef {
    Index(usize),
    Name(String),
}

impl FeatureRef {
    pub fn resolve(&self, names: &[String]) -> Result<usize> {
        match self {
            FeatureRef::Index(i) if *i < names.len() => Ok(*i),
            FeatureRef::Index(i) => Err(Error::config(format!(
                "feature index {i} out of range for {} features",
                names.len()
            ))),
            FeatureRef::Name(n) => names
                .iter()
                .position(|x| x == n)
                .ok_or_else(|| Error::config(format!("unknown feature '{n}'"))),
        }
    }
}

/// A constraint as written in a constraints file or request body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintRequest {
    pub feature: FeatureRef,
    pub kind: ConstraintKind,
    pub range: [f64; 2],
    #[serde(default)]
    pub id: Option<String>,
}

impl ConstraintRequest {
    pub fn resolve(&self, names: &[String], fallback_id: impl FnOnce() -> String) -> Result<ConstraintSpec> {
        let feature = self.feature.resolve(names)?;
        let id = self.id.clone().unwrap_or_else(fallback_id);
        ConstraintSpec::new(id, feature, self.kind, self.range[0], self.range[1])
    }
}

/// Parses a JSON array of [`ConstraintRequest`]s.
pub fn parse_constraint_requests(bytes: &[u8]) -> Result<Vec<ConstraintRequest>> {
    serde_json::from_slice(bytes).map_err(|e| Error::config(format!("invalid constraints file: {e}")))
}

/// Parses a constraints file and resolves feature names. Entries without an id
/// get `c<position>`.
pub fn parse_constraints(bytes: &[u8], feature_names: &[String]) -> Result<Vec<ConstraintSpec>> {
    parse_constraint_requests(bytes)?
        .iter()
        .enumerate()
        .map(|(i, r)| r.resolve(feature_names, || format!("c{i}")))
        .collect()
}

/// Pairs of constraint ids whose kinds contradict each other on overlapping
/// ranges of the same feature.
pub fn conflicting_pairs(specs: &[ConstraintSpec]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (i, a) in specs.iter().enumerate() {
        for b in &specs[i + 1..] {
            if a.feature == b.feature
                && a.kind.opposite() == b.kind
                && a.lo() < b.hi()
                && b.lo() < a.hi()
            {
                out.push((a.id.clone(), b.id.clone()));
            }
        }
    }
    out
}

fn diff_scale(v: &[f64]) -> f64 {
    v.iter().fold(1.0_f64, |m, x| m.max(x.abs()))
}

fn nondecreasing_within(v: &[f64], tol: f64) -> bool {
    let t = tol * diff_scale(v);
    v.windows(2).all(|w| w[1] - w[0] >= -t)
}

fn nonincreasing_within(v: &[f64], tol: f64) -> bool {
    let t = tol * diff_scale(v);
    v.windows(2).all(|w| w[1] - w[0] <= t)
}

fn check_anchors(v: &[f64], anchors: &[f64]) -> Result<()> {
    if v.len() != anchors.len() {
        return Err(Error::validation(format!(
            "{} values for {} anchors",
            v.len(),
            anchors.len()
        )));
    }
    if anchors.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::validation(
            "anchor positions must be strictly increasing (duplicate anchor)",
        ));
    }
    Ok(())
}

fn slopes(v: &[f64], anchors: &[f64]) -> Vec<f64> {
    v.windows(2)
        .zip(anchors.windows(2))
        .map(|(y, a)| (y[1] - y[0]) / (a[1] - a[0]))
        .collect()
}

/// Whether `v` satisfies `kind` on the given anchors, within [`FEASIBILITY_TOL`].
pub fn is_feasible(kind: ConstraintKind, v: &[f64], anchors: &[f64]) -> bool {
    match kind {
        ConstraintKind::Increase => nondecreasing_within(v, FEASIBILITY_TOL),
        ConstraintKind::Decrease => nonincreasing_within(v, FEASIBILITY_TOL),
        ConstraintKind::Convex => {
            v.len() < 3 || nondecreasing_within(&slopes(v, anchors), FEASIBILITY_TOL)
        }
        ConstraintKind::Concave => {
            v.len() < 3 || nonincreasing_within(&slopes(v, anchors), FEASIBILITY_TOL)
        }
    }
}

/// Envelope average `(U + L) / 2` with `U_i = max(v_0..=v_i)` and
/// `L_i = min(v_i..)`.
pub fn project_increasing(v: &[f64]) -> Vec<f64> {
    if nondecreasing_within(v, FEASIBILITY_TOL) {
        return v.to_vec();
    }
    envelope_average(v)
}

fn envelope_average(v: &[f64]) -> Vec<f64> {
    let m = v.len();
    let mut lower = vec![0.0; m];
    let mut run = f64::INFINITY;
    for i in (0..m).rev() {
        run = run.min(v[i]);
        lower[i] = run;
    }
    let mut upper = f64::NEG_INFINITY;
    v.iter()
        .zip(lower)
        .map(|(&x, lo)| {
            upper = upper.max(x);
            (upper + lo) / 2.0
        })
        .collect()
}

/// `reverse(project_increasing(reverse(v)))`.
pub fn project_decreasing(v: &[f64]) -> Vec<f64> {
    let mut r: Vec<f64> = v.iter().rev().copied().collect();
    r = project_increasing(&r);
    r.reverse();
    r
}

fn reaccumulate(v0: f64, s: &[f64], anchors: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(anchors.len());
    out.push(v0);
    let mut acc = v0;
    for (si, a) in s.iter().zip(anchors.windows(2)) {
        acc += si * (a[1] - a[0]);
        out.push(acc);
    }
    out
}

/// Projects segment slopes onto the nondecreasing set, keeping `v[0]`.
pub fn project_convex(v: &[f64], anchors: &[f64]) -> Result<Vec<f64>> {
    check_anchors(v, anchors)?;
    if v.len() < 3 || is_feasible(ConstraintKind::Convex, v, anchors) {
        return Ok(v.to_vec());
    }
    let s = envelope_average(&slopes(v, anchors));
    Ok(reaccumulate(v[0], &s, anchors))
}

/// Projects segment slopes onto the nonincreasing set, keeping `v[0]`.
pub fn project_concave(v: &[f64], anchors: &[f64]) -> Result<Vec<f64>> {
    check_anchors(v, anchors)?;
    if v.len() < 3 || is_feasible(ConstraintKind::Concave, v, anchors) {
        return Ok(v.to_vec());
    }
    let s = project_decreasing(&slopes(v, anchors));
    Ok(reaccumulate(v[0], &s, anchors))
}

/// Output of a projection.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub values: Vec<f64>,
    pub changed: bool,
    pub max_displacement: f64,
}

pub fn project(kind: ConstraintKind, v: &[f64], anchors: &[f64]) -> Result<ProjectionResult> {
    let values = match kind {
        ConstraintKind::Increase => project_increasing(v),
        ConstraintKind::Decrease => project_decreasing(v),
        ConstraintKind::Convex => project_convex(v, anchors)?,
        ConstraintKind::Concave => project_concave(v, anchors)?,
    };
    let max_displacement = v
        .iter()
        .zip(&values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(ProjectionResult {
        changed: values != v,
        values,
        max_displacement,
    })
}

/// Anchor indices inside `[lo, hi]` (normalized units), with a small slack so
/// that a range bound typed as an anchor's raw value still includes it.
pub fn anchor_window(anchors: &[f64], lo: f64, hi: f64) -> Result<Range<usize>> {
    let slack = |b: f64| 1e-9 * (1.0 + b.abs());
    let start = anchors.partition_point(|&a| a < lo - slack(lo));
    let end = anchors.partition_point(|&a| a <= hi + slack(hi));
    let count = end.saturating_sub(start);
    if count < 2 {
        return Err(Error::validation(format!(
            "constraint range covers {count} anchor point(s); at least 2 are needed \
             (anchors span [{:.6}, {:.6}] in normalized units, range [{lo:.6}, {hi:.6}])",
            anchors.first().copied().unwrap_or(f64::NAN),
            anchors.last().copied().unwrap_or(f64::NAN),
        )));
    }
    Ok(start..end)
}

/// Projects the anchor values of `shape` inside the constraint's range.
/// Values outside the window are left untouched.
pub fn apply_constraint(
    shape: &ShapeFunction,
    spec: &ConstraintSpec,
    feature_stats: &ColumnStats,
) -> Result<ShapeFunction> {
    let (lo, hi) = spec.normalized_range(feature_stats);
    let window = anchor_window(shape.anchors(), lo, hi)?;
    let mut values = shape.values().to_vec();
    let projected = project(
        spec.kind,
        &values[window.clone()],
        &shape.anchors()[window.clone()],
    )?;
    values[window].copy_from_slice(&projected.values);
    shape.with_values(values)
}
