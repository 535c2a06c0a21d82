//! Tabular data ingestion, feature normalization, sample weights and fold
//! assignment.
//!
//! Features are stored column-major: every consumer (threshold grids,
//! per-feature boosting, shape densities) walks one feature at a time.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column names that are picked up as row identifiers when no explicit id
/// column is configured.
pub const DEFAULT_ID_COLUMNS: [&str; 2] = ["row_id", "timestamp"];

/// An N×D feature table with target and strictly positive sample weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    columns: Vec<Vec<f64>>,
    target: Vec<f64>,
    weights: Vec<f64>,
    row_ids: Option<Vec<String>>,
    raw_columns: Option<Vec<Vec<f64>>>,
    raw_target: Option<Vec<f64>>,
}

impl Dataset {
    /// Builds a dataset from column-major features. Weights default to 1.
    pub fn new(
        feature_names: Vec<String>,
        columns: Vec<Vec<f64>>,
        target: Vec<f64>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = target.len();
        if n == 0 {
            return Err(Error::validation("dataset has no rows"));
        }
        if feature_names.len() != columns.len() {
            return Err(Error::validation(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                columns.len()
            )));
        }
        for (name, col) in feature_names.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::validation(format!(
                    "column '{name}' has {} rows, target has {n}",
                    col.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::validation(format!(
                    "column '{name}' has a non-finite value at row {}",
                    i + 1
                )));
            }
        }
        if let Some(i) = target.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "target has a non-finite value at row {}",
                i + 1
            )));
        }
        let weights = match weights {
            Some(w) => {
                check_weights(&w, n)?;
                w
            }
            None => vec![1.0; n],
        };
        Ok(Self {
            feature_names,
            columns,
            target,
            weights,
            row_ids: None,
            raw_columns: None,
            raw_target: None,
        })
    }

    pub fn with_row_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.n_rows() {
            return Err(Error::validation(format!(
                "{} row ids for {} rows",
                ids.len(),
                self.n_rows()
            )));
        }
        self.row_ids = Some(ids);
        Ok(self)
    }

    /// Replaces the weight vector, keeping everything else.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights, self.n_rows())?;
        self.weights = weights;
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn column(&self, d: usize) -> &[f64] {
        &self.columns[d]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn row_ids(&self) -> Option<&[String]> {
        self.row_ids.as_deref()
    }

    /// Feature values in the units they were ingested in.
    pub fn raw_column(&self, d: usize) -> &[f64] {
        match &self.raw_columns {
            Some(raw) => &raw[d],
            None => &self.columns[d],
        }
    }

    /// Target in the units it was ingested in.
    pub fn raw_target(&self) -> &[f64] {
        self.raw_target.as_deref().unwrap_or(&self.target)
    }

    pub fn is_normalized(&self) -> bool {
        self.raw_columns.is_some()
    }

    /// Raw-unit copy of a row subset, in the order given.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let pick = |v: &[f64]| rows.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Dataset {
            feature_names: self.feature_names.clone(),
            columns: (0..self.n_features())
                .map(|d| pick(self.raw_column(d)))
                .collect(),
            target: pick(self.raw_target()),
            weights: pick(&self.weights),
            row_ids: self
                .row_ids
                .as_ref()
                .map(|ids| rows.iter().map(|&i| ids[i].clone()).collect()),
            raw_columns: None,
            raw_target: None,
        }
    }

    /// Drops normalization, returning the raw-unit dataset.
    pub fn into_raw(self) -> Dataset {
        Dataset {
            columns: self.raw_columns.unwrap_or(self.columns),
            target: self.raw_target.unwrap_or(self.target),
            raw_columns: None,
            raw_target: None,
            ..self
        }
    }
}

fn check_weights(w: &[f64], n: usize) -> Result<()> {
    if w.len() != n {
        return Err(Error::validation(format!(
            "{} weights for {n} rows",
            w.len()
        )));
    }
    if let Some(i) = w.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::validation(format!(
            "weight at row {} must be positive and finite, got {}",
            i + 1,
            w[i]
        )));
    }
    Ok(())
}

/// Which columns of a CSV file play which role.
#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    pub target_column: String,
    pub weight_column: Option<String>,
    /// Explicit id column; when `None`, a column named `row_id` or
    /// `timestamp` is used if present.
    pub id_column: Option<String>,
}

impl CsvOptions {
    pub fn new(target: impl Into<String>) -> Self {
        Self {
            target_column: target.into(),
            ..Default::default()
        }
    }

    pub fn weight(mut self, column: impl Into<String>) -> Self {
        self.weight_column = Some(column.into());
        self
    }
}

struct RawTable {
    header: Vec<String>,
    records: Vec<csv::StringRecord>,
}

fn read_table<R: Read>(reader: R) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::config(format!("unreadable header: {e}")))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::config("missing header row"));
    }
    let mut seen = BTreeSet::new();
    for h in &header {
        if !seen.insert(h.as_str()) {
            return Err(Error::config(format!("duplicate column '{h}'")));
        }
    }
    let mut records = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Ingestion {
            row: i + 1,
            column: String::new(),
            message: e.to_string(),
        })?;
        if rec.len() != header.len() {
            return Err(Error::Ingestion {
                row: i + 1,
                column: String::new(),
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        records.push(rec);
    }
    if records.is_empty() {
        return Err(Error::validation("file has a header but no data rows"));
    }
    Ok(RawTable { header, records })
}

fn parse_cell(raw: &str, row: usize, column: &str) -> Result<f64> {
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(Error::Ingestion {
            row,
            column: column.to_owned(),
            message: format!("non-finite value '{raw}'"),
        }),
        Err(_) if raw.is_empty() => Err(Error::Ingestion {
            row,
            column: column.to_owned(),
            message: "missing value".into(),
        }),
        Err(_) => Err(Error::Ingestion {
            row,
            column: column.to_owned(),
            message: format!("cannot parse '{raw}' as a number"),
        }),
    }
}

impl RawTable {
    fn position(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    fn numeric(&self, col: usize) -> Result<Vec<f64>> {
        self.records
            .iter()
            .enumerate()
            .map(|(i, r)| parse_cell(&r[col], i + 1, &self.header[col]))
            .collect()
    }

    fn strings(&self, col: usize) -> Vec<String> {
        self.records.iter().map(|r| r[col].to_owned()).collect()
    }

    fn id_position(&self, explicit: Option<&str>) -> Result<Option<usize>> {
        match explicit {
            Some(name) => self
                .position(name)
                .map(Some)
                .ok_or_else(|| Error::config(format!("id column '{name}' not in header"))),
            None => Ok(DEFAULT_ID_COLUMNS.iter().find_map(|c| self.position(c))),
        }
    }
}

/// Parses a CSV document into a [`Dataset`]. Every column other than the
/// target, weight and id columns becomes a feature, in header order.
pub fn parse_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let table = read_table(reader)?;
    let target_pos = table.position(&opts.target_column).ok_or_else(|| {
        Error::config(format!(
            "target column '{}' not in header",
            opts.target_column
        ))
    })?;
    let weight_pos = match &opts.weight_column {
        Some(w) => Some(
            table
                .position(w)
                .ok_or_else(|| Error::config(format!("weight column '{w}' not in header")))?,
        ),
        None => None,
    };
    let id_pos = table.id_position(opts.id_column.as_deref())?;
    if id_pos == Some(target_pos) || (weight_pos.is_some() && weight_pos == id_pos) {
        return Err(Error::config("id column overlaps target or weight column"));
    }

    let mut names = Vec::new();
    let mut columns = Vec::new();
    for (j, name) in table.header.iter().enumerate() {
        if j == target_pos || Some(j) == weight_pos || Some(j) == id_pos {
            continue;
        }
        names.push(name.clone());
        columns.push(table.numeric(j)?);
    }
    let target = table.numeric(target_pos)?;
    let weights = weight_pos.map(|j| table.numeric(j)).transpose()?;
    let mut ds = Dataset::new(names, columns, target, weights)?;
    if let Some(j) = id_pos {
        ds = ds.with_row_ids(table.strings(j))?;
    }
    Ok(ds)
}

/// Loads a dataset from a CSV file.
pub fn load_csv(
    path: impl AsRef<Path>,
    target_column: &str,
    weight_column: Option<&str>,
) -> Result<Dataset> {
    let mut opts = CsvOptions::new(target_column);
    opts.weight_column = weight_column.map(str::to_owned);
    load_csv_with(path, &opts)
}

pub fn load_csv_with(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref())?;
    parse_csv(std::io::BufReader::new(file), opts)
}

/// Writes `d` in raw units as CSV: `row_id` (when present), the features,
/// then the target under `target_name` and, if any weight differs from 1,
/// a `weight` column. Floats use shortest round-trip formatting.
pub fn write_csv<W: std::io::Write>(d: &Dataset, target_name: &str, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let with_weights = d.weights.iter().any(|&v| v != 1.0);
    let mut header: Vec<&str> = Vec::new();
    if d.row_ids.is_some() {
        header.push("row_id");
    }
    header.extend(d.feature_names.iter().map(String::as_str));
    header.push(target_name);
    if with_weights {
        header.push("weight");
    }
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
    w.write_record(&header).map_err(csv_err)?;
    let target = d.raw_target();
    let mut rec: Vec<String> = Vec::with_capacity(header.len());
    for i in 0..d.n_rows() {
        rec.clear();
        if let Some(ids) = &d.row_ids {
            rec.push(ids[i].clone());
        }
        for j in 0..d.n_features() {
            rec.push(d.raw_column(j)[i].to_string());
        }
        rec.push(target[i].to_string());
        if with_weights {
            rec.push(d.weights[i].to_string());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Feature columns read for prediction, selected by name.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    pub columns: Vec<Vec<f64>>,
    pub row_ids: Option<Vec<String>>,
    /// Header columns that were present but not needed.
    pub unused_columns: Vec<String>,
}

impl FeatureTable {
    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

/// Reads the named feature columns (in the given order) from a CSV document.
pub fn parse_feature_table<R: Read>(reader: R, features: &[String]) -> Result<FeatureTable> {
    let table = read_table(reader)?;
    let id_pos = table.id_position(None)?;
    let mut columns = Vec::with_capacity(features.len());
    for name in features {
        let j = table
            .position(name)
            .ok_or_else(|| Error::validation(format!("feature column '{name}' not in header")))?;
        columns.push(table.numeric(j)?);
    }
    let unused_columns = table
        .header
        .iter()
        .enumerate()
        .filter(|(j, h)| Some(*j) != id_pos && !features.contains(h))
        .map(|(_, h)| h.clone())
        .collect();
    Ok(FeatureTable {
        columns,
        row_ids: id_pos.map(|j| table.strings(j)),
        unused_columns,
    })
}

/// Location and scale of one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub scale: f64,
}

impl ColumnStats {
    pub const IDENTITY: ColumnStats = ColumnStats {
        mean: 0.0,
        scale: 1.0,
    };

    /// Population mean and standard deviation. A constant column gets scale 1.
    pub fn fit(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        let scale = if sd > 1e-12 * mean.abs().max(1.0) {
            sd
        } else {
            1.0
        };
        Self { mean, scale }
    }

    #[inline]
    pub fn transform(&self, x: f64) -> f64 {
        (x - self.mean) / self.scale
    }

    #[inline]
    pub fn inverse(&self, z: f64) -> f64 {
        z * self.scale + self.mean
    }
}

/// Per-feature z-score statistics, plus the target's when it is standardized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub feature_names: Vec<String>,
    pub features: Vec<ColumnStats>,
    pub target: Option<ColumnStats>,
}

impl NormStats {
    /// Stats that leave every column unchanged.
    pub fn identity(feature_names: Vec<String>) -> Self {
        let features = vec![ColumnStats::IDENTITY; feature_names.len()];
        Self {
            feature_names,
            features,
            target: None,
        }
    }

    pub fn target_stats(&self) -> ColumnStats {
        self.target.unwrap_or(ColumnStats::IDENTITY)
    }
}

/// Fits normalization statistics on the raw values of `d`.
pub fn fit_normalization(d: &Dataset, standardize_target: bool) -> Result<NormStats> {
    if d.n_rows() < 2 {
        return Err(Error::validation(
            "normalization needs at least 2 rows",
        ));
    }
    Ok(NormStats {
        feature_names: d.feature_names.clone(),
        features: (0..d.n_features())
            .map(|j| ColumnStats::fit(d.raw_column(j)))
            .collect(),
        target: standardize_target.then(|| ColumnStats::fit(d.raw_target())),
    })
}

/// Returns a dataset whose features (and target, when the stats carry target
/// statistics) are z-scored. Raw values are kept alongside.
pub fn apply_normalization(d: &Dataset, s: &NormStats) -> Result<Dataset> {
    if s.features.len() != d.n_features() || s.feature_names != d.feature_names {
        return Err(Error::validation(format!(
            "normalization fitted on {} features [{}], dataset has {} [{}]",
            s.features.len(),
            s.feature_names.join(","),
            d.n_features(),
            d.feature_names.join(",")
        )));
    }
    let raw_columns: Vec<Vec<f64>> = (0..d.n_features()).map(|j| d.raw_column(j).to_vec()).collect();
    let columns = raw_columns
        .iter()
        .zip(&s.features)
        .map(|(col, st)| col.iter().map(|&x| st.transform(x)).collect())
        .collect();
    let raw_target = d.raw_target().to_vec();
    let target = match s.target {
        Some(st) => raw_target.iter().map(|&y| st.transform(y)).collect(),
        None => raw_target.clone(),
    };
    Ok(Dataset {
        feature_names: d.feature_names.clone(),
        columns,
        target,
        weights: d.weights.clone(),
        row_ids: d.row_ids.clone(),
        raw_columns: Some(raw_columns),
        raw_target: Some(raw_target),
    })
}

/// Multiplies the weights of `rows` by `factor`.
pub fn multiply_weights(d: &Dataset, rows: &[usize], factor: f64) -> Result<Dataset> {
    let weights = scaled_weights(d.weights(), rows, factor)?;
    d.clone().with_weights(weights)
}

/// Weight-vector form of [`multiply_weights`]. Duplicate indices are applied once.
pub fn scaled_weights(weights: &[f64], rows: &[usize], factor: f64) -> Result<Vec<f64>> {
    if !(factor.is_finite() && factor > 0.0) {
        return Err(Error::validation(format!(
            "weight factor must be positive, got {factor}"
        )));
    }
    let n = weights.len();
    let rows: BTreeSet<usize> = rows.iter().copied().collect();
    if let Some(&bad) = rows.iter().find(|&&i| i >= n) {
        return Err(Error::validation(format!(
            "row index {bad} out of range for {n} rows"
        )));
    }
    let mut out = weights.to_vec();
    for i in rows {
        out[i] *= factor;
    }
    check_weights(&out, n)?;
    Ok(out)
}

/// Assignment of every row to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    /// Shuffles `0..n` with a seeded ChaCha8 stream and deals rows round-robin,
    /// so fold sizes differ by at most one and the first `n % k` folds are larger.
    pub fn new(n: usize, k: usize, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::validation("fold count must be positive"));
        }
        if k > n {
            return Err(Error::validation(format!(
                "cannot split {n} rows into {k} folds"
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        let mut assignments = vec![0; n];
        for (pos, &row) in order.iter().enumerate() {
            assignments[row] = pos % k;
        }
        Ok(Self { k, assignments })
    }

    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

pub fn kfold(d: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    FoldPlan::new(d.n_rows(), k, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let d = Dataset::new(vec!["a".into(), "b".into()], vec![vec![0.1, 2.0], vec![-3.5, 1e-9]], vec![1.0, 2.25], Some(vec![1.0, 4.0]))
            .unwrap()
            .with_row_ids(vec!["r0".into(), "r1".into()])
            .unwrap();
        let mut buf = Vec::new();
        write_csv(&d, "y", &mut buf).unwrap();
        let back = parse_csv(&buf[..], &CsvOptions::new("y").weight("weight")).unwrap();
        assert_eq!(back, d);
    }

    fn csv(s: &str, opts: &CsvOptions) -> Result<Dataset> {
        parse_csv(s.as_bytes(), opts)
    }

    #[test]
    fn default_weights_are_one() {
        let d = csv("a,b,y\n1,2,3\n4,5,6\n7,8,9\n", &CsvOptions::new("y")).unwrap();
        assert_eq!(d.weights(), &[1.0, 1.0, 1.0]);
        assert_eq!(d.feature_names(), &["a", "b"]);
        assert_eq!(d.column(1), &[2.0, 5.0, 8.0]);
        assert_eq!(d.target(), &[3.0, 6.0, 9.0]);
    }

    #[test]
    fn weight_column_passes_through() {
        let d = csv("x,w,y\n1,2,3\n4,0.5,6\n", &CsvOptions::new("y").weight("w")).unwrap();
        assert_eq!(d.weights(), &[2.0, 0.5]);
        assert_eq!(d.n_features(), 1);
    }

    #[test]
    fn bad_cell_names_row_and_column() {
        let err = csv("x,y\nabc,1\n2,3\n", &CsvOptions::new("y")).unwrap_err();
        match err {
            Error::Ingestion { row, column, .. } => {
                assert_eq!(row, 1);
                assert_eq!(column, "x");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_target_is_config_error() {
        let err = csv("x,z\n1,2\n", &CsvOptions::new("y")).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn nonpositive_weight_rejected() {
        let err = csv("x,w,y\n1,0,3\n", &CsvOptions::new("y").weight("w")).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        let err = csv("x,w,y\n1,-2,3\n", &CsvOptions::new("y").weight("w")).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn missing_and_nonfinite_cells_rejected() {
        assert!(matches!(
            csv("x,y\n,1\n", &CsvOptions::new("y")),
            Err(Error::Ingestion { row: 1, .. })
        ));
        assert!(matches!(
            csv("x,y\n1,1\nnan,2\n", &CsvOptions::new("y")),
            Err(Error::Ingestion { row: 2, .. })
        ));
    }

    #[test]
    fn header_only_is_rejected() {
        assert!(csv("x,y\n", &CsvOptions::new("y")).is_err());
        assert!(csv("", &CsvOptions::new("y")).is_err());
    }

    #[test]
    fn timestamp_column_becomes_row_ids() {
        let d = csv(
            "timestamp,x,y\n2022-07-14T00:00:00,1,2\n2022-07-14T00:15:00,3,4\n",
            &CsvOptions::new("y"),
        )
        .unwrap();
        assert_eq!(d.feature_names(), &["x"]);
        assert_eq!(d.row_ids().unwrap()[1], "2022-07-14T00:15:00");
    }

    #[test]
    fn normalization_population_std() {
        let d = Dataset::new(vec!["x".into()], vec![vec![0.0, 2.0]], vec![0.0, 0.0], None).unwrap();
        let s = fit_normalization(&d, false).unwrap();
        assert_eq!(s.features[0], ColumnStats { mean: 1.0, scale: 1.0 });
        let n = apply_normalization(&d, &s).unwrap();
        assert_eq!(n.column(0), &[-1.0, 1.0]);
        assert_eq!(n.raw_column(0), &[0.0, 2.0]);
    }

    #[test]
    fn constant_column_gets_unit_scale() {
        let d = Dataset::new(
            vec!["c".into(), "t".into()],
            vec![vec![5.0; 3], vec![0.1; 3]],
            vec![1.0, 2.0, 3.0],
            None,
        )
        .unwrap();
        let s = fit_normalization(&d, false).unwrap();
        assert_eq!(s.features[0], ColumnStats { mean: 5.0, scale: 1.0 });
        assert_eq!(s.features[1].scale, 1.0);
    }

    #[test]
    fn standardized_column_is_fixed_point() {
        let z = [-1.224744871391589, 0.0, 1.224744871391589];
        let d = Dataset::new(vec!["z".into()], vec![z.to_vec()], vec![0.0; 3], None).unwrap();
        let s = fit_normalization(&d, false).unwrap().features[0];
        assert!(s.mean.abs() < 1e-12);
        assert!((s.scale - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalization_needs_two_rows() {
        let d = Dataset::new(vec!["x".into()], vec![vec![1.0]], vec![1.0], None).unwrap();
        assert!(fit_normalization(&d, false).is_err());
    }

    #[test]
    fn identity_stats_and_schema_mismatch() {
        let d = Dataset::new(vec!["x".into()], vec![vec![3.0, 4.0]], vec![0.0, 1.0], None).unwrap();
        let n = apply_normalization(&d, &NormStats::identity(vec!["x".into()])).unwrap();
        assert_eq!(n.column(0), d.column(0));
        let wrong = NormStats::identity(vec!["x".into(), "y".into()]);
        assert!(matches!(apply_normalization(&d, &wrong), Err(Error::Validation(_))));
    }

    #[test]
    fn target_standardization() {
        let d = Dataset::new(vec!["x".into()], vec![vec![0.0, 1.0]], vec![2.0, 4.0], None).unwrap();
        let s = fit_normalization(&d, true).unwrap();
        let n = apply_normalization(&d, &s).unwrap();
        assert_eq!(n.target(), &[-1.0, 1.0]);
        assert_eq!(n.raw_target(), &[2.0, 4.0]);
    }

    #[test]
    fn weight_edits() {
        let d = Dataset::new(vec!["x".into()], vec![vec![0.0; 3]], vec![0.0; 3], None).unwrap();
        let up = multiply_weights(&d, &[0, 1], 2.0).unwrap();
        assert_eq!(up.weights(), &[2.0, 2.0, 1.0]);
        let back = multiply_weights(&up, &[0, 1], 0.5).unwrap();
        assert_eq!(back.weights(), d.weights());
        assert_eq!(multiply_weights(&d, &[], 2.0).unwrap().weights(), d.weights());
        assert!(multiply_weights(&d, &[3], 2.0).is_err());
        assert!(multiply_weights(&d, &[0], 0.0).is_err());
    }

    #[test]
    fn fold_sizes_balanced() {
        let p = FoldPlan::new(10, 5, 1).unwrap();
        assert_eq!(p.fold_sizes(), vec![2; 5]);
        let p = FoldPlan::new(7, 5, 1).unwrap();
        assert_eq!(p.fold_sizes(), vec![2, 2, 1, 1, 1]);
        assert_eq!(FoldPlan::new(7, 5, 1).unwrap(), p);
        assert!(FoldPlan::new(3, 4, 0).is_err());
        assert!(FoldPlan::new(3, 0, 0).is_err());
    }
}
