use std::collections::HashMap;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use igam::constraints::{anchor_window, conflicting_pairs, ConstraintRequest, FeatureRef};
use igam::gam::{save_model, TrainConfig};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{ApiError, ApiResult};
use crate::state::{lock, AppState, JobState, RowSelection, Session, WeightEdit, WeightOp};

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/datasets", post(upload_dataset))
        .route("/datasets/{id}", get(get_dataset))
        .route("/models", post(create_model).get(list_models))
        .route("/models/import", post(import_model))
        .route("/models/{id}", get(get_model))
        .route("/models/{id}/series", get(series))
        .route("/models/{id}/weights", post(edit_weights).get(get_weights))
        .route("/models/{id}/constraints", post(add_constraint).get(list_constraints))
        .route("/models/{id}/constraints/{cid}", delete(delete_constraint))
        .route("/models/{id}/retrain", post(retrain))
        .route("/models/{id}/shapes/{feature}", get(shape))
        .route("/models/{id}/predict", post(predict))
        .route("/models/{id}/export", get(export_model))
        .with_state(state)
}

fn parse_json<T: for<'de> Deserialize<'de>>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::BadRequest(format!("invalid request body: {e}")))
}

#[derive(Deserialize)]
struct UploadQuery {
    target: Option<String>,
    weight: Option<String>,
    id_column: Option<String>,
}

async fn upload_dataset(
    State(st): State<AppState>,
    Query(q): Query<UploadQuery>,
    body: Bytes,
) -> ApiResult<Response> {
    let target = q
        .target
        .ok_or_else(|| ApiError::BadRequest("query parameter 'target' is required".into()))?;
    let meta = tokio::task::spawn_blocking(move || st.add_dataset(&body, &target, q.weight.as_deref(), q.id_column.as_deref()))
        .await
        .map_err(|e| ApiError::Storage(e.to_string()))??;
    Ok((StatusCode::CREATED, Json(meta)).into_response())
}

async fn get_dataset(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    Ok(Json(json!(st.dataset(&id)?.meta)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateModel {
    dataset_id: String,
    #[serde(default)]
    config: Option<Value>,
}

async fn create_model(State(st): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let req: CreateModel = parse_json(&body)?;
    st.dataset(&req.dataset_id)?;
    let mut config = TrainConfig {
        seed: st.default_seed(),
        ..TrainConfig::default()
    };
    if let Some(Value::Object(map)) = req.config {
        let mut merged = serde_json::to_value(&config).map_err(|e| ApiError::Storage(e.to_string()))?;
        for (k, v) in map {
            merged[k] = v;
        }
        config = serde_json::from_value(merged).map_err(|e| ApiError::BadRequest(format!("invalid config: {e}")))?;
    } else if let Some(v) = req.config.filter(|v| !v.is_null()) {
        return Err(ApiError::BadRequest(format!("config must be an object, got {v}")));
    }
    let rec = st.create_model(&req.dataset_id, config)?;
    Ok((StatusCode::ACCEPTED, Json(json!({ "model_id": rec.model_id, "job": rec.job, "revision": rec.revision }))).into_response())
}

async fn list_models(State(st): State<AppState>) -> Json<Value> {
    Json(json!({ "models": st.model_ids() }))
}

fn summary(s: &Session) -> Value {
    let r = &s.record;
    let model = s.model.as_ref().map(|m| {
        json!({
            "features": m.feature_names,
            "loss_trace": m.training.loss_trace,
            "n_rows": m.training.n_rows,
            "trained_at": m.training.trained_at,
            "violations": m.constraint_violations(),
        })
    });
    json!({
        "model_id": r.model_id,
        "dataset_id": r.dataset_id,
        "config": r.config,
        "job": r.job,
        "revision": r.revision,
        "trained_revision": r.trained_revision,
        "pending_edits": r.pending_edits(),
        "constraints": r.constraints,
        "model": model,
    })
}

async fn get_model(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let h = st.session(&id)?;
    let s = lock(&h);
    Ok(Json(summary(&s)))
}

#[derive(Deserialize)]
struct SeriesQuery {
    from: Option<usize>,
    to: Option<usize>,
    ref_factor: Option<String>,
}

#[derive(Serialize)]
struct Series {
    from: usize,
    to: usize,
    revision: u64,
    row_ids: Option<Vec<String>>,
    actual: Vec<f64>,
    predicted: Vec<f64>,
    weights: Vec<f64>,
    ref_factor: Option<String>,
    reference: Option<Vec<f64>>,
}

async fn series(State(st): State<AppState>, Path(id): Path<String>, Query(q): Query<SeriesQuery>) -> ApiResult<Json<Series>> {
    let h = st.session(&id)?;
    let (model, weights, dataset_id, revision) = {
        let s = lock(&h);
        let model = s
            .model
            .clone()
            .ok_or_else(|| ApiError::Conflict("model has no trained revision yet".into()))?;
        (model, s.record.weights.clone(), s.record.dataset_id.clone(), s.record.revision)
    };
    let dataset_id = dataset_id.ok_or_else(|| ApiError::Conflict("model is not attached to a dataset".into()))?;
    let ds = st.dataset(&dataset_id)?;
    let n = ds.data.n_rows();
    let from = q.from.unwrap_or(0);
    let to = q.to.unwrap_or(n);
    if from >= to || to > n {
        return Err(ApiError::BadRequest(format!("row window [{from}, {to}) is empty or exceeds {n} rows")));
    }
    let reference = match &q.ref_factor {
        Some(name) => {
            let d = ds
                .data
                .feature_index(name)
                .ok_or_else(|| ApiError::BadRequest(format!("unknown ref_factor '{name}'")))?;
            Some(ds.data.raw_column(d)[from..to].to_vec())
        }
        None => None,
    };
    let rows: Vec<usize> = (from..to).collect();
    let sub = ds.data.subset(&rows);
    let predicted = model.predict_dataset(&sub)?;
    let weights = weights.unwrap_or_else(|| ds.data.weights().to_vec())[from..to].to_vec();
    Ok(Json(Series {
        from,
        to,
        revision,
        row_ids: ds.data.row_ids().map(|r| r[from..to].to_vec()),
        actual: sub.raw_target().to_vec(),
        predicted,
        weights,
        ref_factor: q.ref_factor,
        reference,
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightRequest {
    rows: RowSelection,
    op: WeightOp,
}

async fn edit_weights(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: WeightRequest = parse_json(&body)?;
    let h = st.session(&id)?;
    let mut s = lock(&h);
    if s.record.job == JobState::Running {
        return Err(ApiError::Conflict("cannot edit weights while a retrain is in progress".into()));
    }
    let weights = s
        .record
        .weights
        .as_ref()
        .ok_or_else(|| ApiError::Conflict("model is not attached to a dataset".into()))?;
    let rows = req.rows.resolve(weights.len())?;
    let updated = igam::dataset::scaled_weights(weights, &rows, req.op.factor())?;
    s.record.weights = Some(updated);
    s.record.revision += 1;
    let revision = s.record.revision;
    s.record.edits.push(WeightEdit {
        op: req.op,
        rows: req.rows,
        revision,
    });
    st.persist(&s)?;
    Ok(Json(json!({ "revision": revision, "rows": rows.len(), "pending_edits": s.record.pending_edits() })))
}

async fn get_weights(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let h = st.session(&id)?;
    let s = lock(&h);
    Ok(Json(json!({ "revision": s.record.revision, "weights": s.record.weights })))
}

async fn add_constraint(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let req: ConstraintRequest = parse_json(&body)?;
    let h = st.session(&id)?;
    let mut s = lock(&h);
    if s.record.job == JobState::Running {
        return Err(ApiError::Conflict("cannot change constraints while a retrain is in progress".into()));
    }
    let model = s
        .model
        .clone()
        .ok_or_else(|| ApiError::Conflict("model has no trained revision yet".into()))?;
    let seq = s.record.next_constraint;
    let mut spec = req.resolve(&model.feature_names, || format!("c{seq}"))?;
    if s.record.constraints.iter().any(|c| c.id == spec.id) {
        return Err(ApiError::Conflict(format!("constraint id '{}' already exists", spec.id)));
    }
    let (lo, hi) = spec.normalized_range(&model.norm.features[spec.feature]);
    anchor_window(model.shapes[spec.feature].anchors(), lo, hi)?;
    spec.created_at = seq;
    s.record.next_constraint += 1;
    s.record.constraints.push(spec.clone());
    s.record.revision += 1;
    st.persist(&s)?;
    let warnings: Vec<String> = conflicting_pairs(&s.record.constraints)
        .into_iter()
        .filter(|(a, b)| *a == spec.id || *b == spec.id)
        .map(|(a, b)| format!("constraints '{a}' and '{b}' have opposite kinds on overlapping ranges"))
        .collect();
    Ok((
        StatusCode::CREATED,
        Json(json!({ "constraint_id": spec.id, "constraint": spec, "revision": s.record.revision, "warnings": warnings })),
    )
        .into_response())
}

async fn list_constraints(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let h = st.session(&id)?;
    let s = lock(&h);
    let warnings: Vec<String> = conflicting_pairs(&s.record.constraints)
        .into_iter()
        .map(|(a, b)| format!("constraints '{a}' and '{b}' have opposite kinds on overlapping ranges"))
        .collect();
    Ok(Json(json!({ "revision": s.record.revision, "constraints": s.record.constraints, "warnings": warnings })))
}

async fn delete_constraint(State(st): State<AppState>, Path((id, cid)): Path<(String, String)>) -> ApiResult<Json<Value>> {
    let h = st.session(&id)?;
    let mut s = lock(&h);
    if s.record.job == JobState::Running {
        return Err(ApiError::Conflict("cannot change constraints while a retrain is in progress".into()));
    }
    let pos = s
        .record
        .constraints
        .iter()
        .position(|c| c.id == cid)
        .ok_or_else(|| ApiError::NotFound(format!("unknown constraint '{cid}'")))?;
    s.record.constraints.remove(pos);
    s.record.revision += 1;
    st.persist(&s)?;
    Ok(Json(json!({ "revision": s.record.revision, "constraints": s.record.constraints })))
}

async fn retrain(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let h = st.session(&id)?;
    let rec = st.start_training(&h)?;
    Ok((StatusCode::ACCEPTED, Json(json!({ "model_id": rec.model_id, "job": rec.job, "revision": rec.revision }))).into_response())
}

#[derive(Serialize)]
struct Density {
    counts: Vec<u64>,
    mass: Vec<f64>,
}

async fn shape(State(st): State<AppState>, Path((id, feature)): Path<(String, String)>) -> ApiResult<Json<Value>> {
    let h = st.session(&id)?;
    let s = lock(&h);
    let model = s
        .model
        .clone()
        .ok_or_else(|| ApiError::Conflict("model has no trained revision yet".into()))?;
    let fref = match feature.parse::<usize>() {
        Ok(i) if model.feature_index(&feature).is_none() => FeatureRef::Index(i),
        _ => FeatureRef::Name(feature.clone()),
    };
    let d = fref
        .resolve(&model.feature_names)
        .map_err(|_| ApiError::NotFound(format!("unknown feature '{feature}'")))?;
    let raw = model.shape_values(d, true, false)?;
    let centered = model.shape_values(d, true, true)?;
    let counts = model
        .training
        .bin_counts
        .get(d)
        .cloned()
        .unwrap_or_else(|| vec![0; raw.anchors.len().saturating_sub(1).max(1)]);
    let total: u64 = counts.iter().sum();
    let mass = counts
        .iter()
        .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
        .collect();
    let active: Vec<&str> = s.record.constraints.iter().filter(|c| c.feature == d).map(|c| c.id.as_str()).collect();
    Ok(Json(json!({
        "feature": raw.feature,
        "index": d,
        "revision": s.record.revision,
        "anchors": raw.anchors,
        "values": raw.values,
        "centered_values": centered.values,
        "offset": centered.offset,
        "intercept": centered.intercept,
        "left_slope": raw.left_slope,
        "right_slope": raw.right_slope,
        "density": Density { counts, mass },
        "constraints": active,
    })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PredictRequest {
    rows: Vec<Vec<f64>>,
}

async fn predict(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: PredictRequest = parse_json(&body)?;
    let h = st.session(&id)?;
    let model = lock(&h)
        .model
        .clone()
        .ok_or_else(|| ApiError::Conflict("model has no trained revision yet".into()))?;
    let predictions = req.rows.iter().map(|r| model.predict_row(r)).collect::<igam::Result<Vec<f64>>>()?;
    Ok(Json(json!({ "predictions": predictions })))
}

async fn export_model(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let h = st.session(&id)?;
    let model = lock(&h)
        .model
        .clone()
        .ok_or_else(|| ApiError::Conflict("model has no trained revision yet".into()))?;
    let bytes = save_model(&model)?;
    Ok(([(header::CONTENT_TYPE, "application/json")], bytes).into_response())
}

async fn import_model(
    State(st): State<AppState>,
    Query(q): Query<HashMap<String, String>>,
    body: Bytes,
) -> ApiResult<Response> {
    let rec = st.import_model(&body, q.get("dataset_id").map(String::as_str))?;
    Ok((StatusCode::CREATED, Json(json!({ "model_id": rec.model_id, "revision": rec.revision }))).into_response())
}
