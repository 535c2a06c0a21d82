use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use igam::constraints::ConstraintSpec;
use igam::dataset::{parse_csv, CsvOptions, Dataset};
use igam::gam::{load_model, save_model, train_from, GamModel, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ApiResult};
use crate::store::Store;

pub const ENV_BIND: &str = "IGAM_BIND";
pub const ENV_DATA_DIR: &str = "IGAM_DATA_DIR";
pub const ENV_SEED: &str = "IGAM_SEED";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub bind: String,
    pub data_dir: PathBuf,
    pub default_seed: u64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:8080".into(),
            data_dir: PathBuf::from("igam-data"),
            default_seed: 0,
        }
    }
}

impl ServiceConfig {
    /// Defaults overridden by `IGAM_BIND`, `IGAM_DATA_DIR` and `IGAM_SEED`.
    pub fn from_env() -> Result<Self, String> {
        let mut c = Self::default();
        if let Ok(v) = std::env::var(ENV_BIND) {
            c.bind = v;
        }
        if let Ok(v) = std::env::var(ENV_DATA_DIR) {
            c.data_dir = v.into();
        }
        if let Ok(v) = std::env::var(ENV_SEED) {
            c.default_seed = v.parse().map_err(|_| format!("{ENV_SEED} must be an unsigned integer, got '{v}'"))?;
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub dataset_id: String,
    pub target: String,
    pub weight: Option<String>,
    pub id_column: Option<String>,
    pub n_rows: usize,
    pub features: Vec<String>,
}

pub struct StoredDataset {
    pub meta: DatasetMeta,
    pub data: Dataset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum JobState {
    Idle,
    Running,
    Failed { message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightOp {
    Increase,
    Decrease,
}

impl WeightOp {
    pub fn factor(self) -> f64 {
        match self {
            WeightOp::Increase => 2.0,
            WeightOp::Decrease => 0.5,
        }
    }
}

/// Rows given as a half-open range or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RowSelection {
    Range { start: usize, end: usize },
    List(Vec<usize>),
}

impl RowSelection {
    pub fn resolve(&self, n: usize) -> ApiResult<Vec<usize>> {
        let rows: Vec<usize> = match self {
            RowSelection::Range { start, end } => {
                if start >= end || *end > n {
                    return Err(ApiError::BadRequest(format!(
                        "row range [{start}, {end}) is empty or exceeds {n} rows"
                    )));
                }
                (*start..*end).collect()
            }
            RowSelection::List(v) => {
                if v.is_empty() {
                    return Err(ApiError::BadRequest("row list is empty".into()));
                }
                if let Some(bad) = v.iter().find(|&&r| r >= n) {
                    return Err(ApiError::BadRequest(format!("row {bad} out of range for {n} rows")));
                }
                v.clone()
            }
        };
        Ok(rows)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightEdit {
    pub op: WeightOp,
    pub rows: RowSelection,
    pub revision: u64,
}

/// Persisted part of a model session.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionRecord {
    pub model_id: String,
    pub dataset_id: Option<String>,
    pub config: TrainConfig,
    /// Current sample weights; `None` for imported models without a dataset.
    pub weights: Option<Vec<f64>>,
    pub edits: Vec<WeightEdit>,
    pub constraints: Vec<ConstraintSpec>,
    pub job: JobState,
    pub revision: u64,
    /// Revision produced by the last completed training.
    pub trained_revision: u64,
    pub next_constraint: u64,
}

impl SessionRecord {
    pub fn pending_edits(&self) -> usize {
        self.edits.iter().filter(|e| e.revision > self.trained_revision).count()
    }
}

pub struct Session {
    pub record: SessionRecord,
    pub model: Option<Arc<GamModel>>,
}

pub type SessionHandle = Arc<Mutex<Session>>;

struct Inner {
    store: Store,
    default_seed: u64,
    datasets: RwLock<HashMap<String, Arc<StoredDataset>>>,
    models: RwLock<HashMap<String, SessionHandle>>,
}

/// Shared service state. Cloning is cheap.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

fn now_secs() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn new_id(prefix: &str) -> String {
    format!("{prefix}-{}", uuid::Uuid::new_v4().simple())
}

/// Locks a session; a poisoned lock still holds consistent data because
/// every mutation is completed before persisting.
pub fn lock(h: &SessionHandle) -> std::sync::MutexGuard<'_, Session> {
    h.lock().unwrap_or_else(|e| e.into_inner())
}

impl AppState {
    /// Opens the data directory and restores datasets and sessions from it.
    pub fn open(data_dir: impl Into<PathBuf>, default_seed: u64) -> ApiResult<Self> {
        let store = Store::open(data_dir)?;
        let mut datasets = HashMap::new();
        for (id, csv, meta) in store.load_datasets::<DatasetMeta>()? {
            let data = parse_upload(&csv, &meta.target, meta.weight.as_deref(), meta.id_column.as_deref())?;
            datasets.insert(id, Arc::new(StoredDataset { meta, data }));
        }
        let mut models = HashMap::new();
        for (id, mut record, bytes) in store.load_sessions::<SessionRecord>()? {
            let model = bytes.map(|b| load_model(&b)).transpose()?.map(Arc::new);
            if record.job == JobState::Running {
                record.job = match model {
                    Some(_) => JobState::Idle,
                    None => JobState::Failed {
                        message: "training interrupted by a service restart".into(),
                    },
                };
            }
            models.insert(id, Arc::new(Mutex::new(Session { record, model })));
        }
        Ok(Self {
            inner: Arc::new(Inner {
                store,
                default_seed,
                datasets: RwLock::new(datasets),
                models: RwLock::new(models),
            }),
        })
    }

    pub fn default_seed(&self) -> u64 {
        self.inner.default_seed
    }

    pub fn store(&self) -> &Store {
        &self.inner.store
    }

    pub fn add_dataset(&self, csv: &[u8], target: &str, weight: Option<&str>, id_column: Option<&str>) -> ApiResult<DatasetMeta> {
        let data = parse_upload(csv, target, weight, id_column)?;
        let meta = DatasetMeta {
            dataset_id: new_id("ds"),
            target: target.to_string(),
            weight: weight.map(str::to_string),
            id_column: id_column.map(str::to_string),
            n_rows: data.n_rows(),
            features: data.feature_names().to_vec(),
        };
        self.inner.store.save_dataset(&meta.dataset_id, csv, &meta)?;
        self.inner
            .datasets
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(meta.dataset_id.clone(), Arc::new(StoredDataset { meta: meta.clone(), data }));
        Ok(meta)
    }

    pub fn dataset(&self, id: &str) -> ApiResult<Arc<StoredDataset>> {
        self.inner
            .datasets
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("unknown dataset '{id}'")))
    }

    pub fn session(&self, id: &str) -> ApiResult<SessionHandle> {
        self.inner
            .models
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("unknown model '{id}'")))
    }

    pub fn model_ids(&self) -> Vec<String> {
        let mut v: Vec<String> = self.inner.models.read().unwrap_or_else(|e| e.into_inner()).keys().cloned().collect();
        v.sort();
        v
    }

    pub fn persist(&self, s: &Session) -> ApiResult<()> {
        self.inner.store.save_session(&s.record.model_id, &s.record)
    }

    fn insert_session(&self, s: Session) -> ApiResult<SessionHandle> {
        self.persist(&s)?;
        if let Some(m) = &s.model {
            self.inner.store.save_model_bytes(&s.record.model_id, &save_model(m)?)?;
        }
        let id = s.record.model_id.clone();
        let h = Arc::new(Mutex::new(s));
        self.inner.models.write().unwrap_or_else(|e| e.into_inner()).insert(id, h.clone());
        Ok(h)
    }

    /// Creates a session on `dataset_id` and starts its first training.
    pub fn create_model(&self, dataset_id: &str, config: TrainConfig) -> ApiResult<SessionRecord> {
        config.validate()?;
        let ds = self.dataset(dataset_id)?;
        let record = SessionRecord {
            model_id: new_id("m"),
            dataset_id: Some(dataset_id.to_string()),
            config,
            weights: Some(ds.data.weights().to_vec()),
            edits: Vec::new(),
            constraints: Vec::new(),
            job: JobState::Idle,
            revision: 0,
            trained_revision: 0,
            next_constraint: 0,
        };
        let h = self.insert_session(Session { record, model: None })?;
        self.start_training(&h)
    }

    /// Registers an uploaded model file, optionally attached to a dataset.
    pub fn import_model(&self, bytes: &[u8], dataset_id: Option<&str>) -> ApiResult<SessionRecord> {
        let model = load_model(bytes)?;
        let weights = match dataset_id {
            Some(id) => {
                let ds = self.dataset(id)?;
                if ds.data.feature_names() != model.feature_names.as_slice() {
                    return Err(ApiError::BadRequest(format!(
                        "dataset '{id}' features [{}] do not match model features [{}]",
                        ds.data.feature_names().join(","),
                        model.feature_names.join(",")
                    )));
                }
                Some(ds.data.weights().to_vec())
            }
            None => None,
        };
        let record = SessionRecord {
            model_id: new_id("m"),
            dataset_id: dataset_id.map(str::to_string),
            config: model.config.clone(),
            weights,
            edits: Vec::new(),
            constraints: model.constraints.clone(),
            job: JobState::Idle,
            revision: 1,
            trained_revision: 1,
            next_constraint: model.constraints.len() as u64,
        };
        let h = self.insert_session(Session {
            record,
            model: Some(Arc::new(model)),
        })?;
        let rec = lock(&h).record.clone();
        Ok(rec)
    }

    /// Marks the session running and trains it from scratch (or warm, when
    /// configured) on a background thread. Fails with 409 while a job runs.
    pub fn start_training(&self, h: &SessionHandle) -> ApiResult<SessionRecord> {
        let mut s = lock(h);
        if s.record.job == JobState::Running {
            return Err(ApiError::Conflict("a retrain is already in progress".into()));
        }
        let dataset_id = s
            .record
            .dataset_id
            .clone()
            .ok_or_else(|| ApiError::Conflict("model has no dataset to train on".into()))?;
        let ds = self.dataset(&dataset_id)?;
        let weights = s.record.weights.clone().unwrap_or_else(|| ds.data.weights().to_vec());
        let data = ds.data.clone().with_weights(weights)?;
        let cfg = s.record.config.clone();
        let constraints = s.record.constraints.clone();
        let prev = s.model.clone();
        s.record.job = JobState::Running;
        self.persist(&s)?;
        let snapshot = s.record.clone();
        drop(s);

        let state = self.clone();
        let handle = h.clone();
        tokio::task::spawn_blocking(move || {
            let result = train_from(&data, &cfg, &constraints, prev.as_deref());
            let mut s = lock(&handle);
            match result.and_then(|mut m| {
                m.training.trained_at = Some(now_secs());
                let bytes = save_model(&m)?;
                Ok((m, bytes))
            }) {
                Ok((m, bytes)) => match state.inner.store.save_model_bytes(&s.record.model_id, &bytes) {
                    Ok(()) => {
                        s.model = Some(Arc::new(m));
                        s.record.revision += 1;
                        s.record.trained_revision = s.record.revision;
                        s.record.job = JobState::Idle;
                    }
                    Err(e) => s.record.job = JobState::Failed { message: e.to_string() },
                },
                Err(e) => s.record.job = JobState::Failed { message: e.to_string() },
            }
            if let Err(e) = state.persist(&s) {
                eprintln!("igam-service: cannot persist session {}: {e}", s.record.model_id);
            }
        });
        Ok(snapshot)
    }
}

fn parse_upload(csv: &[u8], target: &str, weight: Option<&str>, id_column: Option<&str>) -> ApiResult<Dataset> {
    let mut opts = CsvOptions::new(target);
    opts.weight_column = weight.map(str::to_string);
    opts.id_column = id_column.map(str::to_string);
    Ok(parse_csv(csv, &opts)?)
}
