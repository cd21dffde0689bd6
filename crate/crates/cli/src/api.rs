//! JSON over HTTP for the dashboard.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::NaiveDate;
use procload_core::eventlog::{build_process_graph, export_graph, EventLog, ProcessGraph};
use procload_core::forecast::{train, ForecastModel, TrainReport};
use procload_core::pipeline::{
    evaluate_with, prepare_features, run_pipeline, split_history, EvalReport, ForecastRequest,
    WorkloadForecast,
};
use procload_core::replay::{complete_running_order, PlannedActivity, RunningOrder};
use procload_core::workload::{demand_series, supply_series, Step, WorkloadSeries};
use serde::{Deserialize, Serialize};

use crate::{AppConfig, AppError, FileStore};

impl IntoResponse for AppError {
    fn into_response(self) -> Response {
        let status = match self.kind() {
            "bad_request" | "event_log" | "workload" | "json" => StatusCode::BAD_REQUEST,
            "not_found" => StatusCode::NOT_FOUND,
            "conflict" => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(self.body())).into_response()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum TrainJob {
    Idle,
    Running,
    Done { report: TrainReport },
    Failed { message: String },
}

pub struct AppState {
    pub config: AppConfig,
    pub log: EventLog,
    pub store: FileStore,
    jobs: Mutex<BTreeMap<String, TrainJob>>,
    /// Serializes model and forecast writes.
    write_lock: tokio::sync::Mutex<()>,
}

impl AppState {
    pub fn new(config: AppConfig, log: EventLog) -> Self {
        let store = FileStore::new(&config.model_dir, config.forecast_dir());
        AppState {
            config,
            log,
            store,
            jobs: Mutex::new(BTreeMap::new()),
            write_lock: tokio::sync::Mutex::new(()),
        }
    }

    fn known_type(&self, t: &str) -> Result<(), AppError> {
        if self.log.article_types().iter().any(|x| x == t) {
            Ok(())
        } else {
            Err(AppError::NotFound(format!("article type `{t}`")))
        }
    }

    fn models(&self, types: &[String]) -> Result<BTreeMap<String, ForecastModel>, AppError> {
        let mut out = BTreeMap::new();
        for t in types {
            if let Some(m) = self.store.load_model(t)? {
                out.insert(t.clone(), m);
            }
        }
        Ok(out)
    }
}

type Shared = State<Arc<AppState>>;
type QueryResult<T> = Result<Query<T>, QueryRejection>;

fn query<T>(q: QueryResult<T>) -> Result<T, AppError> {
    q.map(|Query(v)| v)
        .map_err(|e| AppError::BadRequest(e.body_text()))
}

fn blocking_err(e: tokio::task::JoinError) -> AppError {
    AppError::Io(std::io::Error::other(e.to_string()))
}

async fn article_types(State(s): Shared) -> Json<Vec<String>> {
    Json(s.log.article_types())
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum KindParam {
    Demand,
    Supply,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum StepParam {
    Day,
    Week,
}

#[derive(Debug, Deserialize)]
struct WorkloadQuery {
    article_type: String,
    unit: Option<String>,
    kind: Option<KindParam>,
    step: Option<StepParam>,
}

async fn workload(
    State(s): Shared,
    q: QueryResult<WorkloadQuery>,
) -> Result<Json<WorkloadSeries>, AppError> {
    let q = query(q)?;
    s.known_type(&q.article_type)?;
    if let Some(u) = &q.unit {
        if !s.log.business_units().contains(u) {
            return Err(AppError::NotFound(format!("business unit `{u}`")));
        }
    }
    let step = match q.step {
        Some(StepParam::Day) => Step::Day,
        _ => Step::Week,
    };
    let series = match q.kind {
        Some(KindParam::Demand) => demand_series(&s.log, &q.article_type, step)?,
        _ => supply_series(&s.log, &q.article_type, q.unit.as_deref(), step)?,
    };
    Ok(Json(series))
}

#[derive(Debug, Deserialize)]
struct GraphQuery {
    threshold: Option<f64>,
}

#[derive(Debug, Serialize)]
struct GraphResponse {
    graph: ProcessGraph,
    dot: String,
}

async fn process_graph(
    State(s): Shared,
    q: QueryResult<GraphQuery>,
) -> Result<Json<GraphResponse>, AppError> {
    let q = query(q)?;
    let graph = build_process_graph(&s.log, q.threshold.unwrap_or(1.0))?;
    let dot = export_graph(&graph);
    Ok(Json(GraphResponse { graph, dot }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StoredForecast {
    pub id: String,
    #[serde(flatten)]
    pub forecast: WorkloadForecast,
}

async fn forecast(
    State(s): Shared,
    body: Result<Json<ForecastRequest>, JsonRejection>,
) -> Result<Json<StoredForecast>, AppError> {
    let Json(request) = body.map_err(|e| AppError::BadRequest(e.body_text()))?;
    if request.horizon_weeks == 0 {
        return Err(AppError::BadRequest(
            "horizon_weeks must be at least 1".into(),
        ));
    }
    for t in &request.article_types {
        s.known_type(t)?;
    }
    let _guard = s.write_lock.lock().await;
    let state = s.clone();
    let (forecast, id) = tokio::task::spawn_blocking(move || -> Result<_, AppError> {
        let types = if request.article_types.is_empty() {
            state.log.article_types()
        } else {
            request.article_types.clone()
        };
        let models = state.models(&types)?;
        let forecast = run_pipeline(&state.log, &request, &models, &state.config.pipeline)?;
        let id = state.store.save_forecast(&forecast)?;
        Ok((forecast, id))
    })
    .await
    .map_err(blocking_err)??;
    Ok(Json(StoredForecast { id, forecast }))
}

async fn forecast_activities(
    State(s): Shared,
    Path(id): Path<String>,
) -> Result<Json<Vec<PlannedActivity>>, AppError> {
    let f = s.store.load_forecast(&id)?;
    Ok(Json(f.activities().cloned().collect()))
}

#[derive(Debug, Deserialize)]
struct RunningQuery {
    as_of: Option<NaiveDate>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunningWithCompletion {
    pub order: RunningOrder,
    pub completion: Vec<PlannedActivity>,
}

async fn running_orders(
    State(s): Shared,
    q: QueryResult<RunningQuery>,
) -> Result<Json<Vec<RunningWithCompletion>>, AppError> {
    let q = query(q)?;
    let as_of = q.as_of.unwrap_or_else(|| s.log.period().1.date());
    let history = split_history(&s.log, as_of, s.config.pipeline.mass);
    let mut out = Vec::with_capacity(history.running.len());
    for order in history.running {
        let completion = complete_running_order(&order, &history.catalog).unwrap_or_default();
        out.push(RunningWithCompletion { order, completion });
    }
    Ok(Json(out))
}

/// Scores the stored models; types without one are listed as skipped.
async fn eval(State(s): Shared) -> Result<Json<EvalReport>, AppError> {
    let state = s.clone();
    let report = tokio::task::spawn_blocking(move || -> Result<_, AppError> {
        let cfg = state.config.eval_config();
        Ok(evaluate_with(&state.log, &cfg, |t, _, _| {
            state.store.load_model(t).ok().flatten().ok_or_else(|| {
                procload_core::forecast::ForecastError::InvalidConfig(format!(
                    "no stored model for `{t}`"
                ))
            })
        })?)
    })
    .await
    .map_err(blocking_err)??;
    Ok(Json(report))
}

async fn train_status(State(s): Shared, Path(t): Path<String>) -> Result<Json<TrainJob>, AppError> {
    s.known_type(&t)?;
    let jobs = s.jobs.lock().expect("job table poisoned");
    Ok(Json(jobs.get(&t).cloned().unwrap_or(TrainJob::Idle)))
}

async fn start_training(
    State(s): Shared,
    Path(t): Path<String>,
) -> Result<(StatusCode, Json<TrainJob>), AppError> {
    s.known_type(&t)?;
    {
        let mut jobs = s.jobs.lock().expect("job table poisoned");
        if jobs.get(&t) == Some(&TrainJob::Running) {
            return Err(AppError::Conflict(format!(
                "training for `{t}` is already running"
            )));
        }
        jobs.insert(t.clone(), TrainJob::Running);
    }
    let state = s.clone();
    tokio::spawn(async move {
        let guard = state.write_lock.lock().await;
        let job_state = state.clone();
        let ty = t.clone();
        let result = tokio::task::spawn_blocking(move || -> Result<TrainReport, AppError> {
            let st = &job_state;
            let rows = prepare_features(&st.log, &ty, &st.config.pipeline.prep)?;
            let model = train(&ty, &rows, &st.config.train)?;
            st.store.save_model(&model)?;
            Ok(model.train_report)
        })
        .await;
        drop(guard);
        let status = match result {
            Ok(Ok(report)) => TrainJob::Done { report },
            Ok(Err(e)) => TrainJob::Failed {
                message: e.to_string(),
            },
            Err(e) => TrainJob::Failed {
                message: e.to_string(),
            },
        };
        tracing::info!(article_type = %t, ?status, "training finished");
        state
            .jobs
            .lock()
            .expect("job table poisoned")
            .insert(t, status);
    });
    Ok((StatusCode::ACCEPTED, Json(TrainJob::Running)))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/article-types", get(article_types))
        .route("/api/workload", get(workload))
        .route("/api/process-graph", get(process_graph))
        .route("/api/forecast", post(forecast))
        .route("/api/forecast/{id}/activities", get(forecast_activities))
        .route("/api/running-orders", get(running_orders))
        .route("/api/eval", get(eval))
        .route(
            "/api/train/{article_type}",
            get(train_status).post(start_training),
        )
        .with_state(state)
}

pub async fn serve(config: AppConfig, log: EventLog) -> Result<(), AppError> {
    let listener = tokio::net::TcpListener::bind(&config.bind).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(Arc::new(AppState::new(config, log)))).await?;
    Ok(())
}
