// Copyright 2026 The ctxbridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


//! HTTP service. One thread owns the engine; handlers queue jobs to it and
//! wait for the reply, so admission order is logical order.

use std::convert::Infallible;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::thread;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, Query, RawQuery, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event as SseEvent, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use serde::Deserialize;
use serde_json::{json, Value as JsonValue};
use thiserror::Error;
use tokio::sync::{broadcast, oneshot};

use crate::events::{render_record, EventRecord};
use crate::gateway::Device;
use crate::orb::Severity;
use crate::registry::{Profile, Registry, RegistryError, LOCATION_FILE, PROFILE_FILE, SERVICE_FILE};
use crate::weaver::{Action, AspectDoc};

use super::dsl::{Command, Seed};
use super::engine::Engine;

pub const EVENTS_FILE: &str = "events.ndjson";
pub const ALARMS_FILE: &str = "alarms.ndjson";
pub const SEED_DIR: &str = "seed";

/// A state-mutating endpoint and the scenario verb it becomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MutatingRoute {
    pub method: &'static str,
    pub path: &'static str,
    pub verb: &'static str,
}

const fn m(method: &'static str, path: &'static str, verb: &'static str) -> MutatingRoute {
    MutatingRoute { method, path, verb }
}

pub const MUTATING_ROUTES: &[MutatingRoute] = &[
    m("POST", "/profiles", "profile upsert"),
    m("POST", "/identify", "user identify"),
    m("POST", "/services/query", "user request"),
    m("POST", "/user/move", "user move"),
    m("POST", "/services/select", "user select"),
    m("POST", "/device/{device}/power", "device power"),
    m("POST", "/alarms/inject", "alarm inject"),
    m("POST", "/alarms/schedule", "alarm schedule"),
    m("POST", "/aspects/actions", "aspect action"),
    m("POST", "/aspects", "aspect weave"),
    m("DELETE", "/aspects/{id}", "aspect unweave"),
    m("POST", "/aa/{id}/apply", "aa apply"),
    m("POST", "/aa/{id}/revert", "aa revert"),
    m("POST", "/hmi/override", "hmi override"),
    m("DELETE", "/hmi/override/{field}", "hmi clear"),
    m("POST", "/services/{id}/availability", "service available"),
    m("POST", "/endpoints", "endpoint export"),
    m("POST", "/endpoints/unexport", "endpoint unexport"),
];

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot bind port {port}: {detail}")]
    BindError { port: u16, detail: String },
    #[error("state directory {path}: {detail}")]
    State { path: String, detail: String },
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("server failed: {0}")]
    Io(String),
}

type Reply = Result<JsonValue, (String, String)>;

enum Job {
    Exec(Command, oneshot::Sender<Reply>),
    Read(Box<dyn FnOnce(&Engine) + Send>),
}

struct Persist {
    root: PathBuf,
    events: File,
    alarms_written: usize,
}

impl Persist {
    fn io(root: &Path, e: std::io::Error) -> ServeError {
        ServeError::State {
            path: root.display().to_string(),
            detail: e.to_string(),
        }
    }

    fn open(root: &Path) -> Result<Persist, ServeError> {
        let events = OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(true)
            .open(root.join(EVENTS_FILE))
            .map_err(|e| Self::io(root, e))?;
        fs::write(root.join(ALARMS_FILE), "").map_err(|e| Self::io(root, e))?;
        Ok(Persist {
            root: root.to_path_buf(),
            events,
            alarms_written: 0,
        })
    }
}

struct Worker {
    engine: Engine,
    persist: Option<Persist>,
    published: usize,
    events: broadcast::Sender<EventRecord>,
}

impl Worker {
    fn publish(&mut self) {
        let recs = &self.engine.log().records()[self.published..];
        if let Some(p) = &mut self.persist {
            let mut buf = String::new();
            for r in recs {
                buf.push_str(&render_record(r));
                buf.push('\n');
            }
            if let Err(e) = p.events.write_all(buf.as_bytes()) {
                eprintln!("ctxbridge: cannot append {EVENTS_FILE}: {e}");
            }
            let alarms = self.engine.gateway().orb().alarm_log();
            if alarms.len() != p.alarms_written {
                if let Err(e) = fs::write(p.root.join(ALARMS_FILE), crate::orb::render_alarm_log(alarms)) {
                    eprintln!("ctxbridge: cannot write {ALARMS_FILE}: {e}");
                }
                p.alarms_written = alarms.len();
            }
        }
        for r in recs {
            let _ = self.events.send(r.clone());
        }
        self.published = self.engine.log().len();
    }

    fn exec(&mut self, cmd: &Command) -> Reply {
        let tick = self.engine.tick() + 1;
        let r = self
            .engine
            .execute(tick, cmd)
            .map_err(|e| (e.code().to_string(), e.to_string()));
        if r.is_ok() && matches!(cmd, Command::ProfileUpsert(_) | Command::Availability { .. }) {
            if let Some(p) = &self.persist {
                if let Err(e) = self.engine.gateway().registry().save(&p.root) {
                    eprintln!("ctxbridge: cannot save registry: {e}");
                }
            }
        }
        self.publish();
        r
    }

    fn run(mut self, jobs: mpsc::Receiver<Job>) {
        for job in jobs {
            match job {
                Job::Exec(cmd, reply) => {
                    let r = self.exec(&cmd);
                    let _ = reply.send(r);
                }
                Job::Read(f) => f(&self.engine),
            }
        }
    }
}

/// Handle shared by the HTTP handlers.
#[derive(Clone)]
pub struct AppState {
    jobs: mpsc::Sender<Job>,
    events: broadcast::Sender<EventRecord>,
}

impl AppState {
    /// Starts the command loop around `engine`. With `state_dir`, the event
    /// log, the alarm log and registry edits are written there.
    pub fn start(engine: Engine, state_dir: Option<&Path>) -> Result<AppState, ServeError> {
        let persist = state_dir.map(Persist::open).transpose()?;
        let (jobs, rx) = mpsc::channel();
        let (events, _) = broadcast::channel(4096);
        let mut worker = Worker {
            engine,
            persist,
            published: 0,
            events: events.clone(),
        };
        worker.publish();
        thread::Builder::new()
            .name("ctxbridge-engine".into())
            .spawn(move || worker.run(rx))
            .map_err(|e| ServeError::Io(e.to_string()))?;
        Ok(AppState { jobs, events })
    }

    pub async fn execute(&self, cmd: Command) -> Reply {
        let (tx, rx) = oneshot::channel();
        self.jobs
            .send(Job::Exec(cmd, tx))
            .map_err(|_| ("Unavailable".to_string(), "engine stopped".to_string()))?;
        rx.await
            .map_err(|_| ("Unavailable".to_string(), "engine stopped".to_string()))?
    }

    pub async fn read<T: Send + 'static>(&self, f: impl FnOnce(&Engine) -> T + Send + 'static) -> Option<T> {
        let (tx, rx) = oneshot::channel();
        self.jobs
            .send(Job::Read(Box::new(move |e| {
                let _ = tx.send(f(e));
            })))
            .ok()?;
        rx.await.ok()
    }
}

/// Loads the registry from `dir`, seeding it with the case-study tables
/// when the directory holds none. A copy of the starting tables goes to
/// `dir/seed` so recorded sessions replay from the same world.
pub fn open_state_dir(dir: &Path) -> Result<Engine, ServeError> {
    fs::create_dir_all(dir).map_err(|e| Persist::io(dir, e))?;
    let has_tables = [PROFILE_FILE, SERVICE_FILE, LOCATION_FILE]
        .iter()
        .all(|f| dir.join(f).is_file());
    let registry = if has_tables {
        Registry::load(dir)?
    } else {
        let r = Registry::case_study();
        r.save(dir)?;
        r
    };
    let seed = dir.join(SEED_DIR);
    fs::create_dir_all(&seed).map_err(|e| Persist::io(dir, e))?;
    registry.save(&seed)?;
    Ok(Engine::new(registry, Seed::Dir(seed)))
}

fn error(status: StatusCode, code: &str, message: &str) -> Response {
    (status, Json(json!({ "error": code, "message": message }))).into_response()
}

fn unavailable() -> Response {
    error(StatusCode::SERVICE_UNAVAILABLE, "Unavailable", "engine stopped")
}

async fn run_cmd(st: &AppState, cmd: Command) -> Response {
    match st.execute(cmd).await {
        Ok(v) => Json(v).into_response(),
        Err((code, msg)) if code == "Unavailable" => error(StatusCode::SERVICE_UNAVAILABLE, &code, &msg),
        Err((code, msg)) => error(StatusCode::UNPROCESSABLE_ENTITY, &code, &msg),
    }
}

fn body<T>(b: Result<Json<T>, JsonRejection>) -> Result<T, Box<Response>> {
    b.map(|Json(v)| v)
        .map_err(|e| Box::new(error(StatusCode::BAD_REQUEST, "BadRequest", &e.body_text())))
}

macro_rules! take {
    ($b:expr) => {
        match body($b) {
            Ok(v) => v,
            Err(r) => return *r,
        }
    };
}

#[derive(Deserialize)]
struct At {
    user_id: String,
    lon: f64,
    lat: f64,
}

#[derive(Deserialize)]
struct QueryBody {
    user_id: String,
    category: Option<String>,
    max_km: Option<f64>,
}

#[derive(Deserialize)]
struct SelectBody {
    user_id: String,
    id_service: String,
}

#[derive(Deserialize)]
struct PowerBody {
    on: bool,
}

#[derive(Deserialize)]
struct AlarmBody {
    source: String,
    severity: Severity,
    #[serde(default)]
    text: String,
}

#[derive(Deserialize)]
struct ScheduleBody {
    tick: u64,
    source: String,
    severity: Severity,
    #[serde(default)]
    text: String,
}

#[derive(Deserialize)]
struct OverrideBody {
    field: String,
    value: String,
}

#[derive(Deserialize)]
struct ActionBody {
    action_id: String,
    action: Action,
}

#[derive(Deserialize)]
struct AvailabilityBody {
    available: bool,
}

#[derive(Deserialize)]
struct ExportBody {
    contract: String,
    target: String,
    url: String,
}

#[derive(Deserialize)]
struct UrlBody {
    url: String,
}

#[derive(Deserialize)]
struct Since {
    since: Option<u64>,
}

async fn identify(State(st): State<AppState>, b: Result<Json<At>, JsonRejection>) -> Response {
    let b = take!(b);
    run_cmd(&st, Command::Identify { user_id: b.user_id, longitude: b.lon, latitude: b.lat }).await
}

async fn move_user(State(st): State<AppState>, b: Result<Json<At>, JsonRejection>) -> Response {
    let b = take!(b);
    run_cmd(&st, Command::Move { user_id: b.user_id, longitude: b.lon, latitude: b.lat }).await
}

async fn query(State(st): State<AppState>, b: Result<Json<QueryBody>, JsonRejection>) -> Response {
    let b = take!(b);
    run_cmd(&st, Command::Request { user_id: b.user_id, category: b.category, max_km: b.max_km }).await
}

async fn select(State(st): State<AppState>, b: Result<Json<SelectBody>, JsonRejection>) -> Response {
    let b = take!(b);
    run_cmd(&st, Command::Select { user_id: b.user_id, id_service: b.id_service }).await
}

async fn power(
    State(st): State<AppState>,
    UrlPath(device): UrlPath<String>,
    b: Result<Json<PowerBody>, JsonRejection>,
) -> Response {
    let Some(device) = Device::parse(&device) else {
        return error(StatusCode::NOT_FOUND, "UnknownDevice", &format!("no device `{device}`"));
    };
    let b = take!(b);
    run_cmd(&st, Command::Power { device, on: b.on }).await
}

async fn inject(State(st): State<AppState>, b: Result<Json<AlarmBody>, JsonRejection>) -> Response {
    let b = take!(b);
    run_cmd(&st, Command::AlarmInject { source: b.source, severity: b.severity, text: b.text }).await
}

async fn schedule(State(st): State<AppState>, b: Result<Json<ScheduleBody>, JsonRejection>) -> Response {
    let b = take!(b);
    run_cmd(
        &st,
        Command::AlarmSchedule { tick: b.tick, source: b.source, severity: b.severity, text: b.text },
    )
    .await
}

async fn set_override(State(st): State<AppState>, b: Result<Json<OverrideBody>, JsonRejection>) -> Response {
    let b = take!(b);
    run_cmd(&st, Command::HmiOverride { field: b.field, value: b.value }).await
}

async fn clear_override(State(st): State<AppState>, UrlPath(field): UrlPath<String>) -> Response {
    run_cmd(&st, Command::HmiClear { field }).await
}

async fn weave(State(st): State<AppState>, b: Result<Json<AspectDoc>, JsonRejection>) -> Response {
    let b = take!(b);
    run_cmd(&st, Command::AspectWeave(b)).await
}

async fn unweave(State(st): State<AppState>, UrlPath(aspect_id): UrlPath<String>) -> Response {
    run_cmd(&st, Command::AspectUnweave { aspect_id }).await
}

async fn register_action(State(st): State<AppState>, b: Result<Json<ActionBody>, JsonRejection>) -> Response {
    let b = take!(b);
    run_cmd(&st, Command::AspectAction { action_id: b.action_id, action: b.action }).await
}

async fn aa_apply(State(st): State<AppState>, UrlPath(aa_id): UrlPath<String>) -> Response {
    run_cmd(&st, Command::AaApply { aa_id }).await
}

async fn aa_revert(State(st): State<AppState>, UrlPath(aa_id): UrlPath<String>) -> Response {
    run_cmd(&st, Command::AaRevert { aa_id }).await
}

async fn upsert_profile(State(st): State<AppState>, b: Result<Json<Profile>, JsonRejection>) -> Response {
    let b = take!(b);
    run_cmd(&st, Command::ProfileUpsert(b)).await
}

async fn availability(
    State(st): State<AppState>,
    UrlPath(id_service): UrlPath<String>,
    b: Result<Json<AvailabilityBody>, JsonRejection>,
) -> Response {
    let b = take!(b);
    run_cmd(&st, Command::Availability { id_service, available: b.available }).await
}

async fn export(State(st): State<AppState>, b: Result<Json<ExportBody>, JsonRejection>) -> Response {
    let b = take!(b);
    run_cmd(&st, Command::EndpointExport { contract: b.contract, target: b.target, url: b.url }).await
}

async fn unexport(State(st): State<AppState>, b: Result<Json<UrlBody>, JsonRejection>) -> Response {
    let b = take!(b);
    run_cmd(&st, Command::EndpointUnexport { url: b.url }).await
}

async fn state(State(st): State<AppState>) -> Response {
    match st.read(|e| e.gateway().snapshot()).await {
        Some(s) => Json(s).into_response(),
        None => unavailable(),
    }
}

async fn log(State(st): State<AppState>, Query(q): Query<Since>) -> Response {
    let since = q.since.unwrap_or(0);
    match st.read(move |e| e.log().since(since).to_vec()).await {
        Some(recs) => Json(recs).into_response(),
        None => unavailable(),
    }
}

async fn scenario(State(st): State<AppState>) -> Response {
    match st.read(|e| e.recorded().render()).await {
        Some(s) => ([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], s).into_response(),
        None => unavailable(),
    }
}

async fn parity() -> Response {
    let rows: Vec<_> = MUTATING_ROUTES
        .iter()
        .map(|r| json!({ "method": r.method, "path": r.path, "verb": r.verb }))
        .collect();
    Json(rows).into_response()
}

fn sse_of(r: &EventRecord) -> Result<SseEvent, Infallible> {
    Ok(SseEvent::default()
        .event(r.event.kind())
        .id(r.seq.to_string())
        .data(render_record(r)))
}

/// Pushes log records as they append. `since` replays the backlog from
/// that sequence number first.
async fn stream_events(
    State(st): State<AppState>,
    Query(q): Query<Since>,
) -> Sse<impl Stream<Item = Result<SseEvent, Infallible>>> {
    let rx = st.events.subscribe();
    let backlog = match q.since {
        Some(since) => st.read(move |e| e.log().since(since).to_vec()).await.unwrap_or_default(),
        None => Vec::new(),
    };
    let next = backlog.last().map(|r| r.seq + 1);
    let live = stream::unfold(rx, |mut rx| async move {
        loop {
            match rx.recv().await {
                Ok(r) => return Some((r, rx)),
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => return None,
            }
        }
    })
    .filter(move |r| std::future::ready(next.is_none_or(|n| r.seq >= n)));
    let s = stream::iter(backlog).chain(live).map(|r| sse_of(&r));
    Sse::new(s).keep_alive(KeepAlive::default())
}

async fn wsdl(
    State(st): State<AppState>,
    UrlPath((app, imp)): UrlPath<(String, String)>,
    RawQuery(q): RawQuery,
) -> Response {
    if q.as_deref() != Some("wsdl") {
        return error(StatusCode::NOT_FOUND, "NotFound", "append ?wsdl for the contract document");
    }
    match st.read(move |e| e.gateway().wsdl(&app, &imp)).await {
        Some(Some(doc)) => ([(header::CONTENT_TYPE, "text/xml; charset=utf-8")], doc).into_response(),
        Some(None) => error(StatusCode::NOT_FOUND, "UnknownUrl", "no endpoint exported there"),
        None => unavailable(),
    }
}

pub fn router(st: AppState) -> Router {
    Router::new()
        .route("/state", get(state))
        .route("/log", get(log))
        .route("/stream", get(stream_events))
        .route("/scenario", get(scenario))
        .route("/parity", get(parity))
        .route("/profiles", post(upsert_profile))
        .route("/identify", post(identify))
        .route("/services/query", post(query))
        .route("/services/select", post(select))
        .route("/services/{id}/availability", post(availability))
        .route("/user/move", post(move_user))
        .route("/device/{device}/power", post(power))
        .route("/alarms/inject", post(inject))
        .route("/alarms/schedule", post(schedule))
        .route("/aspects", post(weave))
        .route("/aspects/actions", post(register_action))
        .route("/aspects/{id}", delete(unweave))
        .route("/aa/{id}/apply", post(aa_apply))
        .route("/aa/{id}/revert", post(aa_revert))
        .route("/hmi/override", post(set_override))
        .route("/hmi/override/{field}", delete(clear_override))
        .route("/endpoints", post(export))
        .route("/endpoints/unexport", post(unexport))
        .route("/{app}/services/{imp}", get(wsdl))
        .with_state(st)
}

/// Serves the API on `port` until the process stops.
pub async fn serve(port: u16, state_dir: Option<&Path>) -> Result<(), ServeError> {
    let engine = match state_dir {
        Some(d) => open_state_dir(d)?,
        None => Engine::case_study(),
    };
    let st = AppState::start(engine, state_dir)?;
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| ServeError::BindError { port, detail: e.to_string() })?;
    axum::serve(listener, router(st))
        .await
        .map_err(|e| ServeError::Io(e.to_string()))
}
