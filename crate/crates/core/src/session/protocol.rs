//! Versioned JSON message protocol between the UI and the session service.
//!
//! A request is `{"v": 1, "id": <any>, "op": "<name>", "params": {...}}`.
//! The response echoes `v` and `id` and carries either
//! `{"status": "ok", "payload": ...}` or
//! `{"status": "error", "error": {"kind": ..., "message": ...}}`.
//!
//! Each connection is bound to at most one session (`open_session`). The
//! handler is transport independent: [`Service::handle_text`] maps one
//! request text to one response text.

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::analysis::AnalysisSession;
use super::store::{load_session, MANIFEST_FILE};
use super::views::{self, default_bins, ViewRequest};
use crate::composite::Measure;
use crate::error::Error;

pub const PROTOCOL_VERSION: u32 = 1;

pub const OPS: [&str; 9] = [
    "hello",
    "list_sessions",
    "open_session",
    "close_session",
    "get_summary",
    "get_view_data",
    "construct_composite",
    "discard_composite",
    "set_selection",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    #[serde(default = "version")]
    pub v: u32,
    #[serde(default)]
    pub id: Value,
    pub op: String,
    #[serde(default)]
    pub params: Value,
}

fn version() -> u32 {
    PROTOCOL_VERSION
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub v: u32,
    pub id: Value,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

impl Response {
    fn ok(id: Value, payload: Value) -> Self {
        Self {
            v: PROTOCOL_VERSION,
            id,
            status: Status::Ok,
            payload: Some(payload),
            error: None,
        }
    }

    fn error(id: Value, e: &ServiceError) -> Self {
        Self {
            v: PROTOCOL_VERSION,
            id,
            status: Status::Error,
            payload: None,
            error: Some(ErrorBody {
                kind: e.kind().to_string(),
                message: e.to_string(),
            }),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("unsupported protocol version {0}")]
    Version(u32),
    #[error("unknown op {0:?}")]
    UnknownOp(String),
    #[error("no session is open on this connection")]
    NoSession,
    #[error(transparent)]
    Core(#[from] Error),
}

impl ServiceError {
    pub fn kind(&self) -> &'static str {
        match self {
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::Version(_) => "unsupported_version",
            ServiceError::UnknownOp(_) => "unknown_op",
            ServiceError::NoSession => "no_session",
            ServiceError::Core(e) => match e {
                Error::MissingArtifact { .. } => "missing_artifact",
                Error::UnknownAttribute(_) => "unknown_attribute",
                Error::UnknownNodes(_) => "unknown_nodes",
                Error::SessionNotFound(_) => "session_not_found",
                Error::Collinear { .. } => "collinear",
                Error::UndefinedCorrelation(_) => "undefined_correlation",
                Error::InvalidArgument(_) => "invalid_argument",
                _ => "internal",
            },
        }
    }
}

type Shared = Arc<RwLock<AnalysisSession>>;

/// Sessions by name: registered in memory or loaded lazily from
/// `<root>/<name>/`.
#[derive(Debug, Default)]
pub struct Registry {
    root: Option<PathBuf>,
    sessions: Mutex<HashMap<String, Shared>>,
}

impl Registry {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: Some(root.into()),
            sessions: Mutex::default(),
        }
    }

    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn insert(&self, session: AnalysisSession) -> Shared {
        let shared = Arc::new(RwLock::new(session));
        let name = shared.read().expect("fresh lock").name().to_string();
        self.sessions.lock().expect("registry lock").insert(name, shared.clone());
        shared
    }

    pub fn get(&self, name: &str) -> Result<Shared, Error> {
        let mut sessions = self.sessions.lock().expect("registry lock");
        if let Some(s) = sessions.get(name) {
            return Ok(s.clone());
        }
        let valid = !name.is_empty() && !name.contains(['/', '\\']) && !name.starts_with('.');
        let dir = match &self.root {
            Some(root) if valid => root.join(name),
            _ => return Err(Error::SessionNotFound(name.to_string())),
        };
        if !dir.join(MANIFEST_FILE).is_file() {
            return Err(Error::SessionNotFound(name.to_string()));
        }
        let shared = Arc::new(RwLock::new(load_session(&dir)?));
        sessions.insert(name.to_string(), shared.clone());
        Ok(shared)
    }

    /// Names of loaded sessions and session directories under the root.
    pub fn list(&self) -> Vec<String> {
        let mut names: BTreeSet<String> = self.sessions.lock().expect("registry lock").keys().cloned().collect();
        if let Some(root) = &self.root {
            if let Ok(entries) = std::fs::read_dir(root) {
                for entry in entries.flatten() {
                    let name = entry.file_name().to_string_lossy().to_string();
                    if !name.starts_with('.') && entry.path().join(MANIFEST_FILE).is_file() {
                        names.insert(name);
                    }
                }
            }
        }
        names.into_iter().collect()
    }
}

/// Per-connection state.
#[derive(Debug, Default)]
pub struct Connection {
    session: Option<(String, Shared)>,
}

impl Connection {
    pub fn session_name(&self) -> Option<&str> {
        self.session.as_ref().map(|(n, _)| n.as_str())
    }

    fn shared(&self) -> Result<&Shared, ServiceError> {
        self.session.as_ref().map(|(_, s)| s).ok_or(ServiceError::NoSession)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OpenParams {
    name: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstructParams {
    attributes: Vec<String>,
    #[serde(default = "pearson")]
    measure: Measure,
}

fn pearson() -> Measure {
    Measure::Pearson
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiscardParams {
    index: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectionParams {
    ids: Vec<String>,
    #[serde(default = "default_bins")]
    bins: usize,
}

fn params<T: serde::de::DeserializeOwned>(p: Value) -> Result<T, ServiceError> {
    let p = if p.is_null() { json!({}) } else { p };
    serde_json::from_value(p).map_err(|e| ServiceError::BadRequest(e.to_string()))
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, ServiceError> {
    serde_json::to_value(v).map_err(|e| ServiceError::Core(e.into()))
}

/// The request handler shared by all connections.
#[derive(Debug, Clone)]
pub struct Service {
    registry: Arc<Registry>,
}

impl Service {
    pub fn new(registry: Arc<Registry>) -> Self {
        Self { registry }
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    /// Handles one request text; malformed input yields an error response.
    pub fn handle_text(&self, conn: &mut Connection, text: &str) -> String {
        let response = match serde_json::from_str::<Request>(text) {
            Ok(req) => self.handle(conn, req),
            Err(e) => Response::error(Value::Null, &ServiceError::BadRequest(e.to_string())),
        };
        serde_json::to_string(&response).expect("responses serialize")
    }

    pub fn handle(&self, conn: &mut Connection, req: Request) -> Response {
        let id = req.id.clone();
        match self.dispatch(conn, req) {
            Ok(payload) => Response::ok(id, payload),
            Err(e) => Response::error(id, &e),
        }
    }

    fn dispatch(&self, conn: &mut Connection, req: Request) -> Result<Value, ServiceError> {
        if req.v != PROTOCOL_VERSION {
            return Err(ServiceError::Version(req.v));
        }
        match req.op.as_str() {
            "hello" => Ok(json!({ "protocol_version": PROTOCOL_VERSION, "ops": OPS })),
            "list_sessions" => Ok(json!({ "sessions": self.registry.list() })),
            "open_session" => {
                let p: OpenParams = params(req.params)?;
                let shared = self.registry.get(&p.name)?;
                let summary = views::summary(&shared.read().expect("session lock"));
                conn.session = Some((p.name, shared));
                to_value(&summary)
            }
            "close_session" => {
                conn.session = None;
                Ok(json!({}))
            }
            "get_summary" => {
                let s = conn.shared()?.read().expect("session lock");
                to_value(&views::summary(&s))
            }
            "get_view_data" => {
                let view: ViewRequest = params(req.params)?;
                let s = conn.shared()?.read().expect("session lock");
                to_value(&views::get_view_data(&s, &view)?)
            }
            "construct_composite" => {
                let p: ConstructParams = params(req.params)?;
                let mut s = conn.shared()?.write().expect("session lock");
                s.construct_composite(&p.attributes, p.measure)?;
                let index = s.composites.len() - 1;
                to_value(&views::composite_view(&s, index, &s.composites[index])?)
            }
            "discard_composite" => {
                let p: DiscardParams = params(req.params)?;
                let mut s = conn.shared()?.write().expect("session lock");
                s.discard_composite(p.index)?;
                to_value(&views::composites_view(&s)?)
            }
            "set_selection" => {
                let p: SelectionParams = params(req.params)?;
                let mut s = conn.shared()?.write().expect("session lock");
                s.set_selection(p.ids, p.bins)?;
                to_value(&views::histograms_view(&s, p.bins)?)
            }
            other => Err(ServiceError::UnknownOp(other.to_string())),
        }
    }
}
