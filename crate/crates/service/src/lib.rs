//! HTTP JSON API exposing the component tools to the writing UI.
//!
//! Models are loaded once at startup and shared read-only. A model that
//! fails to load leaves the service running; only the endpoints that need
//! it answer 503.

pub mod config;
pub mod usage;

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use wordsmith_core::spell::{self, SpellConfig};
use wordsmith_core::translate::{Direction, Translator};
use wordsmith_core::{LangIdModel, Lexicon, NgramModel};

pub use config::{Defaults, LoggingConfig, ServiceConfig, TranslatorConfig};
use usage::{LogRequest, UsageEvent, UsageLog};

/// Upper bound on `k` accepted from clients.
pub const MAX_K: usize = 100;
pub const MAX_QUERY_DIST: usize = 4;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("server error: {0}")]
    Server(#[from] std::io::Error),
}

/// Error body `{"error": message}` with a status code.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn unavailable(what: &str) -> Self {
        Self::new(
            StatusCode::SERVICE_UNAVAILABLE,
            format!("{what} not loaded"),
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        ApiError::bad_request(r.body_text())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        ApiError::new(r.status(), r.body_text())
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// A configured translator, or the reason it could not be built.
type TranslatorSlot = Result<Arc<Translator>, String>;

/// Immutable model snapshot shared by all handlers.
#[derive(Debug, Clone, Default)]
pub struct AppState {
    pub lexicon: Option<Arc<Lexicon>>,
    pub ngram: Option<Arc<NgramModel>>,
    pub langid: Option<Arc<LangIdModel>>,
    pub translators: Arc<BTreeMap<String, TranslatorSlot>>,
    pub usage_log: Option<Arc<UsageLog>>,
    pub defaults: Defaults,
}

fn load_optional<T>(
    what: &str,
    path: Option<&std::path::Path>,
    load: impl FnOnce(&std::path::Path) -> wordsmith_core::Result<T>,
) -> Option<Arc<T>> {
    let path = path?;
    match load(path) {
        Ok(v) => Some(Arc::new(v)),
        Err(e) => {
            tracing::warn!("{what} unavailable: {e}");
            None
        }
    }
}

impl AppState {
    /// Loads every model named in the config. Missing or broken model files
    /// are logged and leave the slot empty; a usage log that cannot be
    /// opened is a startup error.
    pub fn from_config(config: &ServiceConfig) -> Result<Self, ServiceError> {
        let lexicon = load_optional("lexicon", config.lexicon.as_deref(), |p| Lexicon::load(p));
        let ngram = load_optional("n-gram model", config.ngram_model.as_deref(), |p| {
            NgramModel::load(p)
        });
        let langid = load_optional("langid model", config.langid_model.as_deref(), |p| {
            LangIdModel::load(p)
        });

        let mut translators = BTreeMap::new();
        for tc in &config.translators {
            let spec = tc.to_spec()?;
            let key = spec.direction.to_string();
            let slot = Translator::new(spec, lexicon.clone())
                .map(Arc::new)
                .map_err(|e| e.to_string());
            if let Err(e) = &slot {
                tracing::warn!("translator {key} unavailable: {e}");
            }
            translators.insert(key, slot);
        }

        let usage_log = match (&config.logging.enabled, &config.logging.path) {
            (true, Some(path)) => {
                Some(Arc::new(UsageLog::open(path).map_err(|e| {
                    ServiceError::Config(format!("{}: {e}", path.display()))
                })?))
            }
            (true, None) => {
                return Err(ServiceError::Config(
                    "logging enabled without a path".into(),
                ))
            }
            _ => None,
        };

        Ok(AppState {
            lexicon,
            ngram,
            langid,
            translators: Arc::new(translators),
            usage_log,
            defaults: config.defaults,
        })
    }

    fn lexicon(&self) -> Result<&Lexicon, ApiError> {
        self.lexicon
            .as_deref()
            .ok_or_else(|| ApiError::unavailable("lexicon"))
    }

    fn spell_config(&self) -> SpellConfig {
        SpellConfig {
            max_dist: self.defaults.max_dist,
            k: self.defaults.k,
            edit_penalty: self.defaults.edit_penalty,
        }
    }

    fn k(&self, requested: Option<usize>) -> Result<usize, ApiError> {
        match requested.unwrap_or(self.defaults.k) {
            0 => Err(ApiError::bad_request("k must be positive")),
            k => Ok(k.min(MAX_K)),
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/lookup", get(lookup))
        .route("/complete", get(complete))
        .route("/next", get(next_word))
        .route("/spell", post(spell_check))
        .route("/identify", post(identify))
        .route("/translate", post(translate))
        .route("/log", post(log_event))
        .with_state(state)
}

async fn health(State(state): State<AppState>) -> Json<Value> {
    let translators: BTreeMap<&str, bool> = state
        .translators
        .iter()
        .map(|(k, v)| (k.as_str(), v.is_ok()))
        .collect();
    Json(json!({
        "status": "ok",
        "models": {
            "lexicon": state.lexicon.is_some(),
            "ngram": state.ngram.is_some(),
            "langid": state.langid.is_some(),
            "translators": translators,
            "usage_log": state.usage_log.is_some(),
        }
    }))
}

#[derive(Debug, Deserialize)]
pub struct LookupParams {
    pub q: String,
    pub max_dist: Option<usize>,
    pub k: Option<usize>,
}

async fn lookup(
    State(state): State<AppState>,
    params: Result<Query<LookupParams>, QueryRejection>,
) -> ApiResult<Vec<wordsmith_core::LookupHit>> {
    let Query(p) = params?;
    let max_dist = p.max_dist.unwrap_or(state.defaults.max_dist);
    if max_dist > MAX_QUERY_DIST {
        return Err(ApiError::bad_request(format!(
            "max_dist must be at most {MAX_QUERY_DIST}"
        )));
    }
    let k = state.k(p.k)?;
    Ok(Json(state.lexicon()?.lookup_approx(&p.q, max_dist, k)))
}

#[derive(Debug, Deserialize)]
pub struct CompleteParams {
    #[serde(default)]
    pub prefix: String,
    pub k: Option<usize>,
}

async fn complete(
    State(state): State<AppState>,
    params: Result<Query<CompleteParams>, QueryRejection>,
) -> ApiResult<Vec<wordsmith_core::LexiconEntry>> {
    let Query(p) = params?;
    let k = state.k(p.k)?;
    Ok(Json(state.lexicon()?.complete_prefix(&p.prefix, k)))
}

#[derive(Debug, Deserialize)]
pub struct NextParams {
    #[serde(default)]
    pub context: String,
    pub k: Option<usize>,
}

async fn next_word(
    State(state): State<AppState>,
    params: Result<Query<NextParams>, QueryRejection>,
) -> ApiResult<Vec<wordsmith_core::Suggestion>> {
    let Query(p) = params?;
    let k = state.k(p.k)?;
    let model = state
        .ngram
        .as_deref()
        .ok_or_else(|| ApiError::unavailable("n-gram model"))?;
    model
        .next_word(&p.context, k)
        .map(Json)
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TextBody {
    pub text: String,
}

async fn spell_check(
    State(state): State<AppState>,
    body: Result<Json<TextBody>, JsonRejection>,
) -> ApiResult<Vec<spell::FlaggedSpan>> {
    let Json(body) = body?;
    let lex = state.lexicon()?;
    Ok(Json(spell::check_sentence(
        &body.text,
        lex,
        state.ngram.as_deref(),
        &state.spell_config(),
    )))
}

async fn identify(
    State(state): State<AppState>,
    body: Result<Json<TextBody>, JsonRejection>,
) -> ApiResult<wordsmith_core::LangGuess> {
    let Json(body) = body?;
    let model = state
        .langid
        .as_deref()
        .ok_or_else(|| ApiError::unavailable("langid model"))?;
    Ok(Json(model.identify(&body.text)))
}

/// Accepts `"source:target"` or `{"source": .., "target": ..}`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum DirectionParam {
    Text(String),
    Pair(Direction),
}

#[derive(Debug, Deserialize)]
pub struct TranslateBody {
    pub text: String,
    pub direction: DirectionParam,
}

async fn translate(
    State(state): State<AppState>,
    body: Result<Json<TranslateBody>, JsonRejection>,
) -> ApiResult<wordsmith_core::TranslationResult> {
    let Json(body) = body?;
    let direction = match body.direction {
        DirectionParam::Text(s) => s
            .parse::<Direction>()
            .map_err(|e| ApiError::bad_request(e.to_string()))?,
        DirectionParam::Pair(d) => d,
    };
    if body.text.trim().is_empty() {
        return Err(ApiError::bad_request("text is empty"));
    }
    let translator = match state.translators.get(&direction.to_string()) {
        None => {
            return Err(ApiError::bad_request(format!(
                "no translator for {direction}"
            )))
        }
        Some(Err(reason)) => {
            return Err(ApiError::new(
                StatusCode::SERVICE_UNAVAILABLE,
                reason.clone(),
            ))
        }
        Some(Ok(t)) => Arc::clone(t),
    };
    let text = body.text;
    let outcome = tokio::task::spawn_blocking(move || translator.translate(&text))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    outcome.map(Json).map_err(|e| {
        use wordsmith_core::Error;
        let status = match e {
            Error::Timeout { .. } => StatusCode::GATEWAY_TIMEOUT,
            Error::RemoteStatus { .. } | Error::Remote(_) => StatusCode::BAD_GATEWAY,
            Error::InvalidInput(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    })
}

/// Writes an event only when the body carries `"consent": true` and logging
/// is enabled. Everything else is acknowledged and dropped.
async fn log_event(
    State(state): State<AppState>,
    body: Result<Json<Value>, JsonRejection>,
) -> Response {
    let Ok(Json(value)) = body else {
        return StatusCode::NO_CONTENT.into_response();
    };
    if value.get("consent") != Some(&Value::Bool(true)) {
        return StatusCode::NO_CONTENT.into_response();
    }
    let request: LogRequest = match serde_json::from_value(value) {
        Ok(r) => r,
        Err(e) => return ApiError::bad_request(e.to_string()).into_response(),
    };
    if let Err(e) = request.validate() {
        return ApiError::bad_request(e).into_response();
    }
    if let Some(log) = &state.usage_log {
        let event = UsageEvent::from_request(request);
        let log = Arc::clone(log);
        let written = tokio::task::spawn_blocking(move || log.append(&event)).await;
        if !matches!(written, Ok(Ok(()))) {
            return ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "usage log write failed")
                .into_response();
        }
    }
    StatusCode::NO_CONTENT.into_response()
}

/// Binds the listener. Fails when the address is unavailable.
pub async fn bind(addr: &str) -> Result<tokio::net::TcpListener, ServiceError> {
    tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|source| ServiceError::Bind {
            addr: addr.to_string(),
            source,
        })
}

/// Serves until `shutdown` resolves, then flushes the usage log.
pub async fn serve_with_shutdown(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    let log = state.usage_log.clone();
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await?;
    if let Some(log) = log {
        log.flush()?;
    }
    Ok(())
}

/// Loads models, binds and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let state = AppState::from_config(&config)?;
    let listener = bind(&config.bind).await?;
    let addr: Option<SocketAddr> = listener.local_addr().ok();
    tracing::info!(
        "listening on {}",
        addr.map_or(config.bind.clone(), |a| a.to_string())
    );
    serve_with_shutdown(listener, state, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await
}
