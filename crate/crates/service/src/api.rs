use std::sync::{Arc, MutexGuard};

use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::cors::CorsLayer;

use matchkit::semantics::{build_note_mapping, mean_tempo, tempo_curve, validate, TimeMap};
use matchkit::session::{canonical_order, EditError, EditOp, Session};
use matchkit::{parse, serialize, Diagnostic, Line, ParseMode};

use crate::Config;

type Shared = Arc<Config>;

struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
        }
    }

    fn not_found(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not-found", format!("no document {id}"))
    }

    fn io(e: std::io::Error) -> Self {
        log::error!("state dir write failed: {e}");
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "io", e.to_string())
    }
}

impl From<EditError> for ApiError {
    fn from(e: EditError) -> Self {
        let status = StatusCode::from_u16(e.status()).unwrap_or(StatusCode::UNPROCESSABLE_ENTITY);
        let code = match e {
            EditError::VersionConflict { .. } => "version-conflict",
            EditError::NothingToUndo => "nothing-to-undo",
            _ => "invalid-edit",
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": self.message, "code": self.code });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(config: Shared) -> Router {
    let max_body = config.max_body;
    let v1 = Router::new()
        .route("/docs", post(create))
        .route("/docs/{id}/alignment", get(alignment))
        .route("/docs/{id}/edits", post(edits))
        .route("/docs/{id}/undo", post(undo))
        .route("/docs/{id}/fmt", post(fmt))
        .route("/docs/{id}/file", get(file))
        .route("/docs/{id}/timemap", get(timemap));
    Router::new()
        .nest("/v1", v1)
        .layer(DefaultBodyLimit::max(max_body))
        .layer(CorsLayer::permissive())
        .with_state(config)
}

fn lock(session: &std::sync::Mutex<Session>) -> MutexGuard<'_, Session> {
    // a panic mid-edit never leaves a half-applied document behind, since
    // edits swap in a finished copy
    session.lock().unwrap_or_else(|e| e.into_inner())
}

fn with_session<T>(
    config: &Config,
    id: &str,
    f: impl FnOnce(&mut Session) -> ApiResult<T>,
) -> ApiResult<T> {
    let shared = config.store.get(id).ok_or_else(|| ApiError::not_found(id))?;
    let mut session = lock(&shared);
    f(&mut session)
}

async fn create(State(config): State<Shared>, body: String) -> ApiResult<(StatusCode, Json<Value>)> {
    let (document, mut diagnostics) = parse(&body, ParseMode::Lenient);
    if !document.lines.iter().any(|l| !matches!(l, Line::Opaque { .. })) {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "no-lines",
            "no line of the body could be parsed",
        ));
    }
    diagnostics.extend(validate(&document));
    let session = Session::new(uuid::Uuid::new_v4().to_string(), document);
    let (id, version) = (session.id.clone(), session.version);
    config.store.insert(session).map_err(ApiError::io)?;
    log::info!("created {id} ({} diagnostics)", diagnostics.len());
    Ok((
        StatusCode::CREATED,
        Json(json!({ "id": id, "version": version, "diagnostics": diagnostics })),
    ))
}

async fn alignment(State(config): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    with_session(&config, &id, |s| {
        let doc = &s.document;
        let (mapping, _) = build_note_mapping(doc);
        let clock = doc.midi_clock();
        let seconds = |tick: i64| clock.map(|c| c.tick_to_seconds(tick as f64));
        let perf_notes: Vec<Value> = doc
            .perf_notes()
            .map(|n| {
                json!({
                    "id": n.id,
                    "pitch": n.midi_pitch,
                    "onset_tick": n.onset_tick,
                    "offset_tick": n.offset_tick,
                    "onset_seconds": seconds(n.onset_tick),
                    "offset_seconds": seconds(n.offset_tick),
                    "velocity": n.velocity,
                    "channel": n.channel,
                    "track": n.track,
                })
            })
            .collect();
        let score_notes: Vec<Value> = doc
            .score_notes()
            .map(|n| {
                json!({
                    "anchor": n.anchor,
                    "spelling": n.pitch.to_string(),
                    "pitch": n.pitch.to_midi().ok(),
                    "onset_beats": n.position.onset_in_beats,
                    "offset_beats": n.offset_in_beats,
                    "attributes": n.attributes,
                })
            })
            .collect();
        let matches: Vec<Value> = mapping
            .matches
            .iter()
            .map(|(id, a)| json!({ "perf_id": id, "anchor": a }))
            .collect();
        let ornaments: Vec<Value> = mapping
            .ornament_notes
            .iter()
            .map(|(id, (a, kind))| json!({ "perf_id": id, "anchor": a, "kind": kind.as_str() }))
            .collect();
        Ok(Json(json!({
            "id": s.id,
            "version": s.version,
            "matches": matches,
            "insertions": mapping.insertions,
            "deletions": mapping.deletions,
            "ornaments": ornaments,
            "score_notes": score_notes,
            "perf_notes": perf_notes,
        })))
    })
}

#[derive(Deserialize)]
struct EditRequest {
    base_version: u64,
    ops: Vec<EditOp>,
}

fn committed(config: &Config, s: &Session) -> ApiResult<Json<Value>> {
    config.store.persist(s).map_err(ApiError::io)?;
    let diagnostics: Vec<Diagnostic> = validate(&s.document);
    Ok(Json(json!({ "version": s.version, "diagnostics": diagnostics })))
}

async fn edits(
    State(config): State<Shared>,
    Path(id): Path<String>,
    req: Result<Json<EditRequest>, JsonRejection>,
) -> ApiResult<Json<Value>> {
    let Json(req) =
        req.map_err(|e| ApiError::new(e.status(), "bad-request", e.body_text()))?;
    with_session(&config, &id, |s| {
        s.apply(req.base_version, &req.ops)?;
        committed(&config, s)
    })
}

async fn undo(State(config): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    with_session(&config, &id, |s| {
        s.undo()?;
        committed(&config, s)
    })
}

async fn fmt(State(config): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    with_session(&config, &id, |s| {
        let sorted = canonical_order(&s.document);
        s.replace(sorted);
        committed(&config, s)
    })
}

async fn file(State(config): State<Shared>, Path(id): Path<String>) -> ApiResult<Response> {
    with_session(&config, &id, |s| {
        let text = serialize(&s.document);
        Ok((
            [
                (header::CONTENT_TYPE, "text/plain; charset=utf-8".to_string()),
                (header::ETAG, format!("\"{}\"", s.version)),
            ],
            text,
        )
            .into_response())
    })
}

async fn timemap(State(config): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    with_session(&config, &id, |s| {
        let doc = &s.document;
        let tm = TimeMap::from_document(doc);
        let clock = tm.clock();
        let anchors: Vec<Value> = tm
            .anchors()
            .iter()
            .map(|a| {
                json!({
                    "score_beats": a.score_beats,
                    "perf_tick": a.perf_tick,
                    "seconds": clock.map(|c| c.tick_to_seconds(a.perf_tick as f64)),
                    "kind": a.kind.as_str(),
                    "alternates": a.alternates,
                })
            })
            .collect();
        let mut diagnostics = tm.diagnostics(doc);
        let (segments, error) = match tempo_curve(&tm, Some(doc)) {
            Ok((segments, extra)) => {
                diagnostics.extend(extra);
                (segments, None)
            }
            Err(e) => (Vec::new(), Some(json!({ "code": e.code(), "message": e.to_string() }))),
        };
        Ok(Json(json!({
            "version": s.version,
            "clock": clock,
            "anchors": anchors,
            "monotone": tm.is_monotone(),
            "segments": segments,
            "mean_tempo": mean_tempo(&segments),
            "diagnostics": diagnostics,
            "error": error,
        })))
    })
}
