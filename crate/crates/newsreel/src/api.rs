//! HTTP/JSON API over a workspace.

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use newsreel_core::lint::{lint_script, Finding, LintPolicy};
use newsreel_core::screenplay::{format_script, parse_script};
use newsreel_core::{
    Article, Condition, Error as CoreError, Framing, PremisePatch, Project, Script, ScriptLine, Stage, Staleness,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::blobs::BlobStore;
use crate::error::{Error, Result};
use crate::export::bundle_contents;
use crate::providers::Providers;
use crate::session::{HighlightOptions, Session};
use crate::workspace::Workspace;

pub struct AppState {
    pub workspace: Workspace,
    pub providers: Arc<Providers>,
}

impl AppState {
    pub fn new(workspace: Workspace, providers: Arc<Providers>) -> Arc<Self> {
        Arc::new(AppState { workspace, providers })
    }
}

/// An error as sent on the wire: `{"code": ..., "message": ...}`.
#[derive(Debug)]
pub struct ApiError(pub Error);

impl<E: Into<Error>> From<E> for ApiError {
    fn from(e: E) -> Self {
        ApiError(e.into())
    }
}

pub fn status_for(code: &str) -> StatusCode {
    match code {
        "validation_error" | "format_error" | "degenerate" => StatusCode::BAD_REQUEST,
        "not_found" | "unknown_script" | "unknown_premise" => StatusCode::NOT_FOUND,
        "stage_violation" => StatusCode::CONFLICT,
        "locked" => StatusCode::LOCKED,
        "parse_failure" | "unknown_speaker" => StatusCode::UNPROCESSABLE_ENTITY,
        "provider_unavailable" | "cassette_miss" | "empty_completion" => StatusCode::BAD_GATEWAY,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let code = self.0.code();
        let mut body = json!({ "code": code, "message": self.0.to_string() });
        if let Error::Core(CoreError::Validation(violations)) = &self.0 {
            body["violations"] = json!(violations);
        }
        (status_for(code), Json(body)).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;

/// A project with its derived staleness flags.
#[derive(Debug, Serialize)]
pub struct ProjectView {
    #[serde(flatten)]
    pub project: Project,
    pub staleness: Staleness,
    pub provider_calls: u64,
}

/// A script with its display form and lint findings.
#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ScriptView {
    pub script: Script,
    pub formatted: String,
    pub findings: Vec<Finding>,
    pub warnings: Vec<String>,
}

impl ScriptView {
    pub fn of(script: Script, project: &Project) -> Self {
        let warnings = project
            .event_log
            .iter()
            .find_map(|r| match &r.event {
                newsreel_core::ProjectEvent::ScriptAdded { script: s, warnings, .. } if s.id == script.id => {
                    Some(warnings.clone())
                }
                _ => None,
            })
            .unwrap_or_default();
        ScriptView {
            formatted: format_script(&script),
            findings: lint_script(&script, &LintPolicy::default()),
            warnings,
            script,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NewProject {
    headline: String,
    body: String,
    #[serde(default)]
    source_url: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScriptEdit {
    #[serde(default)]
    lines: Option<Vec<ScriptLine>>,
    #[serde(default)]
    raw: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StageChange {
    stage: Stage,
}

#[derive(Debug, Deserialize)]
struct PremiseQuery {
    framing: Option<String>,
}

#[derive(Debug, Deserialize)]
struct ScriptQuery {
    condition: Option<String>,
    premise_id: Option<String>,
    framing: Option<String>,
}

fn parse_body<T: DeserializeOwned>(bytes: &Bytes) -> Result<T> {
    serde_json::from_slice(bytes).map_err(|e| Error::Format(format!("request body: {e}")))
}

/// Like `parse_body`, but an empty body means the default.
fn parse_optional_body<T: DeserializeOwned + Default>(bytes: &Bytes) -> Result<T> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        Ok(T::default())
    } else {
        parse_body(bytes)
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T> + Send + 'static) -> ApiResult<T> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(ApiError),
        Err(e) => Err(ApiError(Error::Io(std::io::Error::other(e.to_string())))),
    }
}

/// Locks, loads, runs `op` and saves project `id`. Nothing is saved when
/// `op` fails.
async fn mutate<T: Send + 'static>(
    state: Arc<AppState>,
    id: String,
    op: impl FnOnce(&Session<'_>, &mut Project) -> Result<T> + Send + 'static,
) -> ApiResult<T> {
    blocking(move || {
        let _lock = state.workspace.lock(&id)?;
        let mut project = state.workspace.load(&id)?;
        let blobs = state.workspace.blobs(&id)?;
        let session = Session::new(&state.providers, &blobs);
        let out = op(&session, &mut project)?;
        state.workspace.save(&project)?;
        Ok(out)
    })
    .await
}

async fn read<T: Send + 'static>(
    state: Arc<AppState>,
    id: String,
    op: impl FnOnce(&AppState, Project) -> Result<T> + Send + 'static,
) -> ApiResult<T> {
    blocking(move || {
        let project = state.workspace.load(&id)?;
        op(&state, project)
    })
    .await
}

fn view(state: &AppState, project: Project) -> ProjectView {
    ProjectView { staleness: project.staleness(), provider_calls: state.providers.calls(), project }
}

async fn create_project(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult<(StatusCode, Json<ProjectView>)> {
    let req: NewProject = parse_body(&body)?;
    let project = blocking(move || {
        let mut article = Article::new(req.headline, req.body, state.providers.clock().now())?;
        if let Some(url) = req.source_url {
            article = article.with_source_url(url);
        }
        let project = Project::create(article, state.providers.clock().now())?;
        state.workspace.create(&project)?;
        Ok(view(&state, project))
    })
    .await?;
    Ok((StatusCode::CREATED, Json(project)))
}

async fn list_projects(State(state): State<Arc<AppState>>) -> ApiResult<Json<Vec<String>>> {
    Ok(Json(blocking(move || state.workspace.list()).await?))
}

async fn get_project(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<ProjectView>> {
    Ok(Json(read(state, id, |s, p| Ok(view(s, p))).await?))
}

async fn extract(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let out = mutate(state, id, |session, project| {
        session.extract(project)?;
        let warnings = match project.event_log.last().map(|r| &r.event) {
            Some(newsreel_core::ProjectEvent::FactsExtracted { warnings, .. }) => warnings.clone(),
            _ => Vec::new(),
        };
        Ok(json!({ "news_facts": project.news_facts, "warnings": warnings }))
    })
    .await?;
    Ok(Json(out))
}

async fn generate_premise(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<PremiseQuery>,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let framing: Framing = q.framing.as_deref().unwrap_or_default().parse()?;
    let premise = mutate(state, id, move |session, project| session.generate_premise(project, framing)).await?;
    Ok((StatusCode::CREATED, Json(json!(premise))))
}

async fn edit_premise(
    State(state): State<Arc<AppState>>,
    Path((id, pid)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let patch: PremisePatch = parse_optional_body(&body)?;
    let premise = mutate(state, id, move |session, project| session.edit_premise(project, &pid, &patch)).await?;
    Ok(Json(json!(premise)))
}

async fn generate_script(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<ScriptQuery>,
) -> ApiResult<(StatusCode, Json<ScriptView>)> {
    let condition: Condition = q.condition.as_deref().unwrap_or("with_premise").parse()?;
    let framing: Option<Framing> = q.framing.as_deref().map(str::parse).transpose()?;
    let out = mutate(state, id, move |session, project| {
        let script = session.generate_script(project, condition, q.premise_id.as_deref(), framing)?;
        Ok(ScriptView::of(script, project))
    })
    .await?;
    Ok((StatusCode::CREATED, Json(out)))
}

async fn script_history(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Vec<Script>>> {
    Ok(Json(read(state, id, |_, p| Ok(p.history().into_iter().cloned().collect())).await?))
}

async fn get_script(
    State(state): State<Arc<AppState>>,
    Path((id, sid)): Path<(String, String)>,
) -> ApiResult<Json<ScriptView>> {
    let out = read(state, id, move |_, p| {
        let script = p.script(&sid).cloned().ok_or_else(|| CoreError::UnknownScript(sid.clone()))?;
        Ok(ScriptView::of(script, &p))
    })
    .await?;
    Ok(Json(out))
}

async fn star_script(
    State(state): State<Arc<AppState>>,
    Path((id, sid)): Path<(String, String)>,
) -> ApiResult<Json<Value>> {
    let out = mutate(state, id, move |session, project| {
        let starred = session.star_script(project, &sid)?;
        Ok(json!({ "script_id": sid, "starred": starred }))
    })
    .await?;
    Ok(Json(out))
}

async fn select_script(
    State(state): State<Arc<AppState>>,
    Path((id, sid)): Path<(String, String)>,
) -> ApiResult<Json<ProjectView>> {
    let st = state.clone();
    let project = mutate(state, id, move |session, project| {
        session.select_script(project, &sid)?;
        Ok(project.clone())
    })
    .await?;
    Ok(Json(view(&st, project)))
}

async fn edit_script(
    State(state): State<Arc<AppState>>,
    Path((id, sid)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult<Json<ScriptView>> {
    let edit: ScriptEdit = parse_body(&body)?;
    let lines = match (edit.lines, edit.raw) {
        (Some(lines), None) => lines,
        (None, Some(raw)) => parse_script(&raw)?.lines,
        _ => return Err(Error::invalid("body", "give exactly one of lines or raw").into()),
    };
    let out = mutate(state, id, move |session, project| {
        let script = session.edit_script(project, &sid, lines)?;
        Ok(ScriptView::of(script, project))
    })
    .await?;
    Ok(Json(out))
}

async fn highlights(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let options: HighlightOptions = parse_optional_body(&body)?;
    let record = mutate(state, id, move |session, project| session.assign_highlights(project, options)).await?;
    Ok(Json(json!(record)))
}

async fn character_board(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let board = mutate(state, id, |session, project| session.build_character_board(project)).await?;
    Ok(Json(json!(board)))
}

async fn storyboard(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let sb = mutate(state, id, |session, project| session.build_storyboard(project)).await?;
    Ok(Json(json!(sb)))
}

async fn change_stage(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<ProjectView>> {
    let change: StageChange = parse_body(&body)?;
    let st = state.clone();
    let project = mutate(state, id, move |session, project| {
        session.revert(project, change.stage)?;
        Ok(project.clone())
    })
    .await?;
    Ok(Json(view(&st, project)))
}

async fn export_manifest(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let manifest = read(state, id, |s, p| {
        let blobs = s.workspace.blobs(&p.id)?;
        Ok(bundle_contents(&p, &blobs)?.1)
    })
    .await?;
    Ok(Json(json!(manifest)))
}

fn content_type(path: &str) -> &'static str {
    match path.rsplit('.').next() {
        Some("json") => "application/json",
        Some("txt") => "text/plain; charset=utf-8",
        Some("png") => "image/png",
        Some("jpg") => "image/jpeg",
        Some("webp") => "image/webp",
        _ => "application/octet-stream",
    }
}

async fn export_file(
    State(state): State<Arc<AppState>>,
    Path((id, path)): Path<(String, String)>,
) -> ApiResult<Response> {
    let (bytes, ty) = read(state, id, move |s, p| {
        let blobs = s.workspace.blobs(&p.id)?;
        let (files, _) = bundle_contents(&p, &blobs)?;
        let bytes = files
            .into_iter()
            .find(|(name, _)| *name == path)
            .map(|(_, b)| b)
            .ok_or_else(|| Error::NotFound(format!("{}/{path}", p.id)))?;
        Ok((bytes, content_type(&path)))
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, ty)], bytes).into_response())
}

async fn blob(State(state): State<Arc<AppState>>, Path((id, file)): Path<(String, String)>) -> ApiResult<Response> {
    let (bytes, ty) = blocking(move || {
        let (digest, ext) = file.split_once('.').ok_or_else(|| Error::NotFound(file.clone()))?;
        let media_type = content_type(&file).to_string();
        let image = newsreel_core::ImageRef { digest: digest.to_string(), media_type };
        if image.extension() != ext {
            return Err(Error::NotFound(file.clone()));
        }
        let bytes = state.workspace.blobs(&id)?.get(&image)?;
        Ok((bytes, content_type(&file)))
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, ty)], bytes).into_response())
}

pub fn router(state: Arc<AppState>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/projects", post(create_project).get(list_projects))
        .route("/projects/{id}", get(get_project))
        .route("/projects/{id}/extract", post(extract))
        .route("/projects/{id}/premises", post(generate_premise))
        .route("/projects/{id}/premises/{pid}", patch(edit_premise))
        .route("/projects/{id}/scripts", post(generate_script).get(script_history))
        .route("/projects/{id}/scripts/{sid}", get(get_script).patch(edit_script))
        .route("/projects/{id}/scripts/{sid}/star", post(star_script))
        .route("/projects/{id}/scripts/{sid}/select", post(select_script))
        .route("/projects/{id}/highlights", post(highlights))
        .route("/projects/{id}/character-board", post(character_board))
        .route("/projects/{id}/storyboard", post(storyboard))
        .route("/projects/{id}/stage", post(change_stage))
        .route("/projects/{id}/export", get(export_manifest))
        .route("/projects/{id}/export/{*path}", get(export_file))
        .route("/projects/{id}/blobs/{file}", get(blob))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api,
    }
}

/// Serves `router` on `addr` until interrupted.
pub async fn serve(addr: std::net::SocketAddr, router: Router) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
