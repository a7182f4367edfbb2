//! Axum router serving the JSON API.

use std::collections::BTreeMap;
use std::path::Path as FsPath;
use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use tower_http::cors::CorsLayer;
use vidseek_core::engine::FrameInput;
use vidseek_core::retrieval::DEFAULT_EVAL_KS;
use vidseek_core::{Engine, EngineError, FrameId, SearchRequest, VideoId, WeightProfile};

use crate::dto::{Evaluation, Ingest, SearchResults, Video, VideoList};
use crate::error::ApiError;
use crate::params::{parse_flag, parse_k, parse_ks, parse_weights};

pub const ADMIN_HEADER: &str = "x-admin-token";
/// Upper bound on a request body; whole videos arrive as one upload.
pub const MAX_UPLOAD_BYTES: usize = 1 << 30;

#[derive(Clone)]
pub struct AppState {
    engine: Arc<Engine>,
    admin_token: Option<Arc<str>>,
}

impl AppState {
    pub fn new(engine: Engine, admin_token: Option<String>) -> Self {
        Self::shared(Arc::new(engine), admin_token)
    }

    pub fn shared(engine: Arc<Engine>, admin_token: Option<String>) -> Self {
        Self {
            engine,
            admin_token: admin_token.filter(|t| !t.is_empty()).map(Arc::from),
        }
    }

    pub fn engine(&self) -> &Arc<Engine> {
        &self.engine
    }

    fn authorize(&self, headers: &HeaderMap) -> Result<(), ApiError> {
        let Some(expected) = &self.admin_token else {
            return Err(ApiError::AdminDisabled);
        };
        match headers.get(ADMIN_HEADER).and_then(|v| v.to_str().ok()) {
            Some(given) if given == &**expected => Ok(()),
            _ => Err(ApiError::Unauthorized),
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/videos", get(list_videos).post(create_video))
        .route("/api/videos/{id}", get(get_video).delete(delete_video))
        .route("/api/search", post(search))
        .route("/api/frames/{id}/image", get(frame_image))
        .route("/api/eval", post(evaluate))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
}

struct Upload {
    field: String,
    file_name: String,
    bytes: Vec<u8>,
}

#[derive(Default)]
struct Form {
    texts: BTreeMap<String, String>,
    files: Vec<Upload>,
}

impl Form {
    async fn read(mut mp: Multipart) -> Result<Self, ApiError> {
        let bad = |e: axum::extract::multipart::MultipartError| ApiError::BadRequest(e.body_text());
        let mut form = Form::default();
        while let Some(field) = mp.next_field().await.map_err(bad)? {
            let name = field.name().unwrap_or_default().to_owned();
            match field.file_name().map(str::to_owned) {
                Some(file_name) => {
                    let bytes = field.bytes().await.map_err(bad)?.to_vec();
                    form.files.push(Upload {
                        field: name,
                        file_name,
                        bytes,
                    });
                }
                None => {
                    let text = field.text().await.map_err(bad)?;
                    form.texts.insert(name, text);
                }
            }
        }
        Ok(form)
    }

    fn text(&self, key: &str) -> Option<&str> {
        self.texts.get(key).map(String::as_str)
    }

    fn take_file(&mut self, field: &str) -> Option<Upload> {
        let i = self.files.iter().position(|f| f.field == field)?;
        Some(self.files.remove(i))
    }

    fn weights(&self) -> Result<WeightProfile, ApiError> {
        match self.text("weights") {
            Some(w) if !w.trim().is_empty() => parse_weights(w).map_err(ApiError::BadRequest),
            _ => Ok(WeightProfile::equal()),
        }
    }
}

#[derive(Deserialize)]
struct NameFilter {
    name: Option<String>,
}

async fn list_videos(State(st): State<AppState>, Query(q): Query<NameFilter>) -> Json<VideoList> {
    let snap = st.engine.catalog().snapshot();
    Json(VideoList::from_snapshot(&snap, q.name.as_deref()))
}

async fn get_video(State(st): State<AppState>, Path(id): Path<u64>) -> Result<Json<Video>, ApiError> {
    let snap = st.engine.catalog().snapshot();
    Ok(Json(Video::from(snap.get_video(VideoId(id))?)))
}

async fn create_video(
    State(st): State<AppState>,
    headers: HeaderMap,
    mp: Multipart,
) -> Result<(StatusCode, Json<Ingest>), ApiError> {
    st.authorize(&headers)?;
    let form = Form::read(mp).await?;
    let name = form.text("name").unwrap_or_default().to_owned();
    let frames: Vec<FrameInput> = form
        .files
        .into_iter()
        .filter(|f| f.field == "frames")
        .map(|f| FrameInput::from_bytes(f.file_name, f.bytes))
        .collect();
    let engine = Arc::clone(&st.engine);
    let report = blocking(move || Ok(engine.ingest(&name, frames)?)).await?;
    Ok((StatusCode::CREATED, Json(Ingest::from(&report))))
}

async fn delete_video(
    State(st): State<AppState>,
    headers: HeaderMap,
    Path(id): Path<u64>,
) -> Result<StatusCode, ApiError> {
    st.authorize(&headers)?;
    let engine = Arc::clone(&st.engine);
    blocking(move || Ok(engine.delete(VideoId(id))?)).await?;
    Ok(StatusCode::NO_CONTENT)
}

async fn search(State(st): State<AppState>, mp: Multipart) -> Result<Json<SearchResults>, ApiError> {
    let mut form = Form::read(mp).await?;
    let image = form
        .take_file("image")
        .ok_or_else(|| ApiError::BadRequest("multipart field `image` is required".into()))?;
    let mut req = SearchRequest::new(image.bytes);
    if let Some(k) = form.text("k") {
        req.k = parse_k(k).map_err(ApiError::BadRequest)?;
    }
    req.weights = form.weights()?;
    if let Some(flag) = form.text("exhaustive") {
        req.exhaustive = parse_flag(flag).map_err(ApiError::BadRequest)?;
    }
    let engine = Arc::clone(&st.engine);
    let hits = blocking(move || Ok(engine.search(&req)?)).await?;
    Ok(Json(SearchResults::from_hits(&hits)))
}

async fn frame_image(State(st): State<AppState>, Path(id): Path<u64>) -> Result<Response, ApiError> {
    let path = {
        let snap = st.engine.catalog().snapshot();
        let frame = snap.frame(FrameId(id))?;
        st.engine.catalog().image_path(&frame.record)
    };
    let bytes = tokio::fs::read(&path)
        .await
        .map_err(|source| ApiError::from(EngineError::Io { path: path.clone(), source }))?;
    Ok(([(header::CONTENT_TYPE, content_type(&path))], bytes).into_response())
}

pub fn content_type(path: &FsPath) -> &'static str {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("ppm") => "image/x-portable-pixmap",
        Some("pgm") => "image/x-portable-graymap",
        _ => "application/octet-stream",
    }
}

async fn evaluate(State(st): State<AppState>, mp: Multipart) -> Result<Json<Evaluation>, ApiError> {
    let mut form = Form::read(mp).await?;
    let labels = match form.take_file("labels") {
        Some(f) => String::from_utf8(f.bytes)
            .map_err(|_| ApiError::BadRequest("labels must be UTF-8 text".into()))?,
        None => form
            .text("labels")
            .ok_or_else(|| ApiError::BadRequest("multipart field `labels` is required".into()))?
            .to_owned(),
    };
    let ks = match form.text("ks") {
        Some(s) if !s.trim().is_empty() => parse_ks(s).map_err(ApiError::BadRequest)?,
        _ => DEFAULT_EVAL_KS.to_vec(),
    };
    let weights = form.weights()?;
    let queries: BTreeMap<String, Vec<u8>> = form
        .files
        .into_iter()
        .map(|f| (f.file_name, f.bytes))
        .collect();
    let engine = Arc::clone(&st.engine);
    let report = blocking(move || {
        Ok(engine.evaluate(&labels, &ks, &weights, |image| {
            let base = image.rsplit(['/', '\\']).next().unwrap_or(image);
            queries
                .get(image)
                .or_else(|| queries.get(base))
                .cloned()
                .ok_or_else(|| EngineError::MissingQuery(image.to_owned()))
        })?)
    })
    .await?;
    Ok(Json(Evaluation::from(&report)))
}
