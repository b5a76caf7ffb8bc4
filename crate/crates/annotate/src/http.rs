//! JSON-over-HTTP front end for [`AnnotationService`].

use std::net::SocketAddr;
use std::sync::Arc;

use autocam_core::geom::{fov_outline, CameraModel, Direction, NFOV_ASPECT, NFOV_HFOV_DEG};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::service::{AnnotateError, AnnotationService, Finalized, Sample, SessionInfo, VideoInfo};

impl IntoResponse for AnnotateError {
    fn into_response(self) -> Response {
        let status = match &self {
            AnnotateError::UnknownVideo(_) | AnnotateError::UnknownSession(_) => StatusCode::NOT_FOUND,
            AnnotateError::Duplicate { .. } | AnnotateError::SessionClosed(_) => StatusCode::CONFLICT,
            AnnotateError::Invalid(_) | AnnotateError::InsufficientCoverage { .. } | AnnotateError::Core(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            AnnotateError::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(ErrorBody { error: self.to_string() })).into_response()
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreateSession {
    pub video_id: String,
    pub annotator_id: String,
    pub phi_c: f64,
    pub pass: u8,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SampleBatch {
    pub samples: Vec<Sample>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SamplesAck {
    pub buffered: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FinalizeRequest {
    pub fps: f64,
}

/// Query of `GET /fov_outline`. The display size defaults to the video's
/// panorama size when `video_id` is given.
#[derive(Debug, Serialize, Deserialize)]
pub struct OutlineQuery {
    pub theta: f64,
    pub phi: f64,
    #[serde(default)]
    pub video_id: Option<String>,
    #[serde(default)]
    pub width: Option<u32>,
    #[serde(default)]
    pub height: Option<u32>,
    #[serde(default)]
    pub hfov: Option<f64>,
    #[serde(default)]
    pub aspect: Option<f64>,
    #[serde(default)]
    pub samples_per_edge: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Outline {
    /// Polylines in equirectangular display pixels, split at the seam.
    pub segments: Vec<Vec<[f64; 2]>>,
}

type Shared = Arc<AnnotationService>;
type ApiResult<T> = Result<T, AnnotateError>;

async fn list_videos(State(svc): State<Shared>) -> Json<Vec<VideoInfo>> {
    Json(svc.videos())
}

async fn create_session(State(svc): State<Shared>, Json(req): Json<CreateSession>) -> ApiResult<Json<SessionInfo>> {
    svc.create_session(&req.video_id, &req.annotator_id, req.phi_c, req.pass)
        .map(Json)
}

async fn post_samples(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    Json(batch): Json<SampleBatch>,
) -> ApiResult<Json<SamplesAck>> {
    let buffered = tokio::task::spawn_blocking(move || svc.record_samples(&id, &batch.samples))
        .await
        .expect("worker")?;
    Ok(Json(SamplesAck { buffered }))
}

async fn finalize(
    State(svc): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<FinalizeRequest>,
) -> ApiResult<Json<Finalized>> {
    tokio::task::spawn_blocking(move || svc.finalize(&id, req.fps))
        .await
        .expect("worker")
        .map(Json)
}

async fn frame(State(svc): State<Shared>, Path((video, index)): Path<(String, usize)>) -> ApiResult<Response> {
    let bytes = tokio::task::spawn_blocking(move || svc.frame_png(&video, index))
        .await
        .expect("worker")?;
    Ok(([(header::CONTENT_TYPE, "image/png")], bytes).into_response())
}

async fn outline(State(svc): State<Shared>, Query(q): Query<OutlineQuery>) -> ApiResult<Json<Outline>> {
    let (mut width, mut height) = (q.width, q.height);
    if let Some(id) = &q.video_id {
        let meta = autocam_core::raster::FrameSource::meta(svc.video(id)?);
        width = width.or(Some(meta.width));
        height = height.or(Some(meta.height));
    }
    let (Some(width), Some(height)) = (width, height) else {
        return Err(AnnotateError::Invalid("give width and height or video_id".into()));
    };
    let aspect = q.aspect.unwrap_or(NFOV_ASPECT);
    // The outline only depends on the angular extent; any raster with the
    // right aspect works.
    let cam = CameraModel::new(q.hfov.unwrap_or(NFOV_HFOV_DEG), aspect, (480.0 * aspect).round() as u32, 480)?;
    let principal = Direction::new(q.theta, q.phi)?;
    let segments = fov_outline(&cam, principal, q.samples_per_edge.unwrap_or(16), width, height)?
        .into_iter()
        .map(|s| s.into_iter().map(|(x, y)| [x, y]).collect())
        .collect();
    Ok(Json(Outline { segments }))
}

/// Routes:
///
/// - `GET  /videos`
/// - `GET  /videos/{video_id}/frames/{index}` (PNG)
/// - `GET  /fov_outline?theta=&phi=[&video_id=|&width=&height=][&hfov=&aspect=&samples_per_edge=]`
/// - `POST /sessions` with [`CreateSession`]
/// - `POST /sessions/{id}/samples` with [`SampleBatch`]
/// - `POST /sessions/{id}/finalize` with [`FinalizeRequest`]
pub fn router(svc: Shared) -> Router {
    Router::new()
        .route("/videos", get(list_videos))
        .route("/videos/{video_id}/frames/{index}", get(frame))
        .route("/fov_outline", get(outline))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/samples", post(post_samples))
        .route("/sessions/{id}/finalize", post(finalize))
        .with_state(svc)
}

/// Serves until the process is stopped.
pub async fn serve(svc: AnnotationService, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("annotation server listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(svc))).await
}
