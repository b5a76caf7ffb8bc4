use std::sync::Arc;

use autocam_annotate::{router, AnnotationService};
use autocam_core::raster::{FrameDir, Raster};
use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app(root: &std::path::Path) -> axum::Router {
    let frames: Vec<Raster> = (0..6).map(|i| Raster::filled(16, 8, &[i as f32 / 6.0, 0.5, 0.0])).collect();
    FrameDir::write(root.join("videos/pano"), 2.0, &frames).unwrap();
    let svc = AnnotationService::open(&root.join("videos"), &root.join("out")).unwrap();
    router(Arc::new(svc))
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(v) => req
            .header("content-type", "application/json")
            .body(Body::from(v.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

fn json_of(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

#[tokio::test]
async fn full_session_over_http() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());

    let (status, body) = call(&app, "GET", "/videos", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(json_of(&body)[0]["video_id"], "pano");
    assert_eq!(json_of(&body)[0]["frame_count"], 6);

    let (status, body) = call(&app, "GET", "/videos/pano/frames/2", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(&body[..8], b"\x89PNG\r\n\x1a\n");
    let (status, _) = call(&app, "GET", "/videos/pano/frames/6", None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);

    let create = json!({"video_id": "pano", "annotator_id": "x", "phi_c": -30.0, "pass": 1});
    let (status, body) = call(&app, "POST", "/sessions", Some(create.clone())).await;
    assert_eq!(status, StatusCode::OK);
    let info = json_of(&body);
    assert_eq!(info["phi_c"], 330.0);
    let id = info["session_id"].as_str().unwrap().to_string();
    let (status, _) = call(&app, "POST", "/sessions", Some(create)).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let samples: Vec<Value> = (0..90)
        .map(|i| json!({"timestamp": i as f64 / 30.0, "theta": 5.0, "phi": 350.0 + i as f64 / 3.0}))
        .collect();
    let (status, body) = call(&app, "POST", &format!("/sessions/{id}/samples"), Some(json!({"samples": samples}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(json_of(&body)["buffered"], 90);
    let stale = json!({"samples": [{"timestamp": 0.5, "theta": 0.0, "phi": 0.0}]});
    let (status, body) = call(&app, "POST", &format!("/sessions/{id}/samples"), Some(stale)).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(json_of(&body)["error"].as_str().unwrap().contains("timestamp"));

    let (status, body) = call(&app, "POST", &format!("/sessions/{id}/finalize"), Some(json!({"fps": 2.0}))).await;
    assert_eq!(status, StatusCode::OK, "{}", String::from_utf8_lossy(&body));
    assert_eq!(json_of(&body)["frames"], 6);
    let (status, _) = call(&app, "POST", &format!("/sessions/{id}/finalize"), Some(json!({"fps": 2.0}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = call(&app, "POST", "/sessions/s77/finalize", Some(json!({"fps": 2.0}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn outline_splits_at_the_seam() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (status, body) = call(&app, "GET", "/fov_outline?theta=0&phi=180&width=3600&height=1800", None).await;
    assert_eq!(status, StatusCode::OK);
    let v = json_of(&body);
    let segs = v["segments"].as_array().unwrap();
    assert_eq!(segs.len(), 1);
    let xs: Vec<f64> = segs[0].as_array().unwrap().iter().map(|p| p[0].as_f64().unwrap()).collect();
    let (lo, hi) = xs.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    // 65.5° wide camera centered at 180° on a 10 px/° display.
    assert!((lo - 1472.5).abs() < 1e-6 && (hi - 2127.5).abs() < 1e-6, "{lo} {hi}");

    let (_, body) = call(&app, "GET", "/fov_outline?theta=0&phi=0&video_id=pano", None).await;
    assert_eq!(json_of(&body)["segments"].as_array().unwrap().len(), 2);
    let (status, _) = call(&app, "GET", "/fov_outline?theta=0&phi=0", None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(&app, "GET", "/fov_outline?theta=100&phi=0&width=10&height=5", None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}
