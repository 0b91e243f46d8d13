use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use wave_core::fixtures::Workspace;
use wave_server::{router, AppState, ServerConfig};

fn state() -> Arc<AppState> {
    AppState::new(Workspace::ethnic_cooking().unwrap(), ServerConfig::default()).unwrap()
}

async fn call(st: &Arc<AppState>, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = router(st.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, value)
}

async fn get(st: &Arc<AppState>, uri: &str) -> (StatusCode, Value) {
    call(st, "GET", uri, None).await
}

async fn post(st: &Arc<AppState>, uri: &str, body: Value) -> (StatusCode, Value) {
    call(st, "POST", uri, Some(body)).await
}

#[tokio::test]
async fn lattice_has_fourteen_concepts() {
    let st = state();
    let (status, v) = get(&st, "/api/lattice").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["lattice"]["concepts"].as_array().unwrap().len(), 14);
    assert_eq!(v["layout"]["nodes"].as_array().unwrap().len(), 14);
    let (_, again) = get(&st, "/api/lattice").await;
    assert_eq!(v, again);
}

#[tokio::test]
async fn context_and_scales() {
    let st = state();
    let (_, ctx) = get(&st, "/api/context").await;
    assert_eq!(ctx["objects"].as_array().unwrap().len(), 35);
    assert_eq!(ctx["attributes"].as_array().unwrap().len(), 6);
    let (_, scales) = get(&st, "/api/scales").await;
    assert_eq!(scales["view"], json!(["score", "size"]));
    let names: Vec<&str> = scales["scales"].as_array().unwrap().iter().map(|s| s["scale"]["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"location"));
    assert!(scales["scales"].as_array().unwrap().iter().any(|s| s["scale"]["name"] == "score" && s["in_view"] == true));
}

#[tokio::test]
async fn nested_defaults_to_view_scales() {
    let st = state();
    let (status, v) = get(&st, "/api/nested").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!((v["product"].as_u64(), v["realized"].as_u64()), (Some(21), Some(14)));
    let (_, swapped) = get(&st, "/api/nested?outer=size&inner=score").await;
    assert_eq!(swapped["realized"], 14);
    let (status, err) = get(&st, "/api/nested?outer=size&inner=nope").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["error"], "UnknownScale");
}

#[tokio::test]
async fn session_lifecycle() {
    let st = state();
    let (status, v) = post(&st, "/api/session", json!({"seed": "BOUILLABAISSE", "threshold": 1})).await;
    assert_eq!(status, StatusCode::CREATED);
    let id = v["session_id"].as_str().unwrap().to_owned();
    assert_eq!(v["state"]["seed"], json!({"kind": "object", "id": "BOUILLABAISSE"}));
    assert_eq!(v["global_concepts"], 14);

    let (status, n) = get(&st, &format!("/api/neighborhood?session={id}")).await;
    assert_eq!(status, StatusCode::OK);
    assert!(n["context"]["objects"].as_array().unwrap().contains(&json!("BOUILLABAISSE")));
    assert_eq!(n["scores"]["BOUILLABAISSE"], 1.0);

    let (status, n) = post(&st, &format!("/api/session/{id}/seed"), json!({"seed": "CAJUN-LAMB"})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(n["seed"]["id"], "CAJUN-LAMB");
    assert_eq!(n["state"]["history"].as_array().unwrap().len(), 1);

    let (status, u) = get(&st, &format!("/api/union?session={id}")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(u["comparison"]["previous"]["id"], "BOUILLABAISSE");
    // Shared {score≥843} out of five attributes between the two seeds.
    assert_eq!(u["comparison"]["shared"], json!(["score≥843"]));
    assert!((u["comparison"]["distance"].as_f64().unwrap() - 0.8).abs() < 1e-12);
    let (_, same) = get(&st, &format!("/api/union?session={id}&prev=BOUILLABAISSE")).await;
    assert_eq!(u, same);
    let (status, _) = get(&st, &format!("/api/union?session={id}&prev=SEVICHE")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    // Parameter change without a new seed.
    let (_, n) = post(&st, &format!("/api/session/{id}/seed"), json!({"threshold": 3})).await;
    assert_eq!(n["state"]["threshold"], 3);
    assert_eq!(n["state"]["history"].as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn attribute_seed_by_kind() {
    let st = state();
    let (status, v) = post(&st, "/api/session", json!({"seed": {"kind": "attribute", "id": "score≥908"}})).await;
    assert_eq!(status, StatusCode::CREATED);
    let id = v["session_id"].as_str().unwrap();
    let (_, n) = get(&st, &format!("/api/neighborhood?session={id}")).await;
    assert!(n["seed_intent"].as_array().unwrap().contains(&json!("score≥908")));
}

#[tokio::test]
async fn errors_are_json() {
    let st = state();
    let (status, v) = post(&st, "/api/session", json!({"seed": "NOPE"})).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["error"], "UnknownSeed");
    assert!(v["detail"].as_str().unwrap().contains("NOPE"));

    let (status, v) = post(&st, "/api/session", json!({"seed": "SEVICHE", "threshold": 99})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"], "BadThreshold");

    let (status, v) = post(&st, "/api/session", json!({"seed": "SEVICHE", "radius": 2.0})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["error"], "BadRadius");

    let (status, v) = get(&st, "/api/neighborhood?session=missing").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["error"], "UnknownSession");

    let (status, v) = post(&st, "/api/session", json!({})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"], "BadRequest");
}

#[tokio::test]
async fn rebuild_swaps_the_view() {
    let st = state();
    let (_, v) = post(&st, "/api/session", json!({"seed": "SEVICHE"})).await;
    let id = v["session_id"].as_str().unwrap().to_owned();

    let (status, r) = post(&st, "/api/rebuild", json!({"scales": ["score"]})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(r["attributes"], 2);
    assert_eq!(r["concepts"], 3);
    let (_, lat) = get(&st, "/api/lattice").await;
    assert_eq!(lat["lattice"]["concepts"].as_array().unwrap().len(), 3);

    // The old session keeps the view it was opened on.
    let (status, n) = get(&st, &format!("/api/neighborhood?session={id}")).await;
    assert_eq!(status, StatusCode::OK);
    assert!(n["context"]["attributes"].as_array().unwrap().len() > 2);

    let (status, v) = post(&st, "/api/rebuild", json!({"scales": ["nope"]})).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["error"], "UnknownScale");
    let (_, lat) = get(&st, "/api/lattice").await;
    assert_eq!(lat["lattice"]["concepts"].as_array().unwrap().len(), 3);
}

#[tokio::test]
async fn idle_sessions_expire() {
    let st = AppState::new(
        Workspace::ethnic_cooking().unwrap(),
        ServerConfig {
            idle_timeout: Duration::from_millis(20),
            ..Default::default()
        },
    )
    .unwrap();
    let (_, v) = post(&st, "/api/session", json!({"seed": "SEVICHE"})).await;
    let id = v["session_id"].as_str().unwrap().to_owned();
    tokio::time::sleep(Duration::from_millis(40)).await;
    let (status, _) = get(&st, &format!("/api/neighborhood?session={id}")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(st.session_count(), 0);
}

#[tokio::test]
async fn static_files_at_root() {
    let dir = std::env::temp_dir().join(format!("wave-static-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("index.html"), "<p>hello</p>").unwrap();
    let st = AppState::new(
        Workspace::ethnic_cooking().unwrap(),
        ServerConfig {
            static_dir: Some(dir.clone()),
            ..Default::default()
        },
    )
    .unwrap();
    let (status, body) = get(&st, "/").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, Value::String("<p>hello</p>".into()));
    let (status, _) = get(&st, "/api/context").await;
    assert_eq!(status, StatusCode::OK);
    std::fs::remove_dir_all(dir).unwrap();

    let (status, body) = get(&state(), "/").await;
    assert_eq!(status, StatusCode::OK);
    assert!(body.as_str().unwrap().contains("wave"));
}
