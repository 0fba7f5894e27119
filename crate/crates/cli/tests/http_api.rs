use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use marx::http::{router, AppState};
use marx_core::fixtures;
use marx_core::service::{RunConfig, Workspace};

fn state() -> AppState {
    let config = RunConfig {
        episodes: 1,
        max_steps: 200,
        ..Default::default()
    };
    let workspace = Workspace::from_parts(
        config,
        Box::new(fixtures::sr3_env()),
        Box::new(fixtures::sr3_policy(0.0)),
        fixtures::sr3_chain_mmdp(),
    );
    AppState::new(workspace)
}

async fn send(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(match body {
            Some(v) => Body::from(v.to_string()),
            None => Body::empty(),
        })
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (
        status,
        serde_json::from_slice(&bytes).unwrap_or(Value::Null),
    )
}

async fn query(app: &Router, text: &str) -> (StatusCode, Value) {
    send(app, "POST", "/api/query", Some(json!({ "query": text }))).await
}

#[tokio::test]
async fn plan_is_the_three_column_table() {
    let app = router(state());
    let (status, body) = send(&app, "GET", "/api/plan", None).await;
    assert_eq!(status, StatusCode::OK);
    let columns = body["columns"].as_array().unwrap();
    assert_eq!(columns.len(), 3);
    assert_eq!(
        columns[0][0],
        json!({"task": "fire", "coalition": ["r2", "r3"]})
    );
    assert_eq!(
        columns[1][0],
        json!({"task": "obstacle", "coalition": ["r1", "r2"]})
    );
    assert_eq!(
        columns[2][0],
        json!({"task": "victim", "coalition": ["r1", "r3"]})
    );
    assert!(body["table"]
        .as_str()
        .unwrap()
        .contains("Robot II   fire  obstacle  -"));
}

#[tokio::test]
async fn env_and_summary() {
    let app = router(state());
    let (status, env) = send(&app, "GET", "/api/env", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(env["agents"].as_array().unwrap().len(), 3);
    assert_eq!(env["agents"][0]["display"], "Robot I");
    assert_eq!(env["tasks"][2]["name"], "victim");

    let (status, summary) = send(&app, "GET", "/api/mmdp/summary", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(summary["numStates"], 4);
    assert_eq!(summary["rebuilding"], false);
}

#[tokio::test]
async fn feasible_query_returns_witness() {
    let app = router(state());
    let (status, body) = query(&app, "fire:r2,r3 -> victim:r1,r3").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["verdict"], "feasible");
    let hops: Vec<(u64, u64)> = body["witness"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| (w["src"].as_u64().unwrap(), w["dst"].as_u64().unwrap()))
        .collect();
    assert_eq!(hops, vec![(0, 1), (1, 2), (2, 3)]);
}

#[tokio::test]
async fn infeasible_query_returns_two_failures() {
    let app = router(state());
    let (status, body) = query(&app, "obstacle:r1,r2 -> victim:r1 -> fire:r2,r3").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["verdict"], "infeasible");
    let failures = body["report"]["failures"].as_array().unwrap();
    assert_eq!(failures.len(), 2);
    assert_eq!(failures[0]["index"], 1);
    assert_eq!(failures[1]["index"], 3);
    assert_eq!(
        failures[1]["clauses"][0]["text"],
        "The robots cannot rescue the victim because Robot I needs Robot III to help rescue the victim."
    );
    assert_eq!(
        body["report"]["finalQuery"],
        "fire:r2,r3 -> obstacle:r1,r2 -> victim:r1,r3"
    );
    assert_eq!(body["report"]["finalFeasible"], true);
}

#[tokio::test]
async fn malformed_queries_are_bad_requests() {
    let app = router(state());
    let (status, body) = query(&app, "fire:r1,fire:r2").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "ParseError");
    assert!(body["detail"].as_str().unwrap().starts_with("querylang"));

    let (status, body) = query(&app, "fire:r1 -> fire:r2").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "ValidationError");

    let (status, body) = send(&app, "POST", "/api/query", Some(json!({"q": 1}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "BadRequest");
}

#[tokio::test]
async fn identical_requests_give_identical_bodies() {
    let app = router(state());
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timings");
        v
    };
    let (_, a) = query(&app, "fire:r2,r3 -> obstacle:r1,r2").await;
    let (_, b) = query(&app, "fire:r2,r3 -> obstacle:r1,r2").await;
    assert_eq!(strip(a), strip(b));
}

#[tokio::test]
async fn queries_conflict_during_rebuild() {
    let state = state();
    let app = router(state.clone());
    state.set_rebuilding(true);
    let (status, body) = query(&app, "fire:r2,r3").await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"], "Rebuilding");
    let (status, _) = send(&app, "POST", "/api/rebuild", None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    state.set_rebuilding(false);

    let (status, body) = send(&app, "POST", "/api/rebuild", None).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    assert_eq!(body["status"], "rebuilding");
    for _ in 0..500 {
        if !state.is_rebuilding() {
            break;
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    assert!(!state.is_rebuilding());
    // one noise-free episode rebuilds the same chain
    let (_, summary) = send(&app, "GET", "/api/mmdp/summary", None).await;
    assert_eq!(summary["numStates"], 4);
    let (status, _) = query(&app, "fire:r2,r3").await;
    assert_eq!(status, StatusCode::OK);
}
