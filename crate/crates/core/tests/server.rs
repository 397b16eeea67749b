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


use std::collections::BTreeSet;
use std::path::Path;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use ctxbridge::events::{render_record, EventLog, EventRecord};
use ctxbridge::harness::dsl::parse_command_line;
use ctxbridge::harness::server::{open_state_dir, router, AppState, ALARMS_FILE, EVENTS_FILE, MUTATING_ROUTES};
use ctxbridge::harness::{parse_scenario, run, Command, Engine};

fn app() -> Router {
    router(AppState::start(Engine::case_study(), None).unwrap())
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, String) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn json_of(app: &Router, method: &str, uri: &str, body: Option<Value>) -> Value {
    let (s, b) = call(app, method, uri, body).await;
    assert_eq!(s, StatusCode::OK, "{method} {uri}: {b}");
    serde_json::from_str(&b).unwrap()
}

async fn log_since(app: &Router, since: u64) -> Vec<EventRecord> {
    let v = json_of(app, "GET", &format!("/log?since={since}"), None).await;
    serde_json::from_value(v).unwrap()
}

fn routes_of(recs: &[EventRecord]) -> Vec<(String, String)> {
    recs.iter()
        .filter(|r| r.event.kind() == "alarm_routed")
        .map(|r| {
            let v = serde_json::to_value(&r.event).unwrap();
            (
                v["decision"]["alarm_id"].as_str().unwrap().to_string(),
                v["decision"]["route"].as_str().unwrap().to_string(),
            )
        })
        .collect()
}

#[tokio::test]
async fn state_snapshot() {
    let app = app();
    let s = json_of(&app, "GET", "/state", None).await;
    assert_eq!(s["tick"], 0);
    assert_eq!(s["devices"]["pda_on"], true);
    assert_eq!(s["devices"]["tv_on"], true);
    assert_eq!(s["queue_depth"], 0);
    assert_eq!(s["endpoints"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn pda_off_sends_critical_to_tv() {
    let app = app();
    json_of(&app, "POST", "/aa/alarm-display-chain/apply", None).await;
    json_of(&app, "POST", "/device/pda/power", Some(json!({"on": false}))).await;
    let before = json_of(&app, "GET", "/state", None).await["log_len"].as_u64().unwrap();
    json_of(
        &app,
        "POST",
        "/alarms/inject",
        Some(json!({"source": "pump-7", "severity": "critical", "text": "pressure higher"})),
    )
    .await;
    let recs = log_since(&app, before).await;
    let routes = routes_of(&recs);
    assert_eq!(routes.len(), 1);
    assert_eq!(routes[0].1, "TV");
    assert!(recs.iter().any(|r| r.event.kind() == "alarm_delivered"));
    let s = json_of(&app, "GET", "/state", None).await;
    assert_eq!(s["devices"]["pda_on"], false);
    assert_eq!(s["tick"], 3);
}

#[tokio::test]
async fn wsdl_serves_the_canonical_contract() {
    let app = app();
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/enterprise.contract")).unwrap();
    let (s, body) = call(&app, "GET", "/Enterprise/services/EntImpl?wsdl", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body, golden);
    let (s, _) = call(&app, "GET", "/Enterprise/services/EntImpl", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&app, "GET", "/Enterprise/services/Nope?wsdl", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn domain_errors_are_422_with_a_code() {
    let app = app();
    let (s, b) = call(&app, "POST", "/identify", Some(json!({"user_id": "nobody", "lon": 10.0, "lat": 36.0}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let v: Value = serde_json::from_str(&b).unwrap();
    assert_eq!(v["error"], "UnknownUser");
    assert!(v["message"].as_str().unwrap().contains("nobody"));

    let (s, b) = call(&app, "POST", "/identify", Some(json!({"user_id": 3}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(serde_json::from_str::<Value>(&b).unwrap()["error"], "BadRequest");

    let (s, _) = call(&app, "POST", "/device/fridge/power", Some(json!({"on": true}))).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn log_since_filters_by_seq() {
    let app = app();
    let all = log_since(&app, 0).await;
    assert!(!all.is_empty());
    let tail = log_since(&app, all[all.len() / 2].seq).await;
    assert_eq!(tail.as_slice(), &all[all.len() / 2..]);
    assert!(log_since(&app, u64::MAX).await.is_empty());
}

#[tokio::test]
async fn stream_replays_backlog_as_sse() {
    let app = app();
    let first = log_since(&app, 0).await.remove(0);
    let req = Request::builder().uri("/stream?since=0").body(Body::empty()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    assert_eq!(resp.headers()["content-type"], "text/event-stream");
    let mut body = resp.into_body();
    let frame = tokio::time::timeout(Duration::from_secs(5), body.frame())
        .await
        .unwrap()
        .unwrap()
        .unwrap();
    let text = String::from_utf8(frame.into_data().unwrap().to_vec()).unwrap();
    let data = render_record(&first);
    assert!(text.contains(&format!("event: {}\n", first.event.kind())), "{text}");
    assert!(text.contains(&format!("id: {}\n", first.seq)), "{text}");
    assert!(text.contains(&format!("data: {data}\n")), "{text}");
}

#[tokio::test]
async fn stream_pushes_live_records() {
    let app = app();
    let req = Request::builder().uri("/stream").body(Body::empty()).unwrap();
    let mut body = app.clone().oneshot(req).await.unwrap().into_body();
    json_of(&app, "POST", "/device/tv/power", Some(json!({"on": false}))).await;
    let frame = tokio::time::timeout(Duration::from_secs(5), body.frame())
        .await
        .unwrap()
        .unwrap()
        .unwrap();
    let text = String::from_utf8(frame.into_data().unwrap().to_vec()).unwrap();
    assert!(text.contains("event: command\n"), "{text}");
    assert!(text.contains("device tv power off"), "{text}");
}

fn sample_requests() -> Vec<(&'static str, &'static str, Option<Value>)> {
    vec![
        (
            "POST",
            "/profiles",
            Some(json!({"id_profile": "77", "name": "Test", "sex": "F", "job": "nurse", "age": 40,
                        "handicap": "none", "subscriptions": ["Bank"]})),
        ),
        ("POST", "/identify", Some(json!({"user_id": "1234", "lon": 10.1, "lat": 36.8}))),
        ("POST", "/services/query", Some(json!({"user_id": "1234", "category": "Assurance", "max_km": 1.0}))),
        ("POST", "/services/select", Some(json!({"user_id": "1234", "id_service": "biat-assurance"}))),
        ("POST", "/user/move", Some(json!({"user_id": "1234", "lon": 10.1502, "lat": 36.8301}))),
        ("POST", "/device/pda/power", Some(json!({"on": false}))),
        ("POST", "/alarms/inject", Some(json!({"source": "s", "severity": "normal"}))),
        ("POST", "/alarms/schedule", Some(json!({"tick": 40, "source": "s", "severity": "critical", "text": "t"}))),
        ("POST", "/aspects/actions", Some(json!({"action_id": "note", "action": {"log": "hello"}}))),
        (
            "POST",
            "/aspects",
            Some(json!({"aspect_id": "trace", "pointcut": "execution(* *.*(..))",
                        "advices": [{"kind": "before", "action": "note"}]})),
        ),
        ("DELETE", "/aspects/trace", None),
        ("POST", "/aa/alarm-display-chain/apply", None),
        ("POST", "/aa/alarm-display-chain/revert", None),
        ("POST", "/hmi/override", Some(json!({"field": "theme", "value": "blue"}))),
        ("DELETE", "/hmi/override/theme", None),
        ("POST", "/services/stb-bank/availability", Some(json!({"available": false}))),
        (
            "POST",
            "/endpoints",
            Some(json!({"contract": "Enterprise", "target": "Enterprise",
                        "url": "http://10.0.0.9:8080/Enterprise/services/Mirror"})),
        ),
        ("POST", "/endpoints/unexport", Some(json!({"url": "http://10.0.0.9:8080/Enterprise/services/Mirror"}))),
    ]
}

fn route_matches(template: &str, path: &str) -> bool {
    let t: Vec<&str> = template.split('/').collect();
    let p: Vec<&str> = path.split('/').collect();
    t.len() == p.len() && t.iter().zip(&p).all(|(a, b)| a.starts_with('{') || a == b)
}

#[tokio::test]
async fn parity_routes_and_verbs_agree() {
    let routes: BTreeSet<&str> = MUTATING_ROUTES.iter().map(|r| r.verb).collect();
    let verbs: BTreeSet<&str> = Command::VERBS.iter().copied().collect();
    assert_eq!(routes, verbs);
    assert_eq!(routes.len(), MUTATING_ROUTES.len());

    let app = app();
    let listed = json_of(&app, "GET", "/parity", None).await;
    assert_eq!(listed.as_array().unwrap().len(), MUTATING_ROUTES.len());

    let mut covered = BTreeSet::new();
    for (method, uri, body) in sample_requests() {
        let route = MUTATING_ROUTES
            .iter()
            .find(|r| r.method == method && route_matches(r.path, uri))
            .unwrap_or_else(|| panic!("no route for {method} {uri}"));
        let before = json_of(&app, "GET", "/state", None).await["log_len"].as_u64().unwrap();
        json_of(&app, method, uri, body).await;
        let recs = log_since(&app, before).await;
        let cmd = recs
            .iter()
            .find_map(|r| match serde_json::to_value(&r.event).unwrap() {
                v if v["kind"] == "command" => Some(v["line"].as_str().unwrap().to_string()),
                _ => None,
            })
            .unwrap_or_else(|| panic!("{method} {uri} logged no command"));
        assert_eq!(parse_command_line(&cmd).unwrap().verb(), route.verb, "{cmd}");
        covered.insert(route.verb);
    }
    assert_eq!(covered, verbs);
}

#[tokio::test]
async fn recorded_session_replays_identically() {
    let app = app();
    for (method, uri, body) in sample_requests() {
        if uri != "/alarms/schedule" {
            json_of(&app, method, uri, body).await;
        }
    }
    let (s, bad) = call(&app, "POST", "/services/select", Some(json!({"user_id": "1234", "id_service": "nope"}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY, "{bad}");
    let live = log_since(&app, 0).await;
    let (_, text) = call(&app, "GET", "/scenario", None).await;
    let replay = run(&parse_scenario(&text).unwrap()).unwrap();
    assert!(replay.failures.is_empty());
    assert_eq!(replay.log().records(), live.as_slice());
}

#[tokio::test]
async fn state_dir_persists_logs_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(AppState::start(open_state_dir(dir.path()).unwrap(), Some(dir.path())).unwrap());
    for (method, uri, body) in sample_requests().into_iter().take(7) {
        json_of(&app, method, uri, body).await;
    }
    let live = log_since(&app, 0).await;
    let on_disk = EventLog::from_ndjson(&std::fs::read_to_string(dir.path().join(EVENTS_FILE)).unwrap()).unwrap();
    assert_eq!(on_disk.records(), live.as_slice());
    let alarms = std::fs::read_to_string(dir.path().join(ALARMS_FILE)).unwrap();
    assert_eq!(alarms.lines().count(), 1);
    let profiles = std::fs::read_to_string(dir.path().join("profile.tsv")).unwrap();
    assert!(profiles.lines().any(|l| l.starts_with("77\t")), "{profiles}");
    assert!(!std::fs::read_to_string(dir.path().join("seed/profile.tsv")).unwrap().contains("77\t"));

    let (_, text) = call(&app, "GET", "/scenario", None).await;
    let replay = run(&parse_scenario(&text).unwrap()).unwrap();
    assert_eq!(replay.log().records(), live.as_slice());

    let reopened = open_state_dir(dir.path()).unwrap();
    assert!(reopened.gateway().registry().authenticate("77").is_ok());
}
