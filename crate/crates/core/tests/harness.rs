use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;

use pmnav::fixtures;
use pmnav::harness::{
    call_backend, plan_request, render_trajectory, request_plan, run_benchmark, BackendError,
    BenchmarkConfig, Endpoint, MapCase,
};
use pmnav::nav_agent::{run_episode, EpisodeConfig};
use pmnav::planner::{format_plan, plan, NavTask, PlanError, PlanSource, PlannerConfig};
use pmnav::world_sim::{generate_map, generate_tasks, Difficulty, MapParams};

/// Serve one HTTP request with `status` and `body`; returns the URL and the
/// handle yielding the request body the server received.
fn serve_once(status: u16, body: String) -> (String, thread::JoinHandle<String>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/plan", listener.local_addr().unwrap());
    let handle = thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut len = 0usize;
        loop {
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            let l = line.trim_end();
            if l.is_empty() {
                break;
            }
            if let Some((k, v)) = l.split_once(':') {
                if k.eq_ignore_ascii_case("content-length") {
                    len = v.trim().parse().unwrap();
                }
            }
        }
        let mut req = vec![0u8; len];
        reader.read_exact(&mut req).unwrap();
        let mut stream = stream;
        write!(
            stream,
            "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
            body.len()
        )
        .unwrap();
        String::from_utf8(req).unwrap()
    });
    (url, handle)
}

fn fig2_task() -> (MapCase, NavTask) {
    let case = MapCase::new(fixtures::load("fig2").unwrap()).unwrap();
    let task = NavTask {
        start_segment: "seg13".into(),
        target_room: "room17".into(),
        initial_heading: None,
    };
    (case, task)
}

#[test]
fn backend_plan_round_trip() {
    let (case, task) = fig2_task();
    let (_, reference) = plan(&case.map, &task, &PlannerConfig::default()).unwrap();
    let reply = serde_json::json!({"reply": format_plan(&reference), "latency_ms": 12}).to_string();
    let (url, server) = serve_once(200, reply);
    let got = request_plan(
        &case.map,
        &task,
        &Endpoint {
            url,
            timeout_ms: 5000,
        },
    )
    .unwrap();
    assert_eq!(got.steps, reference.steps);
    assert_eq!(got.source, PlanSource::ExternalBackend);

    let sent: serde_json::Value = serde_json::from_str(&server.join().unwrap()).unwrap();
    assert_eq!(sent["kind"], "plan");
    assert!(sent["prompt"].as_str().unwrap().contains("room17"));
    assert!(sent["map_svg"].as_str().unwrap().contains("<svg xmlns"));
}

#[test]
fn backend_grammar_violation_is_malformed_plan() {
    let (case, task) = fig2_task();
    let reply = serde_json::json!({"reply": "room7 -> fly away", "latency_ms": 1}).to_string();
    let (url, server) = serve_once(200, reply);
    let err = request_plan(
        &case.map,
        &task,
        &Endpoint {
            url,
            timeout_ms: 5000,
        },
    )
    .unwrap_err();
    server.join().unwrap();
    match err {
        BackendError::MalformedPlan(PlanError::Grammar { line, .. }) => assert_eq!(line, 1),
        BackendError::MalformedPlan(_) => {}
        other => panic!("expected a malformed plan, got {other:?}"),
    }
}

#[test]
fn backend_errors_are_typed() {
    let (case, task) = fig2_task();
    let req = plan_request(&case.map, &task);

    let (url, server) = serve_once(200, "not json".into());
    let err = call_backend(
        &req,
        &Endpoint {
            url,
            timeout_ms: 5000,
        },
    )
    .unwrap_err();
    server.join().unwrap();
    assert!(matches!(err, BackendError::MalformedReply(_)), "{err:?}");

    let (url, server) = serve_once(503, "busy".into());
    let err = call_backend(
        &req,
        &Endpoint {
            url,
            timeout_ms: 5000,
        },
    )
    .unwrap_err();
    server.join().unwrap();
    assert!(
        matches!(err, BackendError::Status { status: 503, .. }),
        "{err:?}"
    );

    // bind then drop so nothing listens on the port
    let port = TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let url = format!("http://127.0.0.1:{port}/plan");
    let err = call_backend(
        &req,
        &Endpoint {
            url,
            timeout_ms: 2000,
        },
    )
    .unwrap_err();
    assert!(
        matches!(err, BackendError::Transport(_) | BackendError::Timeout(_)),
        "{err:?}"
    );
}

#[test]
fn backend_timeout_is_reported() {
    let (case, task) = fig2_task();
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/plan", listener.local_addr().unwrap());
    let holder = thread::spawn(move || {
        let (s, _) = listener.accept().unwrap();
        thread::sleep(std::time::Duration::from_millis(800));
        drop(s);
    });
    let err = call_backend(
        &plan_request(&case.map, &task),
        &Endpoint {
            url,
            timeout_ms: 200,
        },
    )
    .unwrap_err();
    holder.join().unwrap();
    assert!(matches!(err, BackendError::Timeout(200)), "{err:?}");
}

#[test]
fn render_shows_plan_execution_and_turns() {
    let case = MapCase::new(generate_map(&MapParams {
        rooms: 16,
        branches: 2,
        seed: 100,
    }))
    .unwrap();
    let tasks = generate_tasks(&case.world, &case.map, Difficulty::Hard, 3, 4).unwrap();
    let record = tasks
        .iter()
        .map(|t| run_episode(&case.world, &case.map, t, None, &EpisodeConfig::default()))
        .find(|r| r.success)
        .expect("a hard task succeeds");
    let svg = render_trajectory(&case.world, &record);
    assert!(svg.contains("<svg xmlns"));
    assert!(svg.contains("id=\"planned\""));
    assert!(svg.contains("id=\"executed\""));
    assert!(svg.contains("class=\"marker turn"));
    assert!(svg.contains("class=\"marker arrival\""));
    assert_eq!(svg, render_trajectory(&case.world, &record));

    let mut idle = record.clone();
    idle.trajectory.truncate(1);
    idle.events.clear();
    let svg = render_trajectory(&case.world, &idle);
    assert!(!svg.contains("id=\"executed\""));
    assert_eq!(svg.matches("class=\"marker").count(), 1);
    assert!(svg.contains("class=\"marker start\""));
}

fn fixture_config(
    conditions: serde_json::Value,
    difficulties: serde_json::Value,
    trials: usize,
) -> BenchmarkConfig {
    serde_json::from_value(serde_json::json!({
        "maps": {"fixture": "fig2"},
        "difficulties": difficulties,
        "trials": trials,
        "conditions": conditions,
        "seed": 3
    }))
    .unwrap()
}

#[test]
fn bench_easy_fixture_all_succeed_and_repeat() {
    let cfg = fixture_config(
        serde_json::json!([{"name": "fine"}]),
        serde_json::json!(["easy"]),
        20,
    );
    let a = run_benchmark(&cfg).unwrap();
    let cell = a.results.cell("fine", Difficulty::Easy).unwrap();
    assert_eq!(cell.trials, 20);
    assert_eq!(cell.sr, 100.0);
    let b = run_benchmark(&cfg).unwrap();
    assert_eq!(a.results.to_json(), b.results.to_json());
    assert_eq!(a.results.to_table(), b.results.to_table());
}

#[test]
fn bench_rejects_bad_configs() {
    let cfg = fixture_config(serde_json::json!([]), serde_json::json!(["easy"]), 5);
    assert!(run_benchmark(&cfg).is_err());
    let cfg = fixture_config(
        serde_json::json!([{"name": "fine"}]),
        serde_json::json!(["easy"]),
        0,
    );
    assert!(run_benchmark(&cfg).is_err());
    let mut cfg = fixture_config(
        serde_json::json!([{"name": "fine"}]),
        serde_json::json!(["easy"]),
        5,
    );
    cfg.maps = serde_json::from_value(serde_json::json!({"fixture": "nowhere"})).unwrap();
    assert!(run_benchmark(&cfg).is_err());
}
