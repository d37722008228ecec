//! The live endpoint client against a local HTTP server with scripted replies.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

use backprompt::gateway::{EndpointConfig, LiveEndpoint};
use backprompt_core::harness::ModelError;
use serde_json::Value;

#[derive(Debug, Clone)]
struct Seen {
    path: String,
    authorization: Option<String>,
    body: Value,
}

/// Serves one connection per scripted `(status, body)` pair, then stops.
fn serve(replies: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<Seen>>>, thread::JoinHandle<()>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    let handle = thread::spawn(move || {
        for (status, body) in replies {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            let path = request_line.split_whitespace().nth(1).unwrap_or("").to_string();
            let mut length = 0;
            let mut authorization = None;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                let (k, v) = line.split_once(':').unwrap();
                match k.to_ascii_lowercase().as_str() {
                    "content-length" => length = v.trim().parse().unwrap(),
                    "authorization" => authorization = Some(v.trim().to_string()),
                    _ => {}
                }
            }
            let mut buf = vec![0; length];
            reader.read_exact(&mut buf).unwrap();
            log.lock().unwrap().push(Seen {
                path,
                authorization,
                body: serde_json::from_slice(&buf).unwrap(),
            });
            let mut out = stream;
            write!(
                out,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
            out.flush().unwrap();
        }
    });
    (url, seen, handle)
}

fn ok_body(text: &str) -> String {
    serde_json::json!({
        "choices": [{"message": {"role": "assistant", "content": text}}],
        "usage": {"prompt_tokens": 17, "completion_tokens": 4}
    })
    .to_string()
}

fn endpoint(url: &str, retries: u32) -> LiveEndpoint {
    let mut cfg = EndpointConfig::new(url, "test-model");
    cfg.backoff_base_ms = 1;
    cfg.backoff_cap_ms = 5;
    cfg.max_retries = retries;
    LiveEndpoint::with_key(cfg, "sk-test".into(), 0).unwrap()
}

#[test]
fn transient_statuses_are_retried_until_success() {
    let (url, seen, handle) = serve(vec![
        (500, "{}".into()),
        (429, "{}".into()),
        (200, ok_body("Answer: 6*4")),
    ]);
    let ep = endpoint(&url, 5);
    let c = ep.complete("Use 1 4 6 8 to make 24.", 0.0).unwrap();
    handle.join().unwrap();
    assert_eq!(c.text, "Answer: 6*4");
    assert_eq!((c.prompt_tokens, c.response_tokens), (17, 4));
    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 3);
    for s in seen.iter() {
        assert_eq!(s.path, "/v1/chat/completions");
        assert_eq!(s.authorization.as_deref(), Some("Bearer sk-test"));
        assert_eq!(s.body["model"], "test-model");
        assert_eq!(s.body["temperature"], 0.0);
        assert_eq!(s.body["messages"][0]["role"], "user");
        assert_eq!(s.body["messages"][0]["content"], "Use 1 4 6 8 to make 24.");
        assert!(s.body.get("max_tokens").is_none());
    }
}

#[test]
fn retry_budget_is_bounded() {
    let (url, seen, handle) = serve(vec![(503, "{}".into()); 3]);
    let ep = endpoint(&url, 2);
    let err = ep.complete("p", 1.0).unwrap_err();
    handle.join().unwrap();
    assert_eq!(seen.lock().unwrap().len(), 3);
    match err {
        ModelError::Transport(msg) => {
            assert!(msg.contains("503"), "{msg}");
            assert!(msg.contains("gave up after 3 attempts"), "{msg}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn client_errors_are_not_retried() {
    let (url, seen, handle) = serve(vec![(400, r#"{"error":"bad"}"#.into())]);
    let ep = endpoint(&url, 5);
    let err = ep.complete("p", 1.0).unwrap_err();
    handle.join().unwrap();
    assert_eq!(seen.lock().unwrap().len(), 1);
    assert!(err.to_string().contains("400"), "{err}");
}

#[test]
fn configured_temperature_and_token_limit_are_sent() {
    let (url, seen, handle) = serve(vec![(200, ok_body("x"))]);
    let mut cfg = EndpointConfig::new(url, "m");
    cfg.temperature = Some(0.3);
    cfg.max_output_tokens = Some(64);
    let ep = LiveEndpoint::with_key(cfg, "k".into(), 0).unwrap();
    ep.complete("p", 1.0).unwrap();
    handle.join().unwrap();
    let seen = seen.lock().unwrap();
    assert_eq!(seen[0].body["temperature"], 0.3);
    assert_eq!(seen[0].body["max_tokens"], 64);
}

#[test]
fn malformed_success_body_is_an_error() {
    let (url, _seen, handle) = serve(vec![(200, r#"{"choices": []}"#.into())]);
    let err = endpoint(&url, 5).complete("p", 1.0).unwrap_err();
    handle.join().unwrap();
    assert!(err.to_string().contains("choices"), "{err}");
}
