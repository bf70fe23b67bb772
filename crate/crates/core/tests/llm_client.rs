use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use nbest_rescore::llm::{
    complete, complete_batch, ChatBackend, ConcurrencyPolicy, FinishReason, HttpBackend, LlmError, LlmRequest,
    LlmResponse, MockBackend, MockBehavior, MockMode, RetryPolicy,
};
use nbest_rescore::prompt::ChatTurn;
use nbest_rescore::NBestList;

fn fast_retry() -> RetryPolicy {
    RetryPolicy { base_delay: Duration::from_millis(1), ..RetryPolicy::default() }
}

fn req(tag: &str) -> LlmRequest {
    LlmRequest::new("m", tag, vec![ChatTurn::user("hello")])
}

fn ok(text: &str) -> LlmResponse {
    LlmResponse { text: text.into(), finish_reason: FinishReason::Stop, latency: Duration::ZERO, raw_payload: vec![] }
}

/// Fails the first `failures` calls with `error`, then answers with the tag.
struct Flaky {
    failures: usize,
    error: LlmError,
    calls: AtomicUsize,
}

impl ChatBackend for Flaky {
    fn send(&self, req: &LlmRequest) -> Result<LlmResponse, LlmError> {
        if self.calls.fetch_add(1, Ordering::SeqCst) < self.failures {
            Err(self.error.clone())
        } else {
            Ok(ok(&req.request_tag))
        }
    }

    fn describe(&self) -> String {
        "flaky".into()
    }
}

#[test]
fn retries_transient_failures() {
    let b = Flaky { failures: 3, error: LlmError::Status { status: 503, body_excerpt: String::new(), attempts: 1 }, calls: AtomicUsize::new(0) };
    assert_eq!(complete(&req("x"), &b, &fast_retry()).unwrap().text, "x");
    assert_eq!(b.calls.load(Ordering::SeqCst), 4);
}

#[test]
fn gives_up_after_max_attempts() {
    let b = Flaky { failures: 100, error: LlmError::Timeout { attempts: 1 }, calls: AtomicUsize::new(0) };
    assert_eq!(complete(&req("x"), &b, &fast_retry()), Err(LlmError::Timeout { attempts: 5 }));
    assert_eq!(b.calls.load(Ordering::SeqCst), 5);
}

#[test]
fn client_errors_are_not_retried() {
    let b = Flaky { failures: 1, error: LlmError::Status { status: 400, body_excerpt: "bad".into(), attempts: 1 }, calls: AtomicUsize::new(0) };
    assert!(matches!(complete(&req("x"), &b, &fast_retry()), Err(LlmError::Status { status: 400, attempts: 1, .. })));
    assert_eq!(b.calls.load(Ordering::SeqCst), 1);
}

#[test]
fn jitter_is_bounded_and_seeded() {
    let p = RetryPolicy { base_delay: Duration::from_millis(100), seed: 3, ..RetryPolicy::default() };
    for retry in 1..5 {
        let d = p.delay("tag", retry);
        let base = 100.0 * 2f64.powi(retry as i32 - 1);
        let ms = d.as_secs_f64() * 1000.0;
        assert!(ms >= base && ms <= base * 1.25 + 1e-9, "retry {retry}: {ms}");
        assert_eq!(d, p.delay("tag", retry));
    }
}

fn lists(n: usize) -> Vec<NBestList> {
    (0..n)
        .map(|i| NBestList::from_texts(format!("u{i}"), &[(&format!("hyp {i}"), -1.0)], Some("x")).unwrap())
        .collect()
}

#[test]
fn batch_preserves_order_under_random_latency() {
    let ls = lists(40);
    let mock = MockBackend::new(MockBehavior::new(MockMode::RankK(1), 11).with_latency(Duration::from_millis(5)), &ls);
    let reqs: Vec<LlmRequest> = ls.iter().map(|l| req(&l.utterance_id)).collect();
    let policy = ConcurrencyPolicy { max_in_flight: 8, retry: fast_retry(), fail_fast: false };
    let out = complete_batch(&reqs, &mock, &policy);
    for (i, r) in out.iter().enumerate() {
        assert_eq!(r.as_ref().unwrap().text, format!("hyp {i}"));
    }
}

/// Records the largest number of requests it ever saw at once.
struct Gauge {
    now: Mutex<usize>,
    peak: AtomicUsize,
}

impl ChatBackend for Gauge {
    fn send(&self, req: &LlmRequest) -> Result<LlmResponse, LlmError> {
        {
            let mut n = self.now.lock().unwrap();
            *n += 1;
            self.peak.fetch_max(*n, Ordering::SeqCst);
        }
        std::thread::sleep(Duration::from_millis(2));
        *self.now.lock().unwrap() -= 1;
        Ok(ok(&req.request_tag))
    }

    fn describe(&self) -> String {
        "gauge".into()
    }
}

#[test]
fn concurrency_bound_is_respected() {
    let reqs: Vec<LlmRequest> = (0..30).map(|i| req(&i.to_string())).collect();
    for limit in [1, 3] {
        let g = Gauge { now: Mutex::new(0), peak: AtomicUsize::new(0) };
        let policy = ConcurrencyPolicy { max_in_flight: limit, retry: fast_retry(), fail_fast: false };
        assert!(complete_batch(&reqs, &g, &policy).iter().all(Result::is_ok));
        assert!(g.peak.load(Ordering::SeqCst) <= limit);
    }
}

#[test]
fn fail_fast_cancels_pending() {
    let b = Flaky { failures: 1, error: LlmError::Status { status: 401, body_excerpt: String::new(), attempts: 1 }, calls: AtomicUsize::new(0) };
    let reqs: Vec<LlmRequest> = (0..10).map(|i| req(&i.to_string())).collect();
    let policy = ConcurrencyPolicy { max_in_flight: 1, retry: fast_retry(), fail_fast: true };
    let out = complete_batch(&reqs, &b, &policy);
    assert!(matches!(out[0], Err(LlmError::Status { status: 401, .. })));
    assert!(out[1..].iter().all(|r| *r == Err(LlmError::Cancelled)));
    let policy = ConcurrencyPolicy { fail_fast: false, ..policy };
    let b = Flaky { failures: 1, error: LlmError::Status { status: 401, body_excerpt: String::new(), attempts: 1 }, calls: AtomicUsize::new(0) };
    assert_eq!(complete_batch(&reqs, &b, &policy).iter().filter(|r| r.is_ok()).count(), 9);
}

/// Serves `responses` in order, one per connection, and returns the request bodies seen.
fn serve(responses: Vec<(u16, String)>) -> (String, std::thread::JoinHandle<Vec<String>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let handle = std::thread::spawn(move || {
        let mut bodies = Vec::new();
        for (status, body) in responses {
            let (mut stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            bodies.push(String::from_utf8(buf).unwrap());
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
        bodies
    });
    (url, handle)
}

const COMPLETION: &str = r#"{"choices":[{"message":{"role":"assistant","content":"Hypothesis 1"},"finish_reason":"stop"}]}"#;

#[test]
fn http_backend_round_trip_and_retry() {
    let (url, server) = serve(vec![(500, "{\"error\":\"busy\"}".into()), (200, COMPLETION.into())]);
    let backend = HttpBackend::new(&url, Some("k".into()), Duration::from_secs(5));
    let mut r = req("u1");
    r.max_tokens = 32;
    let resp = complete(&r, &backend, &fast_retry()).unwrap();
    assert_eq!(resp.text, "Hypothesis 1");
    assert_eq!(resp.raw_payload, COMPLETION.as_bytes());
    let bodies = server.join().unwrap();
    assert_eq!(bodies.len(), 2);
    let sent: serde_json::Value = serde_json::from_str(&bodies[1]).unwrap();
    assert_eq!(sent["max_tokens"], 32);
    assert_eq!(sent["messages"][0]["content"], "hello");
}

#[test]
fn http_client_error_surfaces() {
    let (url, server) = serve(vec![(404, "no such model".into())]);
    let backend = HttpBackend::new(&url, None, Duration::from_secs(5));
    let err = complete(&req("u1"), &backend, &fast_retry()).unwrap_err();
    assert_eq!(err, LlmError::Status { status: 404, body_excerpt: "no such model".into(), attempts: 1 });
    server.join().unwrap();
}

#[test]
fn http_connection_refused_is_transport() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let backend = HttpBackend::new(&format!("http://127.0.0.1:{port}"), None, Duration::from_secs(2));
    let policy = RetryPolicy { max_attempts: 2, ..fast_retry() };
    assert!(matches!(complete(&req("u"), &backend, &policy), Err(LlmError::Transport { attempts: 2, .. })));
}
