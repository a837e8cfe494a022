//! HTTP fetch behavior against a local test server: politeness delay,
//! not-found mapping, and transport errors.

use std::io::{Read, Write};
use std::net::TcpListener;
use std::time::{Duration, Instant};

use themeforge_core::corpus::ReportId;
use themeforge_core::scrape::{FetchConfig, Fetcher};
use themeforge_core::Error;

/// Serves `count` requests: 200 with a fixed body, or 404 when the path
/// contains "missing". Returns the base URL.
fn spawn_server(count: usize) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind test server");
    let addr = listener.local_addr().unwrap();
    std::thread::spawn(move || {
        for _ in 0..count {
            let (mut stream, _) = match listener.accept() {
                Ok(pair) => pair,
                Err(_) => return,
            };
            let mut request = Vec::new();
            let mut buf = [0u8; 512];
            while !request.windows(4).any(|w| w == b"\r\n\r\n") {
                match stream.read(&mut buf) {
                    Ok(0) | Err(_) => break,
                    Ok(n) => request.extend_from_slice(&buf[..n]),
                }
            }
            let request = String::from_utf8_lossy(&request);
            let response = if request.lines().next().unwrap_or("").contains("missing") {
                "HTTP/1.1 404 Not Found\r\ncontent-length: 0\r\nconnection: close\r\n\r\n"
                    .to_string()
            } else {
                let body = "report payload";
                format!(
                    "HTTP/1.1 200 OK\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{}",
                    body.len(),
                    body
                )
            };
            let _ = stream.write_all(response.as_bytes());
        }
    });
    format!("http://{addr}")
}

#[test]
fn http_fetch_returns_payload_bytes() {
    let base = spawn_server(1);
    let fetcher = Fetcher::new(
        FetchConfig::http(format!("{base}/assets/{{id}}.txt"))
            .with_delay(Duration::from_millis(0)),
    );
    let bytes = fetcher.fetch(&ReportId::new("GAO-1-1").unwrap()).unwrap();
    assert_eq!(bytes, b"report payload");
}

#[test]
fn second_fetch_starts_after_the_politeness_delay() {
    let base = spawn_server(2);
    let delay = Duration::from_millis(150);
    let fetcher = Fetcher::new(
        FetchConfig::http(format!("{base}/assets/{{id}}.txt")).with_delay(delay),
    );
    let id = ReportId::new("GAO-1-1").unwrap();

    fetcher.fetch(&id).unwrap();
    let first_completed = Instant::now();
    fetcher.fetch(&id).unwrap();
    let elapsed = first_completed.elapsed();
    assert!(
        elapsed >= delay,
        "second fetch began {elapsed:?} after the first completed, expected >= {delay:?}"
    );
}

#[test]
fn http_404_maps_to_not_found() {
    let base = spawn_server(1);
    let fetcher = Fetcher::new(
        FetchConfig::http(format!("{base}/missing/{{id}}.txt"))
            .with_delay(Duration::from_millis(0)),
    );
    let err = fetcher.fetch(&ReportId::new("GAO-0-0").unwrap()).unwrap_err();
    assert!(matches!(err, Error::NotFound(_)), "got {err}");
    assert!(!err.is_retryable());
}

#[test]
fn connection_failure_is_a_retryable_transport_error() {
    // bind and drop a listener so the port is (very likely) closed
    let port = {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        listener.local_addr().unwrap().port()
    };
    let fetcher = Fetcher::new(
        FetchConfig::http(format!("http://127.0.0.1:{port}/{{id}}"))
            .with_delay(Duration::from_millis(0)),
    );
    let err = fetcher.fetch(&ReportId::new("GAO-1-1").unwrap()).unwrap_err();
    assert!(err.is_retryable(), "got {err}");
}
