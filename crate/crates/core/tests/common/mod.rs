//! Shared fixtures for integration tests.
#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use selftrain_kit::corpus::{Dataset, Label, Sample, Split};
use selftrain_kit::model::{LogisticModel, ProbabilisticClassifier, TrainConfig, TrainingLog};
use serde_json::{json, Value};

/// Predicts the same probability for every text.
#[derive(Debug, Clone)]
pub struct Constant(pub f64);

impl ProbabilisticClassifier for Constant {
    fn fit(&mut self, _: &Dataset, _: &Dataset, _: &TrainConfig) -> selftrain_kit::Result<TrainingLog> {
        Ok(TrainingLog::default())
    }

    fn is_trained(&self) -> bool {
        true
    }

    fn predict_proba(&self, _: &str) -> selftrain_kit::Result<f64> {
        Ok(self.0)
    }
}

pub fn dataset(split: Split, rows: &[(&str, &str, Option<Label>)]) -> Dataset {
    let samples = rows.iter().map(|&(id, t, l)| Sample::new(id, t, l)).collect();
    Dataset::new(split, samples).unwrap()
}

pub struct Request {
    pub method: String,
    pub path: String,
    pub body: Vec<u8>,
}

fn read_request(stream: &TcpStream) -> Option<Request> {
    let mut reader = BufReader::new(stream);
    let mut line = String::new();
    reader.read_line(&mut line).ok()?;
    let mut parts = line.split_whitespace();
    let method = parts.next()?.to_string();
    let path = parts.next()?.to_string();
    let mut length = 0usize;
    loop {
        let mut header = String::new();
        reader.read_line(&mut header).ok()?;
        let header = header.trim_end();
        if header.is_empty() {
            break;
        }
        if let Some((k, v)) = header.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                length = v.trim().parse().ok()?;
            }
        }
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body).ok()?;
    Some(Request { method, path, body })
}

fn respond(mut stream: &TcpStream, status: u16, body: &Value) {
    let body = body.to_string();
    let reason = match status {
        200 => "OK",
        409 => "Conflict",
        404 => "Not Found",
        _ => "Error",
    };
    let head = format!(
        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        body.len()
    );
    let _ = stream.write_all(head.as_bytes());
    let _ = stream.write_all(body.as_bytes());
    let _ = stream.flush();
}

/// Serves `handler` on an ephemeral local port, one thread per connection.
/// Returns the base URL.
pub fn serve<H>(handler: H) -> String
where
    H: Fn(&Request) -> (u16, Value) + Send + Sync + 'static,
{
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let handler = Arc::new(handler);
    thread::spawn(move || {
        for stream in listener.incoming().flatten() {
            let handler = Arc::clone(&handler);
            thread::spawn(move || {
                if let Some(req) = read_request(&stream) {
                    let (status, body) = handler(&req);
                    respond(&stream, status, &body);
                }
            });
        }
    });
    format!("http://{addr}")
}

fn records(v: &Value, split: Split) -> Dataset {
    let samples = v
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            let label: Label = r["label"].as_str().unwrap().parse().unwrap();
            Sample::labeled(r["id"].as_str().unwrap(), r["text"].as_str().unwrap(), label)
        })
        .collect();
    Dataset::new(split, samples).unwrap()
}

/// A stub service that trains and serves the native model, so a remote
/// pipeline can be compared with a native one. `/train` is exclusive and
/// takes at least `train_delay`.
pub struct NativeStub {
    pub url: String,
    pub train_calls: Arc<Mutex<usize>>,
}

pub fn native_stub(train_delay: Duration) -> NativeStub {
    let model: Arc<Mutex<Option<LogisticModel>>> = Arc::new(Mutex::new(None));
    let busy = Arc::new(AtomicBool::new(false));
    let train_calls = Arc::new(Mutex::new(0));
    let calls = Arc::clone(&train_calls);
    let url = serve(move |req| match (req.method.as_str(), req.path.as_str()) {
        ("GET", "/health") => (200, json!({"status": "ok", "model": "stub-native", "trained": model.lock().unwrap().is_some()})),
        ("POST", "/train") => {
            if busy.swap(true, Ordering::SeqCst) {
                return (409, json!({"status": "busy"}));
            }
            *calls.lock().unwrap() += 1;
            let body: Value = serde_json::from_slice(&req.body).unwrap();
            let train = records(&body["train"], Split::Train);
            let valid = records(&body["valid"], Split::Holdout);
            let cfg: TrainConfig = serde_json::from_value(body["config"].clone()).unwrap();
            let mut m = LogisticModel::default();
            let log = m.fit(&train, &valid, &cfg).unwrap();
            thread::sleep(train_delay);
            *model.lock().unwrap() = Some(m);
            busy.store(false, Ordering::SeqCst);
            (200, json!({"job": "j1", "status": "completed", "best_macro_f1": log.best_macro_f1, "log": log}))
        }
        ("POST", "/predict_proba") => {
            let body: Value = serde_json::from_slice(&req.body).unwrap();
            let texts: Vec<&str> = body["texts"].as_array().unwrap().iter().map(|t| t.as_str().unwrap()).collect();
            match model.lock().unwrap().as_ref() {
                Some(m) => (200, json!({"probs": m.predict_proba_batch(&texts).unwrap()})),
                None => (400, json!({"error": "untrained"})),
            }
        }
        _ => (404, json!({"error": "not found"})),
    });
    NativeStub { url, train_calls }
}

/// Any address with nothing listening.
pub fn dead_url() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    format!("http://{addr}")
}
