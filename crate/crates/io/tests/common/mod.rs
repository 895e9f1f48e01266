//! Minimal scripted HTTP server for exercising the embedding client.
#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;

use serde_json::{json, Value};

/// What the server does with one request.
#[derive(Clone, Debug)]
pub enum Reply {
    /// Embed each input as `[len, 1, 0...]` with the given dimension.
    Embed { dim: usize },
    /// Respond with this status and an empty body.
    Status(u16),
    /// Embed but drop the last vector.
    ShortEmbed { dim: usize },
}

pub struct FakeServer {
    pub url: String,
    pub requests: Arc<Mutex<Vec<Value>>>,
}

fn read_request(stream: &mut TcpStream) -> Option<Value> {
    let mut reader = BufReader::new(stream.try_clone().ok()?);
    let mut content_length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).ok()? == 0 {
            return None;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            if name.eq_ignore_ascii_case("content-length") {
                content_length = value.trim().parse().ok()?;
            }
        }
    }
    let mut body = vec![0; content_length];
    reader.read_exact(&mut body).ok()?;
    serde_json::from_slice(&body).ok()
}

fn embed(inputs: &[Value], dim: usize) -> Vec<Vec<f32>> {
    inputs
        .iter()
        .map(|s| {
            let s = s.as_str().unwrap_or_default();
            let mut v = vec![0.0f32; dim];
            v[0] = s.len() as f32;
            v[1] = 1.0;
            if dim > 2 {
                v[2] = f32::from(*s.as_bytes().last().unwrap_or(&0)) / 100.0;
            }
            v
        })
        .collect()
}

/// Serve `script` in order, then keep repeating its last entry.
pub fn serve(script: Vec<Reply>) -> FakeServer {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/embed", listener.local_addr().unwrap());
    let requests = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&requests);
    thread::spawn(move || {
        let mut step = 0usize;
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let Some(body) = read_request(&mut stream) else {
                continue;
            };
            let reply = script[step.min(script.len() - 1)].clone();
            step += 1;
            let inputs = body["inputs"].as_array().cloned().unwrap_or_default();
            log.lock().unwrap().push(body);
            let (status, payload) = match reply {
                Reply::Embed { dim } => {
                    (200, json!({ "vectors": embed(&inputs, dim) }).to_string())
                }
                Reply::ShortEmbed { dim } => {
                    let mut v = embed(&inputs, dim);
                    v.pop();
                    (200, json!({ "vectors": v }).to_string())
                }
                Reply::Status(code) => (code, String::new()),
            };
            let response = format!(
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{payload}",
                payload.len()
            );
            let _ = stream.write_all(response.as_bytes());
        }
    });
    FakeServer { url, requests }
}
