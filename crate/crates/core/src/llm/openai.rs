//! OpenAI-compatible `/chat/completions` and `/embeddings` client.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::{
    ChatRequest, EmbeddingVector, GatewayError, LlmProvider, ProviderConfig, ProviderKind,
};

pub struct OpenAiProvider {
    agent: ureq::Agent,
    base_url: String,
    api_key: Option<String>,
    embedding_model: String,
    requests: AtomicU64,
}

#[derive(Serialize)]
struct ChatBody<'a> {
    model: &'a str,
    messages: [Message<'a>; 2],
    temperature: f64,
    max_tokens: u32,
}

#[derive(Serialize)]
struct Message<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ResponseMessage,
}

#[derive(Deserialize)]
struct ResponseMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Serialize)]
struct EmbedBody<'a> {
    model: &'a str,
    input: &'a str,
}

#[derive(Deserialize)]
struct EmbedResponse {
    data: Vec<EmbedDatum>,
}

#[derive(Deserialize)]
struct EmbedDatum {
    embedding: Vec<f64>,
}

impl OpenAiProvider {
    /// Reads the API key from the configured environment variable, if one is
    /// named. Local runtimes that need no key can leave it unset.
    pub fn new(cfg: &ProviderConfig) -> Result<Self, GatewayError> {
        cfg.validate()?;
        let api_key = match &cfg.api_key_env_var {
            Some(var) => Some(
                std::env::var(var)
                    .ok()
                    .filter(|k| !k.is_empty())
                    .ok_or_else(|| GatewayError::AuthMissing(var.clone()))?,
            ),
            None => None,
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout()))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self {
            agent,
            base_url: cfg.base_url.trim_end_matches('/').to_string(),
            api_key,
            embedding_model: cfg.embedding_model.clone(),
            requests: AtomicU64::new(0),
        })
    }

    fn post<B: Serialize, R: for<'de> Deserialize<'de>>(
        &self,
        path: &str,
        body: &B,
    ) -> Result<R, GatewayError> {
        let url = format!("{}{}", self.base_url, path);
        let mut request = self
            .agent
            .post(&url)
            .header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        self.requests.fetch_add(1, Ordering::Relaxed);
        let mut resp = request.send_json(body).map_err(map_ureq_error)?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(map_ureq_error)?;
        if !(200..300).contains(&status) {
            return Err(GatewayError::Transport {
                status: Some(status),
                body: text,
            });
        }
        serde_json::from_str(&text).map_err(|e| GatewayError::Decode(e.to_string()))
    }
}

fn map_ureq_error(e: ureq::Error) -> GatewayError {
    match e {
        ureq::Error::Timeout(_) => GatewayError::Timeout,
        ureq::Error::BadUri(u) => GatewayError::Config(format!("bad URI {u}")),
        other => GatewayError::Transport {
            status: None,
            body: other.to_string(),
        },
    }
}

impl LlmProvider for OpenAiProvider {
    fn chat(&self, req: &ChatRequest) -> Result<String, GatewayError> {
        let body = ChatBody {
            model: &req.model_id,
            messages: [
                Message {
                    role: "system",
                    content: &req.system_prompt,
                },
                Message {
                    role: "user",
                    content: &req.user_prompt,
                },
            ],
            temperature: req.temperature,
            max_tokens: req.max_tokens,
        };
        let resp: ChatResponse = self.post("/chat/completions", &body)?;
        resp.choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| GatewayError::Decode("response has no message content".into()))
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, GatewayError> {
        let body = EmbedBody {
            model: &self.embedding_model,
            input: text,
        };
        let resp: EmbedResponse = self.post("/embeddings", &body)?;
        let datum = resp
            .data
            .into_iter()
            .next()
            .ok_or_else(|| GatewayError::Decode("response has no embedding".into()))?;
        Ok(EmbeddingVector::new(
            datum.embedding,
            self.embedding_model.clone(),
        ))
    }

    fn kind(&self) -> ProviderKind {
        ProviderKind::OpenAi
    }

    fn network_requests(&self) -> u64 {
        self.requests.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::Gateway;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::{Arc, Mutex};
    use std::thread;

    type Requests = Arc<Mutex<Vec<(String, String)>>>;

    /// Minimal HTTP/1.1 server that answers every request with the next
    /// canned `(status, body)` and records request bodies.
    fn serve(responses: Vec<(u16, String)>) -> (String, Requests) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let seen = Arc::new(Mutex::new(Vec::new()));
        let log = seen.clone();
        thread::spawn(move || {
            for (status, body) in responses {
                let Ok((stream, _)) = listener.accept() else {
                    return;
                };
                let mut reader = BufReader::new(stream);
                let mut head = String::new();
                let mut len = 0usize;
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap_or(0);
                    }
                    head.push_str(&line);
                }
                let mut buf = vec![0u8; len];
                reader.read_exact(&mut buf).ok();
                log.lock()
                    .unwrap()
                    .push((head, String::from_utf8_lossy(&buf).into_owned()));
                let reply = format!(
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                let mut stream = reader.into_inner();
                stream.write_all(reply.as_bytes()).ok();
            }
        });
        (format!("http://{addr}/v1"), seen)
    }

    fn config(base_url: String) -> ProviderConfig {
        ProviderConfig {
            kind: ProviderKind::OpenAi,
            base_url,
            chat_model: "test-model".into(),
            embedding_model: "test-embed".into(),
            embedding_dim: 3,
            max_retries: 2,
            backoff_ms: 1,
            timeout_secs: 5,
            ..Default::default()
        }
    }

    #[test]
    fn chat_round_trip_over_http() {
        let (url, seen) = serve(vec![(
            200,
            r#"{"choices":[{"message":{"role":"assistant","content":"OK"}}]}"#.into(),
        )]);
        let cfg = config(url);
        let gw = Gateway::new(Arc::new(OpenAiProvider::new(&cfg).unwrap()), &cfg);
        let req = gw.request("a", "s", "be brief".into(), "ping".into());
        assert_eq!(gw.chat(&req).unwrap(), "OK");
        let log = seen.lock().unwrap();
        assert!(log[0].0.starts_with("POST /v1/chat/completions"));
        let body: serde_json::Value = serde_json::from_str(&log[0].1).unwrap();
        assert_eq!(body["model"], "test-model");
        assert_eq!(body["messages"][1]["content"], "ping");
        assert_eq!(body["temperature"], 0.0);
        assert_eq!(gw.stats().network_requests, 1);
    }

    #[test]
    fn embeddings_over_http_with_bearer_auth() {
        std::env::set_var("RESUMERAG_TEST_KEY_EMBED", "sekrit");
        let (url, seen) = serve(vec![(
            200,
            r#"{"data":[{"embedding":[0.5,0.25,1.0]}]}"#.into(),
        )]);
        let cfg = ProviderConfig {
            api_key_env_var: Some("RESUMERAG_TEST_KEY_EMBED".into()),
            ..config(url)
        };
        let gw = Gateway::new(Arc::new(OpenAiProvider::new(&cfg).unwrap()), &cfg);
        let v = gw.embed("hr manager").unwrap();
        assert_eq!(v.values, vec![0.5, 0.25, 1.0]);
        assert_eq!(v.model_id, "test-embed");
        let log = seen.lock().unwrap();
        assert!(log[0].0.starts_with("POST /v1/embeddings"));
        assert!(log[0]
            .0
            .to_ascii_lowercase()
            .contains("authorization: bearer sekrit"));
    }

    #[test]
    fn server_errors_are_retried_then_reported() {
        let (url, seen) = serve(vec![(503, "busy".into()); 3]);
        let cfg = config(url);
        let gw = Gateway::new(Arc::new(OpenAiProvider::new(&cfg).unwrap()), &cfg);
        let req = gw.request("a", "s", "sys".into(), "ping".into());
        assert_eq!(
            gw.chat(&req),
            Err(GatewayError::Transport {
                status: Some(503),
                body: "busy".into()
            })
        );
        assert_eq!(seen.lock().unwrap().len(), 3);
    }

    #[test]
    fn unreachable_host_fails_after_all_attempts() {
        // bind then drop to get a port with nothing listening
        let port = TcpListener::bind("127.0.0.1:0")
            .unwrap()
            .local_addr()
            .unwrap()
            .port();
        let cfg = config(format!("http://127.0.0.1:{port}/v1"));
        let provider = Arc::new(OpenAiProvider::new(&cfg).unwrap());
        let gw = Gateway::new(provider.clone(), &cfg);
        let req = gw.request("a", "s", "sys".into(), "ping".into());
        assert!(matches!(
            gw.chat(&req),
            Err(GatewayError::Transport { status: None, .. })
        ));
        assert_eq!(provider.network_requests(), u64::from(cfg.max_retries) + 1);
    }

    #[test]
    fn client_errors_are_not_retried() {
        let (url, seen) = serve(vec![(401, "no".into()), (200, "{}".into())]);
        let cfg = config(url);
        let gw = Gateway::new(Arc::new(OpenAiProvider::new(&cfg).unwrap()), &cfg);
        let req = gw.request("a", "s", "sys".into(), "ping".into());
        assert!(matches!(
            gw.chat(&req),
            Err(GatewayError::Transport {
                status: Some(401),
                ..
            })
        ));
        assert_eq!(seen.lock().unwrap().len(), 1);
    }

    #[test]
    fn missing_key_variable_is_reported() {
        let cfg = ProviderConfig {
            api_key_env_var: Some("RESUMERAG_TEST_KEY_DEFINITELY_UNSET".into()),
            ..config("http://127.0.0.1:9/v1".into())
        };
        assert_eq!(
            OpenAiProvider::new(&cfg).err(),
            Some(GatewayError::AuthMissing(
                "RESUMERAG_TEST_KEY_DEFINITELY_UNSET".into()
            ))
        );
    }
}
