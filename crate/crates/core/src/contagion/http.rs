//! Chat-completion client for OpenAI-compatible endpoints.

use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::provider::{GenerationProvider, GenerationRequest, ProviderError};

pub const URL_VAR: &str = "EMOGRAPH_LLM_URL";
pub const API_KEY_VAR: &str = "EMOGRAPH_LLM_API_KEY";

#[derive(Debug, Clone, PartialEq)]
pub struct HttpConfig {
    pub url: String,
    pub api_key: Option<String>,
    pub model: String,
    pub timeout: Duration,
}

impl HttpConfig {
    /// Reads the endpoint from the process environment.
    pub fn from_env(model: &str) -> Result<Self, ProviderError> {
        Self::from_lookup(model, |k| std::env::var(k).ok())
    }

    pub fn from_lookup(model: &str, lookup: impl Fn(&str) -> Option<String>) -> Result<Self, ProviderError> {
        let url = lookup(URL_VAR)
            .filter(|u| !u.trim().is_empty())
            .ok_or_else(|| ProviderError::Config(format!("{URL_VAR} is not set")))?;
        if !(url.starts_with("http://") || url.starts_with("https://")) {
            return Err(ProviderError::Config(format!("{URL_VAR} must be an http(s) URL, got {url:?}")));
        }
        Ok(HttpConfig {
            url,
            api_key: lookup(API_KEY_VAR).filter(|k| !k.is_empty()),
            model: model.to_string(),
            timeout: Duration::from_secs(60),
        })
    }
}

pub struct HttpProvider {
    config: HttpConfig,
    client: reqwest::blocking::Client,
}

impl std::fmt::Debug for HttpProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpProvider")
            .field("url", &self.config.url)
            .field("model", &self.config.model)
            .field("has_api_key", &self.config.api_key.is_some())
            .finish()
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: Option<String>,
}

impl HttpProvider {
    pub fn new(config: HttpConfig) -> Result<Self, ProviderError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| ProviderError::Config(e.to_string()))?;
        Ok(HttpProvider { config, client })
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }
}

impl GenerationProvider for HttpProvider {
    fn name(&self) -> &str {
        "http"
    }

    fn generate(&self, request: &GenerationRequest<'_>) -> Result<String, ProviderError> {
        let body = json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": request.prompt.system_preamble},
                {"role": "user", "content": request.prompt.user_message()},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
            "seed": request.seed,
        });
        let mut req = self.client.post(&self.config.url).json(&body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| ProviderError::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| ProviderError::Transport(e.to_string()))?;
        if !status.is_success() {
            let mut body = text;
            body.truncate(500);
            return Err(ProviderError::Status { status: status.as_u16(), body });
        }
        let parsed: ChatResponse = serde_json::from_str(&text).map_err(|e| ProviderError::Decode(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .map(|c| c.trim().to_string())
            .ok_or_else(|| ProviderError::Decode("response has no choices[0].message.content".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contagion::prompt::build_prompt;
    use crate::graph::{Edge, EdgeKind, EmotionLabel, NodeState};
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::mpsc;

    /// Serves one canned HTTP response and hands back the raw request.
    fn one_shot_server(status: &str, body: &str) -> (String, mpsc::Receiver<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        let response =
            format!("HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}", body.len());
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut head = String::new();
            let mut len = 0usize;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                head.push_str(&line);
                if line == "\r\n" {
                    break;
                }
            }
            let mut body = vec![0u8; len];
            reader.read_exact(&mut body).unwrap();
            reader.get_mut().write_all(response.as_bytes()).unwrap();
            tx.send(head + &String::from_utf8(body).unwrap()).unwrap();
        });
        (url, rx)
    }

    fn config(url: &str, key: Option<&str>) -> HttpConfig {
        let (url, key) = (url.to_string(), key.map(str::to_string));
        HttpConfig::from_lookup("test-model", move |k| match k {
            URL_VAR => Some(url.clone()),
            API_KEY_VAR => key.clone(),
            _ => None,
        })
        .unwrap()
    }

    fn call(provider: &HttpProvider) -> Result<String, ProviderError> {
        let p = build_prompt(
            &NodeState::new(1u32),
            &NodeState::new(2u32),
            &Edge::new(1u32, 2u32, EdgeKind::Reply),
            EmotionLabel::Neutral,
        );
        provider.generate(&GenerationRequest { prompt: &p, max_tokens: 32, temperature: 0.0, seed: 9 })
    }

    #[test]
    fn missing_url_is_config_error() {
        assert!(matches!(HttpConfig::from_lookup("m", |_| None), Err(ProviderError::Config(_))));
        assert!(matches!(
            HttpConfig::from_lookup("m", |k| (k == URL_VAR).then(|| "ftp://x".to_string())),
            Err(ProviderError::Config(_))
        ));
    }

    #[test]
    fn successful_completion() {
        let (url, rx) =
            one_shot_server("200 OK", r#"{"choices":[{"message":{"role":"assistant","content":" Sounds good. "}}]}"#);
        let provider = HttpProvider::new(config(&url, Some("sk-test"))).unwrap();
        assert_eq!(call(&provider).unwrap(), "Sounds good.");
        let raw = rx.recv().unwrap();
        assert!(raw.to_ascii_lowercase().contains("authorization: bearer sk-test"));
        let body: serde_json::Value = serde_json::from_str(raw.split("\r\n\r\n").nth(1).unwrap()).unwrap();
        assert_eq!(body["model"], "test-model");
        assert_eq!(body["temperature"], 0.0);
        assert_eq!(body["max_tokens"], 32);
        assert_eq!(body["messages"][0]["role"], "system");
        assert!(body["messages"][1]["content"].as_str().unwrap().contains("Maintain a neutral tone."));
    }

    #[test]
    fn status_and_decode_errors() {
        let (url, _rx) = one_shot_server("503 Service Unavailable", r#"{"error":"busy"}"#);
        let provider = HttpProvider::new(config(&url, None)).unwrap();
        assert!(matches!(call(&provider), Err(ProviderError::Status { status: 503, .. })));

        let (url, _rx) = one_shot_server("200 OK", r#"{"choices":[]}"#);
        let provider = HttpProvider::new(config(&url, None)).unwrap();
        assert!(matches!(call(&provider), Err(ProviderError::Decode(_))));
    }

    #[test]
    fn refused_connection_is_transport_error() {
        let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
        let provider = HttpProvider::new(config(&format!("http://127.0.0.1:{port}/"), None)).unwrap();
        assert!(matches!(call(&provider), Err(ProviderError::Transport(_))));
    }
}
