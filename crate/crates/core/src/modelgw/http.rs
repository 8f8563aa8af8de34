use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{GenerationRequest, Generator, ModelError};

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    max_tokens: u32,
    temperature: f64,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatReply,
}

#[derive(Deserialize)]
struct ChatReply {
    #[serde(default)]
    content: Option<String>,
}

/// Client for chat-completions compatible endpoints. The prompt is sent as
/// a single user message.
pub struct HttpChatGenerator {
    base: String,
    url: String,
    model: String,
    api_key: Option<String>,
    http: reqwest::blocking::Client,
}

impl HttpChatGenerator {
    pub fn new(base_url: &str, model: &str, api_key: Option<String>, timeout: Duration) -> Self {
        let base = base_url.trim_end_matches('/').trim_end_matches("/chat/completions").to_string();
        let http = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .expect("reqwest client builds");
        HttpChatGenerator {
            url: format!("{base}/chat/completions"),
            base,
            model: model.to_string(),
            api_key,
            http,
        }
    }

    fn map_err(&self, e: reqwest::Error) -> ModelError {
        if e.is_timeout() {
            ModelError::ModelTimeout(self.url.clone())
        } else if e.is_connect() {
            ModelError::Unreachable(format!("{}: {e}", self.url))
        } else {
            ModelError::EndpointError(format!("{}: {e}", self.url))
        }
    }
}

impl Generator for HttpChatGenerator {
    fn endpoint_tag(&self) -> String {
        format!("{}@{}", self.model, self.base)
    }

    fn generate(&self, req: &GenerationRequest) -> Result<String, ModelError> {
        let body = ChatRequest {
            model: &self.model,
            messages: vec![ChatMessage { role: "user", content: &req.prompt }],
            max_tokens: req.max_tokens,
            temperature: req.temperature,
        };
        let mut call = self.http.post(&self.url).json(&body);
        if let Some(key) = &self.api_key {
            call = call.bearer_auth(key);
        }
        let resp = call.send().map_err(|e| self.map_err(e))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(ModelError::EndpointError(format!("{}: HTTP {status}", self.url)));
        }
        let parsed: ChatResponse = resp.json().map_err(|e| self.map_err(e))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| ModelError::EndpointError(format!("{}: response has no choices", self.url)))
    }

    fn reachable(&self) -> bool {
        // Any HTTP answer counts; only transport failures mean down.
        self.http
            .get(format!("{}/models", self.base))
            .timeout(Duration::from_secs(2))
            .send()
            .is_ok()
    }
}
