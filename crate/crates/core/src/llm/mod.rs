//! The single gateway for generative-model calls: request construction,
//! JSON payload parsing, retries, token accounting, and the scripted backend
//! used by deterministic tests.

pub mod templates;

use std::collections::{BTreeMap, VecDeque};
use std::io::BufRead;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::retry::{run_with_retries, Attempt, RetryPolicy};
pub use templates::{ExtractionExample, TemplateId};

/// Environment variable holding the bearer token for the chat endpoint.
pub const LLM_API_KEY_VAR: &str = "LLM_API_KEY";

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("chat backend unavailable after {attempts} attempts: {message}")]
    BackendUnavailable { attempts: u32, message: String },
    #[error("scripted backend has no response queued for template `{0}`")]
    ScriptExhausted(TemplateId),
    #[error("no JSON object found in response")]
    NoJsonFound,
    #[error("malformed JSON starting at byte {offset}: {message}")]
    MalformedJson { offset: usize, message: String },
    #[error("bad chat response: {0}")]
    BadResponse(String),
    #[error("bad script file {file} at line {line}: {reason}")]
    BadScript { file: String, line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

// ---------------------------------------------------------------------------
// Token accounting
// ---------------------------------------------------------------------------

/// Which pipeline module a call is billed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModuleTag {
    ExtractionSalience,
    NliEvaluator,
    QaEvaluator,
}

impl From<TemplateId> for ModuleTag {
    fn from(id: TemplateId) -> Self {
        match id {
            TemplateId::AcuExtractSalience => ModuleTag::ExtractionSalience,
            TemplateId::NliBatch => ModuleTag::NliEvaluator,
            TemplateId::QaQuestionGen | TemplateId::QaAnswering => ModuleTag::QaEvaluator,
        }
    }
}

/// Usage of a single call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub module_tag: ModuleTag,
}

/// Prompt/completion totals for one module.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageTotals {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// Per-module token totals of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerTotals {
    pub extraction_salience: UsageTotals,
    pub nli_evaluator: UsageTotals,
    pub qa_evaluator: UsageTotals,
}

impl LedgerTotals {
    pub fn get(&self, tag: ModuleTag) -> UsageTotals {
        match tag {
            ModuleTag::ExtractionSalience => self.extraction_salience,
            ModuleTag::NliEvaluator => self.nli_evaluator,
            ModuleTag::QaEvaluator => self.qa_evaluator,
        }
    }
}

/// Synchronized accumulator of per-module token usage.
#[derive(Debug, Default)]
pub struct TokenLedger {
    totals: Mutex<LedgerTotals>,
}

impl TokenLedger {
    pub fn record(&self, usage: TokenUsage) {
        let mut totals = self.totals.lock().expect("ledger poisoned");
        let slot = match usage.module_tag {
            ModuleTag::ExtractionSalience => &mut totals.extraction_salience,
            ModuleTag::NliEvaluator => &mut totals.nli_evaluator,
            ModuleTag::QaEvaluator => &mut totals.qa_evaluator,
        };
        slot.prompt_tokens += usage.prompt_tokens;
        slot.completion_tokens += usage.completion_tokens;
    }

    pub fn totals(&self) -> LedgerTotals {
        *self.totals.lock().expect("ledger poisoned")
    }
}

// ---------------------------------------------------------------------------
// Requests, responses, payload parsing
// ---------------------------------------------------------------------------

/// A fully rendered request to the chat backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmRequest {
    pub template_id: TemplateId,
    pub rendered_prompt: String,
    pub model_name: String,
    pub temperature: f64,
}

/// Raw response text plus the first JSON payload found in it, when any.
#[derive(Debug, Clone, PartialEq)]
pub struct LlmResponse {
    pub raw_text: String,
    pub parsed_json: Option<Value>,
    pub usage: TokenUsage,
}

/// Extract the first well-formed JSON object from `raw`, whether bare or
/// wrapped in prose or a fenced code block.
pub fn parse_json_payload(raw: &str) -> Result<Value, LlmError> {
    let mut first_brace = None;
    for (offset, _) in raw.match_indices('{') {
        first_brace.get_or_insert(offset);
        let mut stream = serde_json::Deserializer::from_str(&raw[offset..]).into_iter::<Value>();
        if let Some(Ok(value)) = stream.next() {
            if value.is_object() {
                return Ok(value);
            }
        }
    }
    match first_brace {
        None => Err(LlmError::NoJsonFound),
        Some(offset) => {
            let err = serde_json::Deserializer::from_str(&raw[offset..])
                .into_iter::<Value>()
                .next()
                .and_then(|r| r.err())
                .map(|e| e.to_string())
                .unwrap_or_else(|| "not a JSON object".to_string());
            Err(LlmError::MalformedJson { offset, message: err })
        }
    }
}

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

/// A chat completion backend. Implementations return the raw response text
/// plus reported token counts; the gateway owns accounting and parsing.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &LlmRequest) -> Result<(String, u64, u64), LlmError>;
}

/// One line of a `script.jsonl` fixture.
#[derive(Debug, Serialize, Deserialize)]
pub struct ScriptLine {
    pub template_id: String,
    pub response: String,
}

/// Deterministic backend replaying canned responses FIFO per template.
///
/// Usage is estimated as whitespace token counts so that ledger assertions
/// have non-trivial numbers to check.
#[derive(Debug, Default)]
pub struct ScriptedBackend {
    queues: Mutex<BTreeMap<TemplateId, VecDeque<String>>>,
}

impl ScriptedBackend {
    pub fn new() -> Self {
        Self::default()
    }

    /// Load a `script.jsonl` fixture: `{"template_id", "response"}` lines,
    /// consumed in file order per template.
    pub fn from_script_file(path: &Path) -> Result<Self, LlmError> {
        let file = std::fs::File::open(path)?;
        let backend = Self::new();
        for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: ScriptLine =
                serde_json::from_str(&line).map_err(|e| LlmError::BadScript {
                    file: path.display().to_string(),
                    line: i + 1,
                    reason: e.to_string(),
                })?;
            let template = TemplateId::parse(&parsed.template_id).ok_or_else(|| {
                LlmError::BadScript {
                    file: path.display().to_string(),
                    line: i + 1,
                    reason: format!("unknown template_id `{}`", parsed.template_id),
                }
            })?;
            backend.push_response(template, parsed.response);
        }
        Ok(backend)
    }

    pub fn push_response(&self, template: TemplateId, response: impl Into<String>) {
        self.queues
            .lock()
            .expect("script queue poisoned")
            .entry(template)
            .or_default()
            .push_back(response.into());
    }

    pub fn remaining(&self, template: TemplateId) -> usize {
        self.queues
            .lock()
            .expect("script queue poisoned")
            .get(&template)
            .map(|q| q.len())
            .unwrap_or(0)
    }
}

fn whitespace_tokens(s: &str) -> u64 {
    s.split_whitespace().count() as u64
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, request: &LlmRequest) -> Result<(String, u64, u64), LlmError> {
        let response = self
            .queues
            .lock()
            .expect("script queue poisoned")
            .get_mut(&request.template_id)
            .and_then(|q| q.pop_front())
            .ok_or(LlmError::ScriptExhausted(request.template_id))?;
        let prompt_tokens = whitespace_tokens(&request.rendered_prompt);
        let completion_tokens = whitespace_tokens(&response);
        Ok((response, prompt_tokens, completion_tokens))
    }
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize, Default)]
struct ChatUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

#[derive(Deserialize)]
struct ChatResponseBody {
    choices: Vec<ChatChoice>,
    #[serde(default)]
    usage: Option<ChatUsage>,
}

/// Client for a chat-completion endpoint:
/// POST `{"model", "messages": [{"role": "user", "content": prompt}],
/// "temperature": 0}`, reading `choices[0].message.content` and `usage`.
pub struct RemoteChatBackend {
    endpoint: String,
    api_key: Option<String>,
    retry: RetryPolicy,
    client: reqwest::blocking::Client,
}

impl RemoteChatBackend {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>, retry: RetryPolicy) -> Self {
        Self {
            endpoint: endpoint.into(),
            api_key,
            retry,
            client: reqwest::blocking::Client::new(),
        }
    }

    /// Build with the bearer token from `LLM_API_KEY` when set.
    pub fn from_env(endpoint: impl Into<String>) -> Self {
        Self::new(endpoint, std::env::var(LLM_API_KEY_VAR).ok(), RetryPolicy::default())
    }
}

impl ChatBackend for RemoteChatBackend {
    fn complete(&self, request: &LlmRequest) -> Result<(String, u64, u64), LlmError> {
        let body = json!({
            "model": request.model_name,
            "messages": [{"role": "user", "content": request.rendered_prompt}],
            "temperature": request.temperature,
        });
        let outcome = run_with_retries(&self.retry, || {
            let mut req = self.client.post(&self.endpoint).json(&body);
            if let Some(key) = &self.api_key {
                req = req.bearer_auth(key);
            }
            match req.send() {
                Err(e) => Attempt::Retryable(e.to_string()),
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_server_error() {
                        Attempt::Retryable(format!("server error {status}"))
                    } else if !status.is_success() {
                        Attempt::Fatal(format!("unexpected status {status}"))
                    } else {
                        match resp.json::<ChatResponseBody>() {
                            Ok(parsed) => Attempt::Ok(parsed),
                            Err(e) => Attempt::Fatal(format!("undecodable body: {e}")),
                        }
                    }
                }
            }
        });
        let parsed = outcome
            .map_err(|(message, attempts)| LlmError::BackendUnavailable { attempts, message })?;
        let choice = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| LlmError::BadResponse("response has no choices".into()))?;
        let usage = parsed.usage.unwrap_or_default();
        Ok((choice.message.content, usage.prompt_tokens, usage.completion_tokens))
    }
}

// ---------------------------------------------------------------------------
// Gateway
// ---------------------------------------------------------------------------

/// Routes every call through one backend and records usage into the run's
/// token ledger under the template's module tag.
pub struct LlmGateway {
    backend: Box<dyn ChatBackend>,
    ledger: TokenLedger,
    model_name: String,
    temperature: f64,
}

impl LlmGateway {
    pub fn new(backend: Box<dyn ChatBackend>, model_name: impl Into<String>) -> Self {
        Self { backend, ledger: TokenLedger::default(), model_name: model_name.into(), temperature: 0.0 }
    }

    pub fn model_name(&self) -> &str {
        &self.model_name
    }

    /// Run one rendered prompt through the backend.
    pub fn complete(
        &self,
        template_id: TemplateId,
        rendered_prompt: String,
    ) -> Result<LlmResponse, LlmError> {
        let request = LlmRequest {
            template_id,
            rendered_prompt,
            model_name: self.model_name.clone(),
            temperature: self.temperature,
        };
        let (raw_text, prompt_tokens, completion_tokens) = self.backend.complete(&request)?;
        let usage = TokenUsage {
            prompt_tokens,
            completion_tokens,
            module_tag: ModuleTag::from(template_id),
        };
        self.ledger.record(usage);
        let parsed_json = parse_json_payload(&raw_text).ok();
        Ok(LlmResponse { raw_text, parsed_json, usage })
    }

    pub fn ledger_totals(&self) -> LedgerTotals {
        self.ledger.totals()
    }
}
