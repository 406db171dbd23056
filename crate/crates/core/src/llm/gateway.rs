use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::llm::backend::{Backend, BackendError};
use crate::llm::template::TemplateId;
use crate::policy::ParseError;

pub const DEFAULT_MAX_RETRIES: usize = 3;
pub const DEFAULT_PARSE_RETRIES: usize = 3;

/// One backend attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallRecord {
    pub timestamp: String,
    pub template_id: TemplateId,
    pub prompt_sha256: String,
    pub response_text: String,
    pub latency_ms: u64,
    pub attempt: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("completion failed after {attempts} attempts: {last}")]
    Transport { attempts: usize, last: BackendError },
    #[error("response unparseable after {attempts} attempts: {last}")]
    Parse { attempts: usize, last: ParseError },
    #[error("writing call log: {0}")]
    Log(#[from] std::io::Error),
}

impl GatewayError {
    /// Parse failures lose one iteration; everything else ends the run.
    pub fn is_fatal(&self) -> bool {
        !matches!(self, GatewayError::Parse { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    /// Extra attempts after a retryable backend failure.
    pub max_retries: usize,
    /// Total attempts allowed for an unparseable response.
    pub parse_attempts: usize,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: DEFAULT_MAX_RETRIES,
            parse_attempts: DEFAULT_PARSE_RETRIES,
        }
    }
}

struct CallLog {
    records: Vec<CallRecord>,
    sink: Option<BufWriter<File>>,
}

/// Backend plus retry policy plus serialized call logging.
pub struct Gateway {
    backend: Box<dyn Backend>,
    retry: RetryPolicy,
    log: Mutex<CallLog>,
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl Gateway {
    pub fn new(backend: Box<dyn Backend>, retry: RetryPolicy) -> Self {
        Self {
            backend,
            retry,
            log: Mutex::new(CallLog {
                records: Vec::new(),
                sink: None,
            }),
        }
    }

    /// Also appends every record to `path` as JSONL.
    pub fn with_log_file(self, path: &Path) -> std::io::Result<Self> {
        let file = File::create(path)?;
        self.log.lock().unwrap().sink = Some(BufWriter::new(file));
        Ok(self)
    }

    pub fn records(&self) -> Vec<CallRecord> {
        self.log.lock().unwrap().records.clone()
    }

    pub fn call_count(&self) -> usize {
        self.log.lock().unwrap().records.len()
    }

    fn record(&self, rec: CallRecord) -> Result<(), GatewayError> {
        let mut log = self.log.lock().unwrap();
        if let Some(sink) = log.sink.as_mut() {
            serde_json::to_writer(&mut *sink, &rec).map_err(std::io::Error::from)?;
            sink.write_all(b"\n")?;
            sink.flush()?;
        }
        log.records.push(rec);
        Ok(())
    }

    /// One logical completion, retrying retryable backend failures.
    pub fn complete(&self, template_id: TemplateId, prompt: &str) -> Result<String, GatewayError> {
        let digest = sha256_hex(prompt);
        let mut attempt = 0;
        loop {
            attempt += 1;
            let start = Instant::now();
            let result = self.backend.complete(prompt);
            let latency_ms = start.elapsed().as_millis() as u64;
            let (response_text, error) = match &result {
                Ok(text) => (text.clone(), None),
                Err(e) => (String::new(), Some(e.to_string())),
            };
            self.record(CallRecord {
                timestamp: chrono::Utc::now().to_rfc3339(),
                template_id,
                prompt_sha256: digest.clone(),
                response_text,
                latency_ms,
                attempt,
                error,
            })?;
            match result {
                Ok(text) => return Ok(text),
                Err(e) if e.is_retryable() && attempt <= self.retry.max_retries => {
                    log::warn!("{template_id} attempt {attempt} failed: {e}");
                }
                Err(last) => {
                    return Err(GatewayError::Transport {
                        attempts: attempt,
                        last,
                    })
                }
            }
        }
    }

    /// Re-issues the same prompt until `parse` accepts the response.
    pub fn complete_parsed<T>(
        &self,
        template_id: TemplateId,
        prompt: &str,
        parse: impl Fn(&str) -> Result<T, ParseError>,
    ) -> Result<(T, String), GatewayError> {
        let attempts = self.retry.parse_attempts.max(1);
        let mut last = ParseError::NoParamsLine;
        for i in 1..=attempts {
            let text = self.complete(template_id, prompt)?;
            match parse(&text) {
                Ok(v) => return Ok((v, text)),
                Err(e) => {
                    log::warn!("{template_id} response {i} unparseable: {e}");
                    last = e;
                }
            }
        }
        Err(GatewayError::Parse { attempts, last })
    }
}
