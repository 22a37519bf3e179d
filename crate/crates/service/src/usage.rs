//! Consent-gated usage log. Only suggestion tokens and ranks are stored;
//! nothing from the user's document is ever written.

use std::fs::{File, OpenOptions};
use std::io::{LineWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

pub const MAX_SUGGESTION_CHARS: usize = 64;
pub const MAX_SESSION_CHARS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    CompletionShown,
    CompletionAccepted,
    NextwordShown,
    NextwordAccepted,
    SpellShown,
    SpellAccepted,
    TranslateRequested,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventPayload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suggestion: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
}

/// Body of `POST /log`.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRequest {
    pub consent: bool,
    pub session: String,
    pub kind: EventKind,
    #[serde(default)]
    pub payload: EventPayload,
}

impl LogRequest {
    pub fn validate(&self) -> Result<(), String> {
        if self.session.chars().count() > MAX_SESSION_CHARS {
            return Err("session id too long".into());
        }
        if let Some(s) = &self.payload.suggestion {
            if s.chars().count() > MAX_SUGGESTION_CHARS || s.chars().any(char::is_whitespace) {
                return Err("suggestion must be a single token".into());
            }
        }
        Ok(())
    }
}

/// One line of the usage log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageEvent {
    pub timestamp_ms: u64,
    pub session: String,
    pub kind: EventKind,
    #[serde(flatten)]
    pub payload: EventPayload,
}

impl UsageEvent {
    pub fn from_request(req: LogRequest) -> Self {
        let timestamp_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_millis() as u64);
        UsageEvent {
            timestamp_ms,
            session: req.session,
            kind: req.kind,
            payload: req.payload,
        }
    }
}

/// Append-only JSONL writer; the mutex serializes all writers.
#[derive(Debug)]
pub struct UsageLog {
    path: PathBuf,
    writer: Mutex<LineWriter<File>>,
}

impl UsageLog {
    pub fn open(path: &Path) -> std::io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(UsageLog {
            path: path.to_path_buf(),
            writer: Mutex::new(LineWriter::new(file)),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, event: &UsageEvent) -> std::io::Result<()> {
        let line = serde_json::to_string(event)?;
        let mut w = self.writer.lock().expect("usage log lock");
        writeln!(w, "{line}")
    }

    pub fn flush(&self) -> std::io::Result<()> {
        self.writer.lock().expect("usage log lock").flush()
    }
}
