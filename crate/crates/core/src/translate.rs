//! Translation backends behind one interface: an echo backend, an offline
//! glossary backend driven by the lexicon, and a remote HTTP backend for a
//! model served elsewhere. Results are cached per translator.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::text::{self, TokenKind};

pub const UNKNOWN_OPEN: char = '⟦';
pub const UNKNOWN_CLOSE: char = '⟧';

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Direction {
    pub source: String,
    pub target: String,
}

impl Direction {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        Direction {
            source: source.into(),
            target: target.into(),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.source, self.target)
    }
}

impl FromStr for Direction {
    type Err = Error;

    /// Parses `source:target`.
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() => {
                Ok(Direction::new(a.trim(), b.trim()))
            }
            _ => Err(Error::InvalidInput(format!(
                "direction must look like source:target, got {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Backend {
    Echo,
    Glossary,
    Remote {
        endpoint: String,
        /// Name of the environment variable holding the bearer token.
        #[serde(default)]
        token_env: Option<String>,
    },
}

impl Backend {
    pub fn id(&self) -> &'static str {
        match self {
            Backend::Echo => "echo",
            Backend::Glossary => "glossary",
            Backend::Remote { .. } => "remote",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranslatorSpec {
    pub backend: Backend,
    pub direction: Direction,
    pub timeout: Duration,
    /// Zero disables caching.
    pub cache_ttl: Duration,
}

impl TranslatorSpec {
    pub fn new(backend: Backend, direction: Direction) -> Self {
        TranslatorSpec {
            backend,
            direction,
            timeout: Duration::from_secs(10),
            cache_ttl: Duration::from_secs(300),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.direction.source == self.direction.target {
            return Err(Error::Config(format!(
                "translation direction {} has identical languages",
                self.direction
            )));
        }
        if let Backend::Remote { endpoint, .. } = &self.backend {
            if endpoint.trim().is_empty() {
                return Err(Error::Config("remote backend requires an endpoint".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationResult {
    pub text: String,
    pub backend: String,
    pub latency_ms: f64,
    pub from_cache: bool,
    pub unknown_tokens: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub entries: usize,
    pub hits: u64,
    pub misses: u64,
}

#[derive(Debug, Clone)]
struct Cached {
    text: String,
    unknown_tokens: Vec<String>,
    stored: Instant,
}

#[derive(Serialize)]
struct RemoteRequest<'a> {
    text: &'a str,
    source: &'a str,
    target: &'a str,
}

#[derive(Deserialize)]
struct RemoteResponse {
    translation: String,
}

pub struct Translator {
    spec: TranslatorSpec,
    lexicon: Option<Arc<Lexicon>>,
    agent: ureq::Agent,
    cache: Mutex<HashMap<String, Cached>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl fmt::Debug for Translator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Translator")
            .field("spec", &self.spec)
            .field("lexicon", &self.lexicon.as_ref().map(|l| l.len()))
            .finish_non_exhaustive()
    }
}

impl Translator {
    pub fn new(spec: TranslatorSpec, lexicon: Option<Arc<Lexicon>>) -> Result<Self> {
        spec.validate()?;
        if spec.backend == Backend::Glossary && lexicon.is_none() {
            return Err(Error::Config("glossary backend needs a lexicon".into()));
        }
        let agent = ureq::AgentBuilder::new().timeout(spec.timeout).build();
        Ok(Translator {
            spec,
            lexicon,
            agent,
            cache: Mutex::new(HashMap::new()),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        })
    }

    pub fn spec(&self) -> &TranslatorSpec {
        &self.spec
    }

    pub fn cache_stats(&self) -> CacheStats {
        CacheStats {
            entries: self.cache.lock().expect("cache lock").len(),
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
        }
    }

    fn cache_key(&self, text: &str) -> String {
        format!(
            "{}\u{1f}{}\u{1f}{}",
            self.spec.backend.id(),
            self.spec.direction,
            text
        )
    }

    pub fn translate(&self, input: &str) -> Result<TranslationResult> {
        let input = input.trim();
        if input.is_empty() {
            return Err(Error::InvalidInput("nothing to translate".into()));
        }
        let started = Instant::now();
        let caching = !self.spec.cache_ttl.is_zero();
        let key = self.cache_key(input);
        if caching {
            let mut cache = self.cache.lock().expect("cache lock");
            match cache.get(&key) {
                Some(hit) if hit.stored.elapsed() < self.spec.cache_ttl => {
                    self.hits.fetch_add(1, Ordering::Relaxed);
                    return Ok(TranslationResult {
                        text: hit.text.clone(),
                        backend: self.spec.backend.id().to_string(),
                        latency_ms: started.elapsed().as_secs_f64() * 1e3,
                        from_cache: true,
                        unknown_tokens: hit.unknown_tokens.clone(),
                    });
                }
                Some(_) => {
                    cache.remove(&key);
                }
                None => {}
            }
        }
        self.misses.fetch_add(1, Ordering::Relaxed);

        let (text, unknown_tokens) = match &self.spec.backend {
            Backend::Echo => (input.to_string(), Vec::new()),
            Backend::Glossary => {
                let lex = self
                    .lexicon
                    .as_deref()
                    .ok_or_else(|| Error::Config("glossary backend needs a lexicon".into()))?;
                glossary_translate(lex, input, &self.spec.direction.target)
            }
            Backend::Remote {
                endpoint,
                token_env,
            } => (
                self.remote(endpoint, token_env.as_deref(), input, started)?,
                Vec::new(),
            ),
        };

        if caching {
            self.cache.lock().expect("cache lock").insert(
                key,
                Cached {
                    text: text.clone(),
                    unknown_tokens: unknown_tokens.clone(),
                    stored: Instant::now(),
                },
            );
        }
        Ok(TranslationResult {
            text,
            backend: self.spec.backend.id().to_string(),
            latency_ms: started.elapsed().as_secs_f64() * 1e3,
            from_cache: false,
            unknown_tokens,
        })
    }

    fn remote(
        &self,
        endpoint: &str,
        token_env: Option<&str>,
        input: &str,
        started: Instant,
    ) -> Result<String> {
        let mut request = self.agent.post(endpoint);
        if let Some(var) = token_env {
            let token = std::env::var(var)
                .map_err(|_| Error::Config(format!("environment variable {var} is not set")))?;
            request = request.set("Authorization", &format!("Bearer {token}"));
        }
        let body = RemoteRequest {
            text: input,
            source: &self.spec.direction.source,
            target: &self.spec.direction.target,
        };
        let timed_out = |io: Option<&std::io::Error>| {
            io.is_some_and(|e| {
                matches!(
                    e.kind(),
                    std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock
                )
            }) || started.elapsed() >= self.spec.timeout
        };
        match request.send_json(&body) {
            Ok(response) => match response.into_json::<RemoteResponse>() {
                Ok(r) => Ok(r.translation),
                Err(e) if timed_out(Some(&e)) => Err(Error::Timeout {
                    elapsed: started.elapsed(),
                }),
                Err(e) => Err(Error::Remote(format!("bad response body: {e}"))),
            },
            Err(ureq::Error::Status(status, _)) => Err(Error::RemoteStatus { status }),
            Err(ureq::Error::Transport(t)) => {
                let io =
                    std::error::Error::source(&t).and_then(|s| s.downcast_ref::<std::io::Error>());
                if timed_out(io) {
                    Err(Error::Timeout {
                        elapsed: started.elapsed(),
                    })
                } else {
                    Err(Error::Remote(t.to_string()))
                }
            }
        }
    }
}

/// Word-by-word replacement with the first gloss in `target_lang`. Unknown
/// words pass through as `⟦word⟧`; punctuation, numbers and the original
/// spacing are kept in place.
pub fn glossary_translate(lex: &Lexicon, input: &str, target_lang: &str) -> (String, Vec<String>) {
    let normalized = text::normalize(input);
    let chars: Vec<char> = normalized.chars().collect();
    let mut out = String::with_capacity(normalized.len());
    let mut unknown = Vec::new();
    let mut cursor = 0;
    for tok in text::tokenize_spans(&normalized) {
        out.extend(&chars[cursor..tok.start]);
        cursor = tok.end;
        if tok.kind != TokenKind::Word {
            out.push_str(&tok.text);
            continue;
        }
        match lex.get(&tok.text).and_then(|e| e.gloss(target_lang)) {
            Some(gloss) => out.push_str(gloss),
            None => {
                out.push(UNKNOWN_OPEN);
                out.push_str(&tok.text);
                out.push(UNKNOWN_CLOSE);
                unknown.push(tok.text);
            }
        }
    }
    out.extend(&chars[cursor..]);
    (out, unknown)
}
