use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use wordsmith_core::translate::{Backend, Direction, TranslatorSpec};

use crate::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_bind")]
    pub bind: String,
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    #[serde(default)]
    pub ngram_model: Option<PathBuf>,
    #[serde(default)]
    pub langid_model: Option<PathBuf>,
    #[serde(default)]
    pub translators: Vec<TranslatorConfig>,
    #[serde(default)]
    pub logging: LoggingConfig,
    #[serde(default)]
    pub defaults: Defaults,
}

fn default_bind() -> String {
    "127.0.0.1:8080".into()
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: default_bind(),
            lexicon: None,
            ngram_model: None,
            langid_model: None,
            translators: Vec::new(),
            logging: LoggingConfig::default(),
            defaults: Defaults::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoggingConfig {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_max_dist")]
    pub max_dist: usize,
    #[serde(default = "default_penalty")]
    pub edit_penalty: f64,
}

fn default_k() -> usize {
    5
}
fn default_max_dist() -> usize {
    2
}
fn default_penalty() -> f64 {
    4.0
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults {
            k: default_k(),
            max_dist: default_max_dist(),
            edit_penalty: default_penalty(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslatorConfig {
    /// `echo`, `glossary` or `remote`.
    pub backend: String,
    pub source: String,
    pub target: String,
    #[serde(default)]
    pub endpoint: Option<String>,
    /// Environment variable holding the bearer token for remote backends.
    #[serde(default)]
    pub token_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_ttl")]
    pub cache_ttl_secs: f64,
}

fn default_timeout() -> f64 {
    10.0
}
fn default_ttl() -> f64 {
    300.0
}

impl TranslatorConfig {
    pub fn direction(&self) -> Direction {
        Direction::new(&self.source, &self.target)
    }

    pub fn to_spec(&self) -> Result<TranslatorSpec, ServiceError> {
        let backend = match self.backend.as_str() {
            "echo" => Backend::Echo,
            "glossary" => Backend::Glossary,
            "remote" => Backend::Remote {
                endpoint: self.endpoint.clone().ok_or_else(|| {
                    ServiceError::Config(format!(
                        "remote translator {} needs an endpoint",
                        self.direction()
                    ))
                })?,
                token_env: self.token_env.clone(),
            },
            other => {
                return Err(ServiceError::Config(format!(
                    "unknown translator backend {other:?}"
                )))
            }
        };
        let secs = |v: f64, what: &str| {
            Duration::try_from_secs_f64(v)
                .map_err(|_| ServiceError::Config(format!("invalid {what}: {v}")))
        };
        Ok(TranslatorSpec {
            backend,
            direction: self.direction(),
            timeout: secs(self.timeout_secs, "timeout_secs")?,
            cache_ttl: secs(self.cache_ttl_secs, "cache_ttl_secs")?,
        })
    }
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self, ServiceError> {
        toml::from_str(text).map_err(|e| ServiceError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ServiceError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}
