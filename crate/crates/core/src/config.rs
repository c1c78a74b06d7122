//! TOML application config.
//!
//! ```toml
//! [provider]
//! kind = "mock"                 # or "openai"
//! mock_scripts = "mock_scripts.json"
//!
//! [retrieval]
//! tau = 0.3
//! top_k_cap = 8
//!
//! [weights]
//! self_evaluation = 1.0
//! skills = 1.0
//! work_experience = 1.0
//! basic_information = 1.0
//! education = 1.0
//!
//! [pipeline]
//! extraction = true
//! summarizer_rounds = 2
//! concurrency = 4
//!
//! [paths]
//! store = "criteria.rrks"
//! templates = "templates"       # optional overrides
//! output_dir = "out"
//! ```
//!
//! Relative paths are resolved against the directory holding the config
//! file. The API key is never read from the file, only from the environment
//! variable named by `provider.api_key_env_var`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::domain::ScoringWeights;
use crate::llm::{Gateway, GatewayError, ProviderConfig, ProviderKind};
use crate::pipeline::PipelineConfig;
use crate::rag::RetrievalConfig;
use crate::template::{TemplateError, TemplateSet};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading config {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing config {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

fn yes() -> bool {
    true
}
fn two() -> u32 {
    2
}
fn four() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSection {
    #[serde(default = "yes")]
    pub extraction: bool,
    #[serde(default)]
    pub query_with_skills: bool,
    #[serde(default = "two")]
    pub summarizer_rounds: u32,
    #[serde(default)]
    pub normalize_weights: bool,
    #[serde(default = "four")]
    pub concurrency: usize,
}

impl Default for PipelineSection {
    fn default() -> Self {
        Self {
            extraction: true,
            query_with_skills: false,
            summarizer_rounds: 2,
            normalize_weights: false,
            concurrency: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub store: PathBuf,
    #[serde(default)]
    pub templates: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppConfig {
    pub provider: ProviderConfig,
    #[serde(default)]
    pub retrieval: RetrievalConfig,
    #[serde(default)]
    pub weights: ScoringWeights,
    #[serde(default)]
    pub pipeline: PipelineSection,
    pub paths: PathsSection,
    /// Directory relative paths were resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl AppConfig {
    /// Reads a config file, resolves its paths and validates it. No network
    /// access.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut cfg: AppConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: "<inline>".into(),
            message: e.to_string(),
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        let resolve = |p: &Path| {
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base_dir.join(p)
            }
        };
        cfg.paths.store = resolve(&cfg.paths.store);
        cfg.paths.output_dir = resolve(&cfg.paths.output_dir);
        cfg.paths.templates = cfg.paths.templates.as_deref().map(resolve);
        cfg.provider.mock_scripts = cfg.provider.mock_scripts.as_deref().map(resolve);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.provider.validate()?;
        self.pipeline_config()
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let Some(t) = &self.paths.templates {
            if !t.is_dir() {
                return Err(ConfigError::Invalid(format!(
                    "template directory {} does not exist",
                    t.display()
                )));
            }
        }
        if self.provider.kind == ProviderKind::Mock {
            if let Some(s) = &self.provider.mock_scripts {
                if !s.is_file() {
                    return Err(ConfigError::Invalid(format!(
                        "mock scripts file {} does not exist",
                        s.display()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            extraction: self.pipeline.extraction,
            query_with_skills: self.pipeline.query_with_skills,
            summarizer_rounds: self.pipeline.summarizer_rounds,
            weights: self.weights,
            normalize_weights: self.pipeline.normalize_weights,
            retrieval: self.retrieval,
            concurrency: self.pipeline.concurrency,
        }
    }

    pub fn templates(&self) -> Result<TemplateSet, ConfigError> {
        Ok(match &self.paths.templates {
            Some(dir) => TemplateSet::load_dir(dir)?,
            None => TemplateSet::builtin(),
        })
    }

    /// Builds the gateway. For the OpenAI provider this checks the API key
    /// variable but sends nothing.
    pub fn gateway(&self) -> Result<Gateway, ConfigError> {
        Ok(Gateway::from_config(&self.provider, &self.base_dir)?)
    }
}
