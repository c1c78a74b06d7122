//! Per-resume agent chain: extraction, criteria-aware evaluation, panel
//! feedback and score formatting.

mod evaluate;
mod extract;
pub mod json;
mod summarize;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration as StdDuration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    final_score, weighted_sum, DomainError, ExtractedResume, FinalScore, JobPosition, Resume,
    ScoreVector, ScoringWeights,
};
use crate::llm::{Gateway, GatewayError};
use crate::rag::{KnowledgeStore, RetrievalConfig, RetrievalResult, StoreError};
use crate::template::{TemplateError, TemplateSet};

pub use evaluate::{format_scores, interpret_scores, retrieval_query, CLAMP_TOLERANCE};
pub use extract::parse_extraction;
pub use summarize::parse_consolidation;

pub const AGENT_EXTRACTOR: &str = "extractor";
pub const AGENT_EVALUATOR: &str = "evaluator";
pub const AGENT_CEO: &str = "summarizer.ceo";
pub const AGENT_CTO: &str = "summarizer.cto";
pub const AGENT_HR: &str = "summarizer.hr";
pub const AGENT_CONSOLIDATOR: &str = "summarizer.consolidator";

/// Maximum bullets kept in each of strengths and weaknesses.
pub const MAX_BULLETS: usize = 10;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("extraction output unusable after {attempts} attempts: {last_error}")]
    ExtractionParseFailure { attempts: u32, last_error: String },
    #[error("evaluation output unusable after {attempts} attempts: {last_error}")]
    EvaluationParseFailure { attempts: u32, last_error: String },
    #[error("no five-number score array found")]
    FormatterParseFailure,
    #[error("summarization failed: {reason}")]
    SummarizationFailure {
        reason: String,
        partial: PartialViews,
    },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("final score {found} does not match weighted scores {expected}")]
    Inconsistent { expected: f64, found: f64 },
    #[error("invalid pipeline config: {0}")]
    InvalidConfig(String),
}

/// One chat call made while screening a resume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentTranscript {
    pub agent_name: String,
    /// 1-based attempt number for this agent within the screening.
    pub attempts: u32,
    pub system_prompt: String,
    pub prompt: String,
    /// Raw model output, kept even when it could not be parsed. Empty when
    /// the call itself failed.
    pub raw_response: String,
    pub parsed_ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    /// Wall-clock time of the call. Not part of the JSONL output so that
    /// repeated runs stay byte-identical.
    #[serde(skip)]
    pub elapsed: StdDuration,
}

/// Views gathered before a summarizer failure.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PartialViews {
    pub ceo_view: Option<String>,
    pub cto_view: Option<String>,
    pub hr_view: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackReport {
    pub ceo_view: String,
    pub cto_view: String,
    pub hr_view: String,
    pub consolidated: String,
    pub strengths: Vec<String>,
    pub weaknesses: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScreeningMode {
    Standard,
    /// The evaluator sees the raw resume instead of the extracted sections.
    NoExtraction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalSummary {
    pub query_text: String,
    pub chunks: Vec<RetrievedRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievedRef {
    pub chunk_id: String,
    pub similarity: f64,
}

impl From<&RetrievalResult> for RetrievalSummary {
    fn from(r: &RetrievalResult) -> Self {
        Self {
            query_text: r.query_text.clone(),
            chunks: r
                .chunks
                .iter()
                .map(|c| RetrievedRef {
                    chunk_id: c.chunk.chunk_id.clone(),
                    similarity: c.similarity,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningResult {
    pub resume_id: String,
    pub mode: ScreeningMode,
    pub job: JobPosition,
    /// Absent in [`ScreeningMode::NoExtraction`].
    pub extracted: Option<ExtractedResume>,
    pub scores: ScoreVector,
    #[serde(rename = "final")]
    pub final_score: FinalScore,
    pub feedback: FeedbackReport,
    pub retrieval: RetrievalSummary,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub transcripts: Vec<AgentTranscript>,
}

impl ScreeningResult {
    /// Checks that the final score is the weighted sum of the scores.
    pub fn verify(&self, weights: &ScoringWeights) -> Result<(), PipelineError> {
        let expected = weighted_sum(&self.scores, weights);
        if expected != self.final_score.value || self.final_score.job != self.job {
            return Err(PipelineError::Inconsistent {
                expected,
                found: self.final_score.value,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Extraction,
    Evaluation,
    Summarization,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub resume_id: String,
    pub mode: ScreeningMode,
    pub job: JobPosition,
    pub stage: Stage,
    pub error: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partial_views: Option<PartialViews>,
    pub transcripts: Vec<AgentTranscript>,
}

/// One line of batch output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ScreeningRecord {
    Ok(Box<ScreeningResult>),
    Failed(FailureRecord),
}

impl ScreeningRecord {
    pub fn resume_id(&self) -> &str {
        match self {
            ScreeningRecord::Ok(r) => &r.resume_id,
            ScreeningRecord::Failed(f) => &f.resume_id,
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, ScreeningRecord::Ok(_))
    }

    pub fn transcripts(&self) -> &[AgentTranscript] {
        match self {
            ScreeningRecord::Ok(r) => &r.transcripts,
            ScreeningRecord::Failed(f) => &f.transcripts,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub extraction: bool,
    /// Append the extracted skills to the retrieval query.
    pub query_with_skills: bool,
    /// Summarizer rounds including consolidation; at least 2.
    pub summarizer_rounds: u32,
    pub weights: ScoringWeights,
    /// Rescale weights to sum to one before computing final scores.
    pub normalize_weights: bool,
    pub retrieval: RetrievalConfig,
    /// Resumes screened in parallel.
    pub concurrency: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            extraction: true,
            query_with_skills: false,
            summarizer_rounds: 2,
            weights: ScoringWeights::default(),
            normalize_weights: false,
            retrieval: RetrievalConfig::default(),
            concurrency: 4,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.weights.validate()?;
        self.retrieval.validate()?;
        if self.summarizer_rounds < 2 {
            return Err(PipelineError::InvalidConfig(
                "summarizer_rounds must be at least 2".into(),
            ));
        }
        if self.concurrency == 0 {
            return Err(PipelineError::InvalidConfig(
                "concurrency must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn effective_weights(&self) -> Result<ScoringWeights, PipelineError> {
        Ok(if self.normalize_weights {
            self.weights.normalized()?
        } else {
            self.weights
        })
    }

    pub fn mode(&self) -> ScreeningMode {
        if self.extraction {
            ScreeningMode::Standard
        } else {
            ScreeningMode::NoExtraction
        }
    }
}

/// Everything a screening needs, borrowed for the duration of a batch.
pub struct Pipeline<'a> {
    pub gateway: &'a Gateway,
    pub templates: &'a TemplateSet,
    pub store: &'a KnowledgeStore,
    pub config: &'a PipelineConfig,
}

/// Per-resume call log.
pub(crate) struct Calls<'a> {
    gateway: &'a Gateway,
    subject: &'a str,
    pub(crate) log: Vec<AgentTranscript>,
}

impl<'a> Calls<'a> {
    pub(crate) fn new(gateway: &'a Gateway, subject: &'a str) -> Self {
        Self {
            gateway,
            subject,
            log: Vec::new(),
        }
    }

    fn attempt_no(&self, agent: &str) -> u32 {
        self.log.iter().filter(|t| t.agent_name == agent).count() as u32 + 1
    }

    /// Makes one chat call and logs it. The entry starts as unparsed; the
    /// caller marks it with [`Calls::mark_parsed`] or [`Calls::mark_error`].
    pub(crate) fn chat(
        &mut self,
        agent: &str,
        system: String,
        user: String,
    ) -> Result<String, GatewayError> {
        let attempts = self.attempt_no(agent);
        let (entry, result) = call_once(self.gateway, self.subject, agent, attempts, system, user);
        self.log.push(entry);
        result
    }

    pub(crate) fn mark_parsed(&mut self, warnings: Vec<String>) {
        if let Some(t) = self.log.last_mut() {
            t.parsed_ok = true;
            t.warnings = warnings;
        }
    }

    pub(crate) fn mark_error(&mut self, error: &str) {
        if let Some(t) = self.log.last_mut() {
            t.error = Some(error.to_string());
        }
    }
}

pub(crate) fn call_once(
    gateway: &Gateway,
    subject: &str,
    agent: &str,
    attempts: u32,
    system: String,
    user: String,
) -> (AgentTranscript, Result<String, GatewayError>) {
    let req = gateway.request(agent, subject, system, user);
    let started = Instant::now();
    let result = gateway.chat(&req);
    let entry = AgentTranscript {
        agent_name: agent.to_string(),
        attempts,
        system_prompt: req.system_prompt,
        prompt: req.user_prompt,
        raw_response: result.as_ref().ok().cloned().unwrap_or_default(),
        parsed_ok: false,
        error: result.as_ref().err().map(|e| e.to_string()),
        warnings: Vec::new(),
        elapsed: started.elapsed(),
    };
    (entry, result)
}

impl Pipeline<'_> {
    /// Runs the agent chain for one resume. Any unrecoverable error becomes a
    /// failure record carrying the transcripts gathered so far.
    pub fn screen(&self, resume: &Resume, job: &JobPosition) -> ScreeningRecord {
        let mut calls = Calls::new(self.gateway, &resume.id);
        let mode = self.config.mode();
        let fail = |stage, error: PipelineError, calls: Calls| {
            let partial_views = match &error {
                PipelineError::SummarizationFailure { partial, .. } => Some(partial.clone()),
                _ => None,
            };
            ScreeningRecord::Failed(FailureRecord {
                resume_id: resume.id.clone(),
                mode,
                job: job.clone(),
                stage,
                error: error.to_string(),
                partial_views,
                transcripts: calls.log,
            })
        };

        let extracted = if self.config.extraction {
            match extract::extract(self.templates, &mut calls, resume) {
                Ok(e) => Some(e),
                Err(e) => return fail(Stage::Extraction, e, calls),
            }
        } else {
            None
        };

        let evaluation = match evaluate::evaluate(self, &mut calls, resume, extracted.as_ref(), job)
        {
            Ok(v) => v,
            Err(e) => return fail(Stage::Evaluation, e, calls),
        };

        let feedback = match summarize::summarize(
            self.templates,
            &mut calls,
            self.config.summarizer_rounds,
            &evaluation.resume_block,
            &evaluation.scores,
            job,
        ) {
            Ok(f) => f,
            Err(e) => return fail(Stage::Summarization, e, calls),
        };

        let weights = match self.config.effective_weights() {
            Ok(w) => w,
            Err(e) => return fail(Stage::Evaluation, e, calls),
        };
        let result = ScreeningResult {
            resume_id: resume.id.clone(),
            mode,
            job: job.clone(),
            extracted,
            scores: evaluation.scores,
            final_score: final_score(&evaluation.scores, &weights, job),
            feedback,
            retrieval: RetrievalSummary::from(&evaluation.retrieved),
            warnings: evaluation.warnings,
            transcripts: calls.log,
        };
        if let Err(e) = result.verify(&weights) {
            let calls = Calls {
                gateway: self.gateway,
                subject: &resume.id,
                log: result.transcripts,
            };
            return fail(Stage::Evaluation, e, calls);
        }
        ScreeningRecord::Ok(Box::new(result))
    }

    /// Screens every resume with at most `config.concurrency` in flight.
    /// Output order matches input order.
    pub fn screen_batch<F>(&self, resumes: &[Resume], job_for: F) -> Vec<ScreeningRecord>
    where
        F: Fn(&Resume) -> JobPosition + Sync,
    {
        let slots: Vec<Mutex<Option<ScreeningRecord>>> =
            resumes.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let workers = self.config.concurrency.clamp(1, resumes.len().max(1));
        thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(resume) = resumes.get(i) else { break };
                    let record = self.screen(resume, &job_for(resume));
                    *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(record);
                });
            }
        });
        slots
            .into_iter()
            .map(|m| {
                m.into_inner()
                    .unwrap_or_else(|e| e.into_inner())
                    .expect("every slot is filled")
            })
            .collect()
    }
}
