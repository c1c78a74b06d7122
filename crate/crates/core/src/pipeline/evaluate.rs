use std::sync::LazyLock;

use regex::Regex;

use super::{Calls, Pipeline, PipelineError, AGENT_EVALUATOR};
use crate::domain::{round1, Category, ExtractedResume, JobPosition, Resume, ScoreVector};
use crate::rag::{build_prompt, render_resume_section, ResumeSection, RetrievalResult};
use crate::template::Vars;

/// Scores at most this far outside their bound are clamped instead of
/// rejected.
pub const CLAMP_TOLERANCE: f64 = 0.5;

/// One repair call after the first answer.
const MAX_ATTEMPTS: u32 = 2;

pub(super) struct Evaluation {
    pub scores: ScoreVector,
    pub warnings: Vec<String>,
    pub retrieved: RetrievalResult,
    /// The candidate block shown to the evaluator, reused by the summarizer.
    pub resume_block: String,
}

/// Text embedded to retrieve criteria: the job title and level, plus the
/// candidate's skills when `with_skills` is set and extraction ran.
pub fn retrieval_query(
    job: &JobPosition,
    extracted: Option<&ExtractedResume>,
    with_skills: bool,
) -> String {
    let mut q = format!("{} {}", job.title.trim(), job.level);
    if let Some(e) = extracted.filter(|_| with_skills) {
        if !e.skills_specialties.is_empty() {
            q.push_str(": ");
            q.push_str(&e.skills_specialties.join(", "));
        }
    }
    q
}

pub(super) fn evaluate(
    p: &Pipeline,
    calls: &mut Calls,
    resume: &Resume,
    extracted: Option<&ExtractedResume>,
    job: &JobPosition,
) -> Result<Evaluation, PipelineError> {
    let query_text = retrieval_query(job, extracted, p.config.query_with_skills);
    let retrieved = p
        .store
        .retrieve(p.gateway, &query_text, &p.config.retrieval)?;
    let section = match extracted {
        Some(e) => ResumeSection::Extracted(e),
        None => ResumeSection::Raw(&resume.raw_text),
    };
    let instructions = p.templates.render("evaluator.query", &Vars::new())?;
    let prompt = build_prompt(
        p.templates,
        instructions.trim_end(),
        job,
        &retrieved,
        section,
    )?;
    let system = p.templates.render("evaluator.system", &Vars::new())?;

    let mut user = prompt.rendered.clone();
    let mut last_error = String::new();
    for attempt in 1..=MAX_ATTEMPTS {
        let raw = calls.chat(AGENT_EVALUATOR, system.clone(), user)?;
        match interpret_scores(&raw) {
            Ok((scores, warnings)) => {
                calls.mark_parsed(warnings.clone());
                return Ok(Evaluation {
                    scores,
                    warnings,
                    retrieved,
                    resume_block: render_resume_section(p.templates, section)?,
                });
            }
            Err(err) => {
                calls.mark_error(&err);
                last_error = err;
            }
        }
        if attempt == MAX_ATTEMPTS {
            break;
        }
        user = p.templates.render(
            "evaluator.repair",
            &Vars::new()
                .with("error", last_error.as_str())
                .with("malformed", raw.trim())
                .with("original", prompt.rendered.as_str()),
        )?;
    }
    Err(PipelineError::EvaluationParseFailure {
        attempts: MAX_ATTEMPTS,
        last_error,
    })
}

/// Formats and validates evaluator output.
///
/// Values within [`CLAMP_TOLERANCE`] of a bound are clamped with a warning;
/// anything further out is an error. Accepted values are rounded to one
/// decimal.
pub fn interpret_scores(raw: &str) -> Result<(ScoreVector, Vec<String>), String> {
    let values = format_scores(raw).map_err(|e| e.to_string())?;
    let mut warnings = Vec::new();
    let mut out = [0.0; 5];
    for ((category, v), slot) in Category::ALL.iter().zip(values).zip(out.iter_mut()) {
        let bound = category.bound();
        let clamped = v.clamp(0.0, bound);
        if clamped != v {
            if (clamped - v).abs() > CLAMP_TOLERANCE {
                return Err(format!("{category} score {v} is outside [0, {bound}]"));
            }
            warnings.push(format!("{category} score {v} clamped to {clamped}"));
        }
        *slot = round1(clamped);
    }
    let scores = ScoreVector::validate(&out).map_err(|e| e.to_string())?;
    Ok((scores, warnings))
}

static BRACKETED: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[([^\[\]]*)\]").unwrap());
static NUMBER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)$").unwrap());
static RUN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"[+-]?(?:[0-9]+(?:\.[0-9]+)?|\.[0-9]+)(?:[\s,/;|]+[+-]?(?:[0-9]+(?:\.[0-9]+)?|\.[0-9]+))+",
    )
    .unwrap()
});

/// Extracts the five category scores from free-form model output.
///
/// The first bracketed list of exactly five numbers wins (quoted numbers are
/// accepted). Failing that, the first run of exactly five numbers separated
/// only by whitespace, `,`, `/`, `;` or `|` is used.
pub fn format_scores(raw: &str) -> Result<[f64; 5], PipelineError> {
    for cap in BRACKETED.captures_iter(raw) {
        let parts: Vec<&str> = cap[1]
            .split(',')
            .map(|s| s.trim().trim_matches('"'))
            .collect();
        if parts.len() == 5 && parts.iter().all(|s| NUMBER.is_match(s)) {
            return Ok(to_array(parts.iter().map(|s| s.parse().unwrap())));
        }
    }
    for m in RUN.find_iter(raw) {
        let before = raw[..m.start()].chars().next_back();
        let after = raw[m.end()..].chars().next();
        let word = |c: char| c.is_alphanumeric() || c == '_';
        if before.is_some_and(|c| word(c) || c == '.') || after.is_some_and(word) {
            continue;
        }
        let nums: Vec<f64> = m
            .as_str()
            .split(|c: char| c.is_whitespace() || ",/;|".contains(c))
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().unwrap())
            .collect();
        if nums.len() == 5 {
            return Ok(to_array(nums.into_iter()));
        }
    }
    Err(PipelineError::FormatterParseFailure)
}

fn to_array(it: impl Iterator<Item = f64>) -> [f64; 5] {
    let mut out = [0.0; 5];
    for (slot, v) in out.iter_mut().zip(it) {
        *slot = v;
    }
    out
}
