//! Evaluator prompt assembly: task instructions, applied job, retrieved
//! criteria, then the candidate's resume.

use serde::{Deserialize, Serialize};

use super::RetrievalResult;
use crate::domain::{Duration, ExtractedResume, JobPosition};
use crate::template::{TemplateError, TemplateSet, Vars};

/// Placed in the criteria slot when retrieval returned nothing.
pub const NO_CRITERIA_SENTINEL: &str = "(no external criteria retrieved)";

/// What the evaluator sees of the candidate.
#[derive(Debug, Clone, Copy)]
pub enum ResumeSection<'a> {
    Extracted(&'a ExtractedResume),
    Raw(&'a str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationPrompt {
    pub query: String,
    pub job: JobPosition,
    pub context: String,
    pub rendered: String,
}

/// Retrieved chunks as labeled blocks, in retrieval order.
pub fn render_context(r: &RetrievalResult) -> String {
    if r.is_empty() {
        return NO_CRITERIA_SENTINEL.to_string();
    }
    r.chunks
        .iter()
        .enumerate()
        .map(|(i, c)| {
            format!(
                "--- criteria {} [{}] similarity {:.4} ---\n{}",
                i + 1,
                c.chunk.chunk_id,
                c.similarity,
                c.chunk.text.trim_end()
            )
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}

fn or_none(s: String) -> String {
    if s.trim().is_empty() {
        "(none)".to_string()
    } else {
        s
    }
}

/// Values for the `extracted.*` placeholders.
pub fn render_extracted_sections(e: &ExtractedResume) -> Vars {
    let skills = e
        .skills_specialties
        .iter()
        .map(|s| format!("- {s}"))
        .collect::<Vec<_>>()
        .join("\n");
    let work = e
        .work_experience
        .iter()
        .map(|w| {
            let dur = match w.duration_months {
                Duration::Months(m) => format!("{m} months"),
                Duration::Unknown => "duration unknown".to_string(),
            };
            format!("- {} ({dur}): {}", w.company, w.responsibilities)
        })
        .collect::<Vec<_>>()
        .join("\n");
    let basic = e
        .basic_information
        .iter()
        .map(|(k, v)| format!("- {k}: {v}"))
        .collect::<Vec<_>>()
        .join("\n");
    let education = e
        .education
        .iter()
        .map(|ed| format!("- {}, {}, {}", ed.degree, ed.field_of_study, ed.institution))
        .collect::<Vec<_>>()
        .join("\n");
    Vars::new()
        .with("extracted.position", e.position.to_string())
        .with(
            "extracted.self_evaluation",
            or_none(e.self_evaluation.clone()),
        )
        .with("extracted.skills_specialties", or_none(skills))
        .with("extracted.work_experience", or_none(work))
        .with("extracted.basic_information", or_none(basic))
        .with("extracted.education", or_none(education))
}

/// The candidate block: six extracted sections, or the raw resume text.
pub fn render_resume_section(
    templates: &TemplateSet,
    resume: ResumeSection<'_>,
) -> Result<String, TemplateError> {
    let text = match resume {
        ResumeSection::Extracted(e) => {
            templates.render("evaluator.resume_sections", &render_extracted_sections(e))?
        }
        ResumeSection::Raw(text) => templates.render(
            "evaluator.raw_resume",
            &Vars::new().with("resume_text", text.trim_end()),
        )?,
    };
    Ok(text.trim_end().to_string())
}

pub fn build_prompt(
    templates: &TemplateSet,
    query: &str,
    job: &JobPosition,
    retrieved: &RetrievalResult,
    resume: ResumeSection<'_>,
) -> Result<EvaluationPrompt, TemplateError> {
    let resume_text = render_resume_section(templates, resume)?;
    let context = render_context(retrieved);
    let rendered = templates.render(
        "evaluator.user",
        &Vars::new()
            .with("query", query)
            .with("job", job.to_string())
            .with("context", context.clone())
            .with("resume", resume_text),
    )?;
    Ok(EvaluationPrompt {
        query: query.to_string(),
        job: job.clone(),
        context,
        rendered,
    })
}
