use std::collections::BTreeMap;

use serde_json::{Map, Value};

use super::json::find_json_object;
use super::{Calls, PipelineError, AGENT_EXTRACTOR};
use crate::domain::{
    Duration, EducationEntry, ExtractedResume, JobLevel, JobPosition, Resume, WorkEntry,
};
use crate::template::{TemplateSet, Vars};

/// Initial call plus up to two repairs.
const MAX_ATTEMPTS: u32 = 3;

const KEYS: [&str; 6] = [
    "position",
    "self_evaluation",
    "skills_specialties",
    "work_experience",
    "basic_information",
    "education",
];

pub(super) fn extract(
    templates: &TemplateSet,
    calls: &mut Calls,
    resume: &Resume,
) -> Result<ExtractedResume, PipelineError> {
    let system = templates.render("extractor.system", &Vars::new())?;
    let schema = templates.render("extractor.schema", &Vars::new())?;
    let hint = resume
        .applied_position_hint
        .clone()
        .unwrap_or_else(|| "(none)".to_string());
    let mut user = templates.render(
        "extractor.user",
        &Vars::new()
            .with("schema", schema.trim_end())
            .with("resume_id", resume.id.as_str())
            .with("position_hint", hint)
            .with("resume_text", resume.raw_text.trim_end()),
    )?;
    let mut last_error = String::new();
    for attempt in 1..=MAX_ATTEMPTS {
        let raw = calls.chat(AGENT_EXTRACTOR, system.clone(), user)?;
        match parse_extraction(&raw) {
            Ok(e) => {
                calls.mark_parsed(Vec::new());
                return Ok(e);
            }
            Err(err) => {
                calls.mark_error(&err);
                last_error = err;
            }
        }
        if attempt == MAX_ATTEMPTS {
            break;
        }
        user = templates.render(
            "extractor.repair",
            &Vars::new()
                .with("error", last_error.as_str())
                .with("malformed", raw.trim())
                .with("schema", schema.trim_end())
                .with("resume_text", resume.raw_text.trim_end()),
        )?;
    }
    Err(PipelineError::ExtractionParseFailure {
        attempts: MAX_ATTEMPTS,
        last_error,
    })
}

/// Parses extractor output into the six-section record.
///
/// All six keys must be present; `null` values become empty sections. The
/// position level must map onto one of the four levels.
pub fn parse_extraction(raw: &str) -> Result<ExtractedResume, String> {
    let obj = find_json_object(raw)?;
    let missing: Vec<&str> = KEYS
        .iter()
        .copied()
        .filter(|k| !obj.contains_key(*k))
        .collect();
    if !missing.is_empty() {
        return Err(format!("missing keys: {}", missing.join(", ")));
    }
    Ok(ExtractedResume {
        position: position(&obj["position"])?,
        self_evaluation: text(&obj["self_evaluation"], "self_evaluation")?,
        skills_specialties: string_list(&obj["skills_specialties"], "skills_specialties")?,
        work_experience: list(&obj["work_experience"], "work_experience", work_entry)?,
        basic_information: basic_info(&obj["basic_information"])?,
        education: list(&obj["education"], "education", education_entry)?,
    })
}

fn position(v: &Value) -> Result<JobPosition, String> {
    let o = v
        .as_object()
        .ok_or("position must be an object with title and level")?;
    let title = text(o.get("title").unwrap_or(&Value::Null), "position.title")?;
    let level_raw = text(o.get("level").unwrap_or(&Value::Null), "position.level")?;
    let level = JobLevel::normalize(&level_raw).ok_or_else(|| {
        format!("position.level {level_raw:?} is not one of junior, mid, senior, leadership")
    })?;
    Ok(JobPosition::new(title, level))
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.trim().to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn text(v: &Value, field: &str) -> Result<String, String> {
    match v {
        Value::Null => Ok(String::new()),
        Value::Array(items) => {
            let parts: Option<Vec<String>> = items.iter().map(scalar).collect();
            parts
                .map(|p| p.join("; "))
                .ok_or_else(|| format!("{field} must be text"))
        }
        other => scalar(other).ok_or_else(|| format!("{field} must be text")),
    }
}

fn string_list(v: &Value, field: &str) -> Result<Vec<String>, String> {
    match v {
        Value::Null => Ok(Vec::new()),
        Value::String(s) => Ok(s
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect()),
        Value::Array(items) => items
            .iter()
            .map(|i| scalar(i).ok_or_else(|| format!("{field} entries must be text")))
            .filter(|r| !matches!(r, Ok(s) if s.is_empty()))
            .collect(),
        _ => Err(format!("{field} must be a list")),
    }
}

fn list<T>(
    v: &Value,
    field: &str,
    item: fn(&Map<String, Value>) -> Result<T, String>,
) -> Result<Vec<T>, String> {
    match v {
        Value::Null => Ok(Vec::new()),
        Value::Array(items) => items
            .iter()
            .map(|i| {
                i.as_object()
                    .ok_or_else(|| format!("{field} entries must be objects"))
                    .and_then(item)
            })
            .collect(),
        _ => Err(format!("{field} must be a list")),
    }
}

fn field(o: &Map<String, Value>, key: &str, ctx: &str) -> Result<String, String> {
    text(o.get(key).unwrap_or(&Value::Null), &format!("{ctx}.{key}"))
}

fn work_entry(o: &Map<String, Value>) -> Result<WorkEntry, String> {
    let duration_months = match o.get("duration_months").unwrap_or(&Value::Null) {
        Value::Null => Duration::Unknown,
        Value::Number(n) => {
            let f = n
                .as_f64()
                .filter(|f| f.is_finite() && *f >= 0.0 && *f <= f64::from(u32::MAX))
                .ok_or("work_experience.duration_months must be a non-negative number")?;
            Duration::Months(f.round() as u32)
        }
        Value::String(s) if s.trim().parse::<u32>().is_ok() => {
            Duration::Months(s.trim().parse().unwrap())
        }
        Value::String(s) if s.trim().is_empty() => Duration::Unknown,
        _ => return Err("work_experience.duration_months must be an integer or null".into()),
    };
    Ok(WorkEntry {
        company: field(o, "company", "work_experience")?,
        duration_months,
        responsibilities: field(o, "responsibilities", "work_experience")?,
    })
}

fn education_entry(o: &Map<String, Value>) -> Result<EducationEntry, String> {
    Ok(EducationEntry {
        institution: field(o, "institution", "education")?,
        degree: field(o, "degree", "education")?,
        field_of_study: field(o, "field_of_study", "education")?,
    })
}

fn basic_info(v: &Value) -> Result<BTreeMap<String, String>, String> {
    match v {
        Value::Null => Ok(BTreeMap::new()),
        Value::Object(o) => o
            .iter()
            .filter(|(_, v)| !v.is_null())
            .map(|(k, v)| Ok((k.clone(), text(v, &format!("basic_information.{k}"))?)))
            .collect(),
        _ => Err("basic_information must be an object".into()),
    }
}
