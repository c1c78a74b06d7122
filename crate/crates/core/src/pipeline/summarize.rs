use std::thread;

use serde_json::Value;

use super::json::find_json_object;
use super::{
    call_once, AgentTranscript, Calls, FeedbackReport, PartialViews, PipelineError, AGENT_CEO,
    AGENT_CONSOLIDATOR, AGENT_CTO, AGENT_HR, MAX_BULLETS,
};
use crate::domain::{round1, Category, JobPosition, ScoreVector};
use crate::llm::GatewayError;
use crate::template::{TemplateSet, Vars};

const ROLES: [(&str, &str); 3] = [(AGENT_CEO, "CEO"), (AGENT_CTO, "CTO"), (AGENT_HR, "HR")];

/// Consolidation plus one repair.
const MAX_CONSOLIDATION_ATTEMPTS: u32 = 2;

fn render_scores(s: &ScoreVector) -> String {
    let parts: Vec<String> = Category::ALL
        .iter()
        .map(|c| format!("- {c}: {:.1} / {}", s.get(*c), c.bound()))
        .collect();
    format!(
        "{}\n- total: {:.1} / 10",
        parts.join("\n"),
        round1(s.total())
    )
}

fn partial(views: &[Option<String>; 3]) -> PartialViews {
    PartialViews {
        ceo_view: views[0].clone(),
        cto_view: views[1].clone(),
        hr_view: views[2].clone(),
    }
}

/// Runs one round of the three role agents concurrently and logs the calls
/// in CEO, CTO, HR order.
fn panel_round(calls: &mut Calls, prompts: [(String, String); 3]) -> [Result<String, String>; 3] {
    let attempts = ROLES.map(|(agent, _)| calls.attempt_no(agent));
    let gateway = calls.gateway;
    let subject = calls.subject;
    let outcomes: Vec<(AgentTranscript, Result<String, GatewayError>)> = thread::scope(|s| {
        let handles: Vec<_> = ROLES
            .iter()
            .zip(prompts)
            .zip(attempts)
            .map(|(((agent, _), (system, user)), n)| {
                s.spawn(move || call_once(gateway, subject, agent, n, system, user))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("panel call thread panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(3);
    for (mut entry, result) in outcomes {
        let r = match result {
            Ok(text) if text.trim().is_empty() => {
                entry.error = Some("empty view".into());
                Err("empty view".into())
            }
            Ok(text) => {
                entry.parsed_ok = true;
                Ok(text.trim().to_string())
            }
            Err(e) => Err(e.to_string()),
        };
        calls.log.push(entry);
        out.push(r);
    }
    out.try_into().expect("three roles")
}

fn check_round(
    results: [Result<String, String>; 3],
    views: &mut [Option<String>; 3],
) -> Result<(), PipelineError> {
    let mut errors = Vec::new();
    for ((result, slot), (_, role)) in results.into_iter().zip(views.iter_mut()).zip(ROLES) {
        match result {
            Ok(v) => *slot = Some(v),
            Err(e) => errors.push(format!("{role} agent: {e}")),
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(PipelineError::SummarizationFailure {
            reason: errors.join("; "),
            partial: partial(views),
        })
    }
}

pub(super) fn summarize(
    templates: &TemplateSet,
    calls: &mut Calls,
    rounds: u32,
    resume_block: &str,
    scores: &ScoreVector,
    job: &JobPosition,
) -> Result<FeedbackReport, PipelineError> {
    let job_text = job.to_string();
    let score_text = render_scores(scores);
    let systems = ROLES.map(|(agent, _)| templates.render(agent, &Vars::new()));
    let systems = [
        systems[0].clone()?,
        systems[1].clone()?,
        systems[2].clone()?,
    ];

    let view_prompt = templates.render(
        "summarizer.view",
        &Vars::new()
            .with("job", job_text.as_str())
            .with("scores", score_text.as_str())
            .with("resume", resume_block),
    )?;
    let mut views: [Option<String>; 3] = Default::default();
    let first = panel_round(calls, systems.clone().map(|sys| (sys, view_prompt.clone())));
    check_round(first, &mut views)?;

    for _ in 2..rounds {
        let current: [String; 3] = views.clone().map(|v| v.unwrap_or_default());
        let mut prompts: Vec<(String, String)> = Vec::new();
        for (i, system) in systems.iter().enumerate() {
            let peers = ROLES
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(j, (_, role))| format!("### {role}\n{}", current[j]))
                .collect::<Vec<_>>()
                .join("\n\n");
            let user = templates.render(
                "summarizer.refine",
                &Vars::new()
                    .with("job", job_text.as_str())
                    .with("scores", score_text.as_str())
                    .with("own_view", current[i].as_str())
                    .with("peer_views", peers),
            )?;
            prompts.push((system.clone(), user));
        }
        let prompts: [(String, String); 3] = prompts.try_into().expect("three roles");
        let results = panel_round(calls, prompts);
        check_round(results, &mut views)?;
    }

    let [ceo, cto, hr] = views.clone().map(|v| v.unwrap_or_default());
    let system = templates.render("summarizer.consolidator", &Vars::new())?;
    let mut user = templates.render(
        "summarizer.consolidate",
        &Vars::new()
            .with("job", job_text.as_str())
            .with("scores", score_text.as_str())
            .with("ceo_view", ceo.as_str())
            .with("cto_view", cto.as_str())
            .with("hr_view", hr.as_str()),
    )?;
    let fail = |reason: String| PipelineError::SummarizationFailure {
        reason,
        partial: partial(&views),
    };
    let mut last_error = String::new();
    for attempt in 1..=MAX_CONSOLIDATION_ATTEMPTS {
        let raw = calls
            .chat(AGENT_CONSOLIDATOR, system.clone(), user)
            .map_err(|e| fail(format!("consolidator: {e}")))?;
        match parse_consolidation(&raw) {
            Ok((consolidated, strengths, weaknesses)) => {
                calls.mark_parsed(Vec::new());
                return Ok(FeedbackReport {
                    ceo_view: ceo,
                    cto_view: cto,
                    hr_view: hr,
                    consolidated,
                    strengths,
                    weaknesses,
                });
            }
            Err(e) => {
                calls.mark_error(&e);
                last_error = e;
            }
        }
        if attempt == MAX_CONSOLIDATION_ATTEMPTS {
            break;
        }
        user = templates.render(
            "summarizer.repair",
            &Vars::new()
                .with("error", last_error.as_str())
                .with("malformed", raw.trim()),
        )?;
    }
    Err(fail(format!(
        "consolidation unusable after {MAX_CONSOLIDATION_ATTEMPTS} attempts: {last_error}"
    )))
}

/// Parses the consolidator's JSON answer into the paragraph and the two
/// bullet lists, each cut to [`MAX_BULLETS`].
pub fn parse_consolidation(raw: &str) -> Result<(String, Vec<String>, Vec<String>), String> {
    let obj = find_json_object(raw)?;
    let consolidated = obj
        .get("consolidated")
        .and_then(Value::as_str)
        .map(str::trim)
        .unwrap_or_default();
    if consolidated.is_empty() {
        return Err("\"consolidated\" must be a non-empty string".into());
    }
    let bullets = |key: &str| -> Result<Vec<String>, String> {
        match obj.get(key) {
            None | Some(Value::Null) => Ok(Vec::new()),
            Some(Value::Array(items)) => {
                let mut out = Vec::new();
                for item in items {
                    let s = item
                        .as_str()
                        .ok_or_else(|| format!("\"{key}\" entries must be strings"))?
                        .trim();
                    if !s.is_empty() {
                        out.push(s.to_string());
                    }
                }
                out.truncate(MAX_BULLETS);
                Ok(out)
            }
            Some(_) => Err(format!("\"{key}\" must be a list")),
        }
    };
    Ok((
        consolidated.to_string(),
        bullets("strengths")?,
        bullets("weaknesses")?,
    ))
}
