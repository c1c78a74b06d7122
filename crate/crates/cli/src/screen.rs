use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use resumerag::config::AppConfig;
use resumerag::domain::{check_unique_ids, JobLevel, JobPosition, Resume};
use resumerag::pipeline::{Pipeline, ScreeningRecord};
use resumerag::rag::KnowledgeStore;
use serde::Deserialize;

use crate::inputs::{collect_files, file_stem, read_text, write_file};
use crate::{
    fail, ExitCode, Failure, Outcome, ScreenArgs, EXIT_INPUT, EXIT_NONE_OK, EXIT_OK, EXIT_PARTIAL,
};

const RESUME_EXTS: [&str; 2] = ["txt", "md"];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    title: String,
    level: String,
}

/// Reads `{"resume_id": {"title": ..., "level": ...}, ...}`.
pub fn read_manifest(path: &Path) -> Result<BTreeMap<String, JobPosition>> {
    let text = read_text(path)?;
    let raw: BTreeMap<String, ManifestEntry> = serde_json::from_str(&text)
        .with_context(|| format!("{}: malformed job manifest", path.display()))?;
    let mut out = BTreeMap::new();
    for (id, entry) in raw {
        let level: JobLevel = entry
            .level
            .parse()
            .with_context(|| format!("{}: resume {id:?}", path.display()))?;
        if entry.title.trim().is_empty() {
            anyhow::bail!("{}: resume {id:?} has an empty job title", path.display());
        }
        out.insert(id, JobPosition::new(entry.title.trim(), level));
    }
    Ok(out)
}

fn read_resumes(paths: &[PathBuf]) -> Result<Vec<Resume>> {
    let files = collect_files(paths, &RESUME_EXTS)?;
    let mut out = Vec::with_capacity(files.len());
    for f in files {
        let text = read_text(&f)?;
        let resume =
            Resume::new(file_stem(&f)?, text).with_context(|| format!("{}", f.display()))?;
        out.push(resume);
    }
    check_unique_ids(&out)?;
    Ok(out)
}

fn assign_jobs(
    resumes: &[Resume],
    manifest: &BTreeMap<String, JobPosition>,
    default: Option<&JobPosition>,
) -> Result<BTreeMap<String, JobPosition>, Failure> {
    let mut jobs = BTreeMap::new();
    let mut missing = Vec::new();
    for r in resumes {
        match manifest.get(&r.id).or(default) {
            Some(j) => {
                jobs.insert(r.id.clone(), j.clone());
            }
            None => missing.push(r.id.as_str()),
        }
    }
    if !missing.is_empty() {
        return Err(fail(
            EXIT_INPUT,
            format!(
                "no job position for {}; add them to the manifest or pass --job-title",
                missing.join(", ")
            ),
        ));
    }
    let ids: BTreeSet<&str> = resumes.iter().map(|r| r.id.as_str()).collect();
    for id in manifest.keys().filter(|id| !ids.contains(id.as_str())) {
        eprintln!("warning: manifest entry {id:?} matches no resume");
    }
    Ok(jobs)
}

pub fn run(config: &AppConfig, args: &ScreenArgs) -> Result<Outcome, Failure> {
    let store_path = args
        .store
        .clone()
        .unwrap_or_else(|| config.paths.store.clone());
    if !store_path.is_file() {
        return Err(fail(
            EXIT_INPUT,
            format!(
                "knowledge store {} not found; run `resumerag index` first",
                store_path.display()
            ),
        ));
    }
    let store = KnowledgeStore::load(&store_path).exit_code(EXIT_INPUT)?;

    let resumes = read_resumes(&args.resumes).exit_code(EXIT_INPUT)?;
    let manifest = match &args.jobs {
        Some(p) => read_manifest(p).exit_code(EXIT_INPUT)?,
        None => BTreeMap::new(),
    };
    let default_job = args
        .job_title
        .as_deref()
        .map(|t| JobPosition::new(t.trim(), args.job_level));
    let jobs = assign_jobs(&resumes, &manifest, default_job.as_ref())?;

    let mut pipeline_config = config.pipeline_config();
    if args.no_extraction {
        pipeline_config.extraction = false;
    }
    pipeline_config.validate().exit_code(EXIT_INPUT)?;
    let templates = config.templates().exit_code(EXIT_INPUT)?;
    let gateway = config.gateway().exit_code(EXIT_INPUT)?;
    let model_id = config.provider.embedding_model_id();
    if store.model_id() != model_id || store.dim() != gateway.dimension() {
        return Err(fail(
            EXIT_INPUT,
            format!(
                "{} holds {} embeddings ({} dims) but the provider embeds with {} ({} dims); re-run index",
                store_path.display(),
                store.model_id(),
                store.dim(),
                model_id,
                gateway.dimension()
            ),
        ));
    }

    let pipeline = Pipeline {
        gateway: &gateway,
        templates: &templates,
        store: &store,
        config: &pipeline_config,
    };
    let records = pipeline.screen_batch(&resumes, |r| jobs[&r.id].clone());

    let out = args
        .out
        .clone()
        .unwrap_or_else(|| config.paths.output_dir.join("results.jsonl"));
    let mut jsonl = String::new();
    for rec in &records {
        jsonl.push_str(&serde_json::to_string(rec).exit_code(EXIT_INPUT)?);
        jsonl.push('\n');
    }
    write_file(&out, jsonl.as_bytes()).exit_code(EXIT_INPUT)?;
    if let Some(dir) = &args.transcripts {
        write_transcripts(dir, &records).exit_code(EXIT_INPUT)?;
    }

    let ok = records.iter().filter(|r| r.is_ok()).count();
    for rec in &records {
        if let ScreeningRecord::Failed(f) = rec {
            eprintln!("failed {} at {:?}: {}", f.resume_id, f.stage, f.error);
        }
    }
    let stats = gateway.stats();
    eprintln!(
        "screened {} resumes: {} ok, {} failed; {} chat calls, {} network requests; wrote {}",
        records.len(),
        ok,
        records.len() - ok,
        stats.chat_attempts,
        stats.network_requests,
        out.display()
    );
    let code = if ok == records.len() {
        EXIT_OK
    } else if ok == 0 {
        EXIT_NONE_OK
    } else {
        EXIT_PARTIAL
    };
    Ok(Outcome {
        code,
        stats: Some(stats),
    })
}

fn write_transcripts(dir: &Path, records: &[ScreeningRecord]) -> Result<()> {
    for rec in records {
        let calls: Vec<serde_json::Value> = rec
            .transcripts()
            .iter()
            .map(|t| {
                let mut v = serde_json::to_value(t)?;
                v["elapsed_ms"] = serde_json::json!(t.elapsed.as_millis() as u64);
                Ok(v)
            })
            .collect::<serde_json::Result<_>>()?;
        let body = serde_json::to_string_pretty(&serde_json::json!({
            "resume_id": rec.resume_id(),
            "ok": rec.is_ok(),
            "calls": calls,
        }))?;
        write_file(
            &dir.join(format!("{}.json", rec.resume_id())),
            body.as_bytes(),
        )?;
    }
    Ok(())
}
