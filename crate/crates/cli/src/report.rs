use std::fmt::Write;

use resumerag::config::AppConfig;
use resumerag::domain::Category;
use resumerag::pipeline::{ScreeningRecord, ScreeningResult};

use crate::inputs::{read_jsonl, write_file};
use crate::{ExitCode, Failure, Outcome, ReportArgs, EXIT_INPUT};

fn cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

/// Markdown summary: successful screenings ranked by final score (ties by
/// resume id), then one section per candidate, then failures.
pub fn render(records: &[ScreeningRecord]) -> String {
    let mut ok: Vec<&ScreeningResult> = records
        .iter()
        .filter_map(|r| match r {
            ScreeningRecord::Ok(res) => Some(res.as_ref()),
            ScreeningRecord::Failed(_) => None,
        })
        .collect();
    ok.sort_by(|a, b| {
        b.final_score
            .value
            .total_cmp(&a.final_score.value)
            .then_with(|| a.resume_id.cmp(&b.resume_id))
    });

    let mut out = String::from("# Screening report\n\n");
    let _ = writeln!(
        out,
        "{} resumes screened, {} failed.\n",
        ok.len(),
        records.len() - ok.len()
    );
    out.push_str("| rank | resume | position |");
    for c in Category::ALL {
        let _ = write!(out, " {c} |");
    }
    out.push_str(" final |\n|---|---|---|");
    for _ in Category::ALL {
        out.push_str("---|");
    }
    out.push_str("---|\n");
    for (i, r) in ok.iter().enumerate() {
        let _ = write!(
            out,
            "| {} | {} | {} |",
            i + 1,
            cell(&r.resume_id),
            cell(&r.job.to_string())
        );
        for v in r.scores.as_array() {
            let _ = write!(out, " {v:.1} |");
        }
        let _ = writeln!(out, " {:.2} |", r.final_score.value);
    }

    for r in &ok {
        let _ = write!(
            out,
            "\n## {} ({:.2})\n\n{}\n",
            r.resume_id, r.final_score.value, r.feedback.consolidated
        );
        for (title, items) in [
            ("Strengths", &r.feedback.strengths),
            ("Weaknesses", &r.feedback.weaknesses),
        ] {
            if items.is_empty() {
                continue;
            }
            let _ = write!(out, "\n{title}:\n\n");
            for item in items {
                let _ = writeln!(out, "- {item}");
            }
        }
        if !r.warnings.is_empty() {
            out.push_str("\nWarnings:\n\n");
            for w in &r.warnings {
                let _ = writeln!(out, "- {w}");
            }
        }
    }

    let failed: Vec<_> = records
        .iter()
        .filter_map(|r| match r {
            ScreeningRecord::Failed(f) => Some(f),
            ScreeningRecord::Ok(_) => None,
        })
        .collect();
    if !failed.is_empty() {
        out.push_str("\n## Failures\n\n| resume | stage | error |\n|---|---|---|\n");
        for f in failed {
            let _ = writeln!(
                out,
                "| {} | {:?} | {} |",
                cell(&f.resume_id),
                f.stage,
                cell(&f.error)
            );
        }
    }
    out
}

pub fn run(config: &AppConfig, args: &ReportArgs) -> Result<Outcome, Failure> {
    let records: Vec<ScreeningRecord> = read_jsonl(&args.results).exit_code(EXIT_INPUT)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| config.paths.output_dir.join("report.md"));
    write_file(&out, render(&records).as_bytes()).exit_code(EXIT_INPUT)?;
    eprintln!("wrote {}", out.display());
    Ok(Outcome::ok())
}
