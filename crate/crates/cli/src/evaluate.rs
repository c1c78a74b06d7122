use resumerag::config::AppConfig;
use resumerag::metrics::{
    categories_csv, evaluate_run, histogram_csv, join_labels, scatter_csv, HrLabel, MetricsError,
};
use resumerag::pipeline::ScreeningRecord;

use crate::inputs::{read_jsonl, write_file};
use crate::{
    fail, EvaluateArgs, ExitCode, Failure, Outcome, EXIT_INPUT, EXIT_INSUFFICIENT, EXIT_OK,
};

pub fn run(config: &AppConfig, args: &EvaluateArgs) -> Result<Outcome, Failure> {
    let results: Vec<ScreeningRecord> = read_jsonl(&args.results).exit_code(EXIT_INPUT)?;
    let labels: Vec<HrLabel> = read_jsonl(&args.labels).exit_code(EXIT_INPUT)?;
    let weights = config
        .pipeline_config()
        .effective_weights()
        .exit_code(EXIT_INPUT)?;
    let joined = join_labels(&results, &labels, &weights)
        .map_err(|e| fail(EXIT_INPUT, format!("results and labels do not join: {e}")))?;
    if !joined.failed.is_empty() {
        eprintln!(
            "excluding {} labeled resumes whose screening failed: {}",
            joined.failed.len(),
            joined.failed.join(", ")
        );
    }

    let report = match evaluate_run(&joined.records, &args.percentiles) {
        Ok(r) => r,
        Err(MetricsError::EmptyInput) => {
            return Err(fail(
                EXIT_INSUFFICIENT,
                "no successfully screened resume has a label",
            ))
        }
        Err(e @ MetricsError::InvalidPercentile(_)) => return Err(fail(EXIT_INPUT, e)),
        Err(e) => return Err(fail(EXIT_INSUFFICIENT, e)),
    };

    let model = args
        .model
        .clone()
        .unwrap_or_else(|| config.provider.chat_model.clone());
    let out_dir = args
        .out_dir
        .clone()
        .unwrap_or_else(|| config.paths.output_dir.join("evaluation"));
    let metrics = serde_json::json!({
        "model": model,
        "excluded_failed": joined.failed,
        "report": report,
    });
    let mut metrics_json = serde_json::to_string_pretty(&metrics).exit_code(EXIT_INPUT)?;
    metrics_json.push('\n');
    let table = report.table_text(&model);
    for (name, body) in [
        ("metrics.json", metrics_json),
        ("table.txt", table.clone()),
        ("scatter.csv", scatter_csv(&joined.records)),
        ("histogram.csv", histogram_csv(&report.histogram)),
        ("categories.csv", categories_csv(&joined.records, &report)),
    ] {
        write_file(&out_dir.join(name), body.as_bytes()).exit_code(EXIT_INPUT)?;
    }
    print!("{table}");

    if !report.complete() {
        for (p, why) in &report.unavailable {
            eprintln!("percentile {p}: {why}");
        }
        eprintln!(
            "insufficient data: {} matched records; partial report written to {}",
            report.n_total,
            out_dir.display()
        );
        return Ok(Outcome {
            code: EXIT_INSUFFICIENT,
            stats: None,
        });
    }
    eprintln!(
        "evaluated {} records; wrote {}",
        report.n_total,
        out_dir.display()
    );
    Ok(Outcome {
        code: EXIT_OK,
        stats: None,
    })
}
