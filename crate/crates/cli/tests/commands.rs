mod common;

use std::fs;
use std::io::ErrorKind;
use std::net::TcpListener;
use std::process::Command;

use common::{fixture, Sandbox};
use resumerag::llm::{MockRule, MockScripts};
use resumerag::pipeline::{ScreeningMode, ScreeningRecord, Stage, AGENT_EXTRACTOR};
use resumerag::rag::{chunk_document, KnowledgeStore, SourceDocument};
use resumerag_cli::{EXIT_INPUT, EXIT_INSUFFICIENT, EXIT_NONE_OK, EXIT_OK, EXIT_PARTIAL};

const BIN: &str = env!("CARGO_BIN_EXE_resumerag");

fn five_resumes() -> Vec<String> {
    (1..=5)
        .map(|i| fixture(&format!("resumes/r{i:02}.txt")))
        .collect()
}

#[test]
fn index_count_equals_sum_of_document_chunks() {
    let sb = Sandbox::new();
    let out = sb.index();
    assert_eq!(out.code, EXIT_OK);
    let store = KnowledgeStore::load(&sb.path("out/criteria.rrks")).unwrap();
    let cfg = store.config();
    let mut expected = 0;
    for name in ["engineering_rubric.md", "people_ops.txt"] {
        let body = fs::read_to_string(common::fixtures().join("criteria").join(name)).unwrap();
        let doc = SourceDocument {
            doc_id: name.split('.').next().unwrap().into(),
            title: String::new(),
            body,
            tags: vec![],
        };
        expected += chunk_document(&doc, cfg).len();
    }
    let values: SourceDocument = serde_json::from_str(
        &fs::read_to_string(common::fixtures().join("criteria/company_values.json")).unwrap(),
    )
    .unwrap();
    expected += chunk_document(&values, cfg).len();
    assert_eq!(store.len(), expected);
    assert_eq!(store.doc_ids().count(), 3);
    assert_eq!(out.stats.unwrap().network_requests, 0);
}

#[test]
fn index_reruns_are_byte_identical() {
    let sb = Sandbox::new();
    sb.index();
    let first = fs::read(sb.path("out/criteria.rrks")).unwrap();
    sb.index();
    assert_eq!(fs::read(sb.path("out/criteria.rrks")).unwrap(), first);
}

#[test]
fn index_unreadable_path_exits_2_naming_it() {
    let sb = Sandbox::new();
    let missing = sb.p("nope/criteria.txt");
    let out = Command::new(BIN)
        .args(["--config", &sb.config(), "index", &missing])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(&missing));
    assert!(!sb.path("out/criteria.rrks").exists());
}

#[test]
fn index_failure_leaves_existing_store_untouched() {
    let sb = Sandbox::new();
    sb.index();
    let before = fs::read(sb.path("out/criteria.rrks")).unwrap();
    let empty = sb.write("bad/empty.txt", "   \n");
    assert_eq!(
        sb.code(&["index", &fixture("criteria"), &empty]),
        EXIT_INPUT
    );
    assert_eq!(fs::read(sb.path("out/criteria.rrks")).unwrap(), before);
}

#[test]
fn index_append_adds_documents() {
    let sb = Sandbox::new();
    sb.index();
    let n = KnowledgeStore::load(&sb.path("out/criteria.rrks"))
        .unwrap()
        .len();
    let extra = sb.write(
        "extra/benefits.txt",
        "Benefits administration and payroll knowledge are required.",
    );
    sb.run(&["index", "--append", &extra]).unwrap();
    let store = KnowledgeStore::load(&sb.path("out/criteria.rrks")).unwrap();
    assert_eq!(store.len(), n + 1);
    sb.run(&["index", &extra]).unwrap();
    assert_eq!(
        KnowledgeStore::load(&sb.path("out/criteria.rrks"))
            .unwrap()
            .len(),
        1
    );
}

#[test]
fn screen_five_resumes_happy_path() {
    let sb = Sandbox::new();
    sb.index();
    let mut args = vec!["screen", "--jobs"];
    let jobs = fixture("jobs.json");
    args.push(&jobs);
    let resumes = five_resumes();
    args.extend(resumes.iter().map(String::as_str));
    let out = sb.run(&args).unwrap();
    assert_eq!(out.code, EXIT_OK);
    assert_eq!(out.stats.unwrap().network_requests, 0);
    let records = sb.records("out/results.jsonl");
    let ids: Vec<&str> = records.iter().map(|r| r.resume_id()).collect();
    assert_eq!(ids, ["r01", "r02", "r03", "r04", "r05"]);
    assert!(records.iter().all(ScreeningRecord::is_ok));
}

#[test]
fn screen_no_extraction_flags_records() {
    let sb = Sandbox::new();
    sb.index();
    let jobs = fixture("jobs.json");
    let r = fixture("resumes/r03.txt");
    let out = sb
        .run(&[
            "screen",
            "--no-extraction",
            "--jobs",
            &jobs,
            &r,
            "--out",
            &sb.p("abl.jsonl"),
        ])
        .unwrap();
    assert_eq!(out.code, EXIT_OK);
    match &sb.records("abl.jsonl")[0] {
        ScreeningRecord::Ok(res) => {
            assert_eq!(res.mode, ScreeningMode::NoExtraction);
            assert!(res.extracted.is_none());
            assert!(res
                .transcripts
                .iter()
                .all(|t| t.agent_name != AGENT_EXTRACTOR));
        }
        other => panic!("{other:?}"),
    }
}

/// The provider points at a local listener; a missing store must fail
/// before anything connects to it.
#[test]
fn screen_missing_store_exits_before_provider_call() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    listener.set_nonblocking(true).unwrap();
    let sb = Sandbox::new();
    let config = format!(
        "[provider]\nkind = \"openai\"\nbase_url = \"http://{}/v1\"\napi_key_env_var = \"RR_TEST_KEY\"\nchat_model = \"m\"\nembedding_model = \"e\"\nmax_retries = 0\n\n[paths]\nstore = \"missing.rrks\"\n",
        listener.local_addr().unwrap()
    );
    sb.write("config.toml", &config);
    let out = Command::new(BIN)
        .env("RR_TEST_KEY", "x")
        .args([
            "--config",
            &sb.config(),
            "screen",
            "--job-title",
            "Analyst",
            &fixture("resumes/r01.txt"),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.rrks"));
    assert_eq!(listener.accept().unwrap_err().kind(), ErrorKind::WouldBlock);
}

#[test]
fn screen_unassigned_resume_exits_2() {
    let sb = Sandbox::new();
    sb.index();
    let f = Command::new(BIN)
        .args([
            "--config",
            &sb.config(),
            "screen",
            &fixture("resumes/r01.txt"),
        ])
        .output()
        .unwrap();
    assert_eq!(f.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&f.stderr).contains("r01"));
}

#[test]
fn screen_default_job_covers_unlisted_resumes() {
    let sb = Sandbox::new();
    sb.index();
    let jobs = sb.write(
        "jobs.json",
        r#"{"r01": {"title": "Software Engineer", "level": "Entry Level"}}"#,
    );
    let out = sb
        .run(&[
            "screen",
            "--jobs",
            &jobs,
            "--job-title",
            "Data Analyst",
            "--job-level",
            "mid",
            &fixture("resumes/r01.txt"),
            &fixture("resumes/r03.txt"),
        ])
        .unwrap();
    assert_eq!(out.code, EXIT_OK);
    let jobs: Vec<String> = sb
        .records("out/results.jsonl")
        .iter()
        .map(|r| match r {
            ScreeningRecord::Ok(res) => res.job.to_string(),
            ScreeningRecord::Failed(f) => panic!("{}", f.error),
        })
        .collect();
    assert_eq!(
        jobs,
        [
            "Software Engineer (level: junior)",
            "Data Analyst (level: mid)"
        ]
    );
}

fn break_extractor(sb: &Sandbox, ids: &[&str]) {
    let mut scripts: MockScripts = sb.scripts();
    for id in ids {
        scripts.prepend(
            MockRule::reply("I cannot share that.")
                .for_agent(AGENT_EXTRACTOR)
                .for_subject(*id),
        );
    }
    sb.set_scripts(&scripts);
}

#[test]
fn screen_exit_codes_for_partial_and_total_failure() {
    let sb = Sandbox::new();
    sb.index();
    let jobs = fixture("jobs.json");
    let (a, b) = (fixture("resumes/r01.txt"), fixture("resumes/r02.txt"));
    break_extractor(&sb, &["r02"]);
    assert_eq!(sb.code(&["screen", "--jobs", &jobs, &a, &b]), EXIT_PARTIAL);
    let records = sb.records("out/results.jsonl");
    match &records[1] {
        ScreeningRecord::Failed(f) => {
            assert_eq!(f.stage, Stage::Extraction);
            assert_eq!(f.transcripts.len(), 3);
        }
        other => panic!("{other:?}"),
    }
    break_extractor(&sb, &["r01"]);
    assert_eq!(sb.code(&["screen", "--jobs", &jobs, &a, &b]), EXIT_NONE_OK);
}

#[test]
fn screen_writes_transcript_files() {
    let sb = Sandbox::new();
    sb.index();
    let dir = sb.p("calls");
    sb.run(&[
        "screen",
        "--jobs",
        &fixture("jobs.json"),
        "--transcripts",
        &dir,
        &fixture("resumes/r04.txt"),
    ])
    .unwrap();
    let v: serde_json::Value = serde_json::from_str(&sb.read("calls/r04.json")).unwrap();
    assert_eq!(v["calls"].as_array().unwrap().len(), 6);
    assert!(v["calls"][0]["elapsed_ms"].is_u64());
}

fn screen_all(sb: &Sandbox) {
    sb.index();
    let out = sb
        .run(&[
            "screen",
            "--jobs",
            &fixture("jobs.json"),
            &fixture("resumes"),
        ])
        .unwrap();
    assert_eq!(out.code, EXIT_OK);
}

fn self_labels(sb: &Sandbox, take: usize) -> String {
    let mut labels = String::new();
    for r in sb.records("out/results.jsonl").iter().take(take) {
        if let ScreeningRecord::Ok(res) = r {
            labels.push_str(
                &serde_json::json!({"resume_id": res.resume_id, "scores": res.scores}).to_string(),
            );
            labels.push('\n');
        }
    }
    sb.write("self_labels.jsonl", &labels)
}

#[test]
fn evaluate_perfect_agreement() {
    let sb = Sandbox::new();
    screen_all(&sb);
    let labels = self_labels(&sb, 10);
    let out = sb
        .run(&[
            "evaluate",
            "--results",
            &sb.p("out/results.jsonl"),
            "--labels",
            &labels,
        ])
        .unwrap();
    assert_eq!(out.code, EXIT_OK);
    let m: serde_json::Value =
        serde_json::from_str(&sb.read("out/evaluation/metrics.json")).unwrap();
    for p in ["10", "15", "20"] {
        assert_eq!(m["report"]["pc"][p].as_f64(), Some(1.0));
        assert_eq!(m["report"]["sc"][p].as_f64(), Some(1.0));
    }
    assert_eq!(m["report"]["mae"].as_f64(), Some(0.0));
}

#[test]
fn evaluate_table_has_seven_columns() {
    let sb = Sandbox::new();
    screen_all(&sb);
    let out = sb
        .run(&[
            "evaluate",
            "--results",
            &sb.p("out/results.jsonl"),
            "--labels",
            &fixture("hr_labels.jsonl"),
            "--percentiles",
            "10,15,20",
        ])
        .unwrap();
    assert_eq!(out.code, EXIT_OK);
    let table = sb.read("out/evaluation/table.txt");
    let header: Vec<&str> = table
        .lines()
        .next()
        .unwrap()
        .split_whitespace()
        .skip(1)
        .collect();
    assert_eq!(
        header,
        ["PC20", "SC20", "PC15", "SC15", "PC10", "SC10", "MAE"]
    );
    for f in ["scatter.csv", "histogram.csv", "categories.csv"] {
        assert!(sb.path("out/evaluation").join(f).is_file());
    }
}

#[test]
fn evaluate_two_matches_is_insufficient() {
    let sb = Sandbox::new();
    screen_all(&sb);
    let two: Vec<String> = sb
        .read("out/results.jsonl")
        .lines()
        .take(2)
        .map(String::from)
        .collect();
    let results = sb.write("two.jsonl", &(two.join("\n") + "\n"));
    let labels = self_labels(&sb, 2);
    assert_eq!(
        sb.code(&["evaluate", "--results", &results, "--labels", &labels]),
        EXIT_INSUFFICIENT
    );
    let m: serde_json::Value =
        serde_json::from_str(&sb.read("out/evaluation/metrics.json")).unwrap();
    assert!(m["report"]["unavailable"]["10"]
        .as_str()
        .unwrap()
        .contains("need 3"));
}

#[test]
fn evaluate_join_failure_lists_ids() {
    let sb = Sandbox::new();
    screen_all(&sb);
    let labels = sb.write(
        "labels.jsonl",
        &(fs::read_to_string(fixture("hr_labels.jsonl")).unwrap()
            + "{\"resume_id\": \"ghost\", \"scores\": [1, 1, 1, 1, 1]}\n"),
    );
    let out = Command::new(BIN)
        .args([
            "--config",
            &sb.config(),
            "evaluate",
            "--results",
            &sb.p("out/results.jsonl"),
            "--labels",
            &labels,
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ghost"));
}

#[test]
fn report_ranks_by_final_score() {
    let sb = Sandbox::new();
    screen_all(&sb);
    sb.run(&["report", "--results", &sb.p("out/results.jsonl")])
        .unwrap();
    let md = sb.read("out/report.md");
    let rows: Vec<&str> = md
        .lines()
        .filter(|l| l.starts_with("| 1 |") || l.starts_with("| 10 |"))
        .collect();
    assert!(rows[0].contains("9.50"), "{rows:?}");
    assert!(rows[1].contains("r05"), "{rows:?}");
}

#[test]
fn bad_config_exits_2() {
    let sb = Sandbox::new();
    sb.write(
        "config.toml",
        "[provider]\nkind = \"mock\"\n[paths]\nstore = \"s\"\n[pipeline]\nsummarizer_rounds = 0\n",
    );
    assert_eq!(sb.code(&["index", &fixture("criteria")]), EXIT_INPUT);
}
