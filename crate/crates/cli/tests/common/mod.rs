#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use resumerag::llm::MockScripts;
use resumerag::pipeline::ScreeningRecord;
use resumerag_cli::{run, Cli, Failure, Outcome};
use tempfile::TempDir;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(rel: &str) -> String {
    fixtures().join(rel).display().to_string()
}

/// A scratch directory holding a copy of the fixture config and mock
/// scripts. Outputs land under `<dir>/out`.
pub struct Sandbox {
    pub dir: TempDir,
}

impl Sandbox {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        for f in ["config.toml", "mock_scripts.json"] {
            fs::copy(fixtures().join(f), dir.path().join(f)).unwrap();
        }
        Self { dir }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    pub fn p(&self, rel: &str) -> String {
        self.path(rel).display().to_string()
    }

    pub fn config(&self) -> String {
        self.p("config.toml")
    }

    pub fn scripts(&self) -> MockScripts {
        MockScripts::load(&self.path("mock_scripts.json")).unwrap()
    }

    pub fn set_scripts(&self, scripts: &MockScripts) {
        fs::write(
            self.path("mock_scripts.json"),
            serde_json::to_string_pretty(scripts).unwrap(),
        )
        .unwrap();
    }

    pub fn write(&self, rel: &str, contents: &str) -> String {
        let p = self.path(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(&p, contents).unwrap();
        p.display().to_string()
    }

    /// Runs `resumerag --config <sandbox config> <args>`.
    pub fn run(&self, args: &[&str]) -> Result<Outcome, Failure> {
        let config = self.config();
        let mut argv = vec!["resumerag", "--config", config.as_str()];
        argv.extend_from_slice(args);
        run(&Cli::try_parse_from(argv).expect("valid arguments"))
    }

    pub fn code(&self, args: &[&str]) -> u8 {
        match self.run(args) {
            Ok(o) => o.code,
            Err(f) => f.code,
        }
    }

    pub fn index(&self) -> Outcome {
        self.run(&["index", &fixture("criteria")]).expect("index")
    }

    pub fn records(&self, rel: &str) -> Vec<ScreeningRecord> {
        fs::read_to_string(self.path(rel))
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect()
    }

    pub fn read(&self, rel: &str) -> String {
        fs::read_to_string(self.path(rel)).unwrap()
    }
}
