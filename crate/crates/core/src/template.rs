//! Plain-text prompt templates with named placeholders.
//!
//! `{name}` is replaced by the value bound to `name`; names may contain
//! letters, digits, `_` and `.` (so `{extracted.skills_specialties}` works).
//! `{{` and `}}` produce literal braces. Rendering fails on any placeholder
//! without a bound value.
//!
//! A [`TemplateSet`] starts from the built-in templates and can be overlaid
//! with `<name>.txt` files from a directory, so hiring teams can adjust
//! prompts without rebuilding.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TemplateError {
    #[error("template {template}: unclosed placeholder at byte {offset}")]
    Unclosed { template: String, offset: usize },
    #[error("template {template}: invalid placeholder {text:?} at byte {offset}")]
    BadPlaceholder {
        template: String,
        text: String,
        offset: usize,
    },
    #[error("template {template}: stray '}}' at byte {offset}")]
    StrayBrace { template: String, offset: usize },
    #[error("template {template}: no value for placeholder {{{name}}}")]
    Missing { template: String, name: String },
    #[error("no template named {0:?}")]
    Unknown(String),
    #[error("reading template {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Segment {
    Literal(String),
    Placeholder(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    name: String,
    segments: Vec<Segment>,
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
        && !s.starts_with('.')
        && !s.ends_with('.')
}

impl Template {
    pub fn parse(name: &str, text: &str) -> Result<Self, TemplateError> {
        let mut segments = Vec::new();
        let mut lit = String::new();
        let bytes = text.as_bytes();
        let mut i = 0;
        while i < text.len() {
            match bytes[i] {
                b'{' if bytes.get(i + 1) == Some(&b'{') => {
                    lit.push('{');
                    i += 2;
                }
                b'}' if bytes.get(i + 1) == Some(&b'}') => {
                    lit.push('}');
                    i += 2;
                }
                b'{' => {
                    let close = text[i + 1..].find('}').ok_or(TemplateError::Unclosed {
                        template: name.to_string(),
                        offset: i,
                    })?;
                    let key = &text[i + 1..i + 1 + close];
                    if !valid_name(key) {
                        return Err(TemplateError::BadPlaceholder {
                            template: name.to_string(),
                            text: key.to_string(),
                            offset: i,
                        });
                    }
                    if !lit.is_empty() {
                        segments.push(Segment::Literal(std::mem::take(&mut lit)));
                    }
                    segments.push(Segment::Placeholder(key.to_string()));
                    i += close + 2;
                }
                b'}' => {
                    return Err(TemplateError::StrayBrace {
                        template: name.to_string(),
                        offset: i,
                    })
                }
                _ => {
                    let ch = text[i..].chars().next().unwrap();
                    lit.push(ch);
                    i += ch.len_utf8();
                }
            }
        }
        if !lit.is_empty() {
            segments.push(Segment::Literal(lit));
        }
        Ok(Self {
            name: name.to_string(),
            segments,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Placeholder names in order of first appearance.
    pub fn placeholders(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for s in &self.segments {
            if let Segment::Placeholder(p) = s {
                if !out.contains(&p.as_str()) {
                    out.push(p);
                }
            }
        }
        out
    }

    pub fn render(&self, vars: &Vars) -> Result<String, TemplateError> {
        let mut out = String::new();
        for s in &self.segments {
            match s {
                Segment::Literal(l) => out.push_str(l),
                Segment::Placeholder(p) => {
                    let v = vars
                        .0
                        .get(p.as_str())
                        .ok_or_else(|| TemplateError::Missing {
                            template: self.name.clone(),
                            name: p.clone(),
                        })?;
                    out.push_str(v);
                }
            }
        }
        Ok(out)
    }
}

/// Values bound to placeholder names.
#[derive(Debug, Clone, Default)]
pub struct Vars(BTreeMap<String, String>);

impl Vars {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: impl Into<String>) -> Self {
        self.0.insert(name.to_string(), value.into());
        self
    }

    pub fn set(&mut self, name: &str, value: impl Into<String>) {
        self.0.insert(name.to_string(), value.into());
    }
}

macro_rules! builtin {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../templates/", $name, ".txt")))),*]
    };
}

/// Names and contents of the built-in templates.
pub const BUILTIN: &[(&str, &str)] = builtin![
    "extractor.system",
    "extractor.schema",
    "extractor.user",
    "extractor.repair",
    "evaluator.system",
    "evaluator.query",
    "evaluator.user",
    "evaluator.resume_sections",
    "evaluator.raw_resume",
    "evaluator.repair",
    "summarizer.ceo",
    "summarizer.cto",
    "summarizer.hr",
    "summarizer.view",
    "summarizer.refine",
    "summarizer.consolidator",
    "summarizer.consolidate",
    "summarizer.repair",
];

#[derive(Debug, Clone)]
pub struct TemplateSet {
    templates: BTreeMap<String, Template>,
}

impl TemplateSet {
    pub fn builtin() -> Self {
        let templates = BUILTIN
            .iter()
            .map(|(name, text)| {
                let t = Template::parse(name, text).expect("built-in template parses");
                (name.to_string(), t)
            })
            .collect();
        Self { templates }
    }

    /// Built-ins overlaid with every `<name>.txt` in `dir` whose name matches
    /// a built-in template.
    pub fn load_dir(dir: &Path) -> Result<Self, TemplateError> {
        let mut set = Self::builtin();
        let io = |message: String| TemplateError::Io {
            path: dir.display().to_string(),
            message,
        };
        let entries = fs::read_dir(dir).map_err(|e| io(e.to_string()))?;
        let mut paths: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        paths.sort();
        for path in paths {
            let Some(name) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            if !set.templates.contains_key(name) {
                continue;
            }
            let text = fs::read_to_string(&path).map_err(|e| TemplateError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            set.templates
                .insert(name.to_string(), Template::parse(name, &text)?);
        }
        Ok(set)
    }

    pub fn get(&self, name: &str) -> Result<&Template, TemplateError> {
        self.templates
            .get(name)
            .ok_or_else(|| TemplateError::Unknown(name.to_string()))
    }

    pub fn render(&self, name: &str, vars: &Vars) -> Result<String, TemplateError> {
        self.get(name)?.render(vars)
    }

    /// Writes the current templates to `dir` as `<name>.txt` files.
    pub fn export(dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        for (name, text) in BUILTIN {
            fs::write(dir.join(format!("{name}.txt")), text)?;
        }
        Ok(())
    }
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}
