//! Candidate, job and score types plus the weighted score arithmetic.
//!
//! A [`ScoreVector`] holds the five bounded category scores produced for a
//! candidate against one [`JobPosition`]. Its wire form is a bare five-element
//! array in the fixed order `[self, skills, work, basic, education]`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("expected 5 scores, got {0}")]
    WrongArity(usize),
    #[error("{category} score {value} is outside [0, {max}]", max = category.bound())]
    OutOfBounds { category: Category, value: f64 },
    #[error("{0} score is not a finite number")]
    NonFinite(Category),
    #[error("weight for {0} must be a finite non-negative number")]
    InvalidWeight(Category),
    #[error("at least one scoring weight must be positive")]
    AllZeroWeights,
    #[error("resume text is empty")]
    EmptyResume,
    #[error("duplicate resume id {0:?} in batch")]
    DuplicateResumeId(String),
    #[error("unknown job level {0:?}")]
    UnknownLevel(String),
}

/// One of the five scoring categories, in wire order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    SelfEvaluation,
    Skills,
    WorkExperience,
    BasicInformation,
    Education,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::SelfEvaluation,
        Category::Skills,
        Category::WorkExperience,
        Category::BasicInformation,
        Category::Education,
    ];

    /// Inclusive upper bound of the category score. The bounds sum to 10.
    pub fn bound(self) -> f64 {
        match self {
            Category::SelfEvaluation => 1.0,
            Category::Skills => 2.0,
            Category::WorkExperience => 4.0,
            Category::BasicInformation => 1.0,
            Category::Education => 2.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::SelfEvaluation => "self_evaluation",
            Category::Skills => "skills",
            Category::WorkExperience => "work_experience",
            Category::BasicInformation => "basic_information",
            Category::Education => "education",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobLevel {
    Junior,
    Mid,
    Senior,
    Leadership,
}

impl JobLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            JobLevel::Junior => "junior",
            JobLevel::Mid => "mid",
            JobLevel::Senior => "senior",
            JobLevel::Leadership => "leadership",
        }
    }

    /// Maps free-form level wording onto the four-level scale.
    ///
    /// Accepts the canonical names plus common synonyms ("mid-level",
    /// "entry", "director", ...). Matching is case-insensitive and ignores
    /// surrounding punctuation.
    pub fn normalize(raw: &str) -> Option<JobLevel> {
        let key: String = raw
            .trim()
            .to_lowercase()
            .chars()
            .map(|c| if c.is_alphanumeric() { c } else { ' ' })
            .collect();
        let key = key.split_whitespace().collect::<Vec<_>>().join(" ");
        let level = match key.as_str() {
            "junior" | "jr" | "entry" | "entry level" | "intern" | "internship" | "assistant"
            | "graduate" | "trainee" => JobLevel::Junior,
            "mid" | "mid level" | "middle" | "intermediate" | "associate" | "specialist" => {
                JobLevel::Mid
            }
            "senior" | "sr" | "senior level" | "manager" | "lead" => JobLevel::Senior,
            "leadership" | "leader" | "director" | "executive" | "head" | "vp" | "chief"
            | "strategic partner" | "principal" => JobLevel::Leadership,
            _ => return None,
        };
        Some(level)
    }
}

impl FromStr for JobLevel {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        JobLevel::normalize(s).ok_or_else(|| DomainError::UnknownLevel(s.to_string()))
    }
}

impl fmt::Display for JobLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The position a candidate applied for. Conditions every score.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JobPosition {
    pub title: String,
    pub level: JobLevel,
}

impl JobPosition {
    pub fn new(title: impl Into<String>, level: JobLevel) -> Self {
        Self {
            title: title.into(),
            level,
        }
    }
}

impl fmt::Display for JobPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (level: {})", self.title, self.level)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resume {
    pub id: String,
    pub raw_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub applied_position_hint: Option<String>,
}

impl Resume {
    pub fn new(id: impl Into<String>, raw_text: impl Into<String>) -> Result<Self, DomainError> {
        let raw_text = raw_text.into();
        if raw_text.trim().is_empty() {
            return Err(DomainError::EmptyResume);
        }
        Ok(Self {
            id: id.into(),
            raw_text,
            applied_position_hint: None,
        })
    }

    pub fn with_hint(mut self, hint: impl Into<String>) -> Self {
        self.applied_position_hint = Some(hint.into());
        self
    }
}

/// Checks the batch-level invariant that resume ids are unique.
pub fn check_unique_ids(resumes: &[Resume]) -> Result<(), DomainError> {
    let mut seen = std::collections::HashSet::new();
    for r in resumes {
        if !seen.insert(r.id.as_str()) {
            return Err(DomainError::DuplicateResumeId(r.id.clone()));
        }
    }
    Ok(())
}

/// Work duration in months. `Unknown` is distinct from zero months.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Duration {
    Months(u32),
    #[default]
    Unknown,
}

impl Serialize for Duration {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Duration::Months(m) => s.serialize_u32(*m),
            Duration::Unknown => s.serialize_none(),
        }
    }
}

impl<'de> Deserialize<'de> for Duration {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match Option::<u32>::deserialize(d)? {
            Some(m) => Duration::Months(m),
            None => Duration::Unknown,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkEntry {
    pub company: String,
    pub duration_months: Duration,
    pub responsibilities: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EducationEntry {
    pub institution: String,
    pub degree: String,
    pub field_of_study: String,
}

/// The six-section structured form of a resume. Sections the extractor could
/// not find are empty, never absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractedResume {
    pub position: JobPosition,
    pub self_evaluation: String,
    pub skills_specialties: Vec<String>,
    pub work_experience: Vec<WorkEntry>,
    pub basic_information: BTreeMap<String, String>,
    pub education: Vec<EducationEntry>,
}

/// Five category scores, each within its closed bound.
///
/// Values are kept at full precision; serialization rounds each component to
/// one decimal place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreVector([f64; 5]);

impl ScoreVector {
    /// Validates a raw score list. Out-of-bound values are rejected, never
    /// clamped.
    pub fn validate(raw: &[f64]) -> Result<Self, DomainError> {
        if raw.len() != 5 {
            return Err(DomainError::WrongArity(raw.len()));
        }
        let mut out = [0.0; 5];
        for (category, (&value, slot)) in Category::ALL.iter().zip(raw.iter().zip(out.iter_mut())) {
            if !value.is_finite() {
                return Err(DomainError::NonFinite(*category));
            }
            if !(0.0..=category.bound()).contains(&value) {
                return Err(DomainError::OutOfBounds {
                    category: *category,
                    value,
                });
            }
            // normalizes -0.0
            *slot = value + 0.0;
        }
        Ok(Self(out))
    }

    pub fn zero() -> Self {
        Self([0.0; 5])
    }

    pub fn maximum() -> Self {
        Self(Category::ALL.map(Category::bound))
    }

    pub fn get(&self, category: Category) -> f64 {
        self.0[category.index()]
    }

    pub fn as_array(&self) -> [f64; 5] {
        self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Component values rounded to one decimal, as written on the wire.
    pub fn rounded(&self) -> [f64; 5] {
        self.0.map(round1)
    }

    /// True when every component of `self` is at least the matching
    /// component of `other`.
    pub fn dominates(&self, other: &ScoreVector) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a >= b)
    }
}

pub(crate) fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0 + 0.0
}

impl Serialize for ScoreVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.rounded().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ScoreVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<f64>::deserialize(d)?;
        ScoreVector::validate(&raw).map_err(D::Error::custom)
    }
}

/// Per-category weights applied to a [`ScoreVector`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringWeights {
    pub self_evaluation: f64,
    pub skills: f64,
    pub work_experience: f64,
    pub basic_information: f64,
    pub education: f64,
}

impl Default for ScoringWeights {
    /// Unit weights: the final score is the raw 0-10 category sum.
    fn default() -> Self {
        Self::uniform(1.0)
    }
}

impl ScoringWeights {
    pub fn uniform(w: f64) -> Self {
        Self::from_array([w; 5])
    }

    pub fn from_array(w: [f64; 5]) -> Self {
        Self {
            self_evaluation: w[0],
            skills: w[1],
            work_experience: w[2],
            basic_information: w[3],
            education: w[4],
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [
            self.self_evaluation,
            self.skills,
            self.work_experience,
            self.basic_information,
            self.education,
        ]
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        let w = self.as_array();
        for (category, value) in Category::ALL.iter().zip(w) {
            if !value.is_finite() || value < 0.0 {
                return Err(DomainError::InvalidWeight(*category));
            }
        }
        if w.iter().all(|&v| v == 0.0) {
            return Err(DomainError::AllZeroWeights);
        }
        Ok(())
    }

    /// Rescales the weights to sum to one.
    pub fn normalized(&self) -> Result<Self, DomainError> {
        self.validate()?;
        let w = self.as_array();
        let sum: f64 = w.iter().sum();
        Ok(Self::from_array(w.map(|v| v / sum)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalScore {
    pub value: f64,
    pub job: JobPosition,
}

/// Weighted sum of the category scores.
pub fn final_score(
    scores: &ScoreVector,
    weights: &ScoringWeights,
    job: &JobPosition,
) -> FinalScore {
    FinalScore {
        value: weighted_sum(scores, weights),
        job: job.clone(),
    }
}

pub fn weighted_sum(scores: &ScoreVector, weights: &ScoringWeights) -> f64 {
    scores
        .0
        .iter()
        .zip(weights.as_array())
        .map(|(s, w)| s * w)
        .sum()
}
