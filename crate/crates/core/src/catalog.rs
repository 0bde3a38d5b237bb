//! Prompt templates, story parameters and the shipped preset rows.
//!
//! A prompt template is plain text with three single-brace placeholders,
//! `{narrative world}`, `{subjects}` and `{task}`, each occurring exactly
//! once. Rendering first applies the template's [`LengthVariant`] to the
//! length sentence of the body, then substitutes a [`ScenarioParams`].

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The shipped template, kept as an editable data file.
pub const DEFAULT_TEMPLATE: &str = include_str!("../data/prompt_template.txt");

/// The shipped preset catalog (four story rows).
pub const DEFAULT_PRESETS_JSON: &str = include_str!("../data/presets.json");

pub const WORLD_PLACEHOLDER: &str = "{narrative world}";
pub const SUBJECTS_PLACEHOLDER: &str = "{subjects}";
pub const TASK_PLACEHOLDER: &str = "{task}";

const LENGTH_SENTENCE_PREFIX: &str = "The description should be";
const HALF_PAGE_SENTENCE: &str = "The description should be about half a page long.";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CatalogError {
    #[error("parameter `{field}` is empty")]
    EmptyField { field: &'static str },
    #[error("parameter `{field}` contains a placeholder delimiter: {value:?}")]
    DelimiterInField { field: &'static str, value: String },
    #[error("template placeholder {placeholder} occurs {count} times, expected exactly once")]
    PlaceholderCount { placeholder: &'static str, count: usize },
    #[error("template contains a stray placeholder delimiter at byte {offset}")]
    StrayDelimiter { offset: usize },
    #[error("character limit must be positive")]
    ZeroCharLimit,
    #[error("the {dimension} list is empty")]
    EmptyDimension { dimension: &'static str },
    #[error("preset id {0} is outside 1..=4")]
    PresetId(u32),
    #[error("duplicate preset id {0}")]
    DuplicatePreset(u8),
    #[error("invalid preset catalog: {0}")]
    Json(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// The three personalisation slots of a story prompt.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ScenarioParams {
    narrative_world: String,
    subjects: String,
    task: String,
}

#[derive(Deserialize)]
struct RawParams {
    narrative_world: String,
    subjects: String,
    task: String,
}

impl TryFrom<RawParams> for ScenarioParams {
    type Error = CatalogError;

    fn try_from(raw: RawParams) -> Result<Self, Self::Error> {
        ScenarioParams::new(raw.narrative_world, raw.subjects, raw.task)
    }
}

fn check_field(field: &'static str, value: String) -> Result<String, CatalogError> {
    let trimmed = value.trim();
    if trimmed.is_empty() {
        return Err(CatalogError::EmptyField { field });
    }
    if trimmed.contains(['{', '}']) {
        return Err(CatalogError::DelimiterInField { field, value });
    }
    Ok(trimmed.to_string())
}

impl ScenarioParams {
    /// Builds a parameter set. Surrounding whitespace is trimmed.
    pub fn new(
        narrative_world: impl Into<String>,
        subjects: impl Into<String>,
        task: impl Into<String>,
    ) -> Result<Self, CatalogError> {
        Ok(Self {
            narrative_world: check_field("narrative_world", narrative_world.into())?,
            subjects: check_field("subjects", subjects.into())?,
            task: check_field("task", task.into())?,
        })
    }

    pub fn narrative_world(&self) -> &str {
        &self.narrative_world
    }

    pub fn subjects(&self) -> &str {
        &self.subjects
    }

    pub fn task(&self) -> &str {
        &self.task
    }
}

impl fmt::Display for ScenarioParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} / {} / {}", self.narrative_world, self.subjects, self.task)
    }
}

/// How the template's length sentence is rendered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LengthVariant {
    /// Body as written.
    #[default]
    Standard,
    /// Length sentence forced to the half-page request.
    HalfPage,
    /// Length sentence replaced by an explicit character limit.
    CharLimit(u32),
}

impl LengthVariant {
    fn sentence(self) -> Option<String> {
        match self {
            LengthVariant::Standard => None,
            LengthVariant::HalfPage => Some(HALF_PAGE_SENTENCE.to_string()),
            LengthVariant::CharLimit(n) => {
                Some(format!("The description should be at most {n} characters long."))
            }
        }
    }
}

/// A validated prompt template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    body: String,
    variant: LengthVariant,
}

impl PromptTemplate {
    /// Validates `body`: each placeholder exactly once, no other braces.
    pub fn new(body: impl Into<String>, variant: LengthVariant) -> Result<Self, CatalogError> {
        let body = body.into();
        if variant == LengthVariant::CharLimit(0) {
            return Err(CatalogError::ZeroCharLimit);
        }
        for placeholder in [WORLD_PLACEHOLDER, SUBJECTS_PLACEHOLDER, TASK_PLACEHOLDER] {
            let count = body.matches(placeholder).count();
            if count != 1 {
                return Err(CatalogError::PlaceholderCount { placeholder, count });
            }
        }
        let stripped = body
            .replace(WORLD_PLACEHOLDER, "")
            .replace(SUBJECTS_PLACEHOLDER, "")
            .replace(TASK_PLACEHOLDER, "");
        if stripped.contains(['{', '}']) {
            // Report the offset in the original body, skipping the valid placeholders.
            let offset = stray_delimiter_offset(&body).unwrap_or(0);
            return Err(CatalogError::StrayDelimiter { offset });
        }
        Ok(Self { body, variant })
    }

    /// The shipped template with the standard variant.
    pub fn standard() -> Self {
        Self::new(DEFAULT_TEMPLATE.trim_end(), LengthVariant::Standard)
            .expect("shipped template is valid")
    }

    /// Loads a template file. Trailing whitespace (the final newline) is dropped.
    pub fn from_file(path: &Path, variant: LengthVariant) -> Result<Self, CatalogError> {
        let text = read(path)?;
        Self::new(text.trim_end(), variant)
    }

    pub fn with_variant(mut self, variant: LengthVariant) -> Result<Self, CatalogError> {
        if variant == LengthVariant::CharLimit(0) {
            return Err(CatalogError::ZeroCharLimit);
        }
        self.variant = variant;
        Ok(self)
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    pub fn variant(&self) -> LengthVariant {
        self.variant
    }
}

fn stray_delimiter_offset(body: &str) -> Option<usize> {
    let mut i = 0;
    while i < body.len() {
        let rest = &body[i..];
        if let Some(p) = [WORLD_PLACEHOLDER, SUBJECTS_PLACEHOLDER, TASK_PLACEHOLDER]
            .iter()
            .find(|p| rest.starts_with(**p))
        {
            i += p.len();
            continue;
        }
        let c = rest.chars().next()?;
        if c == '{' || c == '}' {
            return Some(i);
        }
        i += c.len_utf8();
    }
    None
}

/// Substitutes `params` into `template` and applies the length variant.
pub fn render_prompt(template: &PromptTemplate, params: &ScenarioParams) -> String {
    let body = match template.variant.sentence() {
        Some(sentence) => replace_length_sentence(&template.body, &sentence),
        None => template.body.clone(),
    };
    let mut out = String::with_capacity(body.len() + 64);
    let mut rest = body.as_str();
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let tail = &rest[open..];
        let (value, len) = if tail.starts_with(WORLD_PLACEHOLDER) {
            (params.narrative_world(), WORLD_PLACEHOLDER.len())
        } else if tail.starts_with(SUBJECTS_PLACEHOLDER) {
            (params.subjects(), SUBJECTS_PLACEHOLDER.len())
        } else if tail.starts_with(TASK_PLACEHOLDER) {
            (params.task(), TASK_PLACEHOLDER.len())
        } else {
            unreachable!("template validated at construction")
        };
        out.push_str(value);
        rest = &tail[len..];
    }
    out.push_str(rest);
    out
}

/// Replaces the sentence starting with "The description should be" or
/// appends `sentence` when there is none. Only text after the last
/// placeholder is searched, so placeholders are never swallowed.
fn replace_length_sentence(body: &str, sentence: &str) -> String {
    let search_from = [WORLD_PLACEHOLDER, SUBJECTS_PLACEHOLDER, TASK_PLACEHOLDER]
        .iter()
        .filter_map(|p| body.find(p).map(|at| at + p.len()))
        .max()
        .unwrap_or(0);
    match body[search_from..].find(LENGTH_SENTENCE_PREFIX) {
        Some(rel) => {
            let start = search_from + rel;
            let end = body[start..]
                .find('.')
                .map(|dot| start + dot + 1)
                .unwrap_or(body.len());
            format!("{}{}{}", &body[..start], sentence, &body[end..])
        }
        None if body.is_empty() || body.ends_with(char::is_whitespace) => {
            format!("{body}{sentence}")
        }
        None => format!("{body} {sentence}"),
    }
}

/// One row of the preset catalog.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresetRow {
    pub id: u8,
    #[serde(flatten)]
    pub params: ScenarioParams,
}

/// Parameters plus the preset row they came from, if any.
///
/// [`ScenarioInput::key`] names the input in replay corpora and archives:
/// the preset id for preset rows, a `custom-...` slug otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScenarioInput {
    pub preset_id: Option<u8>,
    pub params: ScenarioParams,
}

impl ScenarioInput {
    pub fn key(&self) -> String {
        match self.preset_id {
            Some(id) => id.to_string(),
            None => format!(
                "custom-{}--{}--{}",
                slug(self.params.narrative_world()),
                slug(self.params.subjects()),
                slug(self.params.task())
            ),
        }
    }
}

impl From<PresetRow> for ScenarioInput {
    fn from(row: PresetRow) -> Self {
        Self { preset_id: Some(row.id), params: row.params }
    }
}

impl From<ScenarioParams> for ScenarioInput {
    fn from(params: ScenarioParams) -> Self {
        Self { preset_id: None, params }
    }
}

fn slug(text: &str) -> String {
    let mut out = String::new();
    for c in text.chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() {
            out.push(c);
        } else if !out.is_empty() && !out.ends_with('-') {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        out.push('x');
    }
    out
}

/// Parses a preset catalog: a JSON array of `{id, narrative_world, subjects, task}`.
pub fn parse_presets(json: &str) -> Result<Vec<PresetRow>, CatalogError> {
    #[derive(Deserialize)]
    struct Row {
        id: u32,
        narrative_world: String,
        subjects: String,
        task: String,
    }
    let rows: Vec<Row> =
        serde_json::from_str(json).map_err(|e| CatalogError::Json(e.to_string()))?;
    let mut out: Vec<PresetRow> = Vec::with_capacity(rows.len());
    for row in rows {
        if !(1..=4).contains(&row.id) {
            return Err(CatalogError::PresetId(row.id));
        }
        let id = row.id as u8;
        if out.iter().any(|r| r.id == id) {
            return Err(CatalogError::DuplicatePreset(id));
        }
        let params = ScenarioParams::new(row.narrative_world, row.subjects, row.task)?;
        out.push(PresetRow { id, params });
    }
    Ok(out)
}

pub fn load_presets(path: &Path) -> Result<Vec<PresetRow>, CatalogError> {
    parse_presets(&read(path)?)
}

/// The four shipped story rows, in order.
pub fn list_presets() -> Vec<PresetRow> {
    parse_presets(DEFAULT_PRESETS_JSON).expect("shipped presets are valid")
}

/// Full cross product, world-major, then subjects, then task.
pub fn permute<S: AsRef<str>>(
    worlds: &[S],
    subjects: &[S],
    tasks: &[S],
) -> Result<Vec<ScenarioParams>, CatalogError> {
    for (dimension, list) in [("worlds", worlds), ("subjects", subjects), ("tasks", tasks)] {
        if list.is_empty() {
            return Err(CatalogError::EmptyDimension { dimension });
        }
    }
    let mut out = Vec::with_capacity(worlds.len() * subjects.len() * tasks.len());
    for world in worlds {
        for subject in subjects {
            for task in tasks {
                out.push(ScenarioParams::new(world.as_ref(), subject.as_ref(), task.as_ref())?);
            }
        }
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String, CatalogError> {
    std::fs::read_to_string(path).map_err(|e| CatalogError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
