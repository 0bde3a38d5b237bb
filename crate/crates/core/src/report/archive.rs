use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use thiserror::Error;

use crate::catalog::ScenarioParams;
use crate::gateway::{FinishReason, GeneratedScenario};
use crate::lint::{LintReport, ScenarioRef};

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Consistency(String),
    #[error("malformed archive entry: {0}")]
    Format(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ArchiveError + '_ {
    move |source| ArchiveError::Io { path: path.display().to_string(), source }
}

/// `rounds/round-{r}/{model}/{key}.md` plus `{key}.lint.json` under a root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchiveLayout {
    pub root: PathBuf,
    /// (markdown, lint json) per stored scenario, in input order.
    pub entries: Vec<(PathBuf, PathBuf)>,
}

impl ArchiveLayout {
    pub fn scenario_dir(root: &Path, round: u32, model_name: &str) -> PathBuf {
        root.join("rounds").join(format!("round-{round}")).join(path_safe(model_name))
    }

    pub fn markdown_path(root: &Path, scenario: &ScenarioRef) -> PathBuf {
        Self::scenario_dir(root, scenario.round, &scenario.model_name).join(format!("{}.md", scenario.key()))
    }

    pub fn lint_path(root: &Path, scenario: &ScenarioRef) -> PathBuf {
        Self::scenario_dir(root, scenario.round, &scenario.model_name)
            .join(format!("{}.lint.json", scenario.key()))
    }
}

/// Model names may carry '/' or ':'; archive directories keep only
/// `[A-Za-z0-9._-]` and map everything else to '_'.
pub fn path_safe(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' })
        .collect();
    match s.as_str() {
        "" | "." | ".." => format!("_{s}"),
        _ => s,
    }
}

/// Writes `path` unless it already holds exactly `contents`.
pub(crate) fn write_if_changed(path: &Path, contents: &str) -> Result<(), ArchiveError> {
    if fs::read(path).is_ok_and(|existing| existing == contents.as_bytes()) {
        return Ok(());
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

/// The archived markdown: a front-matter block with provenance, then the
/// response text exactly as received.
pub fn scenario_markdown(s: &GeneratedScenario) -> String {
    let mut out = String::from("---\n");
    let mut kv = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(": ");
        out.push_str(&v);
        out.push('\n');
    };
    kv("model", quote(&s.model_name));
    kv("round", s.round.to_string());
    kv("preset", s.preset_id.map_or_else(|| "null".to_string(), |id| id.to_string()));
    kv("narrative_world", quote(s.params.narrative_world()));
    kv("subjects", quote(s.params.subjects()));
    kv("task", quote(s.params.task()));
    kv("finish_reason", quote(&s.finish_reason.to_string()));
    kv("prompt_tokens", s.prompt_tokens.to_string());
    kv("completion_tokens", s.completion_tokens.to_string());
    kv("max_response_tokens", s.max_response_tokens.to_string());
    kv("created_at", quote(&s.created_at.to_rfc3339_opts(SecondsFormat::Secs, true)));
    kv("prompt", quote(&s.prompt_text));
    out.push_str("---\n\n");
    out.push_str(&s.response_text);
    out
}

/// Reads back a file written by [`scenario_markdown`].
pub fn parse_scenario_markdown(text: &str) -> Result<GeneratedScenario, ArchiveError> {
    let bad = |m: &str| ArchiveError::Format(m.to_string());
    let rest = text.strip_prefix("---\n").ok_or_else(|| bad("missing front-matter"))?;
    let end = rest.find("\n---\n").ok_or_else(|| bad("unterminated front-matter"))?;
    let header = &rest[..end];
    let body = &rest[end + 5..];
    let body = body.strip_prefix('\n').unwrap_or(body);

    let mut fields = std::collections::HashMap::new();
    for line in header.lines() {
        let (k, v) = line.split_once(": ").ok_or_else(|| bad(line))?;
        let value: serde_json::Value =
            serde_json::from_str(v).map_err(|e| ArchiveError::Format(format!("{k}: {e}")))?;
        fields.insert(k.to_string(), value);
    }
    let text_field = |k: &str| -> Result<String, ArchiveError> {
        fields.get(k).and_then(|v| v.as_str()).map(str::to_string).ok_or_else(|| bad(k))
    };
    let int_field =
        |k: &str| -> Result<u64, ArchiveError> { fields.get(k).and_then(|v| v.as_u64()).ok_or_else(|| bad(k)) };

    let params = ScenarioParams::new(text_field("narrative_world")?, text_field("subjects")?, text_field("task")?)
        .map_err(|e| ArchiveError::Format(e.to_string()))?;
    let created_at: DateTime<Utc> = text_field("created_at")?
        .parse()
        .map_err(|e| ArchiveError::Format(format!("created_at: {e}")))?;
    Ok(GeneratedScenario {
        preset_id: fields.get("preset").and_then(|v| v.as_u64()).map(|id| id as u8),
        params,
        model_name: text_field("model")?,
        round: int_field("round")? as u32,
        prompt_text: text_field("prompt")?,
        response_text: body.to_string(),
        finish_reason: FinishReason::from(text_field("finish_reason")?),
        prompt_tokens: int_field("prompt_tokens")?,
        completion_tokens: int_field("completion_tokens")?,
        max_response_tokens: int_field("max_response_tokens")? as u32,
        created_at,
    })
}

/// Stores every scenario with its lint report.
///
/// Reports must pair one-to-one with scenarios, in the same order. Files
/// whose content would not change are left untouched, so rewriting the
/// same batch leaves a byte-identical tree.
pub fn write_archive(
    scenarios: &[GeneratedScenario],
    reports: &[LintReport],
    root: &Path,
) -> Result<ArchiveLayout, ArchiveError> {
    if scenarios.len() != reports.len() {
        return Err(ArchiveError::Consistency(format!(
            "{} scenarios but {} lint reports",
            scenarios.len(),
            reports.len()
        )));
    }
    let mut seen = BTreeSet::new();
    for (s, r) in scenarios.iter().zip(reports) {
        let expected = ScenarioRef::of(s);
        if r.scenario_ref != expected {
            return Err(ArchiveError::Consistency(format!(
                "lint report for {}/{} round {} does not match scenario {}/{} round {}",
                r.scenario_ref.model_name,
                r.scenario_ref.key(),
                r.scenario_ref.round,
                expected.model_name,
                expected.key(),
                expected.round
            )));
        }
        if !seen.insert(ArchiveLayout::markdown_path(root, &expected)) {
            return Err(ArchiveError::Consistency(format!(
                "two scenarios map to {}/{} round {}",
                expected.model_name,
                expected.key(),
                expected.round
            )));
        }
    }

    fs::create_dir_all(root).map_err(io_err(root))?;
    let mut entries = Vec::with_capacity(scenarios.len());
    for (s, r) in scenarios.iter().zip(reports) {
        let md = ArchiveLayout::markdown_path(root, &r.scenario_ref);
        let json = ArchiveLayout::lint_path(root, &r.scenario_ref);
        write_if_changed(&md, &scenario_markdown(s))?;
        write_if_changed(&json, &format!("{}\n", r.to_json()))?;
        entries.push((md, json));
    }
    Ok(ArchiveLayout { root: root.to_path_buf(), entries })
}

/// Every lint report stored under `root`, sorted by path.
pub fn read_reports(root: &Path) -> Result<Vec<LintReport>, ArchiveError> {
    let mut paths = Vec::new();
    collect_lint_files(&root.join("rounds"), &mut paths)?;
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            serde_json::from_str(&text).map_err(|e| ArchiveError::Format(format!("{}: {e}", p.display())))
        })
        .collect()
}

fn collect_lint_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), ArchiveError> {
    let entries = match fs::read_dir(dir) {
        Ok(entries) => entries,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(()),
        Err(e) => return Err(io_err(dir)(e)),
    };
    for entry in entries {
        let path = entry.map_err(io_err(dir))?.path();
        if path.is_dir() {
            collect_lint_files(&path, out)?;
        } else if path.to_string_lossy().ends_with(".lint.json") {
            out.push(path);
        }
    }
    Ok(())
}
