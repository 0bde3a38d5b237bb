//! Archive layout, cross-model comparison and teacher-facing documents.

mod archive;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

pub use archive::{
    parse_scenario_markdown, path_safe, read_reports, scenario_markdown, write_archive, ArchiveError,
    ArchiveLayout,
};

use crate::gateway::GeneratedScenario;
use crate::lint::{rule_id, Finding, Flags, LintReport, Severity};

/// Matrix glyphs, in the order they appear inside a cell.
pub const GLYPHS: [(char, &str, &str); 7] = [
    ('T', rule_id::TRUNCATED, "truncated"),
    ('H', rule_id::HALLUCINATED_COMMAND, "hallucinated command block"),
    ('L', rule_id::OVER_LENGTH, "over the length limit"),
    ('K', rule_id::MISSING_MATERIALS, "incomplete robot kit in materials"),
    ('R', rule_id::TASK_TRANSFORMED, "task turned into a rescue"),
    ('M', rule_id::MULTI_ROBOT, "more than one robot"),
    ('G', rule_id::TEAM_SPLIT, "children split into groups"),
];

fn glyphs(flags: &Flags) -> String {
    let set = flags.set();
    GLYPHS
        .iter()
        .filter(|(_, id, _)| set.contains(id))
        .map(|(g, _, _)| g.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Sort key for preset columns: numbered presets first, then custom slugs.
fn column_order(key: &str) -> (u32, String) {
    match key.parse::<u32>() {
        Ok(n) => (n, String::new()),
        Err(_) => (u32::MAX, key.to_string()),
    }
}

/// Markdown table with one row per model and one column per preset.
///
/// A cell shows the glyph of every flag raised for that model and preset in
/// any round (see [`GLYPHS`]); an empty cell means no flags.
pub fn comparison_matrix(reports: &[LintReport]) -> String {
    let mut columns: Vec<String> = reports
        .iter()
        .map(|r| r.scenario_ref.key())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    columns.sort_by_key(|k| column_order(k));

    let mut cells: BTreeMap<&str, BTreeMap<String, Flags>> = BTreeMap::new();
    for r in reports {
        let cell = cells
            .entry(r.scenario_ref.model_name.as_str())
            .or_default()
            .entry(r.scenario_ref.key())
            .or_default();
        let f = r.flags;
        cell.hallucinated_command |= f.hallucinated_command;
        cell.truncated |= f.truncated;
        cell.over_length |= f.over_length;
        cell.missing_materials |= f.missing_materials;
        cell.team_split |= f.team_split;
        cell.multi_robot |= f.multi_robot;
        cell.task_transformed |= f.task_transformed;
    }

    let mut out = String::from("| model |");
    for c in &columns {
        out.push_str(&format!(" {c} |"));
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(columns.len()));
    out.push('\n');
    for (model, row) in &cells {
        out.push_str(&format!("| {} |", model.replace('|', "\\|")));
        for c in &columns {
            let text = row.get(c).map(glyphs).unwrap_or_default();
            if text.is_empty() {
                out.push_str("  |");
            } else {
                out.push_str(&format!(" {text} |"));
            }
        }
        out.push('\n');
    }
    out
}

/// Markdown legend for the matrix glyphs.
pub fn matrix_legend() -> String {
    GLYPHS
        .iter()
        .map(|(g, _, label)| format!("- **{g}**: {label}\n"))
        .collect()
}

pub const DISCLAIMER: &str = "This activity was drafted by a language model. It is not a \
proof-read, ready-to-use guide: treat it as a creativity prompt and adapt it to your class.";

fn review_note(finding: &Finding, scenario: &GeneratedScenario) -> String {
    match finding.rule_id.as_str() {
        rule_id::HALLUCINATED_COMMAND => format!(
            "The text uses a \"{}\" block, which Cubetto does not have. Only three command \
             blocks are used: forward, turn left and turn right. Rework that step with them.",
            finding.evidence.to_lowercase()
        ),
        rule_id::TRUNCATED if finding.severity == Severity::Error => "The description was cut \
            off, so its ending is missing. The suggested task is usually sufficiently clear to \
            run the activity anyway; add your own closing steps."
            .to_string(),
        rule_id::TRUNCATED => format!(
            "The description seems to stop mid-sentence (\"{}\"), so the ending may be missing. \
             The suggested task is usually sufficiently clear to run the activity anyway; add \
             your own closing steps.",
            finding.evidence
        ),
        rule_id::OVER_LENGTH => format!(
            "The description is longer than planned ({}). Skim it for the essentials.",
            finding.message
        ),
        rule_id::MISSING_MATERIALS => format!(
            "The materials list is incomplete ({}). Cubetto needs the robot, its command blocks \
             and its control board together.",
            finding.message.split(':').next().unwrap_or_default()
        ),
        rule_id::MULTI_ROBOT => format!(
            "The activity suggests more than one robot (\"{}\"). It works with a single Cubetto \
             if groups take turns.",
            finding.evidence
        ),
        rule_id::TASK_TRANSFORMED => format!(
            "The requested task was to {}, but the activity turned it into a rescue mission. \
             Consider bringing back the moving opponent, for example by moving the other \
             character between turns.",
            scenario.params.task()
        ),
        _ => finding.message.clone(),
    }
}

/// The scenario text for a teacher, followed by review notes.
///
/// Errors and warnings become plain-language notes; info findings are left
/// out. The creativity-prompt disclaimer is always present.
pub fn teacher_doc(scenario: &GeneratedScenario, report: &LintReport) -> String {
    let p = &scenario.params;
    let mut out = format!(
        "# {}: {} ({})\n\n{}\n",
        p.narrative_world(),
        p.subjects(),
        p.task(),
        scenario.response_text.trim_end()
    );
    out.push_str("\n---\n\n");
    out.push_str(&format!("> {DISCLAIMER}\n"));

    let mut notes: Vec<String> = Vec::new();
    for f in report.findings.iter().filter(|f| f.severity > Severity::Info) {
        let note = review_note(f, scenario);
        if !notes.contains(&note) {
            notes.push(note);
        }
    }
    if !notes.is_empty() {
        out.push_str("\n## Review notes\n\n");
        for n in notes {
            out.push_str(&format!("- {n}\n"));
        }
    }
    out
}

/// Where [`teacher_doc`] output is stored: `teacher/round-{r}/{model}/{key}.md`.
pub fn teacher_doc_path(root: &Path, scenario: &GeneratedScenario) -> PathBuf {
    root.join("teacher")
        .join(format!("round-{}", scenario.round))
        .join(path_safe(&scenario.model_name))
        .join(format!("{}.md", scenario.key()))
}

pub fn write_teacher_doc(
    root: &Path,
    scenario: &GeneratedScenario,
    report: &LintReport,
) -> Result<PathBuf, ArchiveError> {
    let path = teacher_doc_path(root, scenario);
    archive::write_if_changed(&path, &teacher_doc(scenario, report))?;
    Ok(path)
}

/// Writes `comparison.md` (matrix plus legend) at the archive root.
pub fn write_matrix(root: &Path, reports: &[LintReport]) -> Result<PathBuf, ArchiveError> {
    let path = root.join("comparison.md");
    let text = format!(
        "# Comparison\n\n{}\n{}",
        comparison_matrix(reports),
        matrix_legend()
    );
    archive::write_if_changed(&path, &text)?;
    Ok(path)
}
