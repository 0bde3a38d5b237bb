//! Rule-based checks for generated activity descriptions.
//!
//! Every rule targets a way generated scenarios go wrong in practice:
//! command blocks that do not exist, cut-off endings, over-long answers,
//! incomplete materials lists, unasked-for team splits, extra robots, and
//! pursuit or struggle tasks rewritten as rescues. Matching is case-insensitive
//! and word-bounded; there is no statistical classification, so each finding
//! can be traced to the exact text that triggered it.

mod rules;
mod sections;

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::blocklang::Lexicon;
use crate::catalog::ScenarioParams;
use crate::gateway::{FinishReason, GeneratedScenario};

pub use rules::{
    check_commands, check_length, check_materials, check_multi_robot, check_sections,
    check_task_fidelity, check_team_split, check_truncation, DEFAULT_LENGTH_LIMIT,
};
pub use sections::{detect_sections, find_headings, materials_regions, Section, SectionHeading};

/// Rule identifiers as they appear in findings and JSON reports.
pub mod rule_id {
    pub const HALLUCINATED_COMMAND: &str = "hallucinated_command";
    pub const TRUNCATED: &str = "truncated";
    pub const OVER_LENGTH: &str = "over_length";
    pub const MISSING_MATERIALS: &str = "missing_materials";
    pub const TEAM_SPLIT: &str = "team_split";
    pub const MULTI_ROBOT: &str = "multi_robot";
    pub const TASK_TRANSFORMED: &str = "task_transformed";
    pub const MISSING_SECTION: &str = "missing_section";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub rule_id: String,
    pub severity: Severity,
    /// Byte range into the checked text; `evidence` is exactly that slice.
    pub span: Option<(usize, usize)>,
    pub message: String,
    pub evidence: String,
}

impl Finding {
    /// A finding anchored to `text[range]`.
    pub fn at(
        rule_id: &str,
        severity: Severity,
        text: &str,
        range: Range<usize>,
        message: impl Into<String>,
    ) -> Self {
        Self {
            rule_id: rule_id.to_string(),
            severity,
            evidence: text[range.clone()].to_string(),
            span: Some((range.start, range.end)),
            message: message.into(),
        }
    }

    /// A finding about the text as a whole; no span and empty evidence.
    pub fn whole(rule_id: &str, severity: Severity, message: impl Into<String>) -> Self {
        Self {
            rule_id: rule_id.to_string(),
            severity,
            span: None,
            message: message.into(),
            evidence: String::new(),
        }
    }
}

/// One boolean per failure mode; each is set iff a finding with the
/// matching rule id exists.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub hallucinated_command: bool,
    pub truncated: bool,
    pub over_length: bool,
    pub missing_materials: bool,
    pub team_split: bool,
    pub multi_robot: bool,
    pub task_transformed: bool,
}

impl Flags {
    pub fn from_findings(findings: &[Finding]) -> Self {
        let has = |id: &str| findings.iter().any(|f| f.rule_id == id);
        Self {
            hallucinated_command: has(rule_id::HALLUCINATED_COMMAND),
            truncated: has(rule_id::TRUNCATED),
            over_length: has(rule_id::OVER_LENGTH),
            missing_materials: has(rule_id::MISSING_MATERIALS),
            team_split: has(rule_id::TEAM_SPLIT),
            multi_robot: has(rule_id::MULTI_ROBOT),
            task_transformed: has(rule_id::TASK_TRANSFORMED),
        }
    }

    /// (rule id, flag value) pairs in a fixed order.
    pub fn entries(&self) -> [(&'static str, bool); 7] {
        [
            (rule_id::HALLUCINATED_COMMAND, self.hallucinated_command),
            (rule_id::TRUNCATED, self.truncated),
            (rule_id::OVER_LENGTH, self.over_length),
            (rule_id::MISSING_MATERIALS, self.missing_materials),
            (rule_id::TEAM_SPLIT, self.team_split),
            (rule_id::MULTI_ROBOT, self.multi_robot),
            (rule_id::TASK_TRANSFORMED, self.task_transformed),
        ]
    }

    pub fn any(&self) -> bool {
        self.entries().iter().any(|(_, on)| *on)
    }

    /// Rule ids of the flags that are set.
    pub fn set(&self) -> Vec<&'static str> {
        self.entries().iter().filter(|(_, on)| *on).map(|(id, _)| *id).collect()
    }
}

/// Which scenario a report belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioRef {
    pub model_name: String,
    pub preset_id: Option<u8>,
    /// Missing when a bare text file is linted.
    pub params: Option<ScenarioParams>,
    pub round: u32,
}

impl ScenarioRef {
    pub fn of(scenario: &GeneratedScenario) -> Self {
        Self {
            model_name: scenario.model_name.clone(),
            preset_id: scenario.preset_id,
            params: Some(scenario.params.clone()),
            round: scenario.round,
        }
    }

    /// Preset id or custom slug, as used in archive paths.
    pub fn key(&self) -> String {
        match (&self.params, self.preset_id) {
            (_, Some(id)) => id.to_string(),
            (Some(params), None) => {
                crate::catalog::ScenarioInput { preset_id: None, params: params.clone() }.key()
            }
            (None, None) => "unknown".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintReport {
    pub scenario_ref: ScenarioRef,
    pub findings: Vec<Finding>,
    pub flags: Flags,
    pub sections_detected: Vec<Section>,
}

impl LintReport {
    pub fn has_errors(&self) -> bool {
        self.findings.iter().any(|f| f.severity == Severity::Error)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// What a rule sees.
#[derive(Debug, Clone, Copy)]
pub struct LintInput<'a> {
    pub text: &'a str,
    pub finish_reason: &'a FinishReason,
    /// Story parameters, when known.
    pub params: Option<&'a ScenarioParams>,
}

pub trait Rule: Send + Sync {
    fn id(&self) -> &'static str;
    fn check(&self, input: &LintInput<'_>) -> Vec<Finding>;
}

struct FnRule<F> {
    id: &'static str,
    check: F,
}

impl<F> Rule for FnRule<F>
where
    F: Fn(&LintInput<'_>) -> Vec<Finding> + Send + Sync,
{
    fn id(&self) -> &'static str {
        self.id
    }

    fn check(&self, input: &LintInput<'_>) -> Vec<Finding> {
        (self.check)(input)
    }
}

fn rule<F>(id: &'static str, check: F) -> Box<dyn Rule>
where
    F: Fn(&LintInput<'_>) -> Vec<Finding> + Send + Sync + 'static,
{
    Box::new(FnRule { id, check })
}

/// The rule registry.
pub struct Linter {
    rules: Vec<Box<dyn Rule>>,
}

impl Linter {
    pub fn new(lexicon: Lexicon, length_limit: usize) -> Self {
        let rules = vec![
            rule(rule_id::HALLUCINATED_COMMAND, move |i| check_commands(i.text, &lexicon)),
            rule(rule_id::TRUNCATED, |i| check_truncation(i.text, i.finish_reason)),
            rule(rule_id::OVER_LENGTH, move |i| check_length(i.text, length_limit)),
            rule(rule_id::MISSING_SECTION, |i| check_sections(i.text).1),
            rule(rule_id::MISSING_MATERIALS, |i| check_materials(i.text)),
            rule(rule_id::TEAM_SPLIT, |i| check_team_split(i.text)),
            rule(rule_id::MULTI_ROBOT, |i| check_multi_robot(i.text)),
            rule(rule_id::TASK_TRANSFORMED, |i| match i.params {
                Some(p) => check_task_fidelity(p, i.text),
                None => Vec::new(),
            }),
        ];
        Self { rules }
    }

    /// Appends a custom rule to the registry.
    pub fn with_rule(mut self, rule: Box<dyn Rule>) -> Self {
        self.rules.push(rule);
        self
    }

    pub fn rule_ids(&self) -> Vec<&'static str> {
        self.rules.iter().map(|r| r.id()).collect()
    }

    /// Runs every rule over `input`.
    pub fn findings(&self, input: &LintInput<'_>) -> Vec<Finding> {
        self.rules.iter().flat_map(|r| r.check(input)).collect()
    }

    pub fn lint(&self, scenario: &GeneratedScenario) -> LintReport {
        let input = LintInput {
            text: &scenario.response_text,
            finish_reason: &scenario.finish_reason,
            params: Some(&scenario.params),
        };
        self.report(&input, ScenarioRef::of(scenario))
    }

    /// Runs every rule and assembles the report for `scenario_ref`.
    pub fn report(&self, input: &LintInput<'_>, scenario_ref: ScenarioRef) -> LintReport {
        let findings = self.findings(input);
        LintReport {
            scenario_ref,
            flags: Flags::from_findings(&findings),
            sections_detected: detect_sections(input.text),
            findings,
        }
    }
}

impl Default for Linter {
    fn default() -> Self {
        Self::new(Lexicon::default(), DEFAULT_LENGTH_LIMIT)
    }
}

/// Lints with the shipped lexicon and default length limit.
pub fn lint(scenario: &GeneratedScenario) -> LintReport {
    Linter::default().lint(scenario)
}
