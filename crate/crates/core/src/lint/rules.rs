//! The individual checks. Each is a pure function of its input text (and,
//! where needed, the finish reason or story parameters).

use std::ops::Range;
use std::sync::LazyLock;

use regex::Regex;

use super::sections::{detect_sections, lines_with_ranges, materials_regions, Section};
use super::{rule_id, Finding, Severity};
use crate::blocklang::Lexicon;
use crate::catalog::ScenarioParams;
use crate::gateway::FinishReason;

/// Default character budget for a scenario before it counts as over-long.
pub const DEFAULT_LENGTH_LIMIT: usize = 1800;

const PERMITTED: &str = "forward, turn left and turn right";

/// Flags command blocks named in `text` that are not forward, turn left or
/// turn right. One error per occurrence of a lexicon entry.
pub fn check_commands(text: &str, lexicon: &Lexicon) -> Vec<Finding> {
    let Some(re) = lexicon.pattern() else { return Vec::new() };
    re.find_iter(text)
        .filter(|m| !is_turn_direction(text, m.range()))
        .map(|m| {
            Finding::at(
                rule_id::HALLUCINATED_COMMAND,
                Severity::Error,
                text,
                m.range(),
                format!(
                    "\"{}\" is not a Cubetto command block; the only blocks are {PERMITTED}",
                    m.as_str()
                ),
            )
        })
        .collect()
}

/// "left"/"right" directly after "turn" or "rotate" name a permitted block
/// even if an edited lexicon lists the bare direction.
fn is_turn_direction(text: &str, range: Range<usize>) -> bool {
    let word = text[range.clone()].to_ascii_lowercase();
    if word != "left" && word != "right" {
        return false;
    }
    let before = text[..range.start].trim_end().to_ascii_lowercase();
    before.ends_with("turn") || before.ends_with("rotate")
}

const CLEAN_ENDINGS: [char; 8] = ['.', '!', '?', ':', ')', '"', '”', '’'];

static LIST_ITEM: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*(?:[-*+•]|\d+[.)])\s").unwrap());

/// An error when the server cut the response at its token budget; a
/// warning when a completed response still stops mid-sentence.
pub fn check_truncation(text: &str, finish_reason: &FinishReason) -> Vec<Finding> {
    match finish_reason {
        FinishReason::Length => vec![Finding::whole(
            rule_id::TRUNCATED,
            Severity::Error,
            "truncated: the response ran past its token budget and the ending is missing",
        )],
        FinishReason::Stop => {
            let Some((range, line)) = lines_with_ranges(text).filter(|(_, l)| !l.trim().is_empty()).last()
            else {
                return Vec::new();
            };
            let ending = line.trim_end().trim_end_matches(['*', '_', '`']);
            let clean = ending.ends_with(CLEAN_ENDINGS) || LIST_ITEM.is_match(line);
            if clean {
                return Vec::new();
            }
            let trimmed = trim_range(text, range);
            vec![Finding::at(
                rule_id::TRUNCATED,
                Severity::Warning,
                text,
                trimmed,
                "the response stops mid-sentence; the ending may be missing",
            )]
        }
        FinishReason::Other(_) => Vec::new(),
    }
}

/// A warning when `text` has more than `limit_chars` characters.
pub fn check_length(text: &str, limit_chars: usize) -> Vec<Finding> {
    let count = text.chars().count();
    if count <= limit_chars {
        return Vec::new();
    }
    vec![Finding::whole(
        rule_id::OVER_LENGTH,
        Severity::Warning,
        format!("{count} characters, over the limit of {limit_chars}"),
    )]
}

/// Which canonical sections appear, plus one info finding per absent section.
pub fn check_sections(text: &str) -> (Vec<Section>, Vec<Finding>) {
    let found = detect_sections(text);
    let missing = Section::ALL
        .iter()
        .filter(|s| !found.contains(s))
        .map(|s| {
            Finding::whole(
                rule_id::MISSING_SECTION,
                Severity::Info,
                format!("no {} section", s.label()),
            )
        })
        .collect();
    (found, missing)
}

static BLOCKS: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bblocks?\b").unwrap());
static BOARD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bboards?\b").unwrap());
static ROBOT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\b(?:cubetto|robot)\b").unwrap());
static PREV_WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)([a-z]+)[\s-]*$").unwrap());

// Blocks and boards that are toys or classroom furniture, not Cubetto parts.
const NOT_COMMAND_BLOCKS: [&str; 6] = ["lego", "duplo", "building", "toy", "wooden", "foam"];
const NOT_CONTROL_BOARD: [&str; 10] =
    ["game", "story", "white", "chalk", "bulletin", "card", "foam", "poster", "cork", "black"];

fn mentions(re: &Regex, text: &str, excluded: &[&str]) -> bool {
    re.find_iter(text).any(|m| {
        let prev = PREV_WORD
            .captures(&text[..m.start()])
            .map(|c| c[1].to_ascii_lowercase());
        !prev.is_some_and(|p| excluded.contains(&p.as_str()))
    })
}

/// A warning when a materials list names only part of the robot kit:
/// command blocks without the control board, the board without blocks, or
/// the robot without either.
pub fn check_materials(text: &str) -> Vec<Finding> {
    let mut out = Vec::new();
    for region in materials_regions(text) {
        let section = &text[region.clone()];
        let blocks = mentions(&BLOCKS, section, &NOT_COMMAND_BLOCKS);
        let board = mentions(&BOARD, section, &NOT_CONTROL_BOARD);
        let robot = ROBOT.is_match(section);
        let missing = match (robot, blocks, board) {
            (_, true, false) => "board missing",
            (_, false, true) => "command blocks missing",
            (true, false, false) => "command blocks and board missing",
            _ => continue,
        };
        out.push(Finding::at(
            rule_id::MISSING_MATERIALS,
            Severity::Warning,
            text,
            region,
            format!("{missing}: the robot needs both its command blocks and its control board"),
        ));
    }
    out
}

static TEAM_SPLIT: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)\b(?:divide|divides|dividing|split|splits|splitting|separate|separating|organi[sz]e|break)\b[^.!?\n]{0,60}?\b(?:teams?|groups?)\b|\b(?:in|into) (?:teams|groups|pairs) of\b|\bform (?:two |three |four |small )?(?:teams|groups)\b",
    )
    .unwrap()
});

/// Info findings for suggestions to divide the children into teams.
pub fn check_team_split(text: &str) -> Vec<Finding> {
    TEAM_SPLIT
        .find_iter(text)
        .map(|m| {
            Finding::at(
                rule_id::TEAM_SPLIT,
                Severity::Info,
                text,
                m.range(),
                "suggests splitting the children into teams, which assumes a class size",
            )
        })
        .collect()
}

static MULTI_ROBOT: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)\b(?:each|every) (?:team|group|child|pair|player)(?:'s|’s)? (?:own )?(?:cubetto|robot)s?\b|\b(?:its|their|his|her) own (?:cubetto|robot)\b|\b(?:two|three|four|five|six|several|multiple|many|[2-9]) (?:cubetto|robot)s?\b|\b(?:a|one) (?:cubetto|robot) (?:for|per) (?:each|every)\b|\bcubettos\b",
    )
    .unwrap()
});

/// Warnings for phrasing that implies more than one robot.
pub fn check_multi_robot(text: &str) -> Vec<Finding> {
    MULTI_ROBOT
        .find_iter(text)
        .map(|m| {
            Finding::at(
                rule_id::MULTI_ROBOT,
                Severity::Warning,
                text,
                m.range(),
                "proposes more than one robot; the kit has a single Cubetto",
            )
        })
        .collect()
}

static RESCUE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\b(?:rescu(?:e|es|ed|ing|er|ers)|save the)\b").unwrap());
static PURSUIT_OR_STRUGGLE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)\b(?:chas(?:e|es|ed|ing)|pursu(?:e|es|ed|ing|it|its)|catch(?:es|ing)?|caught|battl(?:e|es|ed|ing)|struggl(?:e|es|ed|ing))\b",
    )
    .unwrap()
});

/// A warning when a pursuit or struggle task came back as a rescue mission.
pub fn check_task_fidelity(params: &ScenarioParams, text: &str) -> Vec<Finding> {
    let task = params.task().to_lowercase();
    if !task.contains("pursuit") && !task.contains("struggle") {
        return Vec::new();
    }
    if PURSUIT_OR_STRUGGLE.is_match(text) {
        return Vec::new();
    }
    let Some(m) = RESCUE.find(text) else { return Vec::new() };
    vec![Finding::at(
        rule_id::TASK_TRANSFORMED,
        Severity::Warning,
        text,
        m.range(),
        format!("task transformed: asked to \"{}\" but the activity is a rescue mission", params.task()),
    )]
}

fn trim_range(text: &str, range: Range<usize>) -> Range<usize> {
    let slice = &text[range.clone()];
    let start = range.start + (slice.len() - slice.trim_start().len());
    let end = range.end - (slice.len() - slice.trim_end().len());
    start..end.max(start)
}
