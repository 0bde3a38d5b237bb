use std::fmt;
use std::ops::Range;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// The sections a generated activity description usually carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    Topic,
    Objectives,
    Materials,
    Setup,
    Gameplay,
    LearningOutcomes,
    Variations,
}

impl Section {
    pub const ALL: [Section; 7] = [
        Section::Topic,
        Section::Objectives,
        Section::Materials,
        Section::Setup,
        Section::Gameplay,
        Section::LearningOutcomes,
        Section::Variations,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Section::Topic => "scenario topic",
            Section::Objectives => "objectives",
            Section::Materials => "materials",
            Section::Setup => "preparatory setup",
            Section::Gameplay => "gameplay",
            Section::LearningOutcomes => "learning outcomes",
            Section::Variations => "variations",
        }
    }

    /// Heading keywords, matched case-insensitively at the start of a heading.
    pub fn keywords(self) -> &'static [&'static str] {
        match self {
            Section::Topic => &["topic", "theme", "scenario", "story", "title", "game title", "game name"],
            Section::Objectives => &["objective", "objectives", "goal", "goals", "aim", "aims"],
            Section::Materials => &["materials", "material", "you will need", "what you need", "supplies", "equipment"],
            Section::Setup => &["setup", "set up", "set-up", "preparation", "preparatory", "getting ready", "before you start", "before playing"],
            Section::Gameplay => &["gameplay", "game play", "instructions", "how to play", "rules", "procedure", "steps", "playing the game"],
            Section::LearningOutcomes => &["learning outcomes", "learning outcome", "learning goals", "learning objectives", "what children learn", "skills", "educational value", "benefits"],
            Section::Variations => &["variations", "variation", "extensions", "extension", "adaptations", "differentiation", "variants"],
        }
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A heading-like line that names a canonical section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionHeading {
    pub section: Section,
    /// Byte range of the whole line.
    pub line: Range<usize>,
}

static MATCHERS: LazyLock<Vec<(Section, Regex)>> = LazyLock::new(|| {
    Section::ALL
        .iter()
        .map(|&s| {
            let mut words: Vec<&str> = s.keywords().to_vec();
            words.sort_by_key(|w| std::cmp::Reverse(w.len()));
            let alts: Vec<String> = words.iter().map(|w| regex::escape(w)).collect();
            (s, Regex::new(&format!(r"(?i)^(?:{})\b", alts.join("|"))).unwrap())
        })
        .collect()
});

// Leading list/heading markup: '#', '*', '_', '-', '>', numbering like "1." or "2)".
static LEADING_MARKUP: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?:[#*_>\-\s]|\d+[.)])*").unwrap());

/// Lines with their byte ranges (without the line terminator).
pub(crate) fn lines_with_ranges(text: &str) -> impl Iterator<Item = (Range<usize>, &str)> {
    let mut start = 0;
    text.split_inclusive('\n').map(move |raw| {
        let line = raw.trim_end_matches(['\n', '\r']);
        let range = start..start + line.len();
        start += raw.len();
        (range, line)
    })
}

/// True when a line reads like a heading rather than prose: markdown
/// heading, bold line, a label ending in ':' or containing one, or a
/// short line without closing punctuation.
pub(crate) fn is_heading_like(line: &str) -> bool {
    let t = line.trim();
    if t.is_empty() {
        return false;
    }
    if t.starts_with('#') || (t.starts_with("**") && t.len() > 4) || t.contains(':') {
        return true;
    }
    t.chars().count() <= 60 && !t.ends_with(['.', '!', '?', ','])
}

/// Heading-like lines that open one of the canonical sections.
pub fn find_headings(text: &str) -> Vec<SectionHeading> {
    let mut out = Vec::new();
    for (range, line) in lines_with_ranges(text) {
        if !is_heading_like(line) {
            continue;
        }
        let stripped = &line[LEADING_MARKUP.find(line).map_or(0, |m| m.end())..];
        if let Some((section, _)) = MATCHERS.iter().find(|(_, re)| re.is_match(stripped)) {
            out.push(SectionHeading { section: *section, line: range });
        }
    }
    out
}

/// Canonical sections present in `text`, in canonical order.
pub fn detect_sections(text: &str) -> Vec<Section> {
    let mut found: Vec<Section> = find_headings(text).into_iter().map(|h| h.section).collect();
    found.sort();
    found.dedup();
    found
}

/// Byte ranges covered by each materials section: from its heading to the
/// next heading-like line that is not a list item, or the end of the text.
pub fn materials_regions(text: &str) -> Vec<Range<usize>> {
    let lines: Vec<(Range<usize>, &str)> = lines_with_ranges(text).collect();
    let mut regions = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let is_materials = find_headings(lines[i].1)
            .first()
            .is_some_and(|h| h.section == Section::Materials);
        if !is_materials {
            i += 1;
            continue;
        }
        let start = lines[i].0.start;
        let mut end = lines[i].0.end;
        let mut j = i + 1;
        while j < lines.len() {
            let (ref range, line) = lines[j];
            let t = line.trim_start();
            let list_item = t.starts_with(['-', '*', '+', '•'])
                && !t.starts_with("**")
                || t.chars().next().is_some_and(|c| c.is_ascii_digit());
            if !list_item && !t.is_empty() && (is_heading_like(line) || !find_headings(line).is_empty()) {
                break;
            }
            if !t.is_empty() {
                end = range.end;
            }
            j += 1;
        }
        regions.push(start..end);
        i = j;
    }
    regions
}
