use std::ops::Range;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::Serialize;
use thiserror::Error;

use super::command::{Command, Program};

/// The shipped list of command blocks that do not exist.
pub const DEFAULT_LEXICON: &str = include_str!("../../data/illegal_commands.txt");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unknown command `{token}` at position {position} (byte {offset})")]
    UnknownToken { token: String, position: usize, offset: usize },
    #[error("program has {len} commands but the board holds {capacity}")]
    OverCapacity { len: usize, capacity: usize },
}

/// Command-like words that name blocks the robot does not have.
///
/// Entries are lowercase word sequences; matching is case-insensitive and
/// respects word boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    entries: Vec<Vec<String>>,
}

impl Lexicon {
    /// One entry per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        let mut entries: Vec<Vec<String>> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.split_whitespace().map(|w| w.to_lowercase()).collect())
            .collect();
        entries.dedup();
        Self { entries }
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn entries(&self) -> impl Iterator<Item = String> + '_ {
        self.entries.iter().map(|words| words.join(" "))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Regex alternation over all entries, longest first so that
    /// `backwards` wins over `backward` and `back`.
    pub fn pattern(&self) -> Option<Regex> {
        if self.entries.is_empty() {
            return None;
        }
        let mut alts: Vec<String> = self
            .entries
            .iter()
            .map(|words| {
                words
                    .iter()
                    .map(|w| regex::escape(w))
                    .collect::<Vec<_>>()
                    .join(r"\s+")
            })
            .collect();
        alts.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        let src = format!(r"(?i)\b(?:{})\b", alts.join("|"));
        Some(Regex::new(&src).expect("escaped lexicon pattern"))
    }

    /// Length in words of the entry matching `words` at its start, if any.
    fn match_at(&self, words: &[&str]) -> Option<usize> {
        self.entries
            .iter()
            .filter(|entry| {
                entry.len() <= words.len()
                    && entry.iter().zip(words).all(|(e, w)| w.eq_ignore_ascii_case(e))
            })
            .map(Vec::len)
            .max()
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        Self::parse(DEFAULT_LEXICON)
    }
}

fn single_word(word: &str) -> Option<Command> {
    match word.to_ascii_lowercase().as_str() {
        "forward" | "green" => Some(Command::Forward),
        "left" | "yellow" => Some(Command::TurnLeft),
        "right" | "red" => Some(Command::TurnRight),
        _ => None,
    }
}

/// Two-word forms: "move forward", "turn left", "rotate right", ...
fn two_words(first: &str, second: &str) -> Option<Command> {
    let first = first.to_ascii_lowercase();
    let second = second.to_ascii_lowercase();
    match (first.as_str(), second.as_str()) {
        ("move", "forward") => Some(Command::Forward),
        ("turn" | "rotate", "left") => Some(Command::TurnLeft),
        ("turn" | "rotate", "right") => Some(Command::TurnRight),
        _ => None,
    }
}

/// Parses a comma/whitespace separated command listing.
///
/// Accepts the canonical names, "move forward", "left"/"right",
/// "rotate left"/"rotate right" and the block colours green, yellow, red.
pub fn parse_program(text: &str, capacity: usize) -> Result<Program, ParseError> {
    let words: Vec<(usize, &str)> = text
        .split(|c: char| c.is_whitespace() || matches!(c, ',' | ';' | '.'))
        .filter(|w| !w.is_empty())
        .map(|w| (w.as_ptr() as usize - text.as_ptr() as usize, w))
        .collect();

    let mut commands = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let (offset, word) = words[i];
        if let Some(cmd) = words.get(i + 1).and_then(|(_, next)| two_words(word, next)) {
            commands.push(cmd);
            i += 2;
            continue;
        }
        if let Some(cmd) = single_word(word) {
            commands.push(cmd);
            i += 1;
            continue;
        }
        // Name the whole two-word phrase for "move left" and friends.
        let token = match (word.to_ascii_lowercase().as_str(), words.get(i + 1)) {
            ("move" | "turn" | "rotate", Some((_, next))) => format!("{word} {next}"),
            _ => word.to_string(),
        };
        return Err(ParseError::UnknownToken { token, position: commands.len(), offset });
    }
    let program = Program::new(commands);
    program.check_capacity(capacity)?;
    Ok(program)
}

/// A program found inside prose.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtractedProgram {
    pub program: Program,
    pub span: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum SkipReason {
    IllegalToken { token: String },
    OverCapacity { len: usize, capacity: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedRun {
    pub span: Range<usize>,
    pub text: String,
    #[serde(flatten)]
    pub reason: SkipReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Extraction {
    pub programs: Vec<ExtractedProgram>,
    pub skipped: Vec<SkippedRun>,
}

static WORD: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[A-Za-z]+").unwrap());
// Text allowed between two commands of the same run: separators and list markers.
static GAP: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?:[\s,;*>\-→]|\d+[.)])*$").unwrap());
static SPACE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s+$").unwrap());

#[derive(Debug)]
enum Token {
    Valid(Command),
    Illegal(String),
}

/// Scans prose for runs of two or more adjacent command phrases.
///
/// Prose extraction only recognises the verbal forms ("forward", "move
/// forward", "turn/rotate left/right"); bare "left", "right" and colour
/// names are too common in ordinary sentences. Runs that contain a lexicon
/// token, or exceed `capacity`, are reported in [`Extraction::skipped`].
pub fn extract_programs(text: &str, lexicon: &Lexicon, capacity: usize) -> Extraction {
    let words: Vec<(Range<usize>, &str)> =
        WORD.find_iter(text).map(|m| (m.range(), m.as_str())).collect();
    let joined_by_space =
        |a: &Range<usize>, b: &Range<usize>| SPACE.is_match(&text[a.end..b.start]);

    // Classify command-like phrases.
    let mut tokens: Vec<(Range<usize>, Token)> = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let (ref range, word) = words[i];
        if let Some((next_range, next)) = words.get(i + 1) {
            if joined_by_space(range, next_range) {
                if let Some(cmd) = two_words(word, next) {
                    tokens.push((range.start..next_range.end, Token::Valid(cmd)));
                    i += 2;
                    continue;
                }
            }
        }
        if word.eq_ignore_ascii_case("forward") {
            tokens.push((range.clone(), Token::Valid(Command::Forward)));
            i += 1;
            continue;
        }
        let window: Vec<&str> = words[i..]
            .iter()
            .enumerate()
            .take_while(|(k, (r, _))| *k == 0 || joined_by_space(&words[i + k - 1].0, r))
            .map(|(_, (_, w))| *w)
            .collect();
        if let Some(n) = lexicon.match_at(&window) {
            let span = range.start..words[i + n - 1].0.end;
            tokens.push((span.clone(), Token::Illegal(text[span].to_string())));
            i += n;
            continue;
        }
        i += 1;
    }

    // Group into runs of adjacent tokens. A run breaks on any other word or
    // punctuation between two tokens.
    let mut runs: Vec<Vec<(Range<usize>, Token)>> = Vec::new();
    for (range, token) in tokens {
        let adjacent = runs.last().and_then(|run| run.last()).is_some_and(|(prev, _)| {
            GAP.is_match(&text[prev.end..range.start])
        });
        if adjacent {
            runs.last_mut().unwrap().push((range, token));
        } else {
            runs.push(vec![(range, token)]);
        }
    }

    let mut out = Extraction::default();
    for run in runs.into_iter().filter(|r| r.len() >= 2) {
        let span = run[0].0.start..run[run.len() - 1].0.end;
        let illegal = run.iter().find_map(|(_, t)| match t {
            Token::Illegal(s) => Some(s.clone()),
            Token::Valid(_) => None,
        });
        if let Some(token) = illegal {
            out.skipped.push(SkippedRun {
                text: text[span.clone()].to_string(),
                span,
                reason: SkipReason::IllegalToken { token },
            });
            continue;
        }
        let program: Program = run
            .iter()
            .filter_map(|(_, t)| match t {
                Token::Valid(c) => Some(*c),
                Token::Illegal(_) => None,
            })
            .collect();
        if program.len() > capacity {
            out.skipped.push(SkippedRun {
                text: text[span.clone()].to_string(),
                span,
                reason: SkipReason::OverCapacity { len: program.len(), capacity },
            });
            continue;
        }
        out.programs.push(ExtractedProgram { program, span });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use Command::*;

    fn p(cmds: &[Command]) -> Program {
        Program::new(cmds.to_vec())
    }

    #[test]
    fn parses_names_and_colours() {
        assert_eq!(parse_program("forward, forward, turn left", 12).unwrap(), p(&[Forward, Forward, TurnLeft]));
        assert_eq!(parse_program("green green red", 12).unwrap(), p(&[Forward, Forward, TurnRight]));
        assert_eq!(parse_program("", 12).unwrap(), Program::default());
        assert_eq!(
            parse_program("Move Forward; rotate right, LEFT yellow", 12).unwrap(),
            p(&[Forward, TurnRight, TurnLeft, TurnLeft])
        );
    }

    #[test]
    fn unknown_token_is_positioned() {
        assert_eq!(
            parse_program("forward, backward", 12),
            Err(ParseError::UnknownToken { token: "backward".into(), position: 1, offset: 9 })
        );
        assert_eq!(
            parse_program("forward move left", 12),
            Err(ParseError::UnknownToken { token: "move left".into(), position: 1, offset: 8 })
        );
        assert_eq!(
            parse_program("turn", 12),
            Err(ParseError::UnknownToken { token: "turn".into(), position: 0, offset: 0 })
        );
    }

    #[test]
    fn capacity_is_enforced() {
        let text = vec!["forward"; 13].join(", ");
        assert_eq!(
            parse_program(&text, 12),
            Err(ParseError::OverCapacity { len: 13, capacity: 12 })
        );
        assert_eq!(parse_program(&text, 13).unwrap().len(), 13);
    }

    #[test]
    fn lexicon_prefers_longest_entry() {
        let lex = Lexicon::default();
        let re = lex.pattern().unwrap();
        let hits: Vec<_> = re.find_iter("go backwards, back, Move  Left").map(|m| m.as_str()).collect();
        assert_eq!(hits, ["backwards", "back", "Move  Left"]);
        assert!(lex.entries().any(|e| e == "negation"));
        assert!(Lexicon::parse("# only comments\n\n").pattern().is_none());
    }

    #[test]
    fn extracts_run_from_prose() {
        let text = "Press forward, forward, turn right, forward to reach the ship.";
        let ex = extract_programs(text, &Lexicon::default(), 12);
        assert_eq!(ex.programs.len(), 1);
        assert_eq!(ex.programs[0].program, p(&[Forward, Forward, TurnRight, Forward]));
        assert_eq!(&text[ex.programs[0].span.clone()], "forward, forward, turn right, forward");
        assert!(ex.skipped.is_empty());
    }

    #[test]
    fn extraction_thresholds() {
        let lex = Lexicon::default();
        assert_eq!(extract_programs("The pirates sail home.", &lex, 12), Extraction::default());
        assert!(extract_programs("Cubetto moves forward to the island.", &lex, 12).programs.is_empty());
        // bare left/right are not commands in prose
        assert!(extract_programs("on the left, right behind", &lex, 12).programs.is_empty());
    }

    #[test]
    fn extraction_skips_illegal_and_long_runs() {
        let lex = Lexicon::default();
        let ex = extract_programs("Try forward, backward, turn left now.", &lex, 12);
        assert!(ex.programs.is_empty());
        assert_eq!(ex.skipped.len(), 1);
        assert_eq!(ex.skipped[0].reason, SkipReason::IllegalToken { token: "backward".into() });

        let ex = extract_programs("forward, forward, forward", &lex, 2);
        assert_eq!(ex.skipped[0].reason, SkipReason::OverCapacity { len: 3, capacity: 2 });
    }

    #[test]
    fn extraction_across_list_markers() {
        let text = "Program:\n1. forward\n2. turn left\n3. forward\n\nThen celebrate.";
        let ex = extract_programs(text, &Lexicon::default(), 12);
        assert_eq!(ex.programs.len(), 1);
        assert_eq!(ex.programs[0].program, p(&[Forward, TurnLeft, Forward]));
    }
}
