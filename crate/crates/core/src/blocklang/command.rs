use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Default slot count of the physical control board.
pub const DEFAULT_CAPACITY: usize = 12;

/// One movement block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Forward,
    TurnLeft,
    TurnRight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockColor {
    Green,
    Yellow,
    Red,
}

impl Command {
    pub const ALL: [Command; 3] = [Command::Forward, Command::TurnLeft, Command::TurnRight];

    pub fn color(self) -> BlockColor {
        match self {
            Command::Forward => BlockColor::Green,
            Command::TurnLeft => BlockColor::Yellow,
            Command::TurnRight => BlockColor::Red,
        }
    }

    /// Canonical lowercase name, as printed in programs.
    pub fn name(self) -> &'static str {
        match self {
            Command::Forward => "forward",
            Command::TurnLeft => "turn left",
            Command::TurnRight => "turn right",
        }
    }

    /// TurnLeft and TurnRight swapped.
    pub fn mirrored(self) -> Command {
        match self {
            Command::Forward => Command::Forward,
            Command::TurnLeft => Command::TurnRight,
            Command::TurnRight => Command::TurnLeft,
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for BlockColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockColor::Green => "green",
            BlockColor::Yellow => "yellow",
            BlockColor::Red => "red",
        })
    }
}

/// Compass heading. North is +y, east is +x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Heading {
    #[serde(alias = "n", alias = "north")]
    N,
    #[serde(alias = "e", alias = "east")]
    E,
    #[serde(alias = "s", alias = "south")]
    S,
    #[serde(alias = "w", alias = "west")]
    W,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::N, Heading::E, Heading::S, Heading::W];

    pub fn left(self) -> Heading {
        match self {
            Heading::N => Heading::W,
            Heading::W => Heading::S,
            Heading::S => Heading::E,
            Heading::E => Heading::N,
        }
    }

    pub fn right(self) -> Heading {
        match self {
            Heading::N => Heading::E,
            Heading::E => Heading::S,
            Heading::S => Heading::W,
            Heading::W => Heading::N,
        }
    }

    /// Unit displacement of one forward move.
    pub fn delta(self) -> (i64, i64) {
        match self {
            Heading::N => (0, 1),
            Heading::E => (1, 0),
            Heading::S => (0, -1),
            Heading::W => (-1, 0),
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Heading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for Heading {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "n" | "north" => Ok(Heading::N),
            "e" | "east" => Ok(Heading::E),
            "s" | "south" => Ok(Heading::S),
            "w" | "west" => Ok(Heading::W),
            other => Err(format!("unknown heading {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: i64,
    pub y: i64,
}

impl Cell {
    pub fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Robot position and heading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pose {
    pub x: i64,
    pub y: i64,
    pub heading: Heading,
}

impl Pose {
    pub fn new(x: i64, y: i64, heading: Heading) -> Self {
        Self { x, y, heading }
    }

    pub fn cell(&self) -> Cell {
        Cell::new(self.x, self.y)
    }
}

impl fmt::Display for Pose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.heading)
    }
}

/// An ordered sequence of movement blocks.
///
/// The board capacity is enforced where programs enter from the outside
/// (parsing, extraction); see [`Program::check_capacity`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Program(Vec<Command>);

impl Program {
    pub fn new(commands: Vec<Command>) -> Self {
        Self(commands)
    }

    pub fn commands(&self) -> &[Command] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check_capacity(&self, capacity: usize) -> Result<(), super::ParseError> {
        if self.0.len() > capacity {
            Err(super::ParseError::OverCapacity { len: self.0.len(), capacity })
        } else {
            Ok(())
        }
    }

    /// Every TurnLeft swapped with TurnRight.
    pub fn mirrored(&self) -> Program {
        Program(self.0.iter().map(|c| c.mirrored()).collect())
    }

    /// Canonical form: lowercase names joined by ", ".
    pub fn canonical(&self) -> String {
        self.to_string()
    }
}

impl From<Vec<Command>> for Program {
    fn from(commands: Vec<Command>) -> Self {
        Self(commands)
    }
}

impl FromIterator<Command> for Program {
    fn from_iter<I: IntoIterator<Item = Command>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, cmd) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(cmd.name())?;
        }
        Ok(())
    }
}
