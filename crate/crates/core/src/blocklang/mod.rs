//! The movement-only block language of the Cubetto robot.
//!
//! Three blocks exist: forward (green), turn left (yellow) and turn right
//! (red). Programs run on a [`GridWorld`]; the robot halts when it would
//! leave a bounded board or enter an obstacle, and stops early as soon as
//! it stands on the target. [`shortest_program`] is a breadth-first oracle
//! over robot states used to judge whether a proposed activity is feasible.

mod command;
mod oracle;
mod parse;
mod sim;
mod world;

pub use command::{BlockColor, Cell, Command, Heading, Pose, Program, DEFAULT_CAPACITY};
pub use oracle::{shortest_program, state_count, OracleError};
pub use parse::{
    extract_programs, parse_program, ExtractedProgram, Extraction, Lexicon, ParseError,
    SkipReason, SkippedRun, DEFAULT_LEXICON,
};
pub use sim::{execute, feasible, step, Outcome, SimulationResult};
pub use world::{GridWorld, WorldError, DEFAULT_BOARD_SIZE};

/// A board whose obstacles form two walls flanking a straight corridor,
/// the way a line of wooden train tracks fences off a path.
///
/// The corridor runs north along column `x = 1` of a `3 × length` board,
/// from the start at `(1, 0)` facing north to the target at `(1, length - 1)`.
pub fn canyon(length: u32) -> GridWorld {
    let length = length.max(2);
    let walls = (0..i64::from(length)).flat_map(|y| [Cell::new(0, y), Cell::new(2, y)]);
    GridWorld::new(
        Some(3),
        Some(length),
        walls,
        Pose::new(1, 0, Heading::N),
        Some(Cell::new(1, i64::from(length) - 1)),
    )
    .expect("canyon layout is valid")
}
