use std::collections::VecDeque;

use thiserror::Error;

use super::command::{Command, Heading, Pose, Program};
use super::sim::step;
use super::world::GridWorld;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("the search needs a bounded board")]
    Unbounded,
    #[error("the world has no target")]
    NoTarget,
    #[error("no program reaches the target from the start pose")]
    Infeasible,
}

/// Minimum-length program that reaches the world's target.
///
/// Breadth-first search over (x, y, heading) states. Successors are
/// expanded in the order Forward, TurnLeft, TurnRight, so among equally
/// short programs the one that is smallest in that order at the first
/// differing position wins.
pub fn shortest_program(world: &GridWorld) -> Result<Program, OracleError> {
    let (Some(width), Some(height)) = (world.width(), world.height()) else {
        return Err(OracleError::Unbounded);
    };
    let target = world.target().ok_or(OracleError::NoTarget)?;
    let start = world.start();
    if start.cell() == target {
        return Ok(Program::default());
    }

    let (w, h) = (width as usize, height as usize);
    let index = |p: &Pose| (p.y as usize * w + p.x as usize) * 4 + p.heading.index();
    // parent[state] = (previous state, command that led here)
    let mut parent: Vec<Option<(usize, Command)>> = vec![None; w * h * 4];
    let mut seen = vec![false; w * h * 4];
    let mut queue = VecDeque::new();
    seen[index(&start)] = true;
    queue.push_back(start);

    while let Some(pose) = queue.pop_front() {
        for cmd in Command::ALL {
            let next = step(pose, cmd);
            let cell = next.cell();
            if !world.in_bounds(cell) || world.is_obstacle(cell) {
                continue;
            }
            let id = index(&next);
            if seen[id] {
                continue;
            }
            seen[id] = true;
            parent[id] = Some((index(&pose), cmd));
            if cell == target {
                return Ok(rebuild(&parent, id));
            }
            queue.push_back(next);
        }
    }
    Err(OracleError::Infeasible)
}

fn rebuild(parent: &[Option<(usize, Command)>], mut id: usize) -> Program {
    let mut commands = Vec::new();
    while let Some((prev, cmd)) = parent[id] {
        commands.push(cmd);
        id = prev;
    }
    commands.reverse();
    Program::new(commands)
}

/// Number of distinct robot states on a bounded board (cells times headings).
pub fn state_count(world: &GridWorld) -> Option<usize> {
    Some(world.width()? as usize * world.height()? as usize * Heading::ALL.len())
}
