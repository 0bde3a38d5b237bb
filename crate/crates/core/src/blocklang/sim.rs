use serde::Serialize;

use super::command::{Command, Pose, Program};
use super::world::GridWorld;

/// How a run ended. Step numbers index the command list from zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// The robot stood on the target after `steps` commands.
    ReachedTarget { steps: usize },
    /// All commands ran without reaching a target.
    Finished,
    /// Command `step` would have driven off the board.
    OutOfBounds { step: usize },
    /// Command `step` would have driven into an obstacle.
    HitObstacle { step: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimulationResult {
    /// Start pose followed by the pose after each executed command.
    pub trace: Vec<Pose>,
    pub outcome: Outcome,
}

impl SimulationResult {
    pub fn executed_steps(&self) -> usize {
        self.trace.len() - 1
    }

    pub fn final_pose(&self) -> Pose {
        *self.trace.last().expect("trace holds the start pose")
    }

    pub fn reached_target(&self) -> bool {
        matches!(self.outcome, Outcome::ReachedTarget { .. })
    }
}

/// Applies one command, ignoring the board.
pub fn step(pose: Pose, cmd: Command) -> Pose {
    match cmd {
        Command::Forward => {
            let (dx, dy) = pose.heading.delta();
            Pose::new(pose.x + dx, pose.y + dy, pose.heading)
        }
        Command::TurnLeft => Pose::new(pose.x, pose.y, pose.heading.left()),
        Command::TurnRight => Pose::new(pose.x, pose.y, pose.heading.right()),
    }
}

/// Runs `program` from the world's start pose.
///
/// The target is checked at the start and after every command, so a
/// program stops as soon as the robot stands on it.
pub fn execute(program: &Program, world: &GridWorld) -> SimulationResult {
    let mut pose = world.start();
    let mut trace = vec![pose];
    let at_target = |p: &Pose| world.target() == Some(p.cell());

    if at_target(&pose) {
        return SimulationResult { trace, outcome: Outcome::ReachedTarget { steps: 0 } };
    }
    for (i, &cmd) in program.commands().iter().enumerate() {
        let next = step(pose, cmd);
        if next.cell() != pose.cell() {
            if !world.in_bounds(next.cell()) {
                return SimulationResult { trace, outcome: Outcome::OutOfBounds { step: i } };
            }
            if world.is_obstacle(next.cell()) {
                return SimulationResult { trace, outcome: Outcome::HitObstacle { step: i } };
            }
        }
        pose = next;
        trace.push(pose);
        if at_target(&pose) {
            return SimulationResult { trace, outcome: Outcome::ReachedTarget { steps: i + 1 } };
        }
    }
    SimulationResult { trace, outcome: Outcome::Finished }
}

/// True iff the program drives the robot onto the world's target.
pub fn feasible(world: &GridWorld, program: &Program) -> bool {
    execute(program, world).reached_target()
}
