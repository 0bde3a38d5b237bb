use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::command::{Cell, Pose};

/// Default board edge, in cells.
pub const DEFAULT_BOARD_SIZE: u32 = 6;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WorldError {
    #[error("board dimensions must be positive")]
    ZeroDimension,
    #[error("start cell {0} is outside the board")]
    StartOutOfBounds(Cell),
    #[error("start cell {0} is an obstacle")]
    StartOnObstacle(Cell),
    #[error("target cell {0} is outside the board")]
    TargetOutOfBounds(Cell),
    #[error("target cell {0} is an obstacle")]
    TargetOnObstacle(Cell),
    #[error("invalid world file: {0}")]
    Json(String),
    #[error("cannot read world file {path}: {message}")]
    Io { path: String, message: String },
}

/// A board with optional bounds, obstacles, a start pose and an optional target.
///
/// A `None` width or height means the board is unbounded along that axis.
/// Bounded axes cover cells `0..width` and `0..height`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "WorldFile", into = "WorldFile")]
pub struct GridWorld {
    width: Option<u32>,
    height: Option<u32>,
    obstacles: BTreeSet<Cell>,
    start: Pose,
    target: Option<Cell>,
}

impl GridWorld {
    pub fn new(
        width: Option<u32>,
        height: Option<u32>,
        obstacles: impl IntoIterator<Item = Cell>,
        start: Pose,
        target: Option<Cell>,
    ) -> Result<Self, WorldError> {
        if width == Some(0) || height == Some(0) {
            return Err(WorldError::ZeroDimension);
        }
        let world = Self { width, height, obstacles: obstacles.into_iter().collect(), start, target };
        let start_cell = start.cell();
        if !world.in_bounds(start_cell) {
            return Err(WorldError::StartOutOfBounds(start_cell));
        }
        if world.is_obstacle(start_cell) {
            return Err(WorldError::StartOnObstacle(start_cell));
        }
        if let Some(t) = target {
            if !world.in_bounds(t) {
                return Err(WorldError::TargetOutOfBounds(t));
            }
            if world.is_obstacle(t) {
                return Err(WorldError::TargetOnObstacle(t));
            }
        }
        Ok(world)
    }

    /// A bounded board without obstacles.
    pub fn bounded(width: u32, height: u32, start: Pose, target: Option<Cell>) -> Result<Self, WorldError> {
        Self::new(Some(width), Some(height), [], start, target)
    }

    /// An infinite, empty plane.
    pub fn unbounded(start: Pose) -> Self {
        Self { width: None, height: None, obstacles: BTreeSet::new(), start, target: None }
    }

    pub fn from_json(json: &str) -> Result<Self, WorldError> {
        serde_json::from_str(json).map_err(|e| WorldError::Json(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, WorldError> {
        let text = std::fs::read_to_string(path).map_err(|e| WorldError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("world serializes")
    }

    pub fn width(&self) -> Option<u32> {
        self.width
    }

    pub fn height(&self) -> Option<u32> {
        self.height
    }

    pub fn is_bounded(&self) -> bool {
        self.width.is_some() && self.height.is_some()
    }

    pub fn obstacles(&self) -> &BTreeSet<Cell> {
        &self.obstacles
    }

    pub fn start(&self) -> Pose {
        self.start
    }

    pub fn target(&self) -> Option<Cell> {
        self.target
    }

    pub fn with_start(&self, start: Pose) -> Result<Self, WorldError> {
        Self::new(self.width, self.height, self.obstacles.iter().copied(), start, self.target)
    }

    pub fn with_target(&self, target: Option<Cell>) -> Result<Self, WorldError> {
        Self::new(self.width, self.height, self.obstacles.iter().copied(), self.start, target)
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        let within = |v: i64, limit: Option<u32>| limit.is_none_or(|n| v >= 0 && v < i64::from(n));
        within(cell.x, self.width) && within(cell.y, self.height)
    }

    pub fn is_obstacle(&self, cell: Cell) -> bool {
        self.obstacles.contains(&cell)
    }
}

#[derive(Serialize, Deserialize)]
struct XY {
    x: i64,
    y: i64,
}

#[derive(Serialize, Deserialize)]
struct WorldFile {
    #[serde(default)]
    width: Option<u32>,
    #[serde(default)]
    height: Option<u32>,
    start: Pose,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<XY>,
    #[serde(default)]
    obstacles: Vec<XY>,
}

impl TryFrom<WorldFile> for GridWorld {
    type Error = WorldError;

    fn try_from(f: WorldFile) -> Result<Self, Self::Error> {
        GridWorld::new(
            f.width,
            f.height,
            f.obstacles.into_iter().map(|c| Cell::new(c.x, c.y)),
            f.start,
            f.target.map(|c| Cell::new(c.x, c.y)),
        )
    }
}

impl From<GridWorld> for WorldFile {
    fn from(w: GridWorld) -> Self {
        WorldFile {
            width: w.width,
            height: w.height,
            start: w.start,
            target: w.target.map(|c| XY { x: c.x, y: c.y }),
            obstacles: w.obstacles.into_iter().map(|c| XY { x: c.x, y: c.y }).collect(),
        }
    }
}
