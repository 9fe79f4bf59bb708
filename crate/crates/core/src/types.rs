use std::fmt;

use serde::{Deserialize, Serialize};

/// Number of block colors in the world.
pub const NUM_COLORS: usize = 3;

/// One of the three block colors, identified by index 0, 1 or 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct BlockColor(u8);

impl BlockColor {
    pub const ALL: [BlockColor; NUM_COLORS] = [BlockColor(0), BlockColor(1), BlockColor(2)];

    pub fn new(index: u8) -> Option<Self> {
        (usize::from(index) < NUM_COLORS).then_some(BlockColor(index))
    }

    pub fn index(self) -> usize {
        usize::from(self.0)
    }
}

impl TryFrom<u8> for BlockColor {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        BlockColor::new(value).ok_or_else(|| format!("block color {value} out of range 0..3"))
    }
}

impl From<BlockColor> for u8 {
    fn from(color: BlockColor) -> u8 {
        color.0
    }
}

impl fmt::Display for BlockColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The four movement actions. There is no no-op.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

impl Action {
    /// Also the deterministic preference order used by the scripted agents.
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// Row/column offset of the move; rows grow downwards.
    pub fn delta(self) -> (isize, isize) {
        match self {
            Action::Up => (-1, 0),
            Action::Down => (1, 0),
            Action::Left => (0, -1),
            Action::Right => (0, 1),
        }
    }
}

/// A grid cell. Ordering is row-major scan order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }

    pub fn manhattan(self, other: Cell) -> usize {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }

    /// The neighbouring cell in `action`'s direction, if it lies on a
    /// `height` x `width` grid.
    pub fn step(self, action: Action, height: usize, width: usize) -> Option<Cell> {
        let (dr, dc) = action.delta();
        let row = self.row.checked_add_signed(dr)?;
        let col = self.col.checked_add_signed(dc)?;
        (row < height && col < width).then_some(Cell { row, col })
    }

    /// The action that moves from `self` to the 4-adjacent cell `to`.
    pub fn direction_to(self, to: Cell) -> Option<Action> {
        match (to.row as isize - self.row as isize, to.col as isize - self.col as isize) {
            (-1, 0) => Some(Action::Up),
            (1, 0) => Some(Action::Down),
            (0, -1) => Some(Action::Left),
            (0, 1) => Some(Action::Right),
            _ => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_clamps_at_boundary() {
        let corner = Cell::new(0, 0);
        assert_eq!(corner.step(Action::Up, 4, 4), None);
        assert_eq!(corner.step(Action::Left, 4, 4), None);
        assert_eq!(corner.step(Action::Right, 4, 4), Some(Cell::new(0, 1)));
        assert_eq!(Cell::new(3, 3).step(Action::Down, 4, 4), None);
    }

    #[test]
    fn direction_round_trips() {
        let c = Cell::new(2, 2);
        for a in Action::ALL {
            let n = c.step(a, 5, 5).unwrap();
            assert_eq!(c.direction_to(n), Some(a));
        }
        assert_eq!(c.direction_to(Cell::new(3, 3)), None);
    }

    #[test]
    fn color_range() {
        assert!(BlockColor::new(2).is_some());
        assert!(BlockColor::new(3).is_none());
        assert!(serde_json::from_str::<BlockColor>("3").is_err());
        assert_eq!(serde_json::to_string(&BlockColor::ALL[1]).unwrap(), "1");
    }
}
