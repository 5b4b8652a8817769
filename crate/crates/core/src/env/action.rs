use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the eight compass moves. Row indices grow southward, so `N` is
/// `(-1, 0)` in `(drow, dcol)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    N,
    NE,
    E,
    SE,
    S,
    SW,
    W,
    NW,
}

pub const NUM_ACTIONS: usize = 8;

impl Action {
    pub const ALL: [Action; NUM_ACTIONS] = [
        Action::N,
        Action::NE,
        Action::E,
        Action::SE,
        Action::S,
        Action::SW,
        Action::W,
        Action::NW,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Self::ALL.get(i).copied()
    }

    /// Cell offset `(drow, dcol)`.
    pub fn offset(self) -> (i64, i64) {
        match self {
            Action::N => (-1, 0),
            Action::NE => (-1, 1),
            Action::E => (0, 1),
            Action::SE => (1, 1),
            Action::S => (1, 0),
            Action::SW => (1, -1),
            Action::W => (0, -1),
            Action::NW => (-1, -1),
        }
    }

    pub fn from_offset(drow: i64, dcol: i64) -> Option<Action> {
        Self::ALL.into_iter().find(|a| a.offset() == (drow, dcol))
    }

    /// Velocity `(vx east, vy north)` in m/s for a one-cell move lasting `dt`.
    pub fn velocity(self, cell_size: f64, dt: f64) -> [f64; 2] {
        let (dr, dc) = self.offset();
        [dc as f64 * cell_size / dt, -(dr as f64) * cell_size / dt]
    }

    /// Compass octant of a planar vector given as `(east, north)`.
    /// Returns `None` for the zero vector.
    pub fn octant(east: f64, north: f64) -> Option<Action> {
        if east == 0.0 && north == 0.0 {
            return None;
        }
        // bearing measured clockwise from north
        let bearing = east.atan2(north);
        let idx = (bearing / (PI / 4.0)).round().rem_euclid(8.0) as usize;
        Self::from_index(idx % NUM_ACTIONS)
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::N => "N",
            Action::NE => "NE",
            Action::E => "E",
            Action::SE => "SE",
            Action::S => "S",
            Action::SW => "SW",
            Action::W => "W",
            Action::NW => "NW",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown action `{s}`"))
    }
}
