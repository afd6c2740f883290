//! The 5×5 perception grid computed around the car.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::grid::{GridMap, Position};
use crate::kernel::{Symbol, Value};

pub const RADIUS: i64 = 2;
pub const SIZE: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PerceptionCell {
    C,
    F,
    O,
    M,
    T,
    N,
    U,
}

impl PerceptionCell {
    pub fn letter(self) -> char {
        match self {
            PerceptionCell::C => 'C',
            PerceptionCell::F => 'F',
            PerceptionCell::O => 'O',
            PerceptionCell::M => 'M',
            PerceptionCell::T => 'T',
            PerceptionCell::N => 'N',
            PerceptionCell::U => 'U',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        Some(match c {
            'C' => PerceptionCell::C,
            'F' => PerceptionCell::F,
            'O' => PerceptionCell::O,
            'M' => PerceptionCell::M,
            'T' => PerceptionCell::T,
            'N' => PerceptionCell::N,
            'U' => PerceptionCell::U,
            _ => return None,
        })
    }
}

/// Rows top to bottom; the car sits at `cells[2][2]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PerceptionGrid {
    pub cells: [[PerceptionCell; SIZE]; SIZE],
}

impl PerceptionGrid {
    /// Cell at offset (dx, dy) from the car, both in -2..=2.
    pub fn at(&self, dx: i64, dy: i64) -> PerceptionCell {
        self.cells[(dy + RADIUS) as usize][(dx + RADIUS) as usize]
    }

    pub fn to_value(&self) -> Value {
        let rows = self.cells.iter().map(|r| Value::Sym(Symbol::new(r.iter().map(|c| c.letter()).collect::<String>())));
        Value::record("Grid", rows.collect())
    }

    pub fn from_value(v: &Value) -> Option<PerceptionGrid> {
        let Value::Record(name, rows) = v else { return None };
        if name.as_str() != "Grid" || rows.len() != SIZE {
            return None;
        }
        let mut cells = [[PerceptionCell::U; SIZE]; SIZE];
        for (r, row) in rows.iter().enumerate() {
            let text: Vec<char> = row.as_sym()?.as_str().chars().collect();
            if text.len() != SIZE {
                return None;
            }
            for (c, ch) in text.into_iter().enumerate() {
                cells[r][c] = PerceptionCell::from_letter(ch)?;
            }
        }
        Some(PerceptionGrid { cells })
    }
}

impl fmt::Display for PerceptionGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.cells {
            let line: String = row.iter().map(|c| c.letter()).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Cells crossed by the segment between two cell centers, including cells
/// touched only at a corner. Both endpoints are included.
pub fn supercover(from: (i64, i64), to: (i64, i64)) -> Vec<(i64, i64)> {
    let (mut x, mut y) = from;
    let (mut dx, mut dy) = (to.0 - from.0, to.1 - from.1);
    let xstep = if dx < 0 { -1 } else { 1 };
    let ystep = if dy < 0 { -1 } else { 1 };
    dx = dx.abs();
    dy = dy.abs();
    let (ddx, ddy) = (2 * dx, 2 * dy);
    let mut cells = vec![(x, y)];
    if ddx >= ddy {
        let (mut error, mut errorprev) = (dx, dx);
        for _ in 0..dx {
            x += xstep;
            error += ddy;
            if error > ddx {
                y += ystep;
                error -= ddx;
                let sum = error + errorprev;
                if sum <= ddx {
                    cells.push((x, y - ystep));
                }
                if sum >= ddx {
                    cells.push((x - xstep, y));
                }
            }
            cells.push((x, y));
            errorprev = error;
        }
    } else {
        let (mut error, mut errorprev) = (dy, dy);
        for _ in 0..dy {
            y += ystep;
            error += ddx;
            if error > ddy {
                x += xstep;
                error -= ddy;
                let sum = error + errorprev;
                if sum <= ddy {
                    cells.push((x - xstep, y));
                }
                if sum >= ddy {
                    cells.push((x, y - ystep));
                }
            }
            cells.push((x, y));
            errorprev = error;
        }
    }
    cells
}

fn occluded(map: &GridMap, car: Position, target: (i64, i64)) -> bool {
    let origin = (i64::from(car.x), i64::from(car.y));
    supercover(origin, target)
        .into_iter()
        .filter(|&c| c != origin && c != target)
        .any(|(x, y)| map.is_opaque(Position::new(x as u32, y as u32)))
}

/// Perception grid of the car at `car` on `map`. Cells that were free in
/// `prev` (a grid and the car position it was taken from) and are now
/// occupied become M or N.
pub fn compute_perception(map: &GridMap, prev: Option<(&PerceptionGrid, Position)>, car: Position) -> PerceptionGrid {
    let mut cells = [[PerceptionCell::U; SIZE]; SIZE];
    for dy in -RADIUS..=RADIUS {
        for dx in -RADIUS..=RADIUS {
            let (x, y) = (i64::from(car.x) + dx, i64::from(car.y) + dy);
            let inside = (0..i64::from(map.width)).contains(&x) && (0..i64::from(map.height)).contains(&y);
            let cell = if !inside {
                PerceptionCell::U
            } else if dx == 0 && dy == 0 {
                PerceptionCell::C
            } else if occluded(map, car, (x, y)) {
                PerceptionCell::U
            } else {
                let p = Position::new(x as u32, y as u32);
                let was_free = prev.is_some_and(|(g, at)| {
                    let (px, py) = (x - i64::from(at.x), y - i64::from(at.y));
                    px.abs() <= RADIUS && py.abs() <= RADIUS && g.at(px, py) == PerceptionCell::F
                });
                match (map.is_opaque(p), map.is_transparent_obstacle(p), was_free) {
                    (true, _, true) => PerceptionCell::M,
                    (true, _, false) => PerceptionCell::O,
                    (_, true, true) => PerceptionCell::N,
                    (_, true, false) => PerceptionCell::T,
                    _ => PerceptionCell::F,
                }
            };
            cells[(dy + RADIUS) as usize][(dx + RADIUS) as usize] = cell;
        }
    }
    PerceptionGrid { cells }
}
