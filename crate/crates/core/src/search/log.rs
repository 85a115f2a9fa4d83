/*
Copyright 2026 The segman-rs Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
//! Local occupancy grids and the configuration score built on them.

use crate::geometry::{segment_rect_distance, Rect, Vec2};
use crate::rrt::{Mover, Path};
use crate::scene::{Configuration, Scene};
use serde::Serialize;

/// Cells per window side.
pub const LOG_WIDTH: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    Red,
    Green,
    Blue,
}

/// Where the window is centered.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Anchor {
    /// The object's position in the root configuration.
    Initial,
    /// The object's position now.
    Current,
}

/// Footprint swept along a witness path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sweep {
    Disc(f64),
    /// Axis-aligned square with this half side.
    Square(f64),
}

impl Sweep {
    pub fn of(mover: Mover, scene: &Scene) -> Sweep {
        match mover {
            Mover::Agent => Sweep::Disc(scene.agent_radius),
            Mover::ObjectAsAgent(o) => Sweep::Square(scene.objects[o].side * 0.5),
        }
    }

    fn touches(&self, a: Vec2, b: Vec2, cell: &Rect) -> bool {
        match *self {
            Sweep::Disc(r) => segment_rect_distance(a, b, cell) < r,
            Sweep::Square(h) => segment_rect_distance(a, b, &cell.inflate(h - 1e-12)) == 0.0,
        }
    }
}

/// What stays fixed while scoring the nodes of one tree.
#[derive(Clone, Copy, Debug)]
pub struct LogContext<'a> {
    pub scene: &'a Scene,
    /// Configuration at the tree root.
    pub root: &'a Configuration,
    pub o_set: &'a [usize],
    pub witness: &'a Path,
    pub sweep: Sweep,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalOccupancyGrid {
    /// Lower-left corner.
    pub origin: Vec2,
    pub cell: f64,
    pub width: usize,
    /// Row-major from the bottom row.
    pub cells: Vec<Cell>,
}

impl LocalOccupancyGrid {
    pub fn get(&self, i: usize, j: usize) -> Cell {
        self.cells[j * self.width + i]
    }

    pub fn cell_rect(&self, i: usize, j: usize) -> Rect {
        let min = self.origin + Vec2::new(i as f64 * self.cell, j as f64 * self.cell);
        Rect {
            min,
            max: min + Vec2::new(self.cell, self.cell),
        }
    }

    pub fn count(&self, color: Cell) -> usize {
        self.cells.iter().filter(|&&c| c == color).count()
    }

    /// Centers of the cells with the given color, row-major.
    pub fn centers(&self, color: Cell) -> Vec<Vec2> {
        (0..self.width * self.width)
            .filter(|&k| self.cells[k] == color)
            .map(|k| self.cell_rect(k % self.width, k / self.width).center())
            .collect()
    }

    /// Green counts 1 and Blue 2, normalized to [0, 1].
    pub fn score(&self) -> f64 {
        let g = self.count(Cell::Green) as f64;
        let b = self.count(Cell::Blue) as f64;
        (g + 2.0 * b) / (2.0 * (self.width * self.width) as f64)
    }
}

/// Rasterizes the neighborhood of `object` under `config`.
pub fn build_log(
    ctx: &LogContext,
    config: &Configuration,
    object: usize,
    anchor: Anchor,
) -> LocalOccupancyGrid {
    let scene = ctx.scene;
    let side = scene.objects[object].side;
    let center = match anchor {
        Anchor::Initial => ctx.root.objects[object],
        Anchor::Current => config.objects[object],
    };
    let window = 4.0 * side;
    let cell = side / 4.0;
    let origin = center - Vec2::new(window * 0.5, window * 0.5);
    let mut grid = LocalOccupancyGrid {
        origin,
        cell,
        width: LOG_WIDTH,
        cells: vec![Cell::Green; LOG_WIDTH * LOG_WIDTH],
    };
    let start_footprints: Vec<Rect> = ctx
        .o_set
        .iter()
        .map(|&o| Rect::square(ctx.root.objects[o], scene.objects[o].side))
        .collect();
    let occupied: Vec<Rect> = scene
        .walls
        .iter()
        .copied()
        .chain(
            scene
                .objects
                .iter()
                .enumerate()
                .map(|(i, o)| Rect::square(config.objects[i], o.side)),
        )
        .collect();
    let r = scene.agent_radius;
    for j in 0..LOG_WIDTH {
        for i in 0..LOG_WIDTH {
            let rect = grid.cell_rect(i, j);
            let blue = ctx
                .witness
                .waypoints
                .windows(2)
                .any(|w| ctx.sweep.touches(w[0], w[1], &rect))
                || (ctx.witness.waypoints.len() == 1
                    && ctx.sweep.touches(
                        ctx.witness.waypoints[0],
                        ctx.witness.waypoints[0],
                        &rect,
                    ))
                || start_footprints.iter().any(|f| f.overlaps(&rect))
                || segment_rect_distance(ctx.root.agent, ctx.root.agent, &rect) < r;
            let red =
                !scene.bounds.contains_rect(&rect) || occupied.iter().any(|o| o.overlaps(&rect));
            // occupied cells stay Red, so vacating the route turns them Blue
            let color = match (red, blue) {
                (true, _) => Cell::Red,
                (false, true) => Cell::Blue,
                (false, false) => Cell::Green,
            };
            grid.cells[j * LOG_WIDTH + i] = color;
        }
    }
    grid
}

/// Mean grid score over the subset's objects, each anchored at its root
/// position.
pub fn config_score(ctx: &LogContext, config: &Configuration) -> f64 {
    if ctx.o_set.is_empty() {
        return 0.0;
    }
    let total: f64 = ctx
        .o_set
        .iter()
        .map(|&o| build_log(ctx, config, o, Anchor::Initial).score())
        .sum();
    total / ctx.o_set.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_formula() {
        let mut g = LocalOccupancyGrid {
            origin: Vec2::ZERO,
            cell: 1.0,
            width: 10,
            cells: vec![Cell::Red; 100],
        };
        assert_eq!(g.score(), 0.0);
        for c in g.cells.iter_mut().take(50) {
            *c = Cell::Green;
        }
        assert_eq!(g.score(), 0.25);
        g.cells = vec![Cell::Blue; 100];
        assert_eq!(g.score(), 1.0);
    }
}
