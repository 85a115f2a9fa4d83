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
//! Grid connectivity oracle. Free space is rasterized on a square lattice
//! with its own distance code so that it shares nothing with the planner's
//! collision checker.

use segman_core::rrt::{Mover, PathQuery};
use segman_core::{Rect, Scene, Vec2};
use std::collections::{BTreeSet, VecDeque};

/// Lattice spacing in world units.
pub const GRID_STEP: f64 = 0.05;

/// Euclidean gap between a point and a rectangle (zero inside).
fn point_rect_gap(p: Vec2, r: &Rect) -> f64 {
    let dx = (r.min.x - p.x).max(p.x - r.max.x).max(0.0);
    let dy = (r.min.y - p.y).max(p.y - r.max.y).max(0.0);
    dx.hypot(dy)
}

/// Euclidean gap between two rectangles (zero when they touch or overlap).
fn rect_rect_gap(a: &Rect, b: &Rect) -> f64 {
    let dx = (b.min.x - a.max.x).max(a.min.x - b.max.x).max(0.0);
    let dy = (b.min.y - a.max.y).max(a.min.y - b.max.y).max(0.0);
    dx.hypot(dy)
}

struct World {
    rects: Vec<Rect>,
    bounds: Rect,
    /// Disc radius, or half side for a square mover.
    extent: f64,
    square: bool,
    clearance: f64,
}

impl World {
    fn new(scene: &Scene, query: &PathQuery) -> Self {
        let skip = match query.mover {
            Mover::Agent => None,
            Mover::ObjectAsAgent(i) => Some(i),
        };
        let mut rects = scene.walls.clone();
        for (i, o) in scene.objects.iter().enumerate() {
            if Some(i) == skip || query.removed.contains(&i) {
                continue;
            }
            let c = query.frozen.objects[i];
            let h = o.side / 2.0;
            rects.push(Rect::new(c.x - h, c.y - h, c.x + h, c.y + h));
        }
        let (extent, square) = match query.mover {
            Mover::Agent => (scene.agent_radius, false),
            Mover::ObjectAsAgent(i) => (scene.objects[i].side / 2.0, true),
        };
        World {
            rects,
            bounds: scene.bounds,
            extent,
            square,
            clearance: query.clearance,
        }
    }

    fn free(&self, p: Vec2) -> bool {
        let m = self.extent + self.clearance;
        let b = &self.bounds;
        if p.x < b.min.x + m || p.x > b.max.x - m || p.y < b.min.y + m || p.y > b.max.y - m {
            return false;
        }
        if self.square {
            let body = Rect::new(
                p.x - self.extent,
                p.y - self.extent,
                p.x + self.extent,
                p.y + self.extent,
            );
            self.rects
                .iter()
                .all(|r| rect_rect_gap(&body, r) >= self.clearance)
        } else {
            self.rects.iter().all(|r| point_rect_gap(p, r) >= m)
        }
    }
}

/// Whether the mover of `query` fits at `p`, by the oracle's own geometry.
pub fn oracle_free(scene: &Scene, query: &PathQuery, p: Vec2) -> bool {
    World::new(scene, query).free(p)
}

/// Whether the query's start and goal are joined by a 4-connected chain of
/// free lattice points. Lattice points within one step of an endpoint count
/// as that endpoint.
pub fn flood_fill_feasible(scene: &Scene, query: &PathQuery) -> bool {
    let world = World::new(scene, query);
    if !world.free(query.start) || !world.free(query.goal) {
        return false;
    }
    let b = scene.bounds;
    let nx = ((b.max.x - b.min.x) / GRID_STEP).round() as usize + 1;
    let ny = ((b.max.y - b.min.y) / GRID_STEP).round() as usize + 1;
    let at = |i: usize, j: usize| {
        Vec2::new(
            b.min.x + i as f64 * GRID_STEP,
            b.min.y + j as f64 * GRID_STEP,
        )
    };
    let mut free = vec![false; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            free[j * nx + i] = world.free(at(i, j));
        }
    }
    let near = |p: Vec2, i: usize, j: usize| at(i, j).distance(p) <= GRID_STEP * 1.01;
    let mut seen = vec![false; nx * ny];
    let mut queue = VecDeque::new();
    for j in 0..ny {
        for i in 0..nx {
            if free[j * nx + i] && near(query.start, i, j) {
                seen[j * nx + i] = true;
                queue.push_back((i, j));
            }
        }
    }
    while let Some((i, j)) = queue.pop_front() {
        if near(query.goal, i, j) {
            return true;
        }
        let mut visit = |i2: usize, j2: usize| {
            let k = j2 * nx + i2;
            if free[k] && !seen[k] {
                seen[k] = true;
                queue.push_back((i2, j2));
            }
        };
        if i > 0 {
            visit(i - 1, j);
        }
        if i + 1 < nx {
            visit(i + 1, j);
        }
        if j > 0 {
            visit(i, j - 1);
        }
        if j + 1 < ny {
            visit(i, j + 1);
        }
    }
    false
}

fn subsets_of(pool: &[usize], size: usize) -> Vec<BTreeSet<usize>> {
    if size == 0 {
        return vec![BTreeSet::new()];
    }
    let mut out = Vec::new();
    for (k, &first) in pool.iter().enumerate() {
        for mut rest in subsets_of(&pool[k + 1..], size - 1) {
            rest.insert(first);
            out.push(rest);
        }
    }
    out
}

fn pool(scene: &Scene, query: &PathQuery) -> Vec<usize> {
    (0..scene.objects.len())
        .filter(|&i| i != scene.goal_object && query.mover != Mover::ObjectAsAgent(i))
        .collect()
}

/// Every obstacle subset of size `1..=max_size` whose removal makes the
/// query feasible on the lattice.
pub fn feasible_subsets(
    scene: &Scene,
    query: &PathQuery,
    max_size: usize,
) -> BTreeSet<BTreeSet<usize>> {
    let pool = pool(scene, query);
    let mut out = BTreeSet::new();
    for size in 1..=max_size.min(pool.len()) {
        for s in subsets_of(&pool, size) {
            let mut q = query.clone();
            q.removed.extend(s.iter().copied());
            if flood_fill_feasible(scene, &q) {
                out.insert(s);
            }
        }
    }
    out
}

/// All feasible obstacle subsets of the smallest size that has any; empty
/// when the query is feasible already or no subset helps.
pub fn min_subsets(scene: &Scene, query: &PathQuery) -> Vec<BTreeSet<usize>> {
    if flood_fill_feasible(scene, query) {
        return Vec::new();
    }
    let pool = pool(scene, query);
    for size in 1..=pool.len() {
        let hits: Vec<_> = subsets_of(&pool, size)
            .into_iter()
            .filter(|s| {
                let mut q = query.clone();
                q.removed.extend(s.iter().copied());
                flood_fill_feasible(scene, &q)
            })
            .collect();
        if !hits.is_empty() {
            return hits;
        }
    }
    Vec::new()
}
