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
//! Bidirectional RRT over planar positions, for the agent disc or for a
//! movable square planned as if it were the agent.

use crate::geometry::{Shape, Vec2};
use crate::scene::{Configuration, Obstacles, Scene};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

/// Default number of tree extensions before giving up.
pub const DEFAULT_MAX_ITERS: usize = 20_000;
const GOAL_BIAS: f64 = 0.1;
const SHORTCUT_ATTEMPTS: usize = 100;

/// What moves in a path query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mover {
    Agent,
    /// The object with this index, moving on its own with the agent removed
    /// from the world.
    ObjectAsAgent(usize),
}

/// A single-mover planning problem. Objects in `removed` are deleted from
/// the world; every other object is frozen at its pose in `frozen`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathQuery {
    pub mover: Mover,
    pub start: Vec2,
    pub goal: Vec2,
    pub removed: BTreeSet<usize>,
    pub frozen: Configuration,
    pub clearance: f64,
}

/// Waypoints with gaps no larger than `resolution`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub waypoints: Vec<Vec2>,
    pub resolution: f64,
}

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
pub enum NoPath {
    #[error("start or goal is in collision")]
    InvalidEndpoint,
    #[error("no path found within the iteration budget")]
    Exhausted,
}

impl Path {
    pub fn start(&self) -> Vec2 {
        self.waypoints[0]
    }

    pub fn end(&self) -> Vec2 {
        *self.waypoints.last().expect("paths are never empty")
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    pub fn max_gap(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| w[0].distance(w[1]))
            .fold(0.0, f64::max)
    }

    /// JSON array of `[x, y]` pairs.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.waypoints).expect("path serialization cannot fail")
    }
}

pub fn mover_shape(scene: &Scene, mover: Mover, pos: Vec2) -> Shape {
    match mover {
        Mover::Agent => scene.agent_shape(pos),
        Mover::ObjectAsAgent(i) => scene.object_shape(i, pos),
    }
}

/// Collision world of one query.
#[derive(Clone, Debug)]
pub struct QueryWorld<'a> {
    scene: &'a Scene,
    mover: Mover,
    obstacles: Obstacles,
    clearance: f64,
    edge_step: f64,
}

impl<'a> QueryWorld<'a> {
    pub fn new(query: &PathQuery, scene: &'a Scene) -> Self {
        let skip = match query.mover {
            Mover::Agent => None,
            Mover::ObjectAsAgent(i) => Some(i),
        };
        let obstacles = Obstacles::new(scene, &query.frozen, |i| {
            Some(i) != skip && !query.removed.contains(&i)
        });
        QueryWorld {
            scene,
            mover: query.mover,
            obstacles,
            clearance: query.clearance,
            // sd is 1-Lipschitz in translation, so checks at this spacing keep
            // the whole edge at least half the clearance away
            edge_step: query.clearance.clamp(0.01, 0.05),
        }
    }

    pub fn is_free(&self, p: Vec2) -> bool {
        self.obstacles
            .is_free(&mover_shape(self.scene, self.mover, p), self.clearance)
    }

    pub fn edge_free(&self, a: Vec2, b: Vec2) -> bool {
        let d = a.distance(b);
        let n = (d / self.edge_step).ceil().max(1.0) as usize;
        (1..=n).all(|k| self.is_free(a.lerp(b, k as f64 / n as f64)))
    }

    /// Every vertex and edge of `path` is free.
    pub fn path_free(&self, path: &[Vec2]) -> bool {
        path.first().is_some_and(|p| self.is_free(*p))
            && path.windows(2).all(|w| self.edge_free(w[0], w[1]))
    }

    pub fn obstacles(&self) -> &Obstacles {
        &self.obstacles
    }
}

/// Uniform-grid bucket index for nearest-neighbour queries.
struct Tree {
    nodes: Vec<Vec2>,
    parent: Vec<usize>,
    cells: HashMap<(i32, i32), Vec<usize>>,
    cell: f64,
    origin: Vec2,
    max_ring: i32,
}

impl Tree {
    fn new(root: Vec2, scene: &Scene) -> Self {
        let cell = 0.5;
        let ext = scene.bounds.width().max(scene.bounds.height());
        let mut t = Tree {
            nodes: Vec::new(),
            parent: Vec::new(),
            cells: HashMap::new(),
            cell,
            origin: scene.bounds.min,
            max_ring: (ext / cell).ceil() as i32 + 1,
        };
        t.push(root, 0);
        t
    }

    fn key(&self, p: Vec2) -> (i32, i32) {
        (
            ((p.x - self.origin.x) / self.cell).floor() as i32,
            ((p.y - self.origin.y) / self.cell).floor() as i32,
        )
    }

    fn push(&mut self, p: Vec2, parent: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(p);
        self.parent.push(parent);
        let k = self.key(p);
        self.cells.entry(k).or_default().push(id);
        id
    }

    fn nearest(&self, q: Vec2) -> usize {
        let (cx, cy) = self.key(q);
        let mut best = (f64::INFINITY, usize::MAX);
        for r in 0..=self.max_ring {
            for dx in -r..=r {
                for dy in -r..=r {
                    if dx.abs() != r && dy.abs() != r {
                        continue;
                    }
                    if let Some(ids) = self.cells.get(&(cx + dx, cy + dy)) {
                        for &i in ids {
                            let d = self.nodes[i].distance(q);
                            if d < best.0 || (d == best.0 && i < best.1) {
                                best = (d, i);
                            }
                        }
                    }
                }
            }
            if best.0 <= r as f64 * self.cell {
                break;
            }
        }
        best.1
    }

    /// Root-to-node chain.
    fn chain(&self, mut i: usize) -> Vec<Vec2> {
        let mut out = vec![self.nodes[i]];
        while i != 0 {
            i = self.parent[i];
            out.push(self.nodes[i]);
        }
        out.reverse();
        out
    }
}

enum Extend {
    Trapped,
    Advanced(usize),
    Reached(usize),
}

fn extend(tree: &mut Tree, world: &QueryWorld, q: Vec2, step: f64) -> Extend {
    let near = tree.nearest(q);
    let from = tree.nodes[near];
    let d = from.distance(q);
    if d < 1e-12 {
        return Extend::Reached(near);
    }
    let (to, reached) = if d <= step {
        (q, true)
    } else {
        (from + (q - from) * (step / d), false)
    };
    if !world.is_free(to) || !world.edge_free(from, to) {
        return Extend::Trapped;
    }
    let id = tree.push(to, near);
    if reached {
        Extend::Reached(id)
    } else {
        Extend::Advanced(id)
    }
}

fn sample(rng: &mut ChaCha8Rng, scene: &Scene) -> Vec2 {
    let b = scene.bounds;
    Vec2::new(
        rng.gen_range(b.min.x..b.max.x),
        rng.gen_range(b.min.y..b.max.y),
    )
}

/// Bidirectional RRT-Connect followed by random shortcutting and resampling
/// at the agent radius.
///
/// The result is a pure function of `(query, scene, seed, max_iters)`.
pub fn plan_birrt(
    query: &PathQuery,
    scene: &Scene,
    seed: u64,
    max_iters: usize,
) -> Result<Path, NoPath> {
    let world = QueryWorld::new(query, scene);
    if !world.is_free(query.start) || !world.is_free(query.goal) {
        return Err(NoPath::InvalidEndpoint);
    }
    let resolution = scene.agent_radius;
    if world.edge_free(query.start, query.goal) {
        return Ok(resample_path(
            &Path {
                waypoints: vec![query.start, query.goal],
                resolution: f64::INFINITY,
            },
            resolution,
        ));
    }
    if max_iters == 0 {
        return Err(NoPath::Exhausted);
    }
    let step = scene.agent_radius;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Tree::new(query.start, scene);
    let mut b = Tree::new(query.goal, scene);
    let mut a_is_start = true;

    for _ in 0..max_iters {
        let q = if rng.gen::<f64>() < GOAL_BIAS {
            b.nodes[0]
        } else {
            sample(&mut rng, scene)
        };
        let new_id = match extend(&mut a, &world, q, step) {
            Extend::Trapped => None,
            Extend::Advanced(i) | Extend::Reached(i) => Some(i),
        };
        if let Some(ai) = new_id {
            let target = a.nodes[ai];
            loop {
                match extend(&mut b, &world, target, step) {
                    Extend::Trapped => break,
                    Extend::Advanced(_) => continue,
                    Extend::Reached(bi) => {
                        let mut pa = a.chain(ai);
                        let mut pb = b.chain(bi);
                        pb.pop();
                        pb.reverse();
                        pa.extend(pb);
                        if !a_is_start {
                            pa.reverse();
                        }
                        let smooth = shortcut(pa, &world, &mut rng);
                        return Ok(resample_path(
                            &Path {
                                waypoints: smooth,
                                resolution: f64::INFINITY,
                            },
                            resolution,
                        ));
                    }
                }
            }
        }
        std::mem::swap(&mut a, &mut b);
        a_is_start = !a_is_start;
    }
    Err(NoPath::Exhausted)
}

fn shortcut(mut pts: Vec<Vec2>, world: &QueryWorld, rng: &mut ChaCha8Rng) -> Vec<Vec2> {
    for _ in 0..SHORTCUT_ATTEMPTS {
        if pts.len() < 3 {
            break;
        }
        let i = rng.gen_range(0..pts.len() - 2);
        let j = rng.gen_range(i + 2..pts.len());
        if world.edge_free(pts[i], pts[j]) {
            pts.drain(i + 1..j);
        }
    }
    pts
}

/// Boolean form of [`plan_birrt`]. Sampling is incomplete, so `false` may be
/// a false negative when the budget is small; `true` is always backed by a
/// collision-free path.
pub fn path_exists(query: &PathQuery, scene: &Scene, seed: u64, budget: usize) -> bool {
    budget > 0 && plan_birrt(query, scene, seed, budget).is_ok()
}

/// Drops interior vertices that lie on a straight run.
fn simplify(points: &[Vec2]) -> Vec<Vec2> {
    let mut out: Vec<Vec2> = Vec::with_capacity(points.len());
    for &p in points {
        if let Some(&last) = out.last() {
            if last.distance(p) < 1e-12 {
                continue;
            }
        }
        while out.len() >= 2 {
            let a = out[out.len() - 2];
            let b = out[out.len() - 1];
            let (u, v) = (b - a, p - b);
            let collinear =
                u.cross(v).abs() <= 1e-12 * u.norm() * v.norm().max(1.0) && u.dot(v) > 0.0;
            if collinear {
                out.pop();
            } else {
                break;
            }
        }
        out.push(p);
    }
    out
}

/// Same polyline with every edge split evenly so that no gap exceeds
/// `resolution`. Endpoints are preserved exactly and straight runs are
/// re-split from scratch, so resampling is idempotent.
///
/// # Panics
/// If `resolution` is not positive.
pub fn resample_path(path: &Path, resolution: f64) -> Path {
    assert!(resolution > 0.0, "resolution must be positive");
    let corners = simplify(&path.waypoints);
    let mut out = Vec::new();
    if let Some(&first) = corners.first() {
        out.push(first);
    }
    for w in corners.windows(2) {
        let len = w[0].distance(w[1]);
        let n = ((len / resolution) - 1e-9).ceil().max(1.0) as usize;
        for k in 1..=n {
            out.push(if k == n {
                w[1]
            } else {
                w[0].lerp(w[1], k as f64 / n as f64)
            });
        }
    }
    Path {
        waypoints: out,
        resolution,
    }
}
