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
//! Constructed and randomized scenes for tests and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use segman_core::rrt::{Mover, PathQuery};
use segman_core::scene::load_scene;
use segman_core::{Scene, Vec2};
use serde_json::{json, Value};
use std::collections::BTreeSet;

/// Default planning clearance used by the pipeline.
pub const CLEARANCE: f64 = 0.06;

/// Builds a scene from JSON, panicking on invalid input.
pub fn scene_from(value: Value) -> Scene {
    load_scene(&value.to_string()).unwrap_or_else(|e| panic!("test scene rejected: {e}"))
}

/// Agent query from the scene's start configuration.
pub fn agent_query(scene: &Scene, start: Vec2, goal: Vec2) -> PathQuery {
    PathQuery {
        mover: Mover::Agent,
        start,
        goal,
        removed: BTreeSet::new(),
        frozen: scene.initial_config(),
        clearance: CLEARANCE,
    }
}

/// Object-as-agent query for the goal object toward the scene goal.
pub fn goal_object_query(scene: &Scene) -> PathQuery {
    let config = scene.initial_config();
    PathQuery {
        mover: Mover::ObjectAsAgent(scene.goal_object),
        start: config.objects[scene.goal_object],
        goal: scene.goal,
        removed: BTreeSet::new(),
        frozen: config,
        clearance: CLEARANCE,
    }
}

/// Ten by ten scene with no walls: goal object at (5,5), agent at (3,5),
/// goal at (8,5).
pub fn open_scene() -> Scene {
    scene_from(json!({
        "bounds": [0, 0, 10, 10],
        "agent": {"radius": 0.2, "start": [3.0, 5.0]},
        "objects": [{"id": "goal", "side": 0.5, "start": [5.0, 5.0]}],
        "goal_object": "goal", "goal": [8.0, 5.0], "goal_tol": 0.1
    }))
}

/// A one-unit corridor from x=2 to x=4 plugged by `obj1` (side 0.8); `obj2`
/// sits in the open. The agent starts left of the corridor. Object order:
/// goal, obj1, obj2.
pub fn corridor_scene() -> Scene {
    scene_from(json!({
        "bounds": [0, 0, 6, 3],
        "agent": {"radius": 0.2, "start": [1.0, 1.5]},
        "walls": [[2, 0, 4, 1], [2, 2, 4, 3]],
        "objects": [
            {"id": "goal", "side": 0.5, "start": [0.6, 0.5]},
            {"id": "obj1", "side": 0.8, "start": [3.0, 1.5]},
            {"id": "obj2", "side": 0.5, "start": [1.0, 2.5]}
        ],
        "goal_object": "goal", "goal": [0.6, 2.4], "goal_tol": 0.1
    }))
}

/// Agent route through the corridor of [`corridor_scene`].
pub fn corridor_query(scene: &Scene) -> PathQuery {
    agent_query(scene, scene.agent_start, Vec2::new(5.0, 1.5))
}

/// Two parallel corridors, each plugged by one object. Object order: goal,
/// obj1 (lower), obj2 (upper).
pub fn two_corridor_scene() -> Scene {
    scene_from(json!({
        "bounds": [0, 0, 6, 5],
        "agent": {"radius": 0.2, "start": [1.0, 2.5]},
        "walls": [[2, 0, 4, 1], [2, 2, 4, 3], [2, 4, 4, 5]],
        "objects": [
            {"id": "goal", "side": 0.5, "start": [0.5, 0.5]},
            {"id": "obj1", "side": 0.8, "start": [3.0, 1.5]},
            {"id": "obj2", "side": 0.8, "start": [3.0, 3.5]}
        ],
        "goal_object": "goal", "goal": [0.5, 4.5], "goal_tol": 0.1
    }))
}

/// Agent route across the corridors of [`two_corridor_scene`].
pub fn two_corridor_query(scene: &Scene) -> PathQuery {
    agent_query(scene, scene.agent_start, Vec2::new(5.0, 2.5))
}

/// Goal object that must cross open floor, slalom through three plates
/// whose 0.7 gaps alternate in height, then cross open floor again.
pub fn narrow_corridor_scene() -> Scene {
    scene_from(json!({
        "bounds": [0, 0, 14, 6],
        "agent": {"radius": 0.2, "start": [0.8, 1.0]},
        "walls": [
            [5.0, 0, 5.3, 1.65], [5.0, 2.35, 5.3, 6],
            [6.5, 0, 6.8, 3.65], [6.5, 4.35, 6.8, 6],
            [8.0, 0, 8.3, 1.65], [8.0, 2.35, 8.3, 6]
        ],
        "objects": [{"id": "goal", "side": 0.5, "start": [1.5, 1.0]}],
        "goal_object": "goal", "goal": [12.5, 5.0], "goal_tol": 0.1
    }))
}

/// The x-range of the slalom in [`narrow_corridor_scene`].
pub const NARROW_X: (f64, f64) = (5.0, 8.3);

/// A scene for subset-elimination checks: a thick wall at x in [3, 5] with
/// one to three channels, every channel plugged by one or two objects
/// (side 0.9 in a 1.0 channel), plus decoys, for at most four obstacles.
/// Returns the scene and the blocked agent query across the wall.
pub fn plugged_wall_scene(seed: u64) -> (Scene, PathQuery) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slots = [1.0, 3.0, 5.0];
    let n_gaps = rng.gen_range(1..=3usize);
    let mut open: Vec<f64> = slots.to_vec();
    while open.len() > n_gaps {
        let k = rng.gen_range(0..open.len());
        open.remove(k);
    }
    let mut walls = Vec::new();
    let mut y = 0.0;
    for &c in &open {
        walls.push(json!([3.0, y, 5.0, c - 0.5]));
        y = c + 0.5;
    }
    walls.push(json!([3.0, y, 5.0, 6.0]));

    let mut objects = vec![json!({"id": "goal", "side": 0.5, "start": [0.5, 0.5]})];
    let mut placed: Vec<Vec2> = vec![Vec2::new(0.5, 0.5)];
    let mut budget = 4usize;
    for &c in &open {
        let double = budget > n_gaps && rng.gen_bool(0.4);
        let xs: &[f64] = if double { &[3.5, 4.5] } else { &[4.0] };
        for &x in xs {
            objects
                .push(json!({"id": format!("obj{}", objects.len()), "side": 0.9, "start": [x, c]}));
            placed.push(Vec2::new(x, c));
            budget -= 1;
        }
    }
    let agent = Vec2::new(1.2, rng.gen_range(1.0..5.0));
    let goal = Vec2::new(6.8, rng.gen_range(1.0..5.0));
    let decoys = rng.gen_range(0..=budget);
    let mut tries = 0;
    while objects.len() < 1 + (4 - budget) + decoys && tries < 200 {
        tries += 1;
        let left = rng.gen_bool(0.5);
        let p = Vec2::new(
            if left {
                rng.gen_range(0.5..2.4)
            } else {
                rng.gen_range(5.6..7.5)
            },
            rng.gen_range(0.5..5.5),
        );
        if p.distance(agent) < 0.9
            || p.distance(goal) < 0.9
            || placed
                .iter()
                .any(|q| (p - *q).x.abs().max((p - *q).y.abs()) < 0.7)
        {
            continue;
        }
        objects
            .push(json!({"id": format!("obj{}", objects.len()), "side": 0.5, "start": [p.x, p.y]}));
        placed.push(p);
    }
    let scene = scene_from(json!({
        "bounds": [0, 0, 8, 6],
        "agent": {"radius": 0.2, "start": [agent.x, agent.y]},
        "walls": walls,
        "objects": objects,
        "goal_object": "goal", "goal": [0.5, 5.5], "goal_tol": 0.1
    }));
    let query = agent_query(&scene, agent, goal);
    (scene, query)
}

/// A 4x4 world tiled by 0.5 blocks, each a wall with probability 0.3, with
/// an agent of radius 0.15 and start/goal at free block centers. The goal
/// object is tiny and removed from the returned query.
pub fn block_world(seed: u64) -> (Scene, PathQuery) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut filled = [[false; 8]; 8];
    let mut walls = Vec::new();
    for (i, row) in filled.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            if rng.gen_bool(0.3) {
                *cell = true;
                let (x, y) = (i as f64 * 0.5, j as f64 * 0.5);
                walls.push(json!([x, y, x + 0.5, y + 0.5]));
            }
        }
    }
    let mut free: Vec<Vec2> = Vec::new();
    for (i, row) in filled.iter().enumerate() {
        for (j, &cell) in row.iter().enumerate() {
            if !cell {
                free.push(Vec2::new(i as f64 * 0.5 + 0.25, j as f64 * 0.5 + 0.25));
            }
        }
    }
    // a world with fewer than three free blocks is reseeded
    if free.len() < 3 {
        return block_world(seed.wrapping_add(1_000_003));
    }
    let mut pick = || free.swap_remove(rng.gen_range(0..free.len()));
    let (start, goal, holder) = (pick(), pick(), pick());
    let scene = scene_from(json!({
        "bounds": [0, 0, 4, 4],
        "agent": {"radius": 0.15, "start": [start.x, start.y]},
        "walls": walls,
        "objects": [{"id": "goal", "side": 0.2, "start": [holder.x, holder.y]}],
        "goal_object": "goal", "goal": [holder.x, holder.y], "goal_tol": 0.1
    }));
    let mut query = agent_query(&scene, start, goal);
    query.clearance = 0.0;
    query.removed.insert(0);
    (scene, query)
}
