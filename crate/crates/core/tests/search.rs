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
use proptest::prelude::*;
use segman_core::rrt::{Path, PathQuery};
use segman_core::scene::{validate_plan, FailureKind, Plan};
use segman_core::search::{
    build_log, cluster_subsets, config_score, dtw_distance, expand_node, generate_subsets,
    reachability_score, requery, run_search, score_node, subset_priority, Anchor, Cell, LogContext,
    SearchFailureKind, SearchNode, SearchParams, SubsetCandidate, Sweep, LOG_WIDTH,
};
use segman_core::trajopt::ManipParams;
use segman_core::{Scene, Vec2};
use segman_testkit::{
    corridor_query, corridor_scene, feasible_subsets, flood_fill_feasible, scene_from,
    two_corridor_query, two_corridor_scene,
};
use serde_json::json;
use std::collections::BTreeSet;

fn sets(c: &[SubsetCandidate]) -> Vec<Vec<usize>> {
    c.iter().map(|c| c.o_set.clone()).collect()
}

fn as_sets(c: &[SubsetCandidate]) -> BTreeSet<BTreeSet<usize>> {
    c.iter()
        .map(|c| c.o_set.iter().copied().collect())
        .collect()
}

#[test]
fn corridor_keeps_only_sets_with_the_plug() {
    let scene = corridor_scene();
    let q = corridor_query(&scene);
    let c = generate_subsets(&scene, &q, 2, 0, 20_000);
    assert_eq!(sets(&c), vec![vec![1], vec![1, 2]]);
    assert_eq!(as_sets(&c), feasible_subsets(&scene, &q, 2));
    for cand in &c {
        assert_eq!(cand.witness_path.start(), q.start);
    }
}

#[test]
fn parallel_corridors_keep_every_opening_set() {
    let scene = two_corridor_scene();
    let q = two_corridor_query(&scene);
    let c = generate_subsets(&scene, &q, 2, 0, 20_000);
    assert_eq!(sets(&c), vec![vec![1], vec![2], vec![1, 2]]);
    assert_eq!(as_sets(&c), feasible_subsets(&scene, &q, 2));
}

#[test]
fn corridors_cluster_apart() {
    let scene = two_corridor_scene();
    let q = two_corridor_query(&scene);
    let mut c = generate_subsets(&scene, &q, 2, 0, 20_000);
    let clusters = cluster_subsets(
        &mut c,
        &scene,
        &scene.initial_config(),
        2.0 * scene.agent_radius,
    );
    assert_eq!(clusters.len(), 2);
    assert_eq!(c[0].cluster_id, c[2].cluster_id);
    assert_ne!(c[0].cluster_id, c[1].cluster_id);
    let priorities: Vec<f64> = c.iter().map(|x| subset_priority(x, &clusters)).collect();
    assert_eq!(priorities, vec![1.0, 0.5, 0.5]);
}

#[test]
fn identical_witnesses_share_a_cluster() {
    let scene = corridor_scene();
    let path = Path {
        waypoints: vec![Vec2::new(1.0, 1.5), Vec2::new(5.0, 1.5)],
        resolution: 4.0,
    };
    let cand = |o_set: Vec<usize>| SubsetCandidate {
        o_set,
        witness_path: path.clone(),
        segment: Vec::new(),
        cluster_id: None,
    };
    let mut c = vec![cand(vec![1]), cand(vec![2])];
    let clusters = cluster_subsets(&mut c, &scene, &scene.initial_config(), 0.4);
    assert_eq!(clusters.len(), 1);
    assert_eq!(clusters[0].size(), 2);
    let mut single = vec![cand(vec![1])];
    assert_eq!(
        cluster_subsets(&mut single, &scene, &scene.initial_config(), 0.4).len(),
        1
    );
}

fn arb_points() -> impl Strategy<Value = Vec<Vec2>> {
    proptest::collection::vec(
        (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y)| Vec2::new(x, y)),
        1..12,
    )
}

proptest! {
    #[test]
    fn dtw_is_symmetric(a in arb_points(), b in arb_points()) {
        prop_assert_eq!(dtw_distance(&a, &b), dtw_distance(&b, &a));
    }

    #[test]
    fn dtw_ignores_repeats(a in arb_points(), reps in proptest::collection::vec(1usize..4, 12)) {
        let stretched: Vec<Vec2> = a.iter().zip(&reps).flat_map(|(p, &k)| std::iter::repeat_n(*p, k)).collect();
        prop_assert_eq!(dtw_distance(&a, &a), 0.0);
        prop_assert_eq!(dtw_distance(&a, &stretched), 0.0);
    }

    #[test]
    fn dtw_of_single_points_is_euclidean(x in -5.0..5.0f64, y in -5.0..5.0f64) {
        let d = dtw_distance(&[Vec2::new(0.0, 0.0)], &[Vec2::new(x, y)]);
        prop_assert!((d - x.hypot(y)).abs() < 1e-12);
    }

    #[test]
    fn score_falls_with_visits(v in 1usize..50, ratio in 0.01..1.0f64, size in 1usize..5, s_r in 1.0..5.0f64, s_x in 0.0..1.0f64) {
        prop_assert!(score_node(1.0, 0.95, v + 1, ratio, size, s_r, s_x) < score_node(1.0, 0.95, v, ratio, size, s_r, s_x));
    }

    #[test]
    fn score_rises_with_reach_and_clearance(v in 1usize..50, ratio in 0.01..1.0f64, size in 1usize..5, s_r in 1.0..5.0f64, s_x in 0.01..1.0f64, dx in 0.001..0.5f64) {
        let base = score_node(1.0, 0.95, v, ratio, size, s_r, s_x);
        prop_assert!(score_node(1.0, 0.95, v, ratio, size, s_r, s_x + dx) > base);
        prop_assert!(score_node(1.0, 0.95, v, ratio, size, s_r + dx, s_x) > base);
    }
}

#[test]
fn dtw_examples() {
    let v = Vec2::new;
    assert_eq!(dtw_distance(&[v(0.0, 0.0)], &[v(3.0, 4.0)]), 5.0);
    assert_eq!(
        dtw_distance(
            &[v(0.0, 0.0), v(1.0, 0.0)],
            &[v(0.0, 0.0), v(0.0, 0.0), v(1.0, 0.0)]
        ),
        0.0
    );
    // best alignment pairs (1,0) with both (1,1) and (2,1)
    let d = dtw_distance(
        &[v(0.0, 0.0), v(1.0, 0.0)],
        &[v(0.0, 0.0), v(1.0, 1.0), v(2.0, 1.0)],
    );
    assert!((d - (1.0 + 2f64.sqrt())).abs() < 1e-12);
}

#[test]
fn score_examples() {
    assert!((score_node(1.0, 0.95, 1, 1.0, 1, 2.0, 0.5) - 1.95).abs() < 1e-9);
    assert!((score_node(1.0, 0.95, 4, 1.0, 1, 2.0, 0.5) - (0.5 + 0.95f64.powi(4))).abs() < 1e-9);
    assert_eq!(score_node(1.0, 0.95, 4, 1.0, 1, 2.0, 0.0), 0.5);
}

/// One obstacle at (5,5) far from the agent, the goal object and `witness`.
fn lone_object_scene() -> Scene {
    scene_from(json!({
        "bounds": [0, 0, 10, 10],
        "agent": {"radius": 0.2, "start": [1.0, 1.0]},
        "walls": [[7, 0, 10, 4]],
        "objects": [
            {"id": "goal", "side": 0.5, "start": [9.0, 9.0]},
            {"id": "obj1", "side": 0.5, "start": [5.0, 5.0]}
        ],
        "goal_object": "goal", "goal": [1.0, 9.0], "goal_tol": 0.1
    }))
}

fn line(a: (f64, f64), b: (f64, f64)) -> Path {
    Path {
        waypoints: vec![Vec2::new(a.0, a.1), Vec2::new(b.0, b.1)],
        resolution: 10.0,
    }
}

#[test]
fn lone_object_grid() {
    let scene = lone_object_scene();
    let config = scene.initial_config();
    let witness = line((1.0, 8.0), (2.0, 8.0));
    let ctx = LogContext {
        scene: &scene,
        root: &config,
        o_set: &[1],
        witness: &witness,
        sweep: Sweep::Disc(0.2),
    };
    for anchor in [Anchor::Initial, Anchor::Current] {
        let g = build_log(&ctx, &config, 1, anchor);
        assert_eq!(g.cells.len(), LOG_WIDTH * LOG_WIDTH);
        // the footprint spans the central 4x4 cells exactly
        assert_eq!(
            (
                g.count(Cell::Red),
                g.count(Cell::Blue),
                g.count(Cell::Green)
            ),
            (16, 0, 240)
        );
    }
    // once the object is gone its start cells turn Blue
    let mut moved = config.clone();
    moved.objects[1] = Vec2::new(2.0, 5.0);
    let g = build_log(&ctx, &moved, 1, Anchor::Initial);
    assert_eq!(
        (
            g.count(Cell::Red),
            g.count(Cell::Blue),
            g.count(Cell::Green)
        ),
        (0, 16, 240)
    );
    assert!(config_score(&ctx, &moved) > config_score(&ctx, &config));
}

#[test]
fn witness_cells_are_blue_unless_occupied() {
    let scene = lone_object_scene();
    let config = scene.initial_config();
    let witness = line((3.0, 4.5), (7.0, 4.5));
    let ctx = LogContext {
        scene: &scene,
        root: &config,
        o_set: &[1],
        witness: &witness,
        sweep: Sweep::Disc(0.2),
    };
    let g = build_log(&ctx, &config, 1, Anchor::Initial);
    for j in 0..LOG_WIDTH {
        for i in 0..LOG_WIDTH {
            let r = g.cell_rect(i, j);
            let near = r.min.y < 4.7 && r.max.y > 4.3;
            let occupied = r.min.x < 5.25 && r.max.x > 4.75 && r.min.y < 5.25 && r.max.y > 4.75;
            let expect = match (occupied, near) {
                (true, _) => Cell::Red,
                (false, true) => Cell::Blue,
                (false, false) => Cell::Green,
            };
            assert_eq!(g.get(i, j), expect, "cell {i},{j}");
        }
    }
}

#[test]
fn window_inside_a_wall_is_red() {
    let scene = lone_object_scene();
    let config = scene.initial_config();
    let witness = line((1.0, 8.0), (2.0, 8.0));
    let ctx = LogContext {
        scene: &scene,
        root: &config,
        o_set: &[1],
        witness: &witness,
        sweep: Sweep::Disc(0.2),
    };
    let mut buried = config.clone();
    buried.objects[1] = Vec2::new(8.5, 2.0);
    let g = build_log(&ctx, &buried, 1, Anchor::Current);
    assert_eq!(g.count(Cell::Red), LOG_WIDTH * LOG_WIDTH);
    assert_eq!(g.score(), 0.0);
}

#[test]
fn reachability_counts_graspable_objects() {
    let scene = two_corridor_scene();
    let config = scene.initial_config();
    let manip = ManipParams::default();
    assert_eq!(
        reachability_score(&config, &scene, &[1, 2], 0, &manip).0,
        3.0
    );
    assert_eq!(reachability_score(&config, &scene, &[1], 0, &manip).0, 2.0);
    let sealed = scene_from(json!({
        "bounds": [0, 0, 6, 3],
        "agent": {"radius": 0.2, "start": [0.5, 1.5]},
        "walls": [[2, 0, 2.3, 3]],
        "objects": [
            {"id": "goal", "side": 0.5, "start": [0.5, 0.5]},
            {"id": "obj1", "side": 0.5, "start": [4.0, 1.5]}
        ],
        "goal_object": "goal", "goal": [1.0, 2.5], "goal_tol": 0.1
    }));
    assert_eq!(
        reachability_score(&sealed.initial_config(), &sealed, &[1], 0, &manip).0,
        1.0
    );
}

fn relocations_valid(scene: &Scene, segments: Vec<segman_core::PlanSegment>) {
    let report = validate_plan(scene, &Plan { segments });
    assert!(
        report
            .failures
            .iter()
            .all(|f| f.kind == FailureKind::Terminal),
        "{:?}",
        report.failures
    );
}

#[test]
fn corridor_search_moves_the_plug_once() {
    let scene = corridor_scene();
    let q = corridor_query(&scene);
    let out = run_search(
        &scene,
        &scene.initial_config(),
        &q,
        &SearchParams::default(),
    )
    .unwrap();
    assert_eq!(out.o_set, vec![1]);
    assert_eq!(out.segments.len(), 2, "one pick and one place");
    relocations_valid(&scene, out.segments.clone());
    let after: PathQuery = requery(&q, &out.config, &scene).unwrap();
    assert!(flood_fill_feasible(&scene, &after));
    assert!(!out.trace.is_empty());
}

#[test]
fn zero_budget_fails() {
    let scene = corridor_scene();
    let q = corridor_query(&scene);
    let params = SearchParams {
        node_budget: 0,
        ..SearchParams::default()
    };
    let err = run_search(&scene, &scene.initial_config(), &q, &params).unwrap_err();
    assert_eq!(err.kind, SearchFailureKind::Exhausted);
}

#[test]
fn expansion_relocates_toward_green_cells() {
    let scene = corridor_scene();
    let q = corridor_query(&scene);
    let config = scene.initial_config();
    let cands = generate_subsets(&scene, &q, 1, 0, 20_000);
    let witness = cands[0].witness_path.clone();
    let ctx = LogContext {
        scene: &scene,
        root: &config,
        o_set: &[1],
        witness: &witness,
        sweep: Sweep::Disc(scene.agent_radius),
    };
    let params = SearchParams::default();
    let (s_r, reachable) = reachability_score(&config, &scene, &[1], 0, &params.manip);
    let mut node = SearchNode {
        config: config.clone(),
        o_set: vec![1],
        visits: 1,
        depth: 0,
        parent: None,
        s_r,
        s_x: config_score(&ctx, &config),
        creation_index: 0,
        tree: 0,
        reachable,
        segments: Vec::new(),
        leaf: false,
    };
    let mut next = 1;
    let kids = expand_node(&mut node, 0, &ctx, 1.0, &params, &mut next);
    assert_eq!(node.visits, 2);
    assert!((1..=4).contains(&kids.len()), "{} children", kids.len());
    for k in kids {
        assert_eq!((k.depth, k.visits, k.parent), (1, 1, Some(0)));
        assert!(k.config.objects[1].distance(config.objects[1]) > 0.1);
        relocations_valid(&scene, k.segments);
    }
}
