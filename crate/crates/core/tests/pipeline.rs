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
use segman_core::pipeline::{load_plan, solve_task, SolverParams};
use segman_core::scene::validate_plan;
use segman_core::Scene;
use segman_testkit::{goal_object_query, min_subsets, open_scene, scene_from};
use serde_json::json;

/// The goal object has to go through a short corridor plugged by `obj1`;
/// the agent starts on the far side.
fn plugged_task() -> Scene {
    scene_from(json!({
        "bounds": [0, 0, 6, 3],
        "agent": {"radius": 0.2, "start": [5.0, 0.5]},
        "walls": [[2, 0, 3.2, 1], [2, 2, 3.2, 3]],
        "objects": [
            {"id": "goal", "side": 0.5, "start": [0.6, 1.5]},
            {"id": "obj1", "side": 0.8, "start": [2.6, 1.5]}
        ],
        "goal_object": "goal", "goal": [5.2, 1.5], "goal_tol": 0.1
    }))
}

fn params(seed: u64) -> SolverParams {
    SolverParams {
        seed,
        time_budget: 120.0,
        ..SolverParams::default()
    }
}

#[test]
fn open_floor_takes_one_pick_and_place() {
    let scene = open_scene();
    let sol = solve_task(&scene, &params(0));
    assert!(sol.stats.success);
    assert_eq!(sol.stats.pnp_count, 1);
    assert!(sol.stats.removal_sets.is_empty());
    let report = validate_plan(&scene, &sol.plan);
    assert!(report.valid, "{:?}", report.failures);
}

#[test]
fn plugged_corridor_is_cleared_first() {
    let scene = plugged_task();
    let o_min = min_subsets(&scene, &goal_object_query(&scene));
    assert_eq!(o_min.len(), 1);
    let sol = solve_task(&scene, &params(0));
    assert!(sol.stats.success);
    assert!(sol.stats.pnp_count > o_min[0].len());
    assert!(!sol.stats.removal_sets.is_empty());
    assert!(sol.stats.removal_sets.iter().all(|s| s == &["obj1"]));
    let report = validate_plan(&scene, &sol.plan);
    assert!(report.valid, "{:?}", report.failures);
}

#[test]
fn tiny_budget_reports_failure() {
    let scene = plugged_task();
    let p = SolverParams {
        seed: 7,
        time_budget: 0.001,
        ..SolverParams::default()
    };
    let sol = solve_task(&scene, &p);
    assert!(!sol.stats.success);
    assert_eq!(sol.stats.seed, 7);
    assert!(sol.stats.wall_time_s > 0.0);
}

#[test]
fn same_seed_same_solution() {
    let scene = plugged_task();
    let a = serde_json::to_string(&solve_task(&scene, &params(3)).to_file(&scene, false)).unwrap();
    let b = serde_json::to_string(&solve_task(&scene, &params(3)).to_file(&scene, false)).unwrap();
    assert_eq!(a, b);
    assert!(!a.contains("wall_time"));
}

#[test]
fn solution_files_load_back() {
    let scene = open_scene();
    let sol = solve_task(&scene, &params(1));
    let text = serde_json::to_string(&sol.to_file(&scene, true)).unwrap();
    assert!(text.contains("wall_time_s"));
    let plan = load_plan(&text, &scene).unwrap();
    assert_eq!(plan.segments.len(), sol.plan.segments.len());
    assert!(validate_plan(&scene, &plan).valid);
}

#[test]
fn bad_parameters_are_rejected() {
    let cases = [
        SolverParams {
            theta: 0,
            ..SolverParams::default()
        },
        SolverParams {
            gamma: 1.0,
            ..SolverParams::default()
        },
        SolverParams {
            time_budget: -1.0,
            ..SolverParams::default()
        },
        SolverParams {
            vmax: Some(f64::NAN),
            ..SolverParams::default()
        },
    ];
    let fields: Vec<_> = cases.iter().map(|p| p.check().unwrap_err().field).collect();
    assert_eq!(fields, ["theta", "gamma", "time_budget", "vmax"]);
    assert!(SolverParams::default().check().is_ok());
}
