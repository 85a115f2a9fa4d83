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
//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion fails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use segman_cli::{cmd_solve, task_files, SolveArgs};
use segman_core::pipeline::{
    plan_aux, plan_pick, solve_task, Blocked, PlaceSolver, Solution, SolverParams,
};
use segman_core::rrt::{Path, DEFAULT_MAX_ITERS};
use segman_core::scene::{load_scene_file, validate_plan};
use segman_core::search::{
    config_score, dtw_distance, generate_subsets, score_node, LogContext, SearchParams, Sweep,
};
use segman_core::subgoal::{
    adaptive_place, every_waypoint_place, hop_fn, place_with_refinement, RefineLimits, Refined,
    Verdict,
};
use segman_core::trajopt::{
    solve, straight_line, Body, ObjectMode, Residual, ResidualKind, TrajState, TrajectoryProblem,
};
use segman_core::{Scene, Shape, Vec2};
use segman_testkit::{
    compare_with_selector, feasible_subsets, goal_object_query, jacobian_report, min_subsets,
    narrow_corridor_scene, open_scene, plugged_wall_scene, Outcome, NARROW_X,
};
use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

const SEEDS: u64 = 10;

struct Task {
    name: String,
    file: PathBuf,
    obstacle: bool,
    scene: Scene,
}

fn tasks() -> Vec<Task> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../tasks");
    task_files(&dir)
        .expect("bundled tasks")
        .into_iter()
        .map(|file| {
            let raw: serde_json::Value =
                serde_json::from_str(&fs::read_to_string(&file).unwrap()).unwrap();
            let scene = load_scene_file(&file).unwrap();
            Task {
                name: scene.name().unwrap_or("?").to_string(),
                obstacle: raw["meta"]["category"] == "obstacle",
                file,
                scene,
            }
        })
        .collect()
}

#[derive(Default)]
struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: &str, title: &str, pass: bool, detail: String) {
        if !pass {
            self.failed += 1;
        }
        println!(
            "{id} {} {title}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
    }
}

fn ac1_ac2(report: &mut Report, tasks: &[Task]) -> Vec<Vec<Solution>> {
    let started = Instant::now();
    let mut all = Vec::new();
    let (mut claimed, mut invalid) = (0, Vec::new());
    let mut low = Vec::new();
    for t in tasks {
        let mut runs = Vec::new();
        for seed in 0..SEEDS {
            let sol = solve_task(
                &t.scene,
                &SolverParams {
                    seed,
                    ..SolverParams::default()
                },
            );
            if sol.stats.success {
                claimed += 1;
                if !validate_plan(&t.scene, &sol.plan).valid {
                    invalid.push(format!("{} seed {seed}", t.name));
                }
            }
            runs.push(sol);
        }
        let solved = runs.iter().filter(|s| s.stats.success).count() as u64;
        let need = if t.obstacle { 8 } else { 9 };
        if solved < need {
            low.push(format!("{} {solved}/{SEEDS}", t.name));
        }
        all.push(runs);
    }
    let elapsed = started.elapsed();
    report.line(
        "AC-1",
        "plan validity",
        invalid.is_empty() && elapsed < Duration::from_secs(1800),
        format!(
            "{claimed} successful plans, {} invalid {invalid:?}, {:.0} s total",
            invalid.len(),
            elapsed.as_secs_f64()
        ),
    );
    let rates: Vec<String> = tasks
        .iter()
        .zip(&all)
        .map(|(t, runs)| {
            format!(
                "{} {}/{SEEDS}",
                t.name,
                runs.iter().filter(|s| s.stats.success).count()
            )
        })
        .collect();
    report.line(
        "AC-2",
        "success rate",
        low.is_empty(),
        format!("below threshold {low:?}; {}", rates.join(", ")),
    );
    all
}

fn ac3(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut divergences = Vec::new();
    for trial in 0..100_000 {
        let n = rng.gen_range(2..=64);
        let theta = rng.gen_range(1..=8);
        let bias = rng.gen_range(0.05..0.95);
        let answers: Vec<bool> = (0..600).map(|_| rng.gen_bool(bias)).collect();
        match compare_with_selector(n, theta, &answers) {
            Ok(Outcome::Starved) => divergences.push(format!("trial {trial}: stream too short")),
            Ok(_) => {}
            Err(e) => divergences.push(format!("trial {trial}: {e}")),
        }
    }
    let line = |n: usize| Path {
        waypoints: (0..n).map(|k| Vec2::new(k as f64 * 0.2, 0.0)).collect(),
        resolution: 0.2,
    };
    let one_call = (2..40).all(|n| {
        let mut yes = hop_fn(|_: &usize, i: usize, _| Some((i, i)));
        adaptive_place(&line(n), &mut yes, &0, 2).unwrap().calls == 1
    });
    let exhausted = (2..40).all(|n| {
        let mut no = hop_fn(|_: &usize, _, _| None::<((), usize)>);
        let run = adaptive_place(&line(n), &mut no, &0, 2).unwrap();
        run.placement.is_none() && run.trace.last().map(|t| t.verdict) == Some(Verdict::Exhausted)
    });
    report.line(
        "AC-3",
        "subgoal selector vs oracle",
        divergences.is_empty() && one_call && exhausted,
        format!("{} divergences in 100000 streams; all-feasible one call: {one_call}; never-feasible exhausted: {exhausted}", divergences.len()),
    );
}

fn ac4(report: &mut Report) {
    let a = score_node(1.0, 0.95, 1, 1.0, 1, 2.0, 0.5);
    let b = score_node(1.0, 0.95, 4, 1.0, 1, 2.0, 0.5);
    let values = (a - 1.95).abs() <= 1e-9 && (b - 1.314_506_25).abs() <= 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut broken = 0;
    for _ in 0..10_000 {
        let v = rng.gen_range(1..100);
        let ratio = rng.gen_range(0.01..1.0);
        let size = rng.gen_range(1..6);
        let s_r = rng.gen_range(1.0..6.0);
        let s_x = rng.gen_range(0.01..1.0);
        let d = rng.gen_range(1e-3..0.5);
        let s = score_node(1.0, 0.95, v, ratio, size, s_r, s_x);
        if score_node(1.0, 0.95, v + 1, ratio, size, s_r, s_x) >= s
            || score_node(1.0, 0.95, v, ratio, size, s_r, s_x + d) <= s
            || score_node(1.0, 0.95, v, ratio, size, s_r + d, s_x) <= s
        {
            broken += 1;
        }
    }
    report.line(
        "AC-4",
        "node score",
        values && broken == 0,
        format!("S = {a:.12} and {b:.12}; {broken} of 10000 tuples break monotonicity"),
    );
}

fn ac5(report: &mut Report) {
    let max_size = SearchParams::default().max_size;
    let mut elapsed = Duration::ZERO;
    let mut mismatches = Vec::new();
    for seed in 0..50 {
        let (scene, query) = plugged_wall_scene(seed);
        let t = Instant::now();
        let got: BTreeSet<BTreeSet<usize>> =
            generate_subsets(&scene, &query, max_size, seed, DEFAULT_MAX_ITERS)
                .into_iter()
                .map(|c| c.o_set.into_iter().collect())
                .collect();
        elapsed += t.elapsed();
        let want = feasible_subsets(&scene, &query, max_size);
        if got != want {
            mismatches.push(format!("seed {seed}: kept {got:?}, oracle {want:?}"));
        }
    }
    report.line(
        "AC-5",
        "subset elimination",
        mismatches.is_empty() && elapsed < Duration::from_secs(120),
        format!(
            "{} of 50 scenes disagree {mismatches:?}; {:.1} s",
            mismatches.len(),
            elapsed.as_secs_f64()
        ),
    );
}

fn ac6(report: &mut Report, tasks: &[Task], runs: &[Vec<Solution>]) {
    let mut checked = Vec::new();
    let mut bad = Vec::new();
    for (t, sols) in tasks.iter().zip(runs) {
        if !t.obstacle {
            continue;
        }
        let o_min = min_subsets(&t.scene, &goal_object_query(&t.scene));
        if o_min.is_empty() {
            continue;
        }
        let k = o_min[0].len();
        checked.push(format!("{} |O_min|={k}", t.name));
        for sol in sols.iter().filter(|s| s.stats.success) {
            let removed: BTreeSet<usize> = sol
                .stats
                .removal_sets
                .iter()
                .flatten()
                .filter_map(|id| t.scene.object_index(id))
                .collect();
            let covers = o_min.iter().any(|m| m.is_subset(&removed));
            if !covers || sol.stats.pnp_count < k + 1 {
                bad.push(format!(
                    "{} seed {}: removed {removed:?}, pnp {}",
                    t.name, sol.stats.seed, sol.stats.pnp_count
                ));
            }
        }
    }
    report.line(
        "AC-6",
        "minimality",
        bad.is_empty() && !checked.is_empty(),
        format!("tasks [{}]; violations {bad:?}", checked.join(", ")),
    );
}

fn ac7(report: &mut Report) {
    let worst = jacobian_report(100, 7);
    let (name, err) = worst
        .iter()
        .copied()
        .fold(("", 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut converged, mut violated) = (0, 0);
    for _ in 0..50 {
        let horizon = 20;
        let from = Vec2::new(0.0, 0.0);
        let to = Vec2::new(4.0, rng.gen_range(-1.0..1.0));
        let mut p = TrajectoryProblem::new(horizon, 0.2, ObjectMode::Absent);
        p.push(Residual::hard(
            ResidualKind::Smoothness {
                body: Body::Agent,
                weight: 1.0,
            },
            2..=horizon,
        ));
        p.push(Residual::hard(
            ResidualKind::Stable {
                body: Body::Agent,
                target: from,
            },
            [0],
        ));
        p.push(Residual::hard(
            ResidualKind::Stable {
                body: Body::Agent,
                target: to,
            },
            [horizon],
        ));
        let pillar = Shape::disc(
            Vec2::new(rng.gen_range(1.5..2.5), rng.gen_range(-0.5..0.5)),
            rng.gen_range(0.2..0.6),
        );
        p.push(Residual::hard(
            ResidualKind::Collision {
                body: Body::Agent,
                obstacle: pillar,
                margin: 0.1,
            },
            1..horizon,
        ));
        let init = straight_line(
            TrajState {
                agent: from,
                object: None,
            },
            TrajState {
                agent: to,
                object: None,
            },
            horizon,
        );
        let out = solve(&p, &init).unwrap();
        if out.converged {
            converged += 1;
            if out.max_eq_residual > 1e-4 || out.max_ineq_violation > 1e-4 {
                violated += 1;
            }
        }
    }
    report.line(
        "AC-7",
        "optimizer numerics",
        err <= 1e-4 && converged > 0 && violated == 0,
        format!("worst Jacobian error {err:.2e} ({name}); {converged} of 50 detours converged, {violated} above 1e-4"),
    );
}

fn ac8(report: &mut Report) {
    let v = Vec2::new;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut random = |n: usize| -> Vec<Vec2> {
        (0..n)
            .map(|_| v(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)))
            .collect()
    };
    let mut ok = true;
    for _ in 0..1000 {
        let (a, b) = (random(7), random(5));
        ok &= dtw_distance(&a, &a) == 0.0 && dtw_distance(&a, &b) == dtw_distance(&b, &a);
    }
    let single = dtw_distance(&[v(0.0, 0.0)], &[v(3.0, 4.0)]);
    let repeat = dtw_distance(
        &[v(0.0, 0.0), v(1.0, 0.0)],
        &[v(0.0, 0.0), v(0.0, 0.0), v(1.0, 0.0)],
    );
    report.line(
        "AC-8",
        "DTW",
        ok && single == 5.0 && repeat == 0.0,
        format!(
            "identity and symmetry on 1000 pairs: {ok}; single pair {single}; repetition {repeat}"
        ),
    );
}

fn ac9(report: &mut Report, tasks: &[Task]) {
    let scene = &tasks
        .iter()
        .find(|t| t.file.ends_with("four_blocks.json"))
        .expect("four blocks task")
        .scene;
    let config = scene.initial_config();
    let (o1, o4) = (
        scene.object_index("obj1").unwrap(),
        scene.object_index("obj4").unwrap(),
    );
    let goal = scene.goal_object;
    let prefer = Some(scene.goal - config.objects[goal]);
    let Err(Blocked::Movable(query)) =
        plan_pick(&config, scene, goal, &SolverParams::default(), prefer, 0)
    else {
        report.line(
            "AC-9",
            "relocation raises S_x",
            false,
            "goal object is not blocked by movables".into(),
        );
        return;
    };
    let cands = generate_subsets(scene, &query, 4, 0, DEFAULT_MAX_ITERS);
    let Some(cand) = cands.iter().find(|c| c.o_set.contains(&o4)) else {
        report.line(
            "AC-9",
            "relocation raises S_x",
            false,
            "no candidate subset with obj4".into(),
        );
        return;
    };
    let o_set = [o1, o4];
    let ctx = LogContext {
        scene,
        root: &config,
        o_set: &o_set,
        witness: &cand.witness_path,
        sweep: Sweep::of(query.mover, scene),
    };
    let before = config_score(&ctx, &config);
    let mut moved = config.clone();
    moved.objects[o1] = Vec2::new(4.0, 5.0);
    let after = config_score(&ctx, &moved);
    report.line(
        "AC-9",
        "relocation raises S_x",
        after > before,
        format!("S_x {before:.4} -> {after:.4} after moving obj1 to (4, 5)"),
    );
}

fn ac10(report: &mut Report, tasks: &[Task]) {
    let dir = tempfile::tempdir().unwrap();
    let mut differ = Vec::new();
    for t in tasks {
        let outs: Vec<(Vec<u8>, Vec<u8>)> = (0..2)
            .map(|k| {
                let out = dir.path().join(format!("plan{k}.json"));
                let svg = dir.path().join(format!("plan{k}.svg"));
                cmd_solve(&SolveArgs {
                    scene: t.file.clone(),
                    seed: Some(0),
                    time_budget: None,
                    params: None,
                    out: Some(out.clone()),
                    svg: Some(svg.clone()),
                    with_timing: false,
                })
                .unwrap();
                (fs::read(out).unwrap(), fs::read(svg).unwrap())
            })
            .collect();
        if outs[0] != outs[1] {
            differ.push(t.name.clone());
        }
    }
    report.line(
        "AC-10",
        "determinism",
        differ.is_empty(),
        format!("{} tasks, differing {differ:?}", tasks.len()),
    );
}

fn arc(path: &Path, from: usize, to: usize) -> f64 {
    path.waypoints[from..=to]
        .windows(2)
        .map(|w| w[0].distance(w[1]))
        .sum()
}

fn ac11(report: &mut Report) {
    let params = SolverParams::default();
    let scene = open_scene();
    let mut open = Vec::new();
    for seed in 0..4 {
        let config = scene.initial_config();
        let prefer = Some(scene.goal - config.objects[scene.goal_object]);
        let (_, grasped) =
            plan_pick(&config, &scene, scene.goal_object, &params, prefer, seed).unwrap();
        let aux = plan_aux(&grasped, &scene, &params, seed).unwrap();
        let solver = || PlaceSolver {
            scene: &scene,
            manip: params.manip(),
            seed,
            deadline: None,
        };
        let adaptive = adaptive_place(&aux, &mut solver(), &grasped, params.theta).unwrap();
        let naive = every_waypoint_place(&aux, &mut solver(), &grasped);
        open.push((adaptive.placement.is_some(), adaptive.calls, naive.calls));
    }
    let fewer = open.iter().all(|&(placed, a, n)| placed && a < n);

    let scene = narrow_corridor_scene();
    let (mut inside, mut outside) = (Vec::new(), Vec::new());
    let mut placed = 0;
    for seed in 0..5 {
        let config = scene.initial_config();
        let prefer = Some(scene.goal - config.objects[scene.goal_object]);
        let Ok((_, grasped)) = plan_pick(&config, &scene, scene.goal_object, &params, prefer, seed)
        else {
            continue;
        };
        let Ok(aux) = plan_aux(&grasped, &scene, &params, seed) else {
            continue;
        };
        let mut solver = PlaceSolver {
            scene: &scene,
            manip: params.manip(),
            seed,
            deadline: None,
        };
        let Ok(Refined::Placed {
            placement, path, ..
        }) = place_with_refinement(&aux, &mut solver, &grasped, RefineLimits::default(), |_| {
            None
        })
        else {
            continue;
        };
        placed += 1;
        let mut prev = 0;
        for &i in &placement.indices {
            let mid = path.waypoints[(prev + i) / 2].x;
            let hop = arc(&path, prev, i);
            if (NARROW_X.0..=NARROW_X.1).contains(&mid) {
                inside.push(hop);
            } else {
                outside.push(hop);
            }
            prev = i;
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
    let (mi, mo) = (mean(&inside), mean(&outside));
    let finer = placed > 0 && !inside.is_empty() && !outside.is_empty() && mi < mo;
    report.line(
        "AC-11",
        "adaptive subgoals",
        fewer && finer,
        format!(
            "open floor (placed, adaptive calls, naive calls) {open:?}; slalom {placed}/5 placed, mean hop {mi:.2} inside vs {mo:.2} outside"
        ),
    );
}

fn main() -> ExitCode {
    let tasks = tasks();
    let mut report = Report::default();
    let runs = ac1_ac2(&mut report, &tasks);
    ac3(&mut report);
    ac4(&mut report);
    ac5(&mut report);
    ac6(&mut report, &tasks, &runs);
    ac7(&mut report);
    ac8(&mut report);
    ac9(&mut report, &tasks);
    ac10(&mut report, &tasks);
    ac11(&mut report);
    println!("acceptance: {} of 11 criteria failed", report.failed);
    if report.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
