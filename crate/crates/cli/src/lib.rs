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
//! Command implementations behind the `segman` binary.

pub mod bench;
pub mod render;

use anyhow::{bail, Context, Result};
use segman_core::pipeline::{load_plan, solve_task, SolverParams};
use segman_core::scene::{load_scene_file, validate_plan, Plan, Scene};
use std::fs;
use std::path::{Path, PathBuf};

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PLANNER: i32 = 2;

pub struct SolveArgs {
    pub scene: PathBuf,
    pub seed: Option<u64>,
    pub time_budget: Option<f64>,
    pub params: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub with_timing: bool,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_scene(path: &Path) -> Result<Scene> {
    load_scene_file(path).with_context(|| format!("invalid scene {}", path.display()))
}

/// Parameters from an optional JSON file with command-line overrides.
pub fn load_params(
    file: Option<&Path>,
    seed: Option<u64>,
    time_budget: Option<f64>,
) -> Result<SolverParams> {
    let mut params = match file {
        Some(p) => serde_json::from_str(&read(p)?)
            .with_context(|| format!("invalid parameters {}", p.display()))?,
        None => SolverParams::default(),
    };
    if let Some(s) = seed {
        params.seed = s;
    }
    if let Some(t) = time_budget {
        params.time_budget = t;
    }
    params.check()?;
    Ok(params)
}

pub fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let scene = load_scene(&args.scene)?;
    let params = load_params(args.params.as_deref(), args.seed, args.time_budget)?;
    let solution = solve_task(&scene, &params);
    let solved_scene = params.apply(&scene);
    let file = solution.to_file(&solved_scene, args.with_timing);
    let json = serde_json::to_string_pretty(&file)? + "\n";
    match &args.out {
        Some(p) => write(p, &json)?,
        None => print!("{json}"),
    }
    if let Some(p) = &args.svg {
        write(p, &render::render_svg(&solved_scene, &solution.plan))?;
    }
    let s = &solution.stats;
    eprintln!(
        "{}: success={} pnp_count={} nodes_expanded={} wall_time_s={:.3}",
        scene.name().unwrap_or("scene"),
        s.success,
        s.pnp_count,
        s.nodes_expanded,
        s.wall_time_s
    );
    Ok(if s.success { EXIT_OK } else { EXIT_PLANNER })
}

fn load_plan_file(path: &Path, scene: &Scene) -> Result<Plan> {
    load_plan(&read(path)?, scene).with_context(|| format!("invalid plan {}", path.display()))
}

pub fn cmd_validate(scene: &Path, plan: &Path) -> Result<i32> {
    let scene = load_scene(scene)?;
    let plan = load_plan_file(plan, &scene)?;
    let report = validate_plan(&scene, &plan);
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.valid { EXIT_OK } else { EXIT_PLANNER })
}

pub fn cmd_render(scene: &Path, plan: Option<&Path>, out: Option<&Path>) -> Result<i32> {
    let scene = load_scene(scene)?;
    let plan = match plan {
        Some(p) => load_plan_file(p, &scene)?,
        None => Plan::new(),
    };
    let svg = render::render_svg(&scene, &plan);
    match out {
        Some(p) => write(p, &svg)?,
        None => print!("{svg}"),
    }
    Ok(EXIT_OK)
}

/// Scene files of a task directory, sorted by name.
pub fn task_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no task files in {}", dir.display());
    }
    Ok(files)
}

pub struct BenchArgs {
    pub tasks: PathBuf,
    pub seeds: u64,
    pub time_budget: Option<f64>,
    pub params: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

pub fn cmd_bench(args: &BenchArgs) -> Result<i32> {
    let files = task_files(&args.tasks)?;
    let base = load_params(args.params.as_deref(), None, args.time_budget)?;
    let mut runs = Vec::new();
    for file in &files {
        let scene = load_scene(file)?;
        let task = scene.name().map(str::to_string).unwrap_or_else(|| {
            file.file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned()
        });
        for seed in 0..args.seeds {
            let params = SolverParams {
                seed,
                ..base.clone()
            };
            let sol = solve_task(&scene, &params);
            eprintln!(
                "{task} seed {seed}: success={} pnp={} {:.2}s",
                sol.stats.success, sol.stats.pnp_count, sol.stats.wall_time_s
            );
            runs.push(bench::RunRecord {
                task: task.clone(),
                seed,
                success: sol.stats.success,
                wall_time_s: sol.stats.wall_time_s,
                pnp_count: sol.stats.pnp_count,
            });
        }
    }
    let report = bench::aggregate(runs, args.seeds, base.time_budget);
    if let Some(p) = &args.out {
        write(p, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    print!("{}", report.table());
    Ok(EXIT_OK)
}
