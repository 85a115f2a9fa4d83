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
use criterion::{criterion_group, criterion_main, Criterion};
use segman_bench::task;
use segman_core::pipeline::{aux_query, solve_task, SolverParams};
use segman_core::rrt::{plan_birrt, DEFAULT_MAX_ITERS};
use segman_core::trajopt::{solve_pick_place, ManipParams};
use std::hint::black_box;

fn rrt(c: &mut Criterion) {
    let scene = task("maze_easy");
    let query = aux_query(
        &scene.initial_config(),
        &scene,
        ManipParams::default().clearance,
    );
    c.bench_function("birrt/maze_easy", |b| {
        b.iter(|| plan_birrt(black_box(&query), &scene, 0, DEFAULT_MAX_ITERS).unwrap())
    });
}

fn trajopt(c: &mut Criterion) {
    let scene = task("o_room");
    let config = scene.initial_config();
    let object = scene.goal_object;
    let target = config.objects[object] + (scene.goal - config.objects[object]) * 0.25;
    let manip = ManipParams::default();
    c.bench_function("pick_place/o_room", |b| {
        b.iter(|| solve_pick_place(&config, &scene, object, black_box(target), true, 0, &manip))
    });
}

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for stem in ["wall_easy", "corner"] {
        let scene = task(stem);
        group.bench_function(stem, |b| {
            b.iter(|| solve_task(black_box(&scene), &SolverParams::default()))
        });
    }
    group.finish();
}

criterion_group!(benches, rrt, trajopt, pipeline);
criterion_main!(benches);
