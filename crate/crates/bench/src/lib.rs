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
//! Fixtures shared by the benchmarks.

use segman_core::scene::load_scene_file;
use segman_core::Scene;
use std::path::PathBuf;

/// A bundled task by file stem, e.g. `"wall_easy"`.
pub fn task(stem: &str) -> Scene {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../tasks")
        .join(format!("{stem}.json"));
    load_scene_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
