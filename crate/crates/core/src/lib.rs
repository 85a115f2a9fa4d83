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
//! Planar sequential pick-and-place planning.
//!
//! A disc agent must carry a goal square to a goal position through a
//! cluttered scene of walls and movable squares. Planning combines
//! bidirectional RRT ([`rrt`]), short-horizon constrained trajectory
//! optimization ([`trajopt`]), adaptive subgoal selection along an auxiliary
//! path ([`subgoal`]), and a guided forward search that relocates obstructing
//! objects ([`search`]). [`pipeline::solve_task`] ties these together.

pub mod error;
pub mod geometry;
pub mod pipeline;
pub mod rrt;
pub mod scene;
pub mod search;
pub mod subgoal;
pub mod trajopt;

pub use error::{PlanError, SceneError};
pub use geometry::{Rect, Shape, Vec2};
pub use scene::{Configuration, Plan, PlanSegment, Scene};
