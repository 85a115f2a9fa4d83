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
//! Short-horizon constrained trajectory optimization (order 2) and the
//! manipulation primitives built on it: grasp search and pick-and-place of a
//! single object.
//!
//! Logical constraints become geometric residuals:
//!
//! | constraint     | residual                                        | role        |
//! |----------------|-------------------------------------------------|-------------|
//! | touch          | `sd(agent, object) - gap`                       | equality    |
//! | stable         | `p[t] - target`                                 | equality    |
//! | position diff  | `|p[t] - q| - bound`                            | inequality or soft cost |
//! | stable on      | center inside a placement rectangle             | inequality  |
//! | collision      | `margin - sd(body, obstacle)`                   | inequality  |
//! | smoothness     | `p[t-2] - 2 p[t-1] + p[t]`                      | cost        |

mod manip;
mod problem;
mod solver;

pub use manip::{
    carry, depart_agent, grasp_candidates, grasp_candidates_ignoring, plan_agent_to, solve_grasp,
    solve_pick_place, Grasp, Infeasible, ManipParams, PickPlace,
};
pub use problem::{
    residual_jacobian, residual_values, residuals, Anchor, Body, Category, Mode, ObjectMode,
    ProblemError, Residual, ResidualKind, ResidualReport, TrajState, TrajectoryProblem,
};
pub use solver::{solve, solve_with, SolveResult, SolverOptions};

/// Horizon for a hop of length `distance`.
pub fn hop_horizon(distance: f64, vmax: f64, dt: f64) -> usize {
    (distance / (vmax * dt)).ceil() as usize + 5
}

/// `n + 1` evenly spaced states from `a` to `b`.
pub fn straight_line(a: TrajState, b: TrajState, n: usize) -> Vec<TrajState> {
    (0..=n)
        .map(|k| {
            let s = k as f64 / n as f64;
            TrajState {
                agent: a.agent.lerp(b.agent, s),
                object: match (a.object, b.object) {
                    (Some(p), Some(q)) => Some(p.lerp(q, s)),
                    _ => None,
                },
            }
        })
        .collect()
}
