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
//! Adaptive subgoal selection over the waypoints of an object path.
//!
//! The selector is a pure state machine: it proposes a waypoint index, is
//! told whether the hop there was feasible, and adapts its stride. Strides
//! double after `theta` consecutive successes and halve on failure.

use crate::geometry::Vec2;
use crate::rrt::{resample_path, Path};
use serde::Serialize;
use std::marker::PhantomData;
use thiserror::Error;

pub const DEFAULT_THETA: usize = 2;
pub const DEFAULT_MAX_REFINEMENTS: usize = 3;
pub const DEFAULT_MAX_RETRIES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SelectorState {
    /// Waypoint index proposed next.
    pub p_i: usize,
    pub step_i: usize,
    pub step_max: usize,
    /// Last accepted index.
    pub p_prev: usize,
    /// Consecutive successes.
    pub beta: usize,
    pub theta: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Continue,
    Done,
    Exhausted,
}

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
pub enum SubgoalError {
    #[error("a path needs at least 2 waypoints, got {0}")]
    TooFewWaypoints(usize),
    #[error("theta must be at least 1")]
    ZeroTheta,
}

pub fn selector_init(n_waypoints: usize, theta: usize) -> Result<SelectorState, SubgoalError> {
    if n_waypoints < 2 {
        return Err(SubgoalError::TooFewWaypoints(n_waypoints));
    }
    if theta == 0 {
        return Err(SubgoalError::ZeroTheta);
    }
    let m = n_waypoints - 1;
    Ok(SelectorState {
        p_i: m,
        step_i: m,
        step_max: m,
        p_prev: 0,
        beta: 0,
        theta,
    })
}

/// Advances the selector after trying the hop to `state.p_i`.
pub fn selector_step(state: SelectorState, feasible: bool) -> (SelectorState, Verdict) {
    let mut s = state;
    if feasible {
        s.beta += 1;
        s.p_prev = s.p_i;
        if s.p_prev == s.step_max {
            return (s, Verdict::Done);
        }
        if s.beta >= s.theta {
            s.step_i = (s.step_i * 2).min(s.step_max);
        }
        s.p_i = (s.p_i + s.step_i).min(s.step_max);
        (s, Verdict::Continue)
    } else {
        s.beta = 0;
        if s.step_i == 1 {
            return (s, Verdict::Exhausted);
        }
        s.step_i = (s.step_i / 2).max(1);
        s.p_i = (s.p_prev + s.step_i).min(s.step_max);
        (s, Verdict::Continue)
    }
}

/// One selector step as recorded in a trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    /// Index that was tried.
    pub p_i: usize,
    pub step_i: usize,
    pub beta: usize,
    pub feasible: bool,
    pub verdict: Verdict,
}

/// Solves one hop of a placement: moves the carried object from the
/// current state to a waypoint.
pub trait HopSolver {
    type State: Clone;
    type Hop;

    /// `None` when the hop is infeasible.
    fn solve_hop(
        &mut self,
        state: &Self::State,
        index: usize,
        waypoint: Vec2,
    ) -> Option<(Self::Hop, Self::State)>;
}

/// Adapts a closure into a [`HopSolver`].
pub struct HopFn<F, S, H> {
    f: F,
    _types: PhantomData<fn(&S) -> (H, S)>,
}

pub fn hop_fn<F, S, H>(f: F) -> HopFn<F, S, H>
where
    F: FnMut(&S, usize, Vec2) -> Option<(H, S)>,
{
    HopFn {
        f,
        _types: PhantomData,
    }
}

impl<S: Clone, H, F> HopSolver for HopFn<F, S, H>
where
    F: FnMut(&S, usize, Vec2) -> Option<(H, S)>,
{
    type State = S;
    type Hop = H;

    fn solve_hop(&mut self, state: &S, index: usize, waypoint: Vec2) -> Option<(H, S)> {
        (self.f)(state, index, waypoint)
    }
}

/// Accepted hops of a successful placement.
#[derive(Clone, Debug, PartialEq)]
pub struct Placement<H, S> {
    pub hops: Vec<H>,
    /// Waypoint index reached by each hop; strictly increasing.
    pub indices: Vec<usize>,
    pub end: S,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveRun<H, S> {
    pub placement: Option<Placement<H, S>>,
    /// Hop solver invocations.
    pub calls: usize,
    pub trace: Vec<TraceEntry>,
}

/// Runs the selector along `path` from `start`.
pub fn adaptive_place<V: HopSolver>(
    path: &Path,
    solver: &mut V,
    start: &V::State,
    theta: usize,
) -> Result<AdaptiveRun<V::Hop, V::State>, SubgoalError> {
    let mut state = selector_init(path.waypoints.len(), theta)?;
    let mut current = start.clone();
    let mut hops = Vec::new();
    let mut indices = Vec::new();
    let mut trace = Vec::new();
    let mut calls = 0;
    loop {
        let tried = state;
        calls += 1;
        let result = solver.solve_hop(&current, tried.p_i, path.waypoints[tried.p_i]);
        let feasible = result.is_some();
        if let Some((hop, next)) = result {
            hops.push(hop);
            indices.push(tried.p_i);
            current = next;
        }
        let (next, verdict) = selector_step(state, feasible);
        log::trace!(
            "subgoal p_i={} step_i={} beta={} feasible={} verdict={:?}",
            tried.p_i,
            tried.step_i,
            next.beta,
            feasible,
            verdict
        );
        trace.push(TraceEntry {
            p_i: tried.p_i,
            step_i: tried.step_i,
            beta: next.beta,
            feasible,
            verdict,
        });
        state = next;
        match verdict {
            Verdict::Continue => {}
            Verdict::Done => {
                return Ok(AdaptiveRun {
                    placement: Some(Placement {
                        hops,
                        indices,
                        end: current,
                    }),
                    calls,
                    trace,
                })
            }
            Verdict::Exhausted => {
                return Ok(AdaptiveRun {
                    placement: None,
                    calls,
                    trace,
                })
            }
        }
    }
}

/// Baseline that uses every waypoint as a subgoal in order.
pub fn every_waypoint_place<V: HopSolver>(
    path: &Path,
    solver: &mut V,
    start: &V::State,
) -> AdaptiveRun<V::Hop, V::State> {
    let mut current = start.clone();
    let mut hops = Vec::new();
    let mut indices = Vec::new();
    let mut calls = 0;
    for (i, w) in path.waypoints.iter().enumerate().skip(1) {
        calls += 1;
        match solver.solve_hop(&current, i, *w) {
            Some((hop, next)) => {
                hops.push(hop);
                indices.push(i);
                current = next;
            }
            None => {
                return AdaptiveRun {
                    placement: None,
                    calls,
                    trace: Vec::new(),
                }
            }
        }
    }
    AdaptiveRun {
        placement: Some(Placement {
            hops,
            indices,
            end: current,
        }),
        calls,
        trace: Vec::new(),
    }
}

/// Limits of the refinement loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RefineLimits {
    pub theta: usize,
    pub max_refinements: usize,
    pub max_retries: usize,
}

impl Default for RefineLimits {
    fn default() -> Self {
        RefineLimits {
            theta: DEFAULT_THETA,
            max_refinements: DEFAULT_MAX_REFINEMENTS,
            max_retries: DEFAULT_MAX_RETRIES,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Refined<H, S> {
    Placed {
        placement: Placement<H, S>,
        /// Path the placement followed.
        path: Path,
        refinements: usize,
        retries: usize,
        calls: usize,
    },
    Blocked {
        calls: usize,
    },
}

/// Adaptive placement with granularity refinement: on failure the path is
/// resampled at half the resolution, up to `max_refinements` times; then a
/// fresh path is requested from `fresh_path`, up to `max_retries` times.
pub fn place_with_refinement<V: HopSolver>(
    aux_path: &Path,
    solver: &mut V,
    start: &V::State,
    limits: RefineLimits,
    mut fresh_path: impl FnMut(usize) -> Option<Path>,
) -> Result<Refined<V::Hop, V::State>, SubgoalError> {
    let mut calls = 0;
    let mut base = aux_path.clone();
    for retry in 0..=limits.max_retries {
        if retry > 0 {
            match fresh_path(retry) {
                Some(p) => base = p,
                None => continue,
            }
        }
        let mut path = base.clone();
        for refinement in 0..=limits.max_refinements {
            if refinement > 0 {
                path = resample_path(&base, path.resolution * 0.5);
            }
            if path.waypoints.len() < 2 {
                break;
            }
            let run = adaptive_place(&path, solver, start, limits.theta)?;
            calls += run.calls;
            if let Some(placement) = run.placement {
                return Ok(Refined::Placed {
                    placement,
                    path,
                    refinements: refinement,
                    retries: retry,
                    calls,
                });
            }
        }
    }
    Ok(Refined::Blocked { calls })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_matches_examples() {
        let s = selector_init(9, 2).unwrap();
        assert_eq!(
            (s.p_i, s.step_i, s.step_max, s.p_prev, s.beta),
            (8, 8, 8, 0, 0)
        );
        let s = selector_init(2, 1).unwrap();
        assert_eq!((s.p_i, s.step_i, s.step_max), (1, 1, 1));
        assert_eq!(selector_init(1, 2), Err(SubgoalError::TooFewWaypoints(1)));
    }

    #[test]
    fn first_hop_to_goal_is_done() {
        let s = selector_init(9, 2).unwrap();
        assert_eq!(selector_step(s, true).1, Verdict::Done);
    }

    #[test]
    fn failure_halves_stride() {
        let s = selector_init(9, 2).unwrap();
        let (n, v) = selector_step(s, false);
        assert_eq!(v, Verdict::Continue);
        assert_eq!((n.p_i, n.step_i, n.beta), (4, 4, 0));
    }

    #[test]
    fn unit_stride_failure_exhausts() {
        let s = SelectorState {
            p_i: 1,
            step_i: 1,
            step_max: 8,
            p_prev: 0,
            beta: 0,
            theta: 2,
        };
        assert_eq!(selector_step(s, false).1, Verdict::Exhausted);
    }

    #[test]
    fn two_successes_double_stride() {
        let s = SelectorState {
            p_i: 2,
            step_i: 2,
            step_max: 8,
            p_prev: 0,
            beta: 0,
            theta: 2,
        };
        let (s, _) = selector_step(s, true);
        assert_eq!(s.step_i, 2);
        let (s, _) = selector_step(s, true);
        assert_eq!(s.step_i, 4);
        assert_eq!(s.p_i, 8);
    }
}
