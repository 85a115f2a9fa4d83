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
//! Orchestration: pick the goal object, route it in the auxiliary world,
//! place it hop by hop, and fall back on obstacle removal when a leg is
//! blocked by movable objects.

use crate::geometry::Vec2;
use crate::rrt::{path_exists, plan_birrt, Mover, Path, PathQuery, DEFAULT_MAX_ITERS};
use crate::scene::{validate_plan, Configuration, Phase, Plan, PlanSegment, Scene, SegmentFile};
use crate::search::{run_search, SearchParams};
use crate::subgoal::{place_with_refinement, HopSolver, RefineLimits, Refined};
use crate::trajopt::{
    carry, depart_agent, grasp_candidates, grasp_candidates_ignoring, plan_agent_to, ManipParams,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

/// Pick/aux/removal cycles before giving up.
pub const MAX_CYCLES: usize = 5;

/// Every tunable of a solve. Missing fields take their defaults when read
/// from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    pub seed: u64,
    /// Seconds of wall time before the solve aborts.
    pub time_budget: f64,
    pub grasp_trials: usize,
    pub theta: usize,
    pub max_refinements: usize,
    pub max_retries: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub y: usize,
    pub depth_threshold: usize,
    pub k_subgoals: usize,
    pub node_budget: usize,
    pub max_size: usize,
    pub tau: Option<f64>,
    pub clearance: f64,
    pub vmax: Option<f64>,
    pub dt: Option<f64>,
}

impl Default for SolverParams {
    fn default() -> Self {
        let limits = RefineLimits::default();
        let search = SearchParams::default();
        let manip = ManipParams::default();
        SolverParams {
            seed: 0,
            time_budget: 1000.0,
            grasp_trials: manip.grasp_trials,
            theta: limits.theta,
            max_refinements: limits.max_refinements,
            max_retries: limits.max_retries,
            alpha: search.alpha,
            gamma: search.gamma,
            y: search.y,
            depth_threshold: search.depth_threshold,
            k_subgoals: search.k_subgoals,
            node_budget: search.node_budget,
            max_size: search.max_size,
            tau: None,
            clearance: manip.clearance,
            vmax: None,
            dt: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("invalid parameter {field}: {reason}")]
pub struct ParamError {
    pub field: &'static str,
    pub reason: &'static str,
}

impl SolverParams {
    pub fn check(&self) -> Result<(), ParamError> {
        let counts = [
            ("grasp_trials", self.grasp_trials),
            ("theta", self.theta),
            ("max_refinements", self.max_refinements),
            ("max_retries", self.max_retries),
            ("y", self.y),
            ("depth_threshold", self.depth_threshold),
            ("k_subgoals", self.k_subgoals),
            ("node_budget", self.node_budget),
            ("max_size", self.max_size),
        ];
        for (field, v) in counts {
            if v < 1 {
                return Err(ParamError {
                    field,
                    reason: "must be at least 1",
                });
            }
        }
        let positive = [
            ("time_budget", Some(self.time_budget)),
            ("clearance", Some(self.clearance)),
            ("tau", self.tau),
            ("vmax", self.vmax),
            ("dt", self.dt),
        ];
        for (field, v) in positive {
            if v.is_some_and(|v| !(v > 0.0 && v.is_finite())) {
                return Err(ParamError {
                    field,
                    reason: "must be positive",
                });
            }
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(ParamError {
                field: "gamma",
                reason: "must lie in (0, 1)",
            });
        }
        Ok(())
    }

    pub fn manip(&self) -> ManipParams {
        ManipParams {
            clearance: self.clearance,
            grasp_trials: self.grasp_trials,
            ..ManipParams::default()
        }
    }

    fn search(&self, deadline: Instant, seed: u64) -> SearchParams {
        SearchParams {
            alpha: self.alpha,
            gamma: self.gamma,
            y: self.y,
            depth_threshold: self.depth_threshold,
            k_subgoals: self.k_subgoals,
            node_budget: self.node_budget,
            max_size: self.max_size,
            tau: self.tau,
            seed,
            manip: self.manip(),
            deadline: Some(deadline),
            ..SearchParams::default()
        }
    }

    /// `scene` with the kinematic overrides applied.
    pub fn apply(&self, scene: &Scene) -> Scene {
        let mut s = scene.clone();
        if let Some(v) = self.vmax {
            s.vmax = v;
        }
        if let Some(dt) = self.dt {
            s.dt = dt;
        }
        s
    }
}

/// Why a leg could not be planned.
#[derive(Clone, Debug, PartialEq)]
pub enum Blocked {
    /// Movable objects obstruct this route.
    Movable(PathQuery),
    /// Nothing can be relocated to help.
    Unsolvable,
}

fn mix(a: u64, b: u64) -> u64 {
    let mut z = a.wrapping_add(b.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn all_obstacles(scene: &Scene) -> BTreeSet<usize> {
    scene.obstacle_objects().into_iter().collect()
}

/// Agent transfer to a grasp of `object`; the returned configuration has
/// the object attached.
pub fn plan_pick(
    config: &Configuration,
    scene: &Scene,
    object: usize,
    params: &SolverParams,
    prefer: Option<Vec2>,
    seed: u64,
) -> Result<(PlanSegment, Configuration), Blocked> {
    let manip = params.manip();
    let grasps = grasp_candidates(config, scene, object, seed, prefer, &manip);
    for (k, g) in grasps.iter().take(params.grasp_trials).enumerate() {
        if let Ok(states) = plan_agent_to(config, scene, g, mix(seed, k as u64), &manip) {
            let end = states.last().expect("transfers are non-empty").clone();
            let seg = PlanSegment {
                phase: Phase::Pick,
                object,
                states,
                dt: scene.dt,
            };
            return Ok((seg, end));
        }
    }
    // the route is blocked by movables when it opens up without them
    let ignore = all_obstacles(scene);
    let mut free = config.clone();
    free.release();
    let Some(start) = depart_agent(&free, scene, manip.clearance).and_then(|p| p.last().copied())
    else {
        return Err(Blocked::Unsolvable);
    };
    for (k, g) in grasp_candidates_ignoring(&free, scene, object, seed, prefer, &manip, &ignore)
        .iter()
        .enumerate()
    {
        let query = PathQuery {
            mover: Mover::Agent,
            start,
            goal: g.standoff,
            removed: BTreeSet::new(),
            frozen: free.clone(),
            clearance: manip.clearance,
        };
        let mut open = query.clone();
        open.removed = ignore.clone();
        let s = mix(seed, 100 + k as u64);
        if path_exists(&open, scene, s, DEFAULT_MAX_ITERS)
            && !path_exists(&query, scene, s, DEFAULT_MAX_ITERS)
        {
            return Err(Blocked::Movable(query));
        }
    }
    Err(Blocked::Unsolvable)
}

/// Route query of the goal object in the auxiliary world.
pub fn aux_query(config: &Configuration, scene: &Scene, clearance: f64) -> PathQuery {
    let mut frozen = config.clone();
    frozen.release();
    PathQuery {
        mover: Mover::ObjectAsAgent(scene.goal_object),
        start: config.objects[scene.goal_object],
        goal: scene.goal,
        removed: BTreeSet::new(),
        frozen,
        clearance,
    }
}

/// Goal-object route to the goal with the agent removed.
pub fn plan_aux(
    config: &Configuration,
    scene: &Scene,
    params: &SolverParams,
    seed: u64,
) -> Result<Path, Blocked> {
    let query = aux_query(config, scene, params.clearance);
    match plan_birrt(&query, scene, seed, DEFAULT_MAX_ITERS) {
        Ok(p) => Ok(p),
        Err(_) => {
            let mut open = query.clone();
            open.removed = all_obstacles(scene);
            if path_exists(&open, scene, seed, DEFAULT_MAX_ITERS) {
                Err(Blocked::Movable(query))
            } else {
                Err(Blocked::Unsolvable)
            }
        }
    }
}

/// States of one placement hop, optionally preceded by a re-grasp.
#[derive(Clone, Debug, PartialEq)]
pub struct HopPiece {
    /// Agent transfer to a new grasp, starting from the released object.
    pub regrasp: Option<PlanSegment>,
    /// Carry states; the first equals the state the hop started from (or
    /// the regrasp's last state).
    pub carry: Vec<Configuration>,
}

/// Carries the goal object to a waypoint, re-grasping when the current
/// grasp cannot make the hop.
pub struct PlaceSolver<'a> {
    pub scene: &'a Scene,
    pub manip: ManipParams,
    pub seed: u64,
    pub deadline: Option<Instant>,
}

impl HopSolver for PlaceSolver<'_> {
    type State = Configuration;
    type Hop = HopPiece;

    fn solve_hop(
        &mut self,
        state: &Configuration,
        index: usize,
        waypoint: Vec2,
    ) -> Option<(HopPiece, Configuration)> {
        if self.deadline.is_some_and(|d| Instant::now() > d) {
            return None;
        }
        let att = state.attachment?;
        if let Some(states) = carry(state, self.scene, waypoint, false, &self.manip) {
            let end = states.last()?.clone();
            return Some((
                HopPiece {
                    regrasp: None,
                    carry: states,
                },
                end,
            ));
        }
        let mut released = state.clone();
        released.release();
        let object = att.object;
        let prefer = waypoint - released.objects[object];
        let seed = mix(self.seed, index as u64);
        let grasps = grasp_candidates(
            &released,
            self.scene,
            object,
            seed,
            Some(prefer),
            &self.manip,
        );
        for (k, g) in grasps
            .iter()
            .filter(|g| (g.offset - att.offset).norm() > 1e-3)
            .take(self.manip.grasp_trials)
            .enumerate()
        {
            let mut grasped = released.clone();
            grasped.agent = g.agent;
            grasped.attach(object);
            let Some(states) = carry(&grasped, self.scene, waypoint, false, &self.manip) else {
                continue;
            };
            let Ok(pick) = plan_agent_to(
                &released,
                self.scene,
                g,
                mix(seed, k as u64 + 1),
                &self.manip,
            ) else {
                continue;
            };
            let end = states.last()?.clone();
            let regrasp = PlanSegment {
                phase: Phase::Pick,
                object,
                states: pick,
                dt: self.scene.dt,
            };
            return Some((
                HopPiece {
                    regrasp: Some(regrasp),
                    carry: states,
                },
                end,
            ));
        }
        None
    }
}

/// Place segments (and re-grasp picks) for hops that start at `grasped`.
pub fn assemble_place(
    scene: &Scene,
    object: usize,
    grasped: &Configuration,
    hops: Vec<HopPiece>,
) -> Vec<PlanSegment> {
    let mut out = Vec::new();
    let mut current = vec![grasped.clone()];
    let close = |states: &mut Vec<Configuration>, out: &mut Vec<PlanSegment>| {
        let mut released = states.last().expect("place states are non-empty").clone();
        released.release();
        states.push(released);
        out.push(PlanSegment {
            phase: Phase::Place,
            object,
            states: std::mem::take(states),
            dt: scene.dt,
        });
    };
    for hop in hops {
        if let Some(pick) = hop.regrasp {
            close(&mut current, &mut out);
            current = vec![pick.last().clone()];
            out.push(pick);
        }
        current.extend(hop.carry.into_iter().skip(1));
    }
    close(&mut current, &mut out);
    out
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub wall_time_s: f64,
    pub pnp_count: usize,
    pub nodes_expanded: usize,
    pub refinements_used: usize,
    /// Hop solver invocations during placement.
    pub solver_calls: usize,
    pub seed: u64,
    pub success: bool,
    /// Subset of each successful removal episode, in order.
    pub removal_sets: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub plan: Plan,
    pub stats: SolveStats,
}

/// Serialized solution. Wall time is optional so that files can be
/// compared byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub success: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    pub pnp_count: usize,
    pub nodes_expanded: usize,
    pub refinements_used: usize,
    pub seed: u64,
    pub removal_sets: Vec<Vec<String>>,
    pub object_ids: Vec<String>,
    pub plan: Vec<SegmentFile>,
}

impl Solution {
    pub fn to_file(&self, scene: &Scene, with_time: bool) -> SolutionFile {
        SolutionFile {
            success: self.stats.success,
            wall_time_s: with_time.then_some(self.stats.wall_time_s),
            pnp_count: self.stats.pnp_count,
            nodes_expanded: self.stats.nodes_expanded,
            refinements_used: self.stats.refinements_used,
            seed: self.stats.seed,
            removal_sets: self.stats.removal_sets.clone(),
            object_ids: scene.objects.iter().map(|o| o.id.clone()).collect(),
            plan: self.plan.segments_to_file(scene),
        }
    }
}

impl SolutionFile {
    pub fn into_plan(self, scene: &Scene) -> Result<Plan, crate::PlanError> {
        crate::scene::segments_from_file(&self.object_ids, self.plan, scene)
    }
}

/// Reads either a bare plan file or a solution file.
pub fn load_plan(text: &str, scene: &Scene) -> Result<Plan, crate::PlanError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("plan").is_some() {
        serde_json::from_value::<SolutionFile>(value)?.into_plan(scene)
    } else {
        serde_json::from_value::<crate::scene::PlanFile>(value)?.into_plan(scene)
    }
}

enum Removal {
    Done,
    Failed,
}

/// Runs the search for `query` and splices its relocations into `plan`.
#[allow(clippy::too_many_arguments)]
fn remove_obstacles(
    scene: &Scene,
    config: &mut Configuration,
    query: &PathQuery,
    params: &SolverParams,
    deadline: Instant,
    seed: u64,
    plan: &mut Plan,
    stats: &mut SolveStats,
) -> Removal {
    match run_search(scene, config, query, &params.search(deadline, seed)) {
        Ok(out) => {
            stats.nodes_expanded += out.nodes_expanded;
            stats.removal_sets.push(
                out.o_set
                    .iter()
                    .map(|&o| scene.objects[o].id.clone())
                    .collect(),
            );
            plan.segments.extend(out.segments);
            *config = out.config;
            Removal::Done
        }
        Err(fail) => {
            log::info!("obstacle removal failed: {:?}", fail.kind);
            stats.nodes_expanded += fail.nodes_expanded;
            Removal::Failed
        }
    }
}

/// Plans the whole task. Never panics on planning failure; the outcome is
/// in `stats.success`.
pub fn solve_task(scene: &Scene, params: &SolverParams) -> Solution {
    let started = Instant::now();
    let deadline = started + Duration::from_secs_f64(params.time_budget.clamp(0.0, 1e9));
    let scene = params.apply(scene);
    let scene = &scene;
    let goal_obj = scene.goal_object;
    let manip = params.manip();
    let mut stats = SolveStats {
        seed: params.seed,
        ..SolveStats::default()
    };
    let mut plan = Plan::new();
    let mut config = scene.initial_config();
    let timed_out = || Instant::now() > deadline;

    for cycle in 0..MAX_CYCLES {
        if timed_out() {
            break;
        }
        let seed = mix(params.seed, cycle as u64);
        let prefer = Some(scene.goal - config.objects[goal_obj]);
        let (pick, grasped) = match plan_pick(&config, scene, goal_obj, params, prefer, seed) {
            Ok(p) => p,
            Err(Blocked::Movable(q)) => {
                log::info!("cycle {cycle}: pick blocked, searching");
                match remove_obstacles(
                    scene,
                    &mut config,
                    &q,
                    params,
                    deadline,
                    seed,
                    &mut plan,
                    &mut stats,
                ) {
                    Removal::Done => continue,
                    Removal::Failed => break,
                }
            }
            Err(Blocked::Unsolvable) => {
                log::info!("cycle {cycle}: goal object unreachable");
                break;
            }
        };
        if timed_out() {
            break;
        }
        let aux = match plan_aux(&grasped, scene, params, seed) {
            Ok(p) => p,
            Err(Blocked::Movable(q)) => {
                log::info!("cycle {cycle}: auxiliary route blocked, searching");
                match remove_obstacles(
                    scene,
                    &mut config,
                    &q,
                    params,
                    deadline,
                    seed,
                    &mut plan,
                    &mut stats,
                ) {
                    Removal::Done => continue,
                    Removal::Failed => break,
                }
            }
            Err(Blocked::Unsolvable) => {
                log::info!("cycle {cycle}: goal unreachable for the goal object");
                break;
            }
        };
        let mut hop = PlaceSolver {
            scene,
            manip: manip.clone(),
            seed,
            deadline: Some(deadline),
        };
        let limits = RefineLimits {
            theta: params.theta,
            max_refinements: params.max_refinements,
            max_retries: params.max_retries,
        };
        let fresh_query = aux_query(&grasped, scene, params.clearance);
        let fresh = |retry: usize| {
            if timed_out() {
                return None;
            }
            plan_birrt(
                &fresh_query,
                scene,
                mix(seed, 1000 + retry as u64),
                DEFAULT_MAX_ITERS,
            )
            .ok()
        };
        let placed = place_with_refinement(&aux, &mut hop, &grasped, limits, fresh)
            .expect("paths have at least two waypoints");
        match placed {
            Refined::Placed {
                placement,
                refinements,
                calls,
                ..
            } => {
                stats.refinements_used += refinements;
                stats.solver_calls += calls;
                plan.segments.push(pick);
                plan.segments
                    .extend(assemble_place(scene, goal_obj, &grasped, placement.hops));
                let report = validate_plan(scene, &plan);
                stats.success = report.valid;
                if !report.valid {
                    log::warn!("assembled plan failed validation: {:?}", report.failures);
                }
                break;
            }
            Refined::Blocked { calls } => {
                stats.solver_calls += calls;
                stats.refinements_used += params.max_refinements;
                if timed_out() {
                    break;
                }
                // room for the object alone exists; ask for room for the
                // object with the agent beside it, as wide as the walls allow
                let r = scene.agent_radius;
                let widths = [params.clearance + 2.0 * r, params.clearance + r];
                let wide = widths.iter().find_map(|&c| {
                    let mut q = aux_query(&config, scene, c);
                    q.frozen = config.clone();
                    let mut open = q.clone();
                    open.removed = all_obstacles(scene);
                    path_exists(&open, scene, seed, DEFAULT_MAX_ITERS).then_some(q)
                });
                match wide {
                    Some(wide) if !path_exists(&wide, scene, seed, DEFAULT_MAX_ITERS) => {
                        log::info!("cycle {cycle}: placement failed, clearing a wider route");
                        if let Removal::Failed = remove_obstacles(
                            scene,
                            &mut config,
                            &wide,
                            params,
                            deadline,
                            seed,
                            &mut plan,
                            &mut stats,
                        ) {
                            break;
                        }
                    }
                    _ => log::info!("cycle {cycle}: placement failed, retrying"),
                }
            }
        }
    }
    stats.pnp_count = plan.pnp_count();
    stats.wall_time_s = started.elapsed().as_secs_f64();
    Solution { plan, stats }
}
