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
use super::problem::{
    Anchor, Body, ObjectMode, Residual, ResidualKind, TrajState, TrajectoryProblem,
};
use super::solver::solve;
use super::{hop_horizon, straight_line};
use crate::geometry::{signed_distance_grad, Rect, Shape, Vec2};
use crate::rrt::{plan_birrt, resample_path, Mover, Path, PathQuery};
use crate::scene::{
    min_separation, Configuration, Obstacles, Phase, PlanSegment, Scene, GRASP_GAP,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use thiserror::Error;

/// Knobs shared by the manipulation primitives.
#[derive(Clone, Debug, PartialEq)]
pub struct ManipParams {
    /// Collision margin for planning; also the trajectory optimizer's margin.
    pub clearance: f64,
    /// Contact points sampled per grasp search.
    pub grasp_samples: usize,
    /// Grasps tried per pick-and-place.
    pub grasp_trials: usize,
    /// Iteration budget of agent transfer paths.
    pub rrt_iters: usize,
    pub smooth_weight: f64,
    /// Weight of the soft target term.
    pub soft_weight: f64,
    /// Hard target tolerance of a carried object.
    pub target_bound: f64,
}

impl Default for ManipParams {
    fn default() -> Self {
        ManipParams {
            clearance: 0.06,
            grasp_samples: 10,
            grasp_trials: 4,
            rrt_iters: 5000,
            smooth_weight: 1.0,
            soft_weight: 1e3,
            target_bound: 4e-4,
        }
    }
}

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
pub enum Infeasible {
    #[error("no collision-free grasp")]
    NoGrasp,
    #[error("agent cannot reach any grasp")]
    Unreachable,
    #[error("no feasible carrying trajectory")]
    NoTrajectory,
}

/// A contact configuration of the agent against an object.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grasp {
    pub object: usize,
    pub agent: Vec2,
    /// Object center minus agent center; frozen while carried.
    pub offset: Vec2,
    /// Unit contact normal pointing from the object towards the agent.
    pub normal: Vec2,
    /// Free point on the normal from which the agent approaches.
    pub standoff: Vec2,
}

/// Result of relocating one object.
#[derive(Clone, Debug, PartialEq)]
pub struct PickPlace {
    pub pick: PlanSegment,
    pub place: PlanSegment,
    pub grasp: Grasp,
}

const FACE_NORMALS: [Vec2; 4] = [
    Vec2::new(1.0, 0.0),
    Vec2::new(0.0, 1.0),
    Vec2::new(-1.0, 0.0),
    Vec2::new(0.0, -1.0),
];

fn near_rects(obstacles: &Obstacles, region: &Rect) -> Vec<Rect> {
    obstacles
        .rects
        .iter()
        .map(|(_, r)| *r)
        .filter(|r| {
            !(r.max.x < region.min.x
                || r.min.x > region.max.x
                || r.max.y < region.min.y
                || r.min.y > region.max.y)
        })
        .collect()
}

fn shrink(bounds: &Rect, by: f64) -> Rect {
    Rect {
        min: bounds.min + Vec2::new(by, by),
        max: bounds.max - Vec2::new(by, by),
    }
}

/// Collision-free grasps of `object` found by optimizing up to
/// `grasp_samples` contact points sampled uniformly on its boundary.
/// Sorted by how well the contact normal opposes `prefer` when given.
pub fn grasp_candidates(
    config: &Configuration,
    scene: &Scene,
    object: usize,
    seed: u64,
    prefer: Option<Vec2>,
    params: &ManipParams,
) -> Vec<Grasp> {
    grasp_candidates_ignoring(
        config,
        scene,
        object,
        seed,
        prefer,
        params,
        &BTreeSet::new(),
    )
}

/// [`grasp_candidates`] in a world where the objects in `ignore` are absent.
pub fn grasp_candidates_ignoring(
    config: &Configuration,
    scene: &Scene,
    object: usize,
    seed: u64,
    prefer: Option<Vec2>,
    params: &ManipParams,
    ignore: &BTreeSet<usize>,
) -> Vec<Grasp> {
    let side = scene.objects[object].side;
    let center = config.objects[object];
    let r = scene.agent_radius;
    let others = Obstacles::new(scene, config, |i| i != object && !ignore.contains(&i));
    let everything = Obstacles::new(scene, config, |i| !ignore.contains(&i));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut out: Vec<(usize, Grasp)> = Vec::new();
    let nearby = near_rects(&others, &Rect::square(center, side + 4.0 * r + 1.0));
    for sample in 0..params.grasp_samples {
        // stratified along the perimeter so every face gets samples
        let stratum = 4.0 * side / params.grasp_samples as f64;
        let u = (sample as f64 + rng.gen_range(0.0..1.0)) * stratum;
        let face = ((u / side) as usize).min(3);
        let along = u - face as f64 * side - side * 0.5;
        let n = FACE_NORMALS[face];
        let contact = center + n * (side * 0.5) + n.perp() * along;
        let init = contact + n * (r + GRASP_GAP);
        let preferred = center + n * (side * 0.5 + r + GRASP_GAP);

        let mut problem = TrajectoryProblem::new(2, r, ObjectMode::Fixed { side, pos: center });
        problem.push(Residual::hard(
            ResidualKind::Touch { gap: GRASP_GAP },
            0..=2,
        ));
        problem.push(Residual::hard(
            ResidualKind::Smoothness {
                body: Body::Agent,
                weight: 1.0,
            },
            [2],
        ));
        problem.push(Residual::soft(
            ResidualKind::PositionDiff {
                body: Body::Agent,
                anchor: Anchor::Point(preferred),
                bound: 0.0,
            },
            0..=2,
            1.0,
        ));
        problem.push(Residual::hard(
            ResidualKind::StableOn {
                body: Body::Agent,
                region: shrink(&scene.bounds, r + params.clearance),
            },
            0..=2,
        ));
        for rect in &nearby {
            problem.push(Residual::hard(
                ResidualKind::Collision {
                    body: Body::Agent,
                    obstacle: Shape::Rect(*rect),
                    margin: params.clearance,
                },
                0..=2,
            ));
        }
        let s0 = TrajState {
            agent: init,
            object: None,
        };
        let Ok(res) = solve(&problem, &[s0; 3]) else {
            continue;
        };
        if !res.converged {
            continue;
        }
        let mut agent = res.trajectory[2].agent;
        // snap onto the exact contact gap along the distance gradient
        let (sd, g) = signed_distance_grad(&scene.agent_shape(agent), &Shape::square(center, side));
        agent += g * (GRASP_GAP - sd);
        let (sd, normal) =
            signed_distance_grad(&scene.agent_shape(agent), &Shape::square(center, side));
        if (sd - GRASP_GAP).abs() > 1e-6
            || !others.is_free(&scene.agent_shape(agent), params.clearance * 0.5)
        {
            continue;
        }
        let standoff = agent + normal * (params.clearance + 0.02);
        if !everything.is_free(&scene.agent_shape(standoff), params.clearance) {
            continue;
        }
        let steps = 8;
        let approach_ok = (0..=steps).all(|k| {
            let p = standoff.lerp(agent, k as f64 / steps as f64);
            others.is_free(&scene.agent_shape(p), params.clearance * 0.5)
        });
        if !approach_ok {
            continue;
        }
        if out.iter().any(|(_, g)| g.agent.distance(agent) < 1e-6) {
            continue;
        }
        out.push((
            sample,
            Grasp {
                object,
                agent,
                offset: center - agent,
                normal,
                standoff,
            },
        ));
    }
    if let Some(dir) = prefer {
        let dir = dir.normalized();
        if dir != Vec2::ZERO {
            // pushing from behind first; ties keep sampling order
            out.sort_by(|a, b| {
                let sa = -a.1.normal.dot(dir);
                let sb = -b.1.normal.dot(dir);
                sb.partial_cmp(&sa).unwrap().then(a.0.cmp(&b.0))
            });
        }
    }
    out.into_iter().map(|(_, g)| g).collect()
}

/// A grasp configuration for `object`: the agent in contact, collision-free
/// otherwise. Different seeds start from different candidates.
pub fn solve_grasp(
    config: &Configuration,
    scene: &Scene,
    object: usize,
    seed: u64,
    params: &ManipParams,
) -> Result<Configuration, Infeasible> {
    let grasps = grasp_candidates(config, scene, object, seed, None, params);
    if grasps.is_empty() {
        return Err(Infeasible::NoGrasp);
    }
    let g = &grasps[(seed % grasps.len() as u64) as usize];
    let mut c = config.clone();
    c.release();
    c.agent = g.agent;
    c.attach(object);
    Ok(c)
}

/// Steps the agent out of contact along the clearance gradient until it is
/// `clearance` away from everything. Returns the intermediate points.
fn depart(obstacles: &Obstacles, scene: &Scene, from: Vec2, clearance: f64) -> Option<Vec<Vec2>> {
    let mut p = from;
    let mut out = Vec::new();
    for _ in 0..40 {
        let shape = scene.agent_shape(p);
        if obstacles.is_free(&shape, clearance + 1e-3) {
            return Some(out);
        }
        // push away from everything currently within the margin
        let mut dir = Vec2::ZERO;
        for (_, r) in &obstacles.rects {
            let (sd, g) = signed_distance_grad(&shape, &Shape::Rect(*r));
            if sd < clearance + 1e-3 {
                dir += g;
            }
        }
        let (bd, bg) = crate::geometry::bounds_distance_grad(&shape, &obstacles.bounds);
        if bd < clearance + 1e-3 {
            dir += bg;
        }
        let dir = dir.normalized();
        if dir == Vec2::ZERO {
            return None;
        }
        let next = p + dir * 0.01;
        if obstacles.clearance(&scene.agent_shape(next)) < 0.0 {
            return None;
        }
        out.push(next);
        p = next;
    }
    None
}

/// Agent positions from its pose in `config` to the first point that is
/// `clearance` away from everything, start included.
pub fn depart_agent(config: &Configuration, scene: &Scene, clearance: f64) -> Option<Vec<Vec2>> {
    let obstacles = Obstacles::new(scene, config, |_| true);
    let mut points = vec![config.agent];
    points.extend(depart(&obstacles, scene, config.agent, clearance)?);
    Some(points)
}

fn discretize(points: &[Vec2], max_step: f64) -> Vec<Vec2> {
    resample_path(
        &Path {
            waypoints: points.to_vec(),
            resolution: f64::INFINITY,
        },
        max_step,
    )
    .waypoints
}

/// Agent transfer from its pose in `config` to `grasp`, objects static.
/// The last state carries the new attachment.
pub fn plan_agent_to(
    config: &Configuration,
    scene: &Scene,
    grasp: &Grasp,
    seed: u64,
    params: &ManipParams,
) -> Result<Vec<Configuration>, Infeasible> {
    let mut start = config.clone();
    start.release();
    let obstacles = Obstacles::new(scene, &start, |_| true);
    let mut points = vec![start.agent];
    let dep =
        depart(&obstacles, scene, start.agent, params.clearance).ok_or(Infeasible::Unreachable)?;
    points.extend(dep);
    let from = *points.last().unwrap();
    let query = PathQuery {
        mover: Mover::Agent,
        start: from,
        goal: grasp.standoff,
        removed: BTreeSet::new(),
        frozen: start.clone(),
        clearance: params.clearance,
    };
    let path =
        plan_birrt(&query, scene, seed, params.rrt_iters).map_err(|_| Infeasible::Unreachable)?;
    points.extend(path.waypoints.into_iter().skip(1));
    points.push(grasp.agent);
    let pts = discretize(&points, scene.max_step() * 0.99);
    let mut states: Vec<Configuration> = pts
        .into_iter()
        .map(|p| {
            let mut c = start.clone();
            c.agent = p;
            c
        })
        .collect();
    let last = states.last_mut().unwrap();
    last.agent = grasp.agent;
    last.attach(grasp.object);
    Ok(states)
}

/// True when every state and transition midpoint is penetration-free and
/// steps respect the speed limit.
fn states_ok(states: &[Configuration], scene: &Scene) -> bool {
    let limit = scene.max_step();
    let pen_free = |c: &Configuration| min_separation(c, scene).distance >= 0.0;
    states.first().is_some_and(pen_free)
        && states.windows(2).all(|w| {
            w[0].agent.distance(w[1].agent) <= limit
                && pen_free(&w[0].lerp(&w[1], 0.5))
                && pen_free(&w[1])
        })
}

/// Optimizes a rigid carry of the attached object from `start` so that it
/// ends at `target` (exactly in hard mode, as close as feasible in soft
/// mode). Returns attached states, first equal to `start`.
pub fn carry(
    start: &Configuration,
    scene: &Scene,
    target: Vec2,
    soft: bool,
    params: &ManipParams,
) -> Option<Vec<Configuration>> {
    let att = start.attachment?;
    let side = scene.objects[att.object].side;
    let r = scene.agent_radius;
    let a0 = start.agent;
    let o0 = start.objects[att.object];
    let a_goal = target - att.offset;
    let horizon = hop_horizon(o0.distance(target), scene.vmax, scene.dt).max(2);
    let mut problem = TrajectoryProblem::new(
        horizon,
        r,
        ObjectMode::Attached {
            side,
            offset: att.offset,
        },
    );
    problem.push(Residual::hard(
        ResidualKind::Smoothness {
            body: Body::Agent,
            weight: params.smooth_weight,
        },
        2..=horizon,
    ));
    problem.push(Residual::hard(
        ResidualKind::Stable {
            body: Body::Agent,
            target: a0,
        },
        [0],
    ));
    problem.push(Residual::hard(
        ResidualKind::PositionDiff {
            body: Body::Agent,
            anchor: Anchor::Body {
                body: Body::Agent,
                lag: 1,
            },
            bound: 0.98 * scene.max_step(),
        },
        1..=horizon,
    ));
    let target_term = ResidualKind::PositionDiff {
        body: Body::Object,
        anchor: Anchor::Point(target),
        bound: if soft { 0.0 } else { params.target_bound },
    };
    problem.push(if soft {
        Residual::soft(target_term, [horizon], params.soft_weight)
    } else {
        Residual::hard(target_term, [horizon])
    });
    problem.push(Residual::hard(
        ResidualKind::StableOn {
            body: Body::Agent,
            region: shrink(&scene.bounds, r + params.clearance),
        },
        1..=horizon,
    ));
    problem.push(Residual::hard(
        ResidualKind::StableOn {
            body: Body::Object,
            region: shrink(&scene.bounds, side * 0.5 + params.clearance),
        },
        1..=horizon,
    ));
    let reach = r.max(side) + 1.0;
    let corridor = Rect::new(a0.x, a0.y, a_goal.x, a_goal.y)
        .union(&Rect::new(o0.x, o0.y, target.x, target.y))
        .inflate(reach);
    let obstacles = Obstacles::new(scene, start, |i| i != att.object);
    for rect in near_rects(&obstacles, &corridor) {
        for body in [Body::Agent, Body::Object] {
            problem.push(Residual::hard(
                ResidualKind::Collision {
                    body,
                    obstacle: Shape::Rect(rect),
                    margin: params.clearance,
                },
                1..=horizon,
            ));
        }
    }
    let init = straight_line(
        TrajState {
            agent: a0,
            object: None,
        },
        TrajState {
            agent: a_goal,
            object: None,
        },
        horizon,
    );
    let res = solve(&problem, &init).ok()?;
    if !res.converged {
        return None;
    }
    let mut states: Vec<Configuration> = res
        .trajectory
        .iter()
        .map(|s| {
            let mut c = start.clone();
            c.move_agent(s.agent);
            c
        })
        .collect();
    states[0] = start.clone();
    // drop the resting tail where the optimizer has already arrived
    while states.len() > 2
        && states[states.len() - 1]
            .agent
            .distance(states[states.len() - 2].agent)
            < 1e-9
    {
        states.pop();
    }
    if !states_ok(&states, scene) {
        return None;
    }
    Some(states)
}

/// Relocates `object` towards `target`: transfer to a grasp, then carry.
/// Grasps are tried in order of how well they push towards the target.
pub fn solve_pick_place(
    config: &Configuration,
    scene: &Scene,
    object: usize,
    target: Vec2,
    soft: bool,
    seed: u64,
    params: &ManipParams,
) -> Result<PickPlace, Infeasible> {
    let mut base = config.clone();
    base.release();
    let prefer = target - base.objects[object];
    let grasps = grasp_candidates(&base, scene, object, seed, Some(prefer), params);
    if grasps.is_empty() {
        return Err(Infeasible::NoGrasp);
    }
    let mut last_err = Infeasible::NoTrajectory;
    for (k, g) in grasps.iter().take(params.grasp_trials).enumerate() {
        let mut grasped = base.clone();
        grasped.agent = g.agent;
        grasped.attach(object);
        let Some(mut place) = carry(&grasped, scene, target, soft, params) else {
            last_err = Infeasible::NoTrajectory;
            continue;
        };
        let pick = match plan_agent_to(&base, scene, g, seed.wrapping_add(k as u64 * 7919), params)
        {
            Ok(p) => p,
            Err(e) => {
                last_err = e;
                continue;
            }
        };
        let mut released = place.last().unwrap().clone();
        released.release();
        place.push(released);
        return Ok(PickPlace {
            pick: PlanSegment {
                phase: Phase::Pick,
                object,
                states: pick,
                dt: scene.dt,
            },
            place: PlanSegment {
                phase: Phase::Place,
                object,
                states: place,
                dt: scene.dt,
            },
            grasp: *g,
        });
    }
    Err(last_err)
}
