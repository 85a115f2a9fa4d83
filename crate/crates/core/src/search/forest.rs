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
//! The search forest: node scoring, expansion and the main loop.

use super::log::{build_log, config_score, Anchor, Cell, LogContext, Sweep};
use super::subsets::{
    cluster_ratio, cluster_subsets, generate_subsets, subset_priority, SubsetCandidate,
};
use crate::geometry::Vec2;
use crate::rrt::{path_exists, Mover, PathQuery, DEFAULT_MAX_ITERS};
use crate::scene::{Configuration, Obstacles, PlanSegment, Scene};
use crate::trajopt::{
    depart_agent, grasp_candidates, plan_agent_to, solve_pick_place, ManipParams,
};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::time::Instant;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchParams {
    pub alpha: f64,
    pub gamma: f64,
    /// Trees planted at a time.
    pub y: usize,
    pub depth_threshold: usize,
    pub k_subgoals: usize,
    /// Maximum node expansions.
    pub node_budget: usize,
    pub max_size: usize,
    /// Clustering threshold; twice the agent radius when unset.
    pub tau: Option<f64>,
    pub seed: u64,
    /// Iterations for subset elimination.
    pub rrt_budget: usize,
    /// Iterations for the route check after each relocation.
    pub check_budget: usize,
    pub manip: ManipParams,
    pub deadline: Option<Instant>,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            alpha: 1.0,
            gamma: 0.95,
            y: 3,
            depth_threshold: 5,
            k_subgoals: 8,
            node_budget: 500,
            max_size: 4,
            tau: None,
            seed: 0,
            rrt_budget: DEFAULT_MAX_ITERS,
            check_budget: 5000,
            manip: ManipParams::default(),
            deadline: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchNode {
    pub config: Configuration,
    pub o_set: Vec<usize>,
    pub visits: usize,
    pub depth: usize,
    pub parent: Option<usize>,
    pub s_r: f64,
    pub s_x: f64,
    pub creation_index: usize,
    /// Candidate this node's tree was planted for.
    pub tree: usize,
    /// Objects of `o_set` the agent can pick under `config`.
    pub reachable: Vec<usize>,
    /// Pick and place segments that produced this node from its parent.
    pub segments: Vec<PlanSegment>,
    /// Expanded without producing children.
    pub leaf: bool,
}

/// Node selection score: exploration `alpha / sqrt(V)` plus an exploitation
/// term discounted by `gamma^V`.
pub fn score_node(
    alpha: f64,
    gamma: f64,
    visits: usize,
    cluster_ratio: f64,
    set_size: usize,
    s_r: f64,
    s_x: f64,
) -> f64 {
    let v = visits as f64;
    let exploit = s_r * s_x / set_size as f64;
    alpha * (1.0 / v).sqrt() + gamma.powf(v) * cluster_ratio * exploit * exploit
}

fn mix(a: u64, b: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = a ^ b.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Objects of `o_set` with a grasp the agent can reach, and `r + 1`.
pub fn reachability_score(
    config: &Configuration,
    scene: &Scene,
    o_set: &[usize],
    seed: u64,
    manip: &ManipParams,
) -> (f64, Vec<usize>) {
    let mut reachable = Vec::new();
    for &o in o_set {
        let grasps = grasp_candidates(config, scene, o, mix(seed, o as u64), None, manip);
        let ok = grasps
            .iter()
            .take(manip.grasp_trials)
            .enumerate()
            .any(|(k, g)| plan_agent_to(config, scene, g, mix(seed, k as u64), manip).is_ok());
        if ok {
            reachable.push(o);
        }
    }
    (reachable.len() as f64 + 1.0, reachable)
}

/// The blocked query re-posed under `config`; `None` when the agent cannot
/// even leave its contact.
pub fn requery(blocked: &PathQuery, config: &Configuration, scene: &Scene) -> Option<PathQuery> {
    let mut q = blocked.clone();
    q.frozen = config.clone();
    q.frozen.release();
    q.removed.clear();
    match q.mover {
        Mover::Agent => q.start = *depart_agent(&q.frozen, scene, q.clearance)?.last()?,
        Mover::ObjectAsAgent(o) => q.start = config.objects[o],
    }
    Some(q)
}

/// Children of `node`: relocations of each reachable object towards Green
/// cells of its current grid. Keeps the better half by score.
#[allow(clippy::too_many_arguments)]
pub fn expand_node(
    node: &mut SearchNode,
    node_id: usize,
    ctx: &LogContext,
    ratio: f64,
    params: &SearchParams,
    next_index: &mut usize,
) -> Vec<SearchNode> {
    let scene = ctx.scene;
    node.visits += 1;
    let mut children = Vec::new();
    for &o in &node.reachable {
        let log = build_log(ctx, &node.config, o, Anchor::Current);
        let others = Obstacles::new(scene, &node.config, |i| i != o);
        let side = scene.objects[o].side;
        let targets: Vec<Vec2> = log
            .centers(Cell::Green)
            .into_iter()
            .filter(|c| others.is_free(&scene.object_shape(o, *c), params.manip.clearance))
            .filter(|c| c.distance(node.config.objects[o]) > side * 0.25)
            .collect();
        if targets.is_empty() {
            continue;
        }
        let seed = mix(mix(params.seed, node.creation_index as u64), o as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = params.k_subgoals.min(targets.len());
        let mut picks: Vec<usize> = sample(&mut rng, targets.len(), k).into_vec();
        picks.sort_unstable();
        for (n, ti) in picks.into_iter().enumerate() {
            if params.deadline.is_some_and(|d| Instant::now() > d) {
                break;
            }
            let Ok(pp) = solve_pick_place(
                &node.config,
                scene,
                o,
                targets[ti],
                true,
                mix(seed, n as u64),
                &params.manip,
            ) else {
                continue;
            };
            let config = pp.place.last().clone();
            let s_x = config_score(ctx, &config);
            let (s_r, reachable) = reachability_score(
                &config,
                scene,
                &node.o_set,
                mix(seed, 1000 + n as u64),
                &params.manip,
            );
            children.push(SearchNode {
                config,
                o_set: node.o_set.clone(),
                visits: 1,
                depth: node.depth + 1,
                parent: Some(node_id),
                s_r,
                s_x,
                creation_index: 0,
                tree: node.tree,
                reachable,
                segments: vec![pp.pick, pp.place],
                leaf: false,
            });
        }
    }
    let score = |c: &SearchNode| {
        score_node(
            params.alpha,
            params.gamma,
            c.visits,
            ratio,
            c.o_set.len(),
            c.s_r,
            c.s_x,
        )
    };
    // stable sort keeps generation order among equal scores
    children.sort_by(|a, b| score(b).partial_cmp(&score(a)).unwrap());
    let keep = children.len().div_ceil(2);
    children.truncate(keep);
    for c in &mut children {
        c.creation_index = *next_index;
        *next_index += 1;
    }
    children
}

/// One line of the search trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRecord {
    pub node_id: usize,
    pub o_set: Vec<String>,
    #[serde(rename = "V_n")]
    pub visits: usize,
    #[serde(rename = "S_r")]
    pub s_r: f64,
    #[serde(rename = "S_x")]
    pub s_x: f64,
    #[serde(rename = "S")]
    pub score: f64,
    pub children: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    /// Relocation segments from the start configuration, in order.
    pub segments: Vec<PlanSegment>,
    pub config: Configuration,
    /// Subset of the solving node.
    pub o_set: Vec<usize>,
    pub nodes_expanded: usize,
    pub trace: Vec<TraceRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchFailureKind {
    /// No subset removal clears the route.
    NoCandidates,
    Exhausted,
    Timeout,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchFailure {
    pub kind: SearchFailureKind,
    pub nodes_expanded: usize,
    pub trace: Vec<TraceRecord>,
}

fn ctx_for<'a>(
    scene: &'a Scene,
    root: &'a Configuration,
    cand: &'a SubsetCandidate,
    sweep: Sweep,
) -> LogContext<'a> {
    LogContext {
        scene,
        root,
        o_set: &cand.o_set,
        witness: &cand.witness_path,
        sweep,
    }
}

struct Tree {
    candidate: usize,
    ratio: f64,
    reached_depth: bool,
}

/// Relocates obstacle objects until `blocked` becomes feasible.
pub fn run_search(
    scene: &Scene,
    start: &Configuration,
    blocked: &PathQuery,
    params: &SearchParams,
) -> Result<SearchOutcome, SearchFailure> {
    let fail = |kind, nodes_expanded, trace| {
        Err(SearchFailure {
            kind,
            nodes_expanded,
            trace,
        })
    };
    let max_size = params.max_size.min(scene.obstacle_objects().len());
    let mut candidates = generate_subsets(scene, blocked, max_size, params.seed, params.rrt_budget);
    if candidates.is_empty() {
        return fail(SearchFailureKind::NoCandidates, 0, Vec::new());
    }
    let tau = params.tau.unwrap_or(2.0 * scene.agent_radius);
    let clusters = cluster_subsets(&mut candidates, scene, start, tau);
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        subset_priority(&candidates[b], &clusters)
            .partial_cmp(&subset_priority(&candidates[a], &clusters))
            .unwrap()
            .then(a.cmp(&b))
    });
    log::info!(
        "search: {} candidate subsets in {} clusters",
        candidates.len(),
        clusters.len()
    );
    let sweep = Sweep::of(blocked.mover, scene);
    let mut root = start.clone();
    root.release();
    let mut nodes: Vec<SearchNode> = Vec::new();
    let mut trees: Vec<Tree> = Vec::new();
    let mut planted = 0;
    let mut next_index = 0;
    let mut trace = Vec::new();
    let mut expanded = 0;

    let plant = |planted: &mut usize,
                 nodes: &mut Vec<SearchNode>,
                 trees: &mut Vec<Tree>,
                 next_index: &mut usize| {
        let end = (*planted + params.y).min(order.len());
        for &ci in &order[*planted..end] {
            let cand = &candidates[ci];
            let ctx = ctx_for(scene, &root, cand, sweep);
            let (s_r, reachable) = reachability_score(
                &root,
                scene,
                &cand.o_set,
                mix(params.seed, ci as u64),
                &params.manip,
            );
            trees.push(Tree {
                candidate: ci,
                ratio: cluster_ratio(cand, &clusters),
                reached_depth: false,
            });
            nodes.push(SearchNode {
                config: root.clone(),
                o_set: cand.o_set.clone(),
                visits: 1,
                depth: 0,
                parent: None,
                s_r,
                s_x: config_score(&ctx, &root),
                creation_index: *next_index,
                tree: trees.len() - 1,
                reachable,
                segments: Vec::new(),
                leaf: false,
            });
            *next_index += 1;
        }
        *planted = end;
    };
    plant(&mut planted, &mut nodes, &mut trees, &mut next_index);

    loop {
        if expanded >= params.node_budget {
            return fail(SearchFailureKind::Exhausted, expanded, trace);
        }
        if params.deadline.is_some_and(|d| Instant::now() > d) {
            return fail(SearchFailureKind::Timeout, expanded, trace);
        }
        let score = |n: &SearchNode| {
            score_node(
                params.alpha,
                params.gamma,
                n.visits,
                trees[n.tree].ratio,
                n.o_set.len(),
                n.s_r,
                n.s_x,
            )
        };
        let best = nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| !n.leaf && n.depth < params.depth_threshold && !n.reachable.is_empty())
            .fold(None::<(usize, f64)>, |acc, (i, n)| {
                let s = score(n);
                match acc {
                    Some((_, bs)) if bs >= s => acc,
                    _ => Some((i, s)),
                }
            });
        let Some((id, s)) = best else {
            if planted < order.len() {
                plant(&mut planted, &mut nodes, &mut trees, &mut next_index);
                continue;
            }
            return fail(SearchFailureKind::Exhausted, expanded, trace);
        };
        let tree = trees[nodes[id].tree].candidate;
        let ctx = ctx_for(scene, &root, &candidates[tree], sweep);
        let ratio = trees[nodes[id].tree].ratio;
        let mut node = nodes[id].clone();
        let children = expand_node(&mut node, id, &ctx, ratio, params, &mut next_index);
        expanded += 1;
        node.leaf = children.is_empty();
        let record = TraceRecord {
            node_id: id,
            o_set: node
                .o_set
                .iter()
                .map(|&o| scene.objects[o].id.clone())
                .collect(),
            visits: node.visits,
            s_r: node.s_r,
            s_x: node.s_x,
            score: s,
            children: (nodes.len()..nodes.len() + children.len()).collect(),
        };
        log::debug!("search: expanded node {} ({} children)", id, children.len());
        trace.push(record);
        nodes[id] = node;
        let mut deepest = 0;
        for child in children {
            deepest = deepest.max(child.depth);
            let cid = nodes.len();
            let config = child.config.clone();
            nodes.push(child);
            let clear = requery(blocked, &config, scene).is_some_and(|q| {
                path_exists(&q, scene, mix(params.seed, cid as u64), params.check_budget)
            });
            if clear {
                let mut segments = Vec::new();
                let mut at = Some(cid);
                while let Some(i) = at {
                    segments.splice(0..0, nodes[i].segments.iter().cloned());
                    at = nodes[i].parent;
                }
                return Ok(SearchOutcome {
                    segments,
                    config,
                    o_set: nodes[cid].o_set.clone(),
                    nodes_expanded: expanded,
                    trace,
                });
            }
        }
        let t = nodes[id].tree;
        if deepest >= params.depth_threshold && !trees[t].reached_depth {
            trees[t].reached_depth = true;
            plant(&mut planted, &mut nodes, &mut trees, &mut next_index);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_examples() {
        let s1 = score_node(1.0, 0.95, 1, 1.0, 1, 2.0, 0.5);
        assert!((s1 - 1.95).abs() < 1e-12);
        let s4 = score_node(1.0, 0.95, 4, 1.0, 1, 2.0, 0.5);
        assert!((s4 - (0.5 + 0.95f64.powi(4))).abs() < 1e-12);
        assert_eq!(score_node(1.0, 0.95, 4, 1.0, 1, 2.0, 0.0), 0.5);
    }
}
