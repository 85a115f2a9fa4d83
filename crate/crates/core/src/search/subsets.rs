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
//! Candidate obstacle subsets: preliminary elimination, DTW clustering and
//! subset priority.

use crate::geometry::{Rect, Vec2};
use crate::rrt::{plan_birrt, Path, PathQuery};
use crate::scene::{Configuration, Scene};
use serde::Serialize;
use std::collections::BTreeSet;

/// An obstacle subset whose removal clears the blocked route.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsetCandidate {
    /// Object indices, ascending.
    pub o_set: Vec<usize>,
    /// Route found with `o_set` removed.
    pub witness_path: Path,
    /// Part of the witness inside the clustering region.
    pub segment: Vec<Vec2>,
    pub cluster_id: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cluster {
    pub id: usize,
    /// Indices into the candidate list; the first is the medoid.
    pub members: Vec<usize>,
}

impl Cluster {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// All index subsets of `items` of size `k`, lexicographic.
fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k == 0 || k > items.len() {
        return out;
    }
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let mut i = k;
        while i > 0 && idx[i - 1] == items.len() - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Subsets of the obstacle objects, by increasing size up to `max_size`,
/// whose removal lets `blocked` through within `budget` iterations.
///
/// A superset of a kept subset reuses that subset's witness path, which
/// stays valid when more objects are removed.
pub fn generate_subsets(
    scene: &Scene,
    blocked: &PathQuery,
    max_size: usize,
    seed: u64,
    budget: usize,
) -> Vec<SubsetCandidate> {
    let mut pool: Vec<usize> = scene.obstacle_objects();
    if let crate::rrt::Mover::ObjectAsAgent(o) = blocked.mover {
        pool.retain(|&i| i != o);
    }
    let mut kept: Vec<SubsetCandidate> = Vec::new();
    for size in 1..=max_size.min(pool.len()) {
        for subset in combinations(&pool, size) {
            let reuse = kept
                .iter()
                .find(|c| c.o_set.iter().all(|i| subset.contains(i)))
                .map(|c| c.witness_path.clone());
            let witness = match reuse {
                Some(p) => Some(p),
                None => {
                    let mut q = blocked.clone();
                    q.removed = subset.iter().copied().collect::<BTreeSet<_>>();
                    plan_birrt(&q, scene, seed, budget).ok()
                }
            };
            if let Some(witness_path) = witness {
                kept.push(SubsetCandidate {
                    o_set: subset,
                    witness_path,
                    segment: Vec::new(),
                    cluster_id: None,
                });
            }
        }
    }
    kept
}

/// Classic dynamic time warping with Euclidean local cost.
pub fn dtw_distance(a: &[Vec2], b: &[Vec2]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "dtw of an empty sequence");
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut cur = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for p in a {
        cur[0] = f64::INFINITY;
        for j in 1..=m {
            let best = prev[j - 1].min(prev[j]).min(cur[j - 1]);
            cur[j] = p.distance(b[j - 1]) + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m]
}

/// DTW divided by the longer sequence length, so that the clustering
/// threshold reads as a typical pointwise distance.
pub fn dtw_normalized(a: &[Vec2], b: &[Vec2]) -> f64 {
    dtw_distance(a, b) / a.len().max(b.len()) as f64
}

/// Bounding box of the movable objects in `config`, inflated by the agent
/// radius.
pub fn clustering_region(scene: &Scene, config: &Configuration) -> Rect {
    let mut region: Option<Rect> = None;
    for (i, o) in scene.objects.iter().enumerate() {
        let r = Rect::square(config.objects[i], o.side);
        region = Some(region.map_or(r, |acc| acc.union(&r)));
    }
    region.unwrap_or(scene.bounds).inflate(scene.agent_radius)
}

/// Waypoints inside `region`; the waypoint closest to it when none is.
fn clip(path: &Path, region: &Rect) -> Vec<Vec2> {
    let inside: Vec<Vec2> = path
        .waypoints
        .iter()
        .copied()
        .filter(|p| region.contains(*p))
        .collect();
    if !inside.is_empty() {
        return inside;
    }
    let c = region.center();
    let nearest = path
        .waypoints
        .iter()
        .copied()
        .min_by(|a, b| a.distance(c).partial_cmp(&b.distance(c)).unwrap())
        .expect("witness paths are non-empty");
    vec![nearest]
}

/// Greedy medoid clustering of witness segments in input order.
pub fn cluster_subsets(
    candidates: &mut [SubsetCandidate],
    scene: &Scene,
    config: &Configuration,
    tau: f64,
) -> Vec<Cluster> {
    let region = clustering_region(scene, config);
    let mut clusters: Vec<Cluster> = Vec::new();
    for i in 0..candidates.len() {
        candidates[i].segment = clip(&candidates[i].witness_path, &region);
        let found = clusters.iter().position(|c| {
            dtw_normalized(&candidates[i].segment, &candidates[c.members[0]].segment) <= tau
        });
        let id = match found {
            Some(k) => {
                clusters[k].members.push(i);
                k
            }
            None => {
                clusters.push(Cluster {
                    id: clusters.len(),
                    members: vec![i],
                });
                clusters.len() - 1
            }
        };
        candidates[i].cluster_id = Some(id);
    }
    clusters
}

/// Size of the candidate's cluster relative to the largest cluster.
pub fn cluster_ratio(candidate: &SubsetCandidate, clusters: &[Cluster]) -> f64 {
    let max = clusters.iter().map(Cluster::size).max().unwrap_or(1).max(1);
    let own = candidate.cluster_id.map_or(1, |id| clusters[id].size());
    own as f64 / max as f64
}

/// Tree-planting priority of a candidate.
pub fn subset_priority(candidate: &SubsetCandidate, clusters: &[Cluster]) -> f64 {
    cluster_ratio(candidate, clusters) / candidate.o_set.len() as f64
}
