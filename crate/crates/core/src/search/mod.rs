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
//! Guided forward search that relocates obstructing objects.
//!
//! Candidate subsets are those whose removal clears the blocked route. Each
//! planted tree varies the placements of one subset; nodes are chosen by a
//! score that trades visit count against how reachable the subset's objects
//! are and how well their neighborhoods are cleared.

mod forest;
mod log;
mod subsets;

pub use forest::{
    expand_node, reachability_score, requery, run_search, score_node, SearchFailure,
    SearchFailureKind, SearchNode, SearchOutcome, SearchParams, TraceRecord,
};
pub use log::{
    build_log, config_score, Anchor, Cell, LocalOccupancyGrid, LogContext, Sweep, LOG_WIDTH,
};
pub use subsets::{
    cluster_ratio, cluster_subsets, clustering_region, dtw_distance, dtw_normalized,
    generate_subsets, subset_priority, Cluster, SubsetCandidate,
};

/// Serializes a trace as JSON lines.
pub fn trace_to_json_lines(trace: &[TraceRecord]) -> String {
    let mut out = String::new();
    for r in trace {
        out.push_str(&serde_json::to_string(r).expect("trace records serialize"));
        out.push('\n');
    }
    out
}
