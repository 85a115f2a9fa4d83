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
//! Benchmark aggregation over tasks and seeds.

use serde::Serialize;
use std::fmt::Write;

/// Outcome of one (task, seed) run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub task: String,
    pub seed: u64,
    pub success: bool,
    pub wall_time_s: f64,
    pub pnp_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub task: String,
    pub runs: usize,
    /// Over solved runs; absent when none solved.
    pub mean_s: Option<f64>,
    pub std_s: Option<f64>,
    pub solved_pct: f64,
    pub mean_pnp: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub seeds: u64,
    pub time_budget_s: f64,
    pub rows: Vec<BenchRow>,
    pub runs: Vec<RunRecord>,
}

fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// Aggregates runs per task, tasks in order of first appearance after
/// sorting by (task, seed).
pub fn aggregate(mut runs: Vec<RunRecord>, seeds: u64, time_budget_s: f64) -> BenchReport {
    runs.sort_by(|a, b| a.task.cmp(&b.task).then(a.seed.cmp(&b.seed)));
    let mut rows: Vec<BenchRow> = Vec::new();
    let mut i = 0;
    while i < runs.len() {
        let task = runs[i].task.clone();
        let group: Vec<&RunRecord> = runs[i..].iter().take_while(|r| r.task == task).collect();
        i += group.len();
        let solved: Vec<&&RunRecord> = group.iter().filter(|r| r.success).collect();
        let times: Vec<f64> = solved.iter().map(|r| r.wall_time_s).collect();
        let pnps: Vec<f64> = solved.iter().map(|r| r.pnp_count as f64).collect();
        let ms = mean_std(&times);
        rows.push(BenchRow {
            task,
            runs: group.len(),
            mean_s: ms.map(|m| m.0),
            std_s: ms.map(|m| m.1),
            solved_pct: 100.0 * solved.len() as f64 / group.len() as f64,
            mean_pnp: mean_std(&pnps).map(|m| m.0),
        });
    }
    BenchReport {
        seeds,
        time_budget_s,
        rows,
        runs,
    }
}

impl BenchReport {
    /// Plain-text table: task, mean, std, solved percentage, PnP count.
    pub fn table(&self) -> String {
        let fmt =
            |v: Option<f64>, digits: usize| v.map_or("-".to_string(), |v| format!("{v:.digits$}"));
        let width = self
            .rows
            .iter()
            .map(|r| r.task.len())
            .max()
            .unwrap_or(4)
            .max(4);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>9}  {:>12}  {:>10}  {:>9}",
            "Task", "Mean (s)", "Std Dev (s)", "Solved (%)", "PnP Count"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:>9}  {:>12}  {:>10.0}  {:>9}",
                r.task,
                fmt(r.mean_s, 2),
                fmt(r.std_s, 2),
                r.solved_pct,
                fmt(r.mean_pnp, 1)
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(task: &str, seed: u64, success: bool, t: f64, pnp: usize) -> RunRecord {
        RunRecord {
            task: task.into(),
            seed,
            success,
            wall_time_s: t,
            pnp_count: pnp,
        }
    }

    #[test]
    fn aggregates_only_solved_runs() {
        let report = aggregate(
            vec![
                run("b", 1, false, 9.0, 0),
                run("a", 0, true, 1.0, 2),
                run("b", 0, true, 3.0, 4),
                run("a", 1, true, 3.0, 4),
            ],
            2,
            10.0,
        );
        assert_eq!(report.rows.len(), 2);
        let a = &report.rows[0];
        assert_eq!(
            (a.mean_s, a.std_s, a.solved_pct, a.mean_pnp),
            (Some(2.0), Some(1.0), 100.0, Some(3.0))
        );
        let b = &report.rows[1];
        assert_eq!(
            (b.mean_s, b.std_s, b.solved_pct),
            (Some(3.0), Some(0.0), 50.0)
        );
    }

    #[test]
    fn single_seed_has_zero_spread() {
        let report = aggregate(vec![run("a", 0, true, 1.5, 2)], 1, 10.0);
        assert_eq!(report.rows[0].std_s, Some(0.0));
        assert!(report.table().contains("Solved (%)"));
    }
}
