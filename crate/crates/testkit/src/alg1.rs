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
//! A line-by-line transliteration of the adaptive subgoal loop, kept apart
//! from the library's state machine so the two can be compared.

/// Selector variables just before one feasibility query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Probe {
    pub p_i: usize,
    pub step_i: usize,
    pub p_prev: usize,
    pub beta: usize,
}

/// How the loop ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Reached,
    Failed,
    /// The feasibility oracle ran out of answers.
    Starved,
}

/// Runs the loop over `n` waypoints, taking feasibility answers from
/// `feasible` in order.
pub fn alg1_oracle(
    n: usize,
    theta: usize,
    feasible: &mut dyn FnMut(usize, usize) -> Option<bool>,
) -> (Vec<Probe>, Outcome) {
    let step_max = n - 1;
    let mut p_i = step_max;
    let mut step_i = step_max;
    let mut p_prev = 0;
    let mut beta = 0;
    let mut probes = Vec::new();
    let mut reached = false;
    while !reached {
        probes.push(Probe {
            p_i,
            step_i,
            p_prev,
            beta,
        });
        let Some(ok) = feasible(p_prev, p_i) else {
            return (probes, Outcome::Starved);
        };
        if ok {
            beta += 1;
            p_prev = p_i;
            // the goal is reached once the last waypoint is accepted
            reached = p_prev == step_max;
            if beta >= theta {
                step_i = (step_i * 2).min(step_max);
            }
            p_i = (p_i + step_i).min(step_max);
        } else {
            beta = 0;
            if step_i == 1 {
                return (probes, Outcome::Failed);
            }
            step_i = 1.max(step_i / 2);
            p_i = (p_prev + step_i).min(step_max);
        }
    }
    (probes, Outcome::Reached)
}

/// Replays `answers` through both the library selector and the oracle and
/// reports the first divergence. Also checks the selector's invariants and
/// step bound on the way.
pub fn compare_with_selector(n: usize, theta: usize, answers: &[bool]) -> Result<Outcome, String> {
    use segman_core::subgoal::{selector_init, selector_step, Verdict};

    let mut k = 0;
    let (probes, outcome) = alg1_oracle(n, theta, &mut |_, _| {
        let a = answers.get(k).copied();
        k += 1;
        a
    });
    let mut s = selector_init(n, theta).map_err(|e| e.to_string())?;
    let mut accepted: Vec<usize> = Vec::new();
    let log2 = (usize::BITS - s.step_max.leading_zeros()) as usize;
    let bound = s.step_max * (log2 + 1) + s.step_max;
    for (step, probe) in probes.iter().enumerate() {
        let seen = Probe {
            p_i: s.p_i,
            step_i: s.step_i,
            p_prev: s.p_prev,
            beta: s.beta,
        };
        if seen != *probe {
            return Err(format!(
                "step {step}: selector {seen:?} vs oracle {probe:?}"
            ));
        }
        if step >= bound {
            return Err(format!("no verdict after {bound} steps"));
        }
        let Some(&ok) = answers.get(step) else {
            return Ok(Outcome::Starved);
        };
        let (next, verdict) = selector_step(s, ok);
        if ok {
            if accepted.last().is_some_and(|&a| a >= next.p_prev) {
                return Err(format!("step {step}: accepted indices not increasing"));
            }
            accepted.push(next.p_prev);
        }
        if !(1..=next.step_max).contains(&next.step_i)
            || next.p_i > next.step_max
            || next.p_i < next.p_prev
        {
            return Err(format!("step {step}: invariant broken in {next:?}"));
        }
        let last = step + 1 == probes.len();
        let expected = match (last, outcome) {
            (false, _) | (true, Outcome::Starved) => Verdict::Continue,
            (true, Outcome::Reached) => Verdict::Done,
            (true, Outcome::Failed) => Verdict::Exhausted,
        };
        if verdict != expected {
            return Err(format!(
                "step {step}: verdict {verdict:?}, oracle expects {expected:?}"
            ));
        }
        s = next;
    }
    Ok(outcome)
}
