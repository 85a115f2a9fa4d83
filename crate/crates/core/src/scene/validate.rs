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
//! Independent replay of a plan against the contact rules.
//!
//! The validator shares only the geometry primitives with the planner. It
//! checks every state and the midpoint of every transition.

use super::{min_separation, Configuration, Phase, Plan, Scene, TOUCH_TOL};
use crate::geometry::signed_distance;
use serde::{Deserialize, Serialize};

/// Penetration depth at or above which a plan is rejected.
pub const PENETRATION_TOL: f64 = 1e-6;
const POSE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// The plan does not start at the scene's initial configuration.
    Initial,
    /// A segment does not start where the previous one ended.
    Continuity,
    /// Pick/place phases out of order, or a place of a different object.
    Sequence,
    EmptySegment,
    TimeStep,
    Penetration,
    Velocity,
    Attachment,
    Touch,
    /// Goal object not within tolerance of the goal at the end.
    Terminal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub segment: Option<usize>,
    pub kind: FailureKind,
    pub magnitude: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SegmentSummary {
    pub max_penetration: f64,
    pub velocity_violations: usize,
    pub attachment_violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub failures: Vec<Failure>,
    pub segments: Vec<SegmentSummary>,
}

impl ValidationReport {
    pub fn has(&self, kind: FailureKind) -> bool {
        self.failures.iter().any(|f| f.kind == kind)
    }
}

struct Recorder {
    failures: Vec<Failure>,
}

impl Recorder {
    fn fail(&mut self, segment: Option<usize>, kind: FailureKind, magnitude: f64) {
        self.failures.push(Failure {
            segment,
            kind,
            magnitude,
        });
    }
}

fn max_pose_diff(a: &Configuration, b: &Configuration) -> f64 {
    a.objects
        .iter()
        .zip(&b.objects)
        .map(|(p, q)| (*p - *q).norm())
        .fold(0.0, f64::max)
}

fn penetration(config: &Configuration, scene: &Scene) -> f64 {
    (-min_separation(config, scene).distance).max(0.0)
}

/// Replays `plan` from the scene's initial configuration. The plan is valid
/// iff no failure is recorded.
pub fn validate_plan(scene: &Scene, plan: &Plan) -> ValidationReport {
    let mut rec = Recorder {
        failures: Vec::new(),
    };
    let mut summaries = Vec::with_capacity(plan.segments.len());
    let initial = scene.initial_config();
    let n_obj = scene.objects.len();
    let limit = scene.max_step() + POSE_TOL;

    if let Some(first) = plan.segments.first().and_then(|s| s.states.first()) {
        if !first.approx_eq(&initial, POSE_TOL) {
            rec.fail(
                None,
                FailureKind::Initial,
                (first.agent - initial.agent)
                    .norm()
                    .max(max_pose_diff(first, &initial)),
            );
        }
    }

    let mut prev_pick: Option<usize> = None;
    let mut prev_last: Option<&Configuration> = None;
    for (si, seg) in plan.segments.iter().enumerate() {
        let mut summary = SegmentSummary::default();
        let at = Some(si);
        if seg.states.is_empty() {
            rec.fail(at, FailureKind::EmptySegment, 0.0);
            summaries.push(summary);
            continue;
        }
        if seg.object >= n_obj || seg.states.iter().any(|c| c.objects.len() != n_obj) {
            rec.fail(at, FailureKind::Sequence, 0.0);
            summaries.push(summary);
            continue;
        }
        if (seg.dt - scene.dt).abs() > 1e-12 {
            rec.fail(at, FailureKind::TimeStep, (seg.dt - scene.dt).abs());
        }
        match seg.phase {
            Phase::Pick => {
                if prev_pick.is_some() {
                    rec.fail(at, FailureKind::Sequence, 0.0);
                }
                prev_pick = Some(seg.object);
            }
            Phase::Place => {
                if prev_pick != Some(seg.object) {
                    rec.fail(at, FailureKind::Sequence, 0.0);
                }
                prev_pick = None;
            }
        }
        if let Some(prev) = prev_last {
            if !prev.approx_eq(seg.first(), POSE_TOL) {
                rec.fail(
                    at,
                    FailureKind::Continuity,
                    (prev.agent - seg.first().agent)
                        .norm()
                        .max(max_pose_diff(prev, seg.first())),
                );
            }
        }

        // attachment bookkeeping
        let n = seg.states.len();
        let first = seg.first();
        let mut attach_worst = 0.0f64;
        for (k, c) in seg.states.iter().enumerate() {
            let is_last = k + 1 == n;
            if let Some(a) = c.attachment {
                let err = (c.objects[a.object] - (c.agent + a.offset)).norm();
                if err > POSE_TOL || a.object >= n_obj {
                    summary.attachment_violations += 1;
                    attach_worst = attach_worst.max(err);
                }
            }
            let rule_ok = match seg.phase {
                Phase::Pick => {
                    if is_last {
                        c.is_attached(seg.object)
                    } else {
                        c.attachment.is_none()
                    }
                }
                Phase::Place => {
                    let same = c.attachment.is_some_and(|a| {
                        first.attachment.is_some_and(|f| {
                            a.object == seg.object
                                && f.object == a.object
                                && (a.offset - f.offset).norm() <= POSE_TOL
                        })
                    });
                    same || (is_last && k > 0 && c.attachment.is_none())
                }
            };
            if !rule_ok {
                summary.attachment_violations += 1;
                attach_worst = attach_worst.max(1.0);
            }
            // objects not carried by the agent stay put
            let moved = (0..n_obj)
                .filter(|&i| !(seg.phase == Phase::Place && i == seg.object))
                .map(|i| (c.objects[i] - first.objects[i]).norm())
                .fold(0.0, f64::max);
            if moved > POSE_TOL {
                summary.attachment_violations += 1;
                attach_worst = attach_worst.max(moved);
            }
        }
        if summary.attachment_violations > 0 {
            rec.fail(at, FailureKind::Attachment, attach_worst);
        }
        if seg.phase == Phase::Pick {
            let last = seg.last();
            let gap = signed_distance(
                &scene.agent_shape(last.agent),
                &scene.object_shape(seg.object, last.objects[seg.object]),
            );
            if gap.abs() > TOUCH_TOL {
                rec.fail(at, FailureKind::Touch, gap.abs());
            }
        }

        // collisions at states and transition midpoints; velocity per step
        let mut pen = penetration(first, scene);
        let mut vel_worst = 0.0f64;
        for w in seg.states.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let mut mid = a.lerp(b, 0.5);
            if a.attachment != b.attachment {
                mid.attachment = None;
            }
            pen = pen.max(penetration(&mid, scene)).max(penetration(b, scene));
            let step = (b.agent - a.agent).norm().max(
                a.objects
                    .iter()
                    .zip(&b.objects)
                    .map(|(p, q)| (*p - *q).norm())
                    .fold(0.0, f64::max),
            );
            if step > limit {
                summary.velocity_violations += 1;
                vel_worst = vel_worst.max(step - scene.max_step());
            }
        }
        summary.max_penetration = pen;
        if pen >= PENETRATION_TOL {
            rec.fail(at, FailureKind::Penetration, pen);
        }
        if summary.velocity_violations > 0 {
            rec.fail(at, FailureKind::Velocity, vel_worst);
        }
        prev_last = Some(seg.last());
        summaries.push(summary);
    }

    let final_config = plan.final_config().unwrap_or(&initial);
    if final_config.objects.len() == n_obj {
        let miss = (final_config.objects[scene.goal_object] - scene.goal).norm();
        if miss > scene.goal_tol {
            rec.fail(None, FailureKind::Terminal, miss);
        }
    }

    ValidationReport {
        valid: rec.failures.is_empty(),
        failures: rec.failures,
        segments: summaries,
    }
}
