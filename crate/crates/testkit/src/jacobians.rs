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
//! Central-difference check of the analytic residual Jacobians.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use segman_core::scene::GRASP_GAP;
use segman_core::trajopt::{
    residual_jacobian, residual_values, Anchor, Body, ObjectMode, Residual, ResidualKind,
    TrajState, TrajectoryProblem,
};
use segman_core::{Rect, Shape, Vec2};

const T: usize = 4;

fn v(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

fn random_states(rng: &mut ChaCha8Rng, with_object: bool) -> Vec<TrajState> {
    (0..=T)
        .map(|_| TrajState {
            agent: v(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
            object: with_object.then(|| v(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))),
        })
        .collect()
}

/// Largest relative gap between the analytic Jacobian and central
/// differences of the raw residual values.
pub fn jacobian_error(
    problem: &TrajectoryProblem,
    residual: &Residual,
    states: &[TrajState],
) -> f64 {
    let (_, jac) = residual_jacobian(problem, residual, states);
    let z = problem.pack(states);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for i in 0..z.len() {
        let mut zp = z.clone();
        let mut zm = z.clone();
        zp[i] += h;
        zm[i] -= h;
        let fp = residual_values(problem, residual, &zp);
        let fm = residual_values(problem, residual, &zm);
        for (row, (a, b)) in fp.iter().zip(&fm).enumerate() {
            let fd = (a - b) / (2.0 * h);
            let an = jac[row][i];
            worst = worst.max((fd - an).abs() / fd.abs().max(an.abs()).max(1.0));
        }
    }
    worst
}

/// One residual of every kind, with free and attached object variants.
pub fn residual_cases() -> Vec<(&'static str, ObjectMode, Residual)> {
    let free = ObjectMode::Free { side: 0.5 };
    let attached = ObjectMode::Attached {
        side: 0.5,
        offset: v(0.45, 0.0),
    };
    let wall = Shape::Rect(Rect::new(-0.5, -0.3, 0.7, 0.4));
    let pillar = Shape::disc(v(0.3, -0.2), 0.6);
    let steps = || 2..=T;
    let hard = Residual::hard;
    vec![
        (
            "smoothness/agent",
            free,
            hard(
                ResidualKind::Smoothness {
                    body: Body::Agent,
                    weight: 2.0,
                },
                steps(),
            ),
        ),
        (
            "smoothness/object",
            free,
            hard(
                ResidualKind::Smoothness {
                    body: Body::Object,
                    weight: 1.0,
                },
                steps(),
            ),
        ),
        (
            "touch",
            free,
            hard(ResidualKind::Touch { gap: GRASP_GAP }, steps()),
        ),
        (
            "stable/agent",
            free,
            hard(
                ResidualKind::Stable {
                    body: Body::Agent,
                    target: v(0.3, 0.1),
                },
                steps(),
            ),
        ),
        (
            "stable/object",
            free,
            hard(
                ResidualKind::Stable {
                    body: Body::Object,
                    target: v(-1.0, 0.5),
                },
                steps(),
            ),
        ),
        (
            "position-diff/point",
            free,
            hard(
                ResidualKind::PositionDiff {
                    body: Body::Object,
                    anchor: Anchor::Point(v(0.2, 0.2)),
                    bound: 0.1,
                },
                steps(),
            ),
        ),
        (
            "position-diff/lagged",
            free,
            hard(
                ResidualKind::PositionDiff {
                    body: Body::Agent,
                    anchor: Anchor::Body {
                        body: Body::Agent,
                        lag: 1,
                    },
                    bound: 0.05,
                },
                steps(),
            ),
        ),
        (
            "stable-on",
            free,
            hard(
                ResidualKind::StableOn {
                    body: Body::Object,
                    region: Rect::new(-1.0, -1.0, 1.0, 1.0),
                },
                steps(),
            ),
        ),
        (
            "collision/agent-rect",
            free,
            hard(
                ResidualKind::Collision {
                    body: Body::Agent,
                    obstacle: wall,
                    margin: 0.05,
                },
                steps(),
            ),
        ),
        (
            "collision/agent-disc",
            free,
            hard(
                ResidualKind::Collision {
                    body: Body::Agent,
                    obstacle: pillar,
                    margin: 0.05,
                },
                steps(),
            ),
        ),
        (
            "collision/object-rect",
            free,
            hard(
                ResidualKind::Collision {
                    body: Body::Object,
                    obstacle: wall,
                    margin: 0.05,
                },
                steps(),
            ),
        ),
        (
            "collision/attached-rect",
            attached,
            hard(
                ResidualKind::Collision {
                    body: Body::Object,
                    obstacle: wall,
                    margin: 0.05,
                },
                steps(),
            ),
        ),
        (
            "stable-on/attached",
            attached,
            hard(
                ResidualKind::StableOn {
                    body: Body::Object,
                    region: Rect::new(-1.0, -1.0, 1.0, 1.0),
                },
                steps(),
            ),
        ),
    ]
}

/// Worst relative error of each residual case over `points` random states.
pub fn jacobian_report(points: usize, seed: u64) -> Vec<(&'static str, f64)> {
    residual_cases()
        .into_iter()
        .map(|(name, mode, residual)| {
            let mut problem = TrajectoryProblem::new(T, 0.2, mode);
            problem.push(residual.clone());
            problem.check().expect("well-formed case");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let worst = (0..points)
                .map(|_| {
                    jacobian_error(
                        &problem,
                        &residual,
                        &random_states(&mut rng, matches!(mode, ObjectMode::Free { .. })),
                    )
                })
                .fold(0.0, f64::max);
            (name, worst)
        })
        .collect()
}
