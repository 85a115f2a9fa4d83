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
//! Residual definitions for the k-order trajectory problem.

use crate::geometry::{signed_distance_grad, Rect, Shape, Vec2};
use thiserror::Error;

/// Which body a residual refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Body {
    Agent,
    /// The single manipulated object of the problem.
    Object,
}

/// How the manipulated object enters the problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ObjectMode {
    Absent,
    /// Constant pose; contributes geometry but no variables.
    Fixed {
        side: f64,
        pos: Vec2,
    },
    /// Rigidly carried at `agent + offset`.
    Attached {
        side: f64,
        offset: Vec2,
    },
    /// Free 2D position variables at every timestep.
    Free {
        side: f64,
    },
}

impl ObjectMode {
    pub fn side(&self) -> Option<f64> {
        match *self {
            ObjectMode::Absent => None,
            ObjectMode::Fixed { side, .. }
            | ObjectMode::Attached { side, .. }
            | ObjectMode::Free { side } => Some(side),
        }
    }
}

/// Second endpoint of a position difference.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Anchor {
    Point(Vec2),
    /// `body` at `lag` timesteps earlier.
    Body {
        body: Body,
        lag: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    Hard,
    Soft(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ResidualKind {
    /// Squared acceleration `p[t-2] - 2 p[t-1] + p[t]`, scaled by `sqrt(weight)`.
    Smoothness { body: Body, weight: f64 },
    /// Signed distance between agent disc and object square minus `gap`.
    Touch { gap: f64 },
    /// `p[t] - target`.
    Stable { body: Body, target: Vec2 },
    /// `|p[t] - anchor| - bound <= 0`, or a squared penalty on its positive
    /// part in soft mode.
    PositionDiff {
        body: Body,
        anchor: Anchor,
        bound: f64,
    },
    /// Body center inside `region`: four inequalities.
    StableOn { body: Body, region: Rect },
    /// `margin - sd(body, obstacle) <= 0`.
    Collision {
        body: Body,
        obstacle: Shape,
        margin: f64,
    },
}

/// One residual term applied at a set of timesteps.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    pub kind: ResidualKind,
    pub timesteps: Vec<usize>,
    pub mode: Mode,
}

/// Role a residual plays in the objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Category {
    Cost,
    Equality,
    Inequality,
}

impl Residual {
    pub fn hard(kind: ResidualKind, timesteps: impl IntoIterator<Item = usize>) -> Self {
        Residual {
            kind,
            timesteps: timesteps.into_iter().collect(),
            mode: Mode::Hard,
        }
    }

    pub fn soft(
        kind: ResidualKind,
        timesteps: impl IntoIterator<Item = usize>,
        weight: f64,
    ) -> Self {
        Residual {
            kind,
            timesteps: timesteps.into_iter().collect(),
            mode: Mode::Soft(weight),
        }
    }

    pub fn category(&self) -> Category {
        match (&self.kind, self.mode) {
            (ResidualKind::Smoothness { .. }, _) => Category::Cost,
            (ResidualKind::PositionDiff { .. }, Mode::Soft(_)) => Category::Cost,
            (ResidualKind::Touch { .. } | ResidualKind::Stable { .. }, _) => Category::Equality,
            _ => Category::Inequality,
        }
    }

    /// Rows contributed at one timestep.
    pub fn rows_per_step(&self) -> usize {
        match self.kind {
            ResidualKind::Smoothness { .. } | ResidualKind::Stable { .. } => 2,
            ResidualKind::StableOn { .. } => 4,
            _ => 1,
        }
    }
}

/// Problem over `horizon + 1` states `x[0..=T]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryProblem {
    pub horizon: usize,
    pub order: usize,
    pub agent_radius: f64,
    pub object: ObjectMode,
    pub residuals: Vec<Residual>,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("horizon {horizon} is shorter than the order {order}")]
    HorizonTooShort { horizon: usize, order: usize },
    #[error("residual {index} references timestep {t} outside [0, {horizon}]")]
    TimestepOutOfRange {
        index: usize,
        t: usize,
        horizon: usize,
    },
    #[error("residual {index} is soft but only position differences may be soft")]
    SoftNotAllowed { index: usize },
    #[error("residual {index} has a non-positive weight")]
    BadWeight { index: usize },
    #[error("residual {index} refers to an object that is absent")]
    NoObject { index: usize },
    #[error("residual {index} has lag {lag}, expected 1..={order}")]
    LagTooLarge {
        index: usize,
        lag: usize,
        order: usize,
    },
    #[error("initial guess has {found} states, expected {expected}")]
    InitLength { expected: usize, found: usize },
}

/// Agent position and, when the problem has one, the object position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajState {
    pub agent: Vec2,
    pub object: Option<Vec2>,
}

impl TrajectoryProblem {
    pub fn new(horizon: usize, agent_radius: f64, object: ObjectMode) -> Self {
        TrajectoryProblem {
            horizon,
            order: 2,
            agent_radius,
            object,
            residuals: Vec::new(),
        }
    }

    pub fn push(&mut self, r: Residual) -> &mut Self {
        self.residuals.push(r);
        self
    }

    /// Variables per timestep.
    pub fn state_dim(&self) -> usize {
        match self.object {
            ObjectMode::Free { .. } => 4,
            _ => 2,
        }
    }

    pub fn n_vars(&self) -> usize {
        (self.horizon + 1) * self.state_dim()
    }

    pub fn check(&self) -> Result<(), ProblemError> {
        if self.horizon < self.order {
            return Err(ProblemError::HorizonTooShort {
                horizon: self.horizon,
                order: self.order,
            });
        }
        for (index, r) in self.residuals.iter().enumerate() {
            let min_t = match r.kind {
                ResidualKind::Smoothness { .. } => self.order,
                ResidualKind::PositionDiff {
                    anchor: Anchor::Body { lag, .. },
                    ..
                } => lag,
                _ => 0,
            };
            if let ResidualKind::PositionDiff {
                anchor: Anchor::Body { lag, .. },
                ..
            } = r.kind
            {
                if lag == 0 || lag > self.order {
                    return Err(ProblemError::LagTooLarge {
                        index,
                        lag,
                        order: self.order,
                    });
                }
            }
            for &t in &r.timesteps {
                if t > self.horizon || t < min_t {
                    return Err(ProblemError::TimestepOutOfRange {
                        index,
                        t,
                        horizon: self.horizon,
                    });
                }
            }
            if let Mode::Soft(w) = r.mode {
                if !matches!(r.kind, ResidualKind::PositionDiff { .. }) {
                    return Err(ProblemError::SoftNotAllowed { index });
                }
                if !(w > 0.0) {
                    return Err(ProblemError::BadWeight { index });
                }
            }
            if let ResidualKind::Smoothness { weight, .. } = r.kind {
                if !(weight > 0.0) {
                    return Err(ProblemError::BadWeight { index });
                }
            }
            let uses_object = match &r.kind {
                ResidualKind::Touch { .. } => true,
                ResidualKind::Smoothness { body, .. }
                | ResidualKind::Stable { body, .. }
                | ResidualKind::StableOn { body, .. }
                | ResidualKind::Collision { body, .. } => *body == Body::Object,
                ResidualKind::PositionDiff { body, anchor, .. } => {
                    *body == Body::Object
                        || matches!(
                            anchor,
                            Anchor::Body {
                                body: Body::Object,
                                ..
                            }
                        )
                }
            };
            if uses_object && self.object == ObjectMode::Absent {
                return Err(ProblemError::NoObject { index });
            }
        }
        Ok(())
    }

    pub fn pack(&self, states: &[TrajState]) -> Vec<f64> {
        let d = self.state_dim();
        let mut z = vec![0.0; self.n_vars()];
        for (t, s) in states.iter().enumerate() {
            z[t * d] = s.agent.x;
            z[t * d + 1] = s.agent.y;
            if d == 4 {
                let o = s.object.expect("free object needs an initial position");
                z[t * d + 2] = o.x;
                z[t * d + 3] = o.y;
            }
        }
        z
    }

    pub fn unpack(&self, z: &[f64]) -> Vec<TrajState> {
        (0..=self.horizon)
            .map(|t| TrajState {
                agent: self.body_pos(z, t, Body::Agent).0,
                object: match self.object {
                    ObjectMode::Absent => None,
                    _ => Some(self.body_pos(z, t, Body::Object).0),
                },
            })
            .collect()
    }

    /// Position of `body` at `t`, with the indices of the variables its x
    /// and y coordinates depend on (unit derivative), if any.
    pub(crate) fn body_pos(
        &self,
        z: &[f64],
        t: usize,
        body: Body,
    ) -> (Vec2, Option<(usize, usize)>) {
        let d = self.state_dim();
        let agent = Vec2::new(z[t * d], z[t * d + 1]);
        match (body, self.object) {
            (Body::Agent, _) => (agent, Some((t * d, t * d + 1))),
            (Body::Object, ObjectMode::Fixed { pos, .. }) => (pos, None),
            (Body::Object, ObjectMode::Attached { offset, .. }) => {
                (agent + offset, Some((t * d, t * d + 1)))
            }
            (Body::Object, ObjectMode::Free { .. }) => (
                Vec2::new(z[t * d + 2], z[t * d + 3]),
                Some((t * d + 2, t * d + 3)),
            ),
            (Body::Object, ObjectMode::Absent) => panic!("problem has no object"),
        }
    }

    pub(crate) fn body_shape(&self, body: Body, pos: Vec2) -> Shape {
        match body {
            Body::Agent => Shape::disc(pos, self.agent_radius),
            Body::Object => Shape::square(pos, self.object.side().expect("problem has no object")),
        }
    }
}

/// One scalar residual row with its sparse gradient.
#[derive(Clone, Debug, Default)]
pub(crate) struct Row {
    pub value: f64,
    pub grad: [(usize, f64); 6],
    pub len: usize,
}

impl Row {
    fn new(value: f64) -> Self {
        Row {
            value,
            ..Default::default()
        }
    }

    fn add(&mut self, idx: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        for e in &mut self.grad[..self.len] {
            if e.0 == idx {
                e.1 += v;
                return;
            }
        }
        self.grad[self.len] = (idx, v);
        self.len += 1;
    }

    /// Adds `scale * g` through the body's position variables.
    fn add_vec(&mut self, vars: Option<(usize, usize)>, g: Vec2, scale: f64) {
        if let Some((ix, iy)) = vars {
            self.add(ix, g.x * scale);
            self.add(iy, g.y * scale);
        }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.grad[..self.len]
    }

    fn scaled(mut self, s: f64) -> Self {
        self.value *= s;
        for e in &mut self.grad[..self.len] {
            e.1 *= s;
        }
        self
    }
}

const EX: Vec2 = Vec2::new(1.0, 0.0);
const EY: Vec2 = Vec2::new(0.0, 1.0);

/// Raw rows of `r` at timestep `t` (before soft weighting).
pub(crate) fn eval_rows(
    problem: &TrajectoryProblem,
    r: &Residual,
    z: &[f64],
    t: usize,
    out: &mut Vec<Row>,
) {
    match &r.kind {
        ResidualKind::Smoothness { body, weight } => {
            let s = weight.sqrt();
            let (p0, v0) = problem.body_pos(z, t - 2, *body);
            let (p1, v1) = problem.body_pos(z, t - 1, *body);
            let (p2, v2) = problem.body_pos(z, t, *body);
            let acc = p0 - p1 * 2.0 + p2;
            for (axis, val) in [(EX, acc.x), (EY, acc.y)] {
                let mut row = Row::new(val * s);
                row.add_vec(v0, axis, s);
                row.add_vec(v1, axis, -2.0 * s);
                row.add_vec(v2, axis, s);
                out.push(row);
            }
        }
        ResidualKind::Touch { gap } => {
            let (pa, va) = problem.body_pos(z, t, Body::Agent);
            let (po, vo) = problem.body_pos(z, t, Body::Object);
            let (sd, g) = signed_distance_grad(
                &problem.body_shape(Body::Agent, pa),
                &problem.body_shape(Body::Object, po),
            );
            let mut row = Row::new(sd - gap);
            row.add_vec(va, g, 1.0);
            row.add_vec(vo, g, -1.0);
            out.push(row);
        }
        ResidualKind::Stable { body, target } => {
            let (p, v) = problem.body_pos(z, t, *body);
            let e = p - *target;
            for (axis, val) in [(EX, e.x), (EY, e.y)] {
                let mut row = Row::new(val);
                row.add_vec(v, axis, 1.0);
                out.push(row);
            }
        }
        ResidualKind::PositionDiff {
            body,
            anchor,
            bound,
        } => {
            let (pa, va) = problem.body_pos(z, t, *body);
            let (pb, vb) = match anchor {
                Anchor::Point(q) => (*q, None),
                Anchor::Body { body, lag } => problem.body_pos(z, t - lag, *body),
            };
            let diff = pa - pb;
            let d = diff.norm();
            let u = if d > 1e-12 {
                diff * (1.0 / d)
            } else {
                Vec2::ZERO
            };
            let mut row = Row::new(d - bound);
            row.add_vec(va, u, 1.0);
            row.add_vec(vb, u, -1.0);
            out.push(row);
        }
        ResidualKind::StableOn { body, region } => {
            let (p, v) = problem.body_pos(z, t, *body);
            for (val, axis, sign) in [
                (region.min.x - p.x, EX, -1.0),
                (p.x - region.max.x, EX, 1.0),
                (region.min.y - p.y, EY, -1.0),
                (p.y - region.max.y, EY, 1.0),
            ] {
                let mut row = Row::new(val);
                row.add_vec(v, axis, sign);
                out.push(row);
            }
        }
        ResidualKind::Collision {
            body,
            obstacle,
            margin,
        } => {
            let (p, v) = problem.body_pos(z, t, *body);
            let (sd, g) = signed_distance_grad(&problem.body_shape(*body, p), obstacle);
            let mut row = Row::new(margin - sd);
            row.add_vec(v, g, -1.0);
            out.push(row);
        }
    }
}

/// Rows of the least-squares objective for soft terms: soft position
/// differences only penalize their positive part.
pub(crate) fn eval_cost_rows(
    problem: &TrajectoryProblem,
    r: &Residual,
    z: &[f64],
    t: usize,
    out: &mut Vec<Row>,
) {
    let start = out.len();
    eval_rows(problem, r, z, t, out);
    if let Mode::Soft(w) = r.mode {
        let s = w.sqrt();
        for row in &mut out[start..] {
            let mut scaled = std::mem::take(row).scaled(s);
            if scaled.value < 0.0 {
                scaled = Row::new(0.0);
            }
            *row = scaled;
        }
    }
}

/// Pure evaluation summary of a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    /// Cost rows (weighted), then equality values, then inequality
    /// violations `max(0, g)`, in residual order.
    pub values: Vec<f64>,
    pub cost: f64,
    pub max_eq_residual: f64,
    pub max_ineq_violation: f64,
}

/// Evaluates every residual of `problem` on `states`.
pub fn residuals(states: &[TrajState], problem: &TrajectoryProblem) -> ResidualReport {
    let z = problem.pack(states);
    residuals_packed(problem, &z)
}

pub(crate) fn residuals_packed(problem: &TrajectoryProblem, z: &[f64]) -> ResidualReport {
    let mut rows = Vec::new();
    let mut report = ResidualReport {
        values: Vec::new(),
        cost: 0.0,
        max_eq_residual: 0.0,
        max_ineq_violation: 0.0,
    };
    for r in &problem.residuals {
        for &t in &r.timesteps {
            rows.clear();
            match r.category() {
                Category::Cost => {
                    eval_cost_rows(problem, r, z, t, &mut rows);
                    for row in &rows {
                        report.cost += row.value * row.value;
                        report.values.push(row.value);
                    }
                }
                Category::Equality => {
                    eval_rows(problem, r, z, t, &mut rows);
                    for row in &rows {
                        report.max_eq_residual = report.max_eq_residual.max(row.value.abs());
                        report.values.push(row.value);
                    }
                }
                Category::Inequality => {
                    eval_rows(problem, r, z, t, &mut rows);
                    for row in &rows {
                        let v = row.value.max(0.0);
                        report.max_ineq_violation = report.max_ineq_violation.max(v);
                        report.values.push(v);
                    }
                }
            }
        }
    }
    report
}

/// Raw values and dense Jacobian of one residual over all its timesteps,
/// for derivative checks.
pub fn residual_jacobian(
    problem: &TrajectoryProblem,
    residual: &Residual,
    states: &[TrajState],
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let z = problem.pack(states);
    let mut rows = Vec::new();
    for &t in &residual.timesteps {
        eval_rows(problem, residual, &z, t, &mut rows);
    }
    let n = problem.n_vars();
    let values = rows.iter().map(|r| r.value).collect();
    let jac = rows
        .iter()
        .map(|r| {
            let mut dense = vec![0.0; n];
            for &(i, v) in r.entries() {
                dense[i] += v;
            }
            dense
        })
        .collect();
    (values, jac)
}

/// Raw residual values of one residual on a packed vector; for finite
/// differences in tests.
pub fn residual_values(problem: &TrajectoryProblem, residual: &Residual, z: &[f64]) -> Vec<f64> {
    let mut rows = Vec::new();
    for &t in &residual.timesteps {
        eval_rows(problem, residual, z, t, &mut rows);
    }
    rows.iter().map(|r| r.value).collect()
}
