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
//! World model: the immutable scene, configurations of its movable bodies,
//! collision queries, plans and the independent plan validator.

mod io;
mod plan;
mod validate;

pub use io::{load_scene, load_scene_file, save_scene, SceneFile, SceneMeta};
pub(crate) use plan::segments_from_file;
pub use plan::{Phase, Plan, PlanFile, PlanSegment, SegmentFile, StateFile};
pub use validate::{validate_plan, Failure, FailureKind, SegmentSummary, ValidationReport};

use crate::geometry::{bounds_distance, signed_distance, Rect, Shape, Vec2};
use std::fmt;

/// Default agent speed limit in world units per second.
pub const DEFAULT_VMAX: f64 = 1.0;
/// Default time step in seconds.
pub const DEFAULT_DT: f64 = 0.1;
/// Contact tolerance for the touch relation.
pub const TOUCH_TOL: f64 = 1e-3;
/// Gap kept between the agent and a grasped object; inside [`TOUCH_TOL`] and
/// never penetrating.
pub const GRASP_GAP: f64 = 5e-4;

/// A movable axis-aligned square. It translates but never rotates.
#[derive(Clone, Debug, PartialEq)]
pub struct MovableObject {
    pub id: String,
    pub side: f64,
    pub start: Vec2,
}

/// Immutable world description.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub bounds: Rect,
    pub walls: Vec<Rect>,
    pub agent_radius: f64,
    pub agent_start: Vec2,
    pub objects: Vec<MovableObject>,
    /// Index into `objects`.
    pub goal_object: usize,
    pub goal: Vec2,
    pub goal_tol: f64,
    pub vmax: f64,
    pub dt: f64,
    pub meta: Option<SceneMeta>,
}

/// A rigid grasp: the object sits at `agent + offset`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Attachment {
    pub object: usize,
    pub offset: Vec2,
}

/// Poses of the agent and of every movable object, indexed like
/// [`Scene::objects`].
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub agent: Vec2,
    pub objects: Vec<Vec2>,
    pub attachment: Option<Attachment>,
}

/// A named participant in a collision pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Body {
    Agent,
    Object(usize),
    Wall(usize),
    Bounds,
}

impl Scene {
    pub fn object_index(&self, id: &str) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }

    pub fn goal_object_id(&self) -> &str {
        &self.objects[self.goal_object].id
    }

    /// Indices of the movable objects other than the goal object.
    pub fn obstacle_objects(&self) -> Vec<usize> {
        (0..self.objects.len())
            .filter(|&i| i != self.goal_object)
            .collect()
    }

    pub fn initial_config(&self) -> Configuration {
        Configuration {
            agent: self.agent_start,
            objects: self.objects.iter().map(|o| o.start).collect(),
            attachment: None,
        }
    }

    pub fn agent_shape(&self, pos: Vec2) -> Shape {
        Shape::disc(pos, self.agent_radius)
    }

    pub fn object_shape(&self, index: usize, pos: Vec2) -> Shape {
        Shape::square(pos, self.objects[index].side)
    }

    pub fn body_name(&self, body: Body) -> String {
        match body {
            Body::Agent => "agent".to_string(),
            Body::Object(i) => self.objects[i].id.clone(),
            Body::Wall(i) => format!("wall{i}"),
            Body::Bounds => "bounds".to_string(),
        }
    }

    pub fn name(&self) -> Option<&str> {
        self.meta.as_ref().and_then(|m| m.name.as_deref())
    }

    /// Largest displacement allowed between consecutive states.
    pub fn max_step(&self) -> f64 {
        self.vmax * self.dt
    }
}

impl Configuration {
    pub fn is_attached(&self, object: usize) -> bool {
        self.attachment.is_some_and(|a| a.object == object)
    }

    /// Moves the agent, dragging the attached object along.
    pub fn move_agent(&mut self, to: Vec2) {
        self.agent = to;
        if let Some(a) = self.attachment {
            self.objects[a.object] = to + a.offset;
        }
    }

    pub fn attach(&mut self, object: usize) {
        self.attachment = Some(Attachment {
            object,
            offset: self.objects[object] - self.agent,
        });
    }

    pub fn release(&mut self) {
        self.attachment = None;
    }

    /// Componentwise comparison of every pose within `tol`; attachments must
    /// agree on the object and on the offset within `tol`.
    pub fn approx_eq(&self, other: &Configuration, tol: f64) -> bool {
        let close = |a: Vec2, b: Vec2| (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol;
        close(self.agent, other.agent)
            && self.objects.len() == other.objects.len()
            && self
                .objects
                .iter()
                .zip(&other.objects)
                .all(|(a, b)| close(*a, *b))
            && match (self.attachment, other.attachment) {
                (None, None) => true,
                (Some(a), Some(b)) => a.object == b.object && close(a.offset, b.offset),
                _ => false,
            }
    }

    /// Linear interpolation of all poses; the attachment of `self` is kept.
    pub fn lerp(&self, other: &Configuration, s: f64) -> Configuration {
        Configuration {
            agent: self.agent.lerp(other.agent, s),
            objects: self
                .objects
                .iter()
                .zip(&other.objects)
                .map(|(a, b)| a.lerp(*b, s))
                .collect(),
            attachment: self.attachment,
        }
    }
}

/// The closest pair of bodies in a configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Separation {
    pub distance: f64,
    pub pair: (Body, Body),
}

/// Minimum signed distance over every body pair that can collide: agent and
/// objects against walls, bounds and each other. The attached object versus
/// the agent is excluded; wall pairs are static and ignored.
///
/// # Panics
/// If `config` does not carry one pose per scene object.
pub fn min_separation(config: &Configuration, scene: &Scene) -> Separation {
    assert_eq!(
        config.objects.len(),
        scene.objects.len(),
        "configuration does not match the scene's objects"
    );
    let mut best = Separation {
        distance: f64::INFINITY,
        pair: (Body::Agent, Body::Bounds),
    };
    let mut consider = |d: f64, a: Body, b: Body| {
        if d < best.distance {
            best = Separation {
                distance: d,
                pair: (a, b),
            };
        }
    };
    let agent = scene.agent_shape(config.agent);
    let objects: Vec<Shape> = (0..scene.objects.len())
        .map(|i| scene.object_shape(i, config.objects[i]))
        .collect();
    let attached = config.attachment.map(|a| a.object);

    consider(
        bounds_distance(&agent, &scene.bounds),
        Body::Agent,
        Body::Bounds,
    );
    for (w, wall) in scene.walls.iter().enumerate() {
        consider(
            signed_distance(&agent, &Shape::Rect(*wall)),
            Body::Agent,
            Body::Wall(w),
        );
    }
    for (i, obj) in objects.iter().enumerate() {
        if attached != Some(i) {
            consider(signed_distance(&agent, obj), Body::Agent, Body::Object(i));
        }
        consider(
            bounds_distance(obj, &scene.bounds),
            Body::Object(i),
            Body::Bounds,
        );
        for (w, wall) in scene.walls.iter().enumerate() {
            consider(
                signed_distance(obj, &Shape::Rect(*wall)),
                Body::Object(i),
                Body::Wall(w),
            );
        }
        for (j, other) in objects.iter().enumerate().skip(i + 1) {
            consider(
                signed_distance(obj, other),
                Body::Object(i),
                Body::Object(j),
            );
        }
    }
    best
}

/// True iff some body pair is closer than `clearance`.
pub fn collides(config: &Configuration, scene: &Scene, clearance: f64) -> bool {
    min_separation(config, scene).distance < clearance
}

/// A frozen set of rectangular obstacles inside the world bounds, used to
/// check a single moving shape quickly.
#[derive(Clone, Debug)]
pub struct Obstacles {
    pub bounds: Rect,
    pub rects: Vec<(Body, Rect)>,
}

impl Obstacles {
    /// Walls plus every object for which `keep` returns true, at its pose in
    /// `config`.
    pub fn new(scene: &Scene, config: &Configuration, keep: impl Fn(usize) -> bool) -> Self {
        let mut rects: Vec<(Body, Rect)> = scene
            .walls
            .iter()
            .enumerate()
            .map(|(i, w)| (Body::Wall(i), *w))
            .collect();
        for (i, o) in scene.objects.iter().enumerate() {
            if keep(i) {
                rects.push((Body::Object(i), Rect::square(config.objects[i], o.side)));
            }
        }
        Obstacles {
            bounds: scene.bounds,
            rects,
        }
    }

    pub fn walls_only(scene: &Scene) -> Self {
        Obstacles {
            bounds: scene.bounds,
            rects: scene
                .walls
                .iter()
                .enumerate()
                .map(|(i, w)| (Body::Wall(i), *w))
                .collect(),
        }
    }

    /// Smallest signed distance from `shape` to any obstacle or to the
    /// outside of the bounds.
    pub fn clearance(&self, shape: &Shape) -> f64 {
        let mut best = bounds_distance(shape, &self.bounds);
        for (_, r) in &self.rects {
            best = best.min(signed_distance(shape, &Shape::Rect(*r)));
        }
        best
    }

    /// True when every obstacle is at least `clearance` away.
    pub fn is_free(&self, shape: &Shape, clearance: f64) -> bool {
        if bounds_distance(shape, &self.bounds) < clearance {
            return false;
        }
        let bb = shape.aabb().inflate(clearance);
        self.rects.iter().all(|(_, r)| {
            // cheap reject before the exact distance
            r.max.x < bb.min.x
                || r.min.x > bb.max.x
                || r.max.y < bb.min.y
                || r.min.y > bb.max.y
                || signed_distance(shape, &Shape::Rect(*r)) >= clearance
        })
    }

    /// Every shape in `shapes` is free with `clearance`.
    pub fn all_free(&self, shapes: &[Shape], clearance: f64) -> bool {
        shapes.iter().all(|s| self.is_free(s, clearance))
    }
}

impl fmt::Display for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Body::Agent => write!(f, "agent"),
            Body::Object(i) => write!(f, "object#{i}"),
            Body::Wall(i) => write!(f, "wall{i}"),
            Body::Bounds => write!(f, "bounds"),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn open_scene() -> Scene {
        Scene {
            bounds: Rect::new(0.0, 0.0, 10.0, 10.0),
            walls: vec![Rect::new(4.0, 0.0, 4.5, 3.0)],
            agent_radius: 0.2,
            agent_start: Vec2::new(1.0, 1.0),
            objects: vec![
                MovableObject {
                    id: "obj0".into(),
                    side: 0.5,
                    start: Vec2::new(2.0, 2.0),
                },
                MovableObject {
                    id: "obj1".into(),
                    side: 0.5,
                    start: Vec2::new(6.0, 6.0),
                },
            ],
            goal_object: 0,
            goal: Vec2::new(8.0, 8.0),
            goal_tol: 0.1,
            vmax: DEFAULT_VMAX,
            dt: DEFAULT_DT,
            meta: None,
        }
    }

    #[test]
    fn initial_configuration_is_free() {
        let s = open_scene();
        assert!(!collides(&s.initial_config(), &s, 0.0));
    }

    #[test]
    fn agent_in_wall_collides() {
        let s = open_scene();
        let mut c = s.initial_config();
        c.agent = Vec2::new(4.2, 1.0);
        assert!(collides(&c, &s, 0.0));
        assert_eq!(min_separation(&c, &s).pair, (Body::Agent, Body::Wall(0)));
    }

    #[test]
    fn attached_pair_is_excluded() {
        let s = open_scene();
        let mut c = s.initial_config();
        // agent touching obj0 from the left, then overlapping it slightly
        c.agent = Vec2::new(2.0 - 0.25 - 0.2 + 0.05, 2.0);
        assert!(collides(&c, &s, 0.0));
        c.attach(0);
        assert!(!collides(&c, &s, 0.0));
        c.move_agent(Vec2::new(3.0, 5.0));
        assert!((c.objects[0] - (c.agent + c.attachment.unwrap().offset)).norm() < 1e-12);
        assert!(!collides(&c, &s, 0.0));
        // the co-moving pair still sees the wall
        c.move_agent(Vec2::new(3.9, 1.0));
        assert!(collides(&c, &s, 0.0));
    }

    #[test]
    fn collides_is_monotone_in_clearance() {
        let s = open_scene();
        let c = s.initial_config();
        let d = min_separation(&c, &s).distance;
        assert!(!collides(&c, &s, d - 1e-9));
        assert!(collides(&c, &s, d + 1e-9));
        assert!(collides(&c, &s, d + 1.0));
    }

    #[test]
    fn obstacles_agree_with_min_separation() {
        let s = open_scene();
        let c = s.initial_config();
        let obs = Obstacles::new(&s, &c, |i| i != 0);
        let shape = s.object_shape(0, c.objects[0]);
        let d = obs.clearance(&shape);
        assert!(obs.is_free(&shape, d - 1e-9));
        assert!(!obs.is_free(&shape, d + 1e-9));
    }
}
