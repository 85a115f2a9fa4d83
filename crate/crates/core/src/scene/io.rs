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
//! Scene file format (JSON).

use super::{min_separation, MovableObject, Scene, DEFAULT_DT, DEFAULT_VMAX};
use crate::error::SceneError;
use crate::geometry::{bounds_distance, Rect, Vec2};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::path::Path;

/// On-disk scene layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub bounds: Rect,
    pub agent: AgentFile,
    #[serde(default)]
    pub walls: Vec<Rect>,
    pub objects: Vec<ObjectFile>,
    pub goal_object: String,
    pub goal: Vec2,
    pub goal_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vmax: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<SceneMeta>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentFile {
    pub radius: f64,
    pub start: Vec2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectFile {
    pub id: String,
    pub side: f64,
    pub start: Vec2,
}

/// Free-form descriptive metadata carried by corpus scenes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SceneMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inspired_by: Option<String>,
    /// `"no_obstacle"` or `"obstacle"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
}

fn positive(field: &str, v: f64) -> Result<(), SceneError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SceneError::invalid(
            field,
            format!("must be a positive number, got {v}"),
        ))
    }
}

impl SceneFile {
    pub fn into_scene(self) -> Result<Scene, SceneError> {
        if !self.bounds.is_valid() {
            return Err(SceneError::invalid(
                "bounds",
                "expected [x0, y0, x1, y1] with x0 < x1 and y0 < y1",
            ));
        }
        positive("agent.radius", self.agent.radius)?;
        positive("goal_tol", self.goal_tol)?;
        let vmax = self.vmax.unwrap_or(DEFAULT_VMAX);
        let dt = self.dt.unwrap_or(DEFAULT_DT);
        positive("vmax", vmax)?;
        positive("dt", dt)?;

        let mut seen = HashSet::new();
        for (i, o) in self.objects.iter().enumerate() {
            if !seen.insert(o.id.as_str()) {
                return Err(SceneError::DuplicateId(o.id.clone()));
            }
            positive(&format!("objects[{i}].side"), o.side)?;
        }
        let goal_object = self
            .objects
            .iter()
            .position(|o| o.id == self.goal_object)
            .ok_or_else(|| {
                SceneError::invalid(
                    "goal_object",
                    format!("unknown object id {:?}", self.goal_object),
                )
            })?;
        for (i, w) in self.walls.iter().enumerate() {
            if !w.is_valid() {
                return Err(SceneError::invalid(
                    &format!("walls[{i}]"),
                    "degenerate rectangle",
                ));
            }
            if !self.bounds.contains_rect(w) {
                return Err(SceneError::invalid(
                    &format!("walls[{i}]"),
                    "lies outside bounds",
                ));
            }
        }
        if !self.bounds.contains(self.goal) {
            return Err(SceneError::invalid("goal", "lies outside bounds"));
        }

        let scene = Scene {
            bounds: self.bounds,
            walls: self.walls,
            agent_radius: self.agent.radius,
            agent_start: self.agent.start,
            objects: self
                .objects
                .into_iter()
                .map(|o| MovableObject {
                    id: o.id,
                    side: o.side,
                    start: o.start,
                })
                .collect(),
            goal_object,
            goal: self.goal,
            goal_tol: self.goal_tol,
            vmax,
            dt,
            meta: self.meta,
        };

        if bounds_distance(&scene.agent_shape(scene.agent_start), &scene.bounds) < 0.0 {
            return Err(SceneError::invalid("agent.start", "lies outside bounds"));
        }
        for (i, o) in scene.objects.iter().enumerate() {
            if bounds_distance(&scene.object_shape(i, o.start), &scene.bounds) < 0.0 {
                return Err(SceneError::invalid(
                    &format!("objects[{i}].start"),
                    "lies outside bounds",
                ));
            }
        }
        let sep = min_separation(&scene.initial_config(), &scene);
        if sep.distance < 0.0 {
            return Err(SceneError::InitialCollision(
                scene.body_name(sep.pair.0),
                scene.body_name(sep.pair.1),
            ));
        }
        Ok(scene)
    }

    pub fn from_scene(scene: &Scene) -> Self {
        SceneFile {
            bounds: scene.bounds,
            agent: AgentFile {
                radius: scene.agent_radius,
                start: scene.agent_start,
            },
            walls: scene.walls.clone(),
            objects: scene
                .objects
                .iter()
                .map(|o| ObjectFile {
                    id: o.id.clone(),
                    side: o.side,
                    start: o.start,
                })
                .collect(),
            goal_object: scene.goal_object_id().to_string(),
            goal: scene.goal,
            goal_tol: scene.goal_tol,
            vmax: Some(scene.vmax),
            dt: Some(scene.dt),
            meta: scene.meta.clone(),
        }
    }
}

/// Parses and validates a scene.
pub fn load_scene(text: &str) -> Result<Scene, SceneError> {
    let file: SceneFile = serde_json::from_str(text)?;
    file.into_scene()
}

pub fn load_scene_file(path: impl AsRef<Path>) -> Result<Scene, SceneError> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| SceneError::Io(path.display().to_string(), e))?;
    load_scene(&text)
}

/// Pretty-printed JSON with a stable key order.
pub fn save_scene(scene: &Scene) -> String {
    serde_json::to_string_pretty(&SceneFile::from_scene(scene))
        .expect("scene serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = r#"{"bounds":[0,0,4,4],"agent":{"radius":0.2,"start":[1,1]},
        "objects":[{"id":"obj0","side":0.5,"start":[2,2]}],
        "goal_object":"obj0","goal":[3,3],"goal_tol":0.1}"#;

    #[test]
    fn minimal_scene_loads() {
        let s = load_scene(MINIMAL).unwrap();
        assert!(s.walls.is_empty());
        assert!(s.obstacle_objects().is_empty());
        assert_eq!(s.vmax, DEFAULT_VMAX);
        assert_eq!(s.dt, DEFAULT_DT);
    }

    #[test]
    fn object_overlapping_wall_is_rejected() {
        let text = r#"{"bounds":[0,0,4,4],"agent":{"radius":0.2,"start":[0.5,0.5]},
            "walls":[[1.5,1.5,2.5,2.5]],
            "objects":[{"id":"obj0","side":0.5,"start":[3,3]},{"id":"obj1","side":0.5,"start":[2.6,2]}],
            "goal_object":"obj0","goal":[3,1],"goal_tol":0.1}"#;
        let err = load_scene(text).unwrap_err();
        assert_eq!(err.to_string(), "initial collision: obj1/wall0");
    }

    #[test]
    fn duplicate_id_is_rejected() {
        let text = r#"{"bounds":[0,0,4,4],"agent":{"radius":0.2,"start":[0.5,0.5]},
            "objects":[{"id":"obj0","side":0.5,"start":[3,3]},{"id":"obj0","side":0.5,"start":[1,3]}],
            "goal_object":"obj0","goal":[3,1],"goal_tol":0.1}"#;
        let err = load_scene(text).unwrap_err();
        assert!(err.to_string().contains("duplicate id"), "{err}");
    }

    #[test]
    fn errors_name_the_field() {
        let bad_goal = MINIMAL.replace(r#""goal_object":"obj0""#, r#""goal_object":"nope""#);
        assert!(load_scene(&bad_goal)
            .unwrap_err()
            .to_string()
            .contains("goal_object"));
        let bad_radius = MINIMAL.replace(r#""radius":0.2"#, r#""radius":-1"#);
        assert!(load_scene(&bad_radius)
            .unwrap_err()
            .to_string()
            .contains("agent.radius"));
        let outside = MINIMAL.replace(r#""goal":[3,3]"#, r#""goal":[9,9]"#);
        assert!(load_scene(&outside)
            .unwrap_err()
            .to_string()
            .contains("goal"));
        let missing = MINIMAL.replace(r#""goal_tol":0.1"#, r#""goal_toll":0.1"#);
        assert!(matches!(load_scene(&missing), Err(SceneError::Json(_))));
    }

    proptest! {
        #[test]
        fn save_load_round_trip(
            ax in 0.5..1.5f64, ay in 0.5..9.5f64,
            objs in proptest::collection::vec((2.5..9.0f64, 0.5..9.0f64, 0.2..0.4f64), 1..5),
            r in 0.1..0.3f64,
        ) {
            let mut objects = Vec::new();
            for (i, (x, y, side)) in objs.iter().enumerate() {
                // lay objects out on a coarse lattice so they never overlap
                let x = 2.5 + (i as f64) * 1.5 + (x - 2.5) * 0.1;
                objects.push(MovableObject { id: format!("obj{i}"), side: *side, start: Vec2::new(x, *y) });
            }
            let scene = Scene {
                bounds: Rect::new(0.0, 0.0, 10.0, 10.0),
                walls: vec![Rect::new(1.8, 0.0, 2.0, 3.0)],
                agent_radius: r,
                agent_start: Vec2::new(ax, ay),
                objects,
                goal_object: 0,
                goal: Vec2::new(9.0, 9.0),
                goal_tol: 0.05,
                vmax: 1.0,
                dt: 0.1,
                meta: None,
            };
            prop_assume!(min_separation(&scene.initial_config(), &scene).distance >= 0.0);
            let back = load_scene(&save_scene(&scene)).unwrap();
            prop_assert_eq!(back, scene);
        }
    }
}
