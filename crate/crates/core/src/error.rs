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
use thiserror::Error;

/// Scene loading failures. Messages name the offending field or bodies.
#[derive(Debug, Error)]
pub enum SceneError {
    #[error("cannot read {0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("schema violation: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("duplicate id: {0}")]
    DuplicateId(String),
    #[error("initial collision: {0}/{1}")]
    InitialCollision(String, String),
}

impl SceneError {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        SceneError::Invalid {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

/// Plan or solution files that cannot be matched against a scene.
#[derive(Debug, Error)]
pub enum PlanError {
    #[error("schema violation: {0}")]
    Json(#[from] serde_json::Error),
    #[error("object ids in plan {plan:?} do not match scene {scene:?}")]
    IdMismatch {
        plan: Vec<String>,
        scene: Vec<String>,
    },
    #[error("segment {segment}: unknown object {id:?}")]
    UnknownObject { segment: usize, id: String },
    #[error("segment {segment}, state {state}: expected {expected} object poses, found {found}")]
    PoseCount {
        segment: usize,
        state: usize,
        expected: usize,
        found: usize,
    },
}
