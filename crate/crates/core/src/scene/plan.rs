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
use super::{Attachment, Configuration, Scene};
use crate::error::PlanError;
use crate::geometry::Vec2;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Pick,
    Place,
}

/// Time-ordered states for one pick or one place of `object`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanSegment {
    pub phase: Phase,
    pub object: usize,
    pub states: Vec<Configuration>,
    pub dt: f64,
}

impl PlanSegment {
    pub fn first(&self) -> &Configuration {
        &self.states[0]
    }

    pub fn last(&self) -> &Configuration {
        self.states.last().expect("segments are never empty")
    }
}

/// Concatenation of pick and place segments.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Plan {
    pub segments: Vec<PlanSegment>,
}

impl Plan {
    pub fn new() -> Self {
        Plan::default()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Number of pick segments; every pick is paired with a place.
    pub fn pnp_count(&self) -> usize {
        self.segments
            .iter()
            .filter(|s| s.phase == Phase::Pick)
            .count()
    }

    pub fn final_config(&self) -> Option<&Configuration> {
        self.segments.last().map(|s| s.last())
    }

    pub fn extend(&mut self, other: Plan) {
        self.segments.extend(other.segments);
    }

    pub fn to_file(&self, scene: &Scene) -> PlanFile {
        PlanFile {
            object_ids: scene.objects.iter().map(|o| o.id.clone()).collect(),
            segments: self.segments_to_file(scene),
        }
    }

    pub fn segments_to_file(&self, scene: &Scene) -> Vec<SegmentFile> {
        self.segments
            .iter()
            .map(|seg| SegmentFile {
                phase: seg.phase,
                object: scene.objects[seg.object].id.clone(),
                dt: seg.dt,
                states: seg
                    .states
                    .iter()
                    .map(|c| StateFile {
                        agent: c.agent,
                        objects: c.objects.clone(),
                        attached: c.attachment.map(|a| AttachedFile {
                            object: scene.objects[a.object].id.clone(),
                            offset: a.offset,
                        }),
                    })
                    .collect(),
            })
            .collect()
    }
}

/// Serialized plan: object ids in scene order plus the segments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub object_ids: Vec<String>,
    pub segments: Vec<SegmentFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentFile {
    pub phase: Phase,
    pub object: String,
    pub dt: f64,
    pub states: Vec<StateFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub agent: Vec2,
    pub objects: Vec<Vec2>,
    pub attached: Option<AttachedFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttachedFile {
    pub object: String,
    pub offset: Vec2,
}

impl PlanFile {
    /// Resolves ids against `scene`; the id list must equal the scene's.
    pub fn into_plan(self, scene: &Scene) -> Result<Plan, PlanError> {
        segments_from_file(&self.object_ids, self.segments, scene)
    }
}

pub(crate) fn segments_from_file(
    object_ids: &[String],
    segments: Vec<SegmentFile>,
    scene: &Scene,
) -> Result<Plan, PlanError> {
    let scene_ids: Vec<String> = scene.objects.iter().map(|o| o.id.clone()).collect();
    if object_ids != scene_ids.as_slice() {
        return Err(PlanError::IdMismatch {
            plan: object_ids.to_vec(),
            scene: scene_ids,
        });
    }
    let mut out = Vec::with_capacity(segments.len());
    for (si, seg) in segments.into_iter().enumerate() {
        let lookup = |id: &str| {
            scene
                .object_index(id)
                .ok_or_else(|| PlanError::UnknownObject {
                    segment: si,
                    id: id.to_string(),
                })
        };
        let object = lookup(&seg.object)?;
        let mut states = Vec::with_capacity(seg.states.len());
        for (ti, st) in seg.states.into_iter().enumerate() {
            if st.objects.len() != scene.objects.len() {
                return Err(PlanError::PoseCount {
                    segment: si,
                    state: ti,
                    expected: scene.objects.len(),
                    found: st.objects.len(),
                });
            }
            let attachment = match st.attached {
                Some(a) => Some(Attachment {
                    object: lookup(&a.object)?,
                    offset: a.offset,
                }),
                None => None,
            };
            states.push(Configuration {
                agent: st.agent,
                objects: st.objects,
                attachment,
            });
        }
        out.push(PlanSegment {
            phase: seg.phase,
            object,
            states,
            dt: seg.dt,
        });
    }
    Ok(Plan { segments: out })
}
