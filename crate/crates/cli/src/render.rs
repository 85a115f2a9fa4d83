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
//! SVG rendering of a scene and a plan's object motions.

use segman_core::geometry::{Rect, Vec2};
use segman_core::scene::{Phase, Plan, Scene};
use std::fmt::Write;

const SCALE: f64 = 50.0;
/// Waypoints between arrowheads along a trajectory.
const ARROW_EVERY: usize = 10;
const GOAL_PATH: &str = "#1a9e1a";
const RELOCATION_PATH: &str = "#30c8c0";

struct Frame {
    bounds: Rect,
}

impl Frame {
    fn x(&self, x: f64) -> f64 {
        (x - self.bounds.min.x) * SCALE
    }

    fn y(&self, y: f64) -> f64 {
        (self.bounds.max.y - y) * SCALE
    }

    fn rect(&self, r: &Rect) -> (f64, f64, f64, f64) {
        (
            self.x(r.min.x),
            self.y(r.max.y),
            r.width() * SCALE,
            r.height() * SCALE,
        )
    }
}

fn arrowhead(out: &mut String, f: &Frame, at: Vec2, dir: Vec2, color: &str) {
    let d = dir.normalized();
    if d == Vec2::ZERO {
        return;
    }
    // in screen space the y axis is flipped
    let (tx, ty) = (f.x(at.x), f.y(at.y));
    let (dx, dy) = (d.x, -d.y);
    let (len, half) = (9.0, 4.5);
    let (bx, by) = (tx - dx * len, ty - dy * len);
    let (px, py) = (-dy * half, dx * half);
    let _ = writeln!(
        out,
        r#"<polygon class="arrowhead" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{color}"/>"#,
        tx,
        ty,
        bx + px,
        by + py,
        bx - px,
        by - py
    );
}

/// Deterministic SVG of `scene` with the object trajectories of `plan`.
pub fn render_svg(scene: &Scene, plan: &Plan) -> String {
    let f = Frame {
        bounds: scene.bounds,
    };
    let (w, h) = (scene.bounds.width() * SCALE, scene.bounds.height() * SCALE);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect class="bounds" x="0" y="0" width="{w:.2}" height="{h:.2}" fill="white" stroke="black" stroke-width="2"/>"#
    );
    for wall in &scene.walls {
        let (x, y, rw, rh) = f.rect(wall);
        let _ = writeln!(
            out,
            r##"<rect class="wall" x="{x:.2}" y="{y:.2}" width="{rw:.2}" height="{rh:.2}" fill="#404040"/>"##
        );
    }
    let gside = scene.objects[scene.goal_object].side;
    let (x, y, rw, rh) = f.rect(&Rect::square(scene.goal, gside));
    let _ = writeln!(
        out,
        r#"<rect class="goal" x="{x:.2}" y="{y:.2}" width="{rw:.2}" height="{rh:.2}" fill="none" stroke="red" stroke-width="3"/>"#
    );
    for (i, o) in scene.objects.iter().enumerate() {
        let (x, y, rw, rh) = f.rect(&Rect::square(o.start, o.side));
        let (class, fill) = if i == scene.goal_object {
            ("goal-object", "#2050e0")
        } else {
            ("object", "white")
        };
        let _ = writeln!(
            out,
            r#"<rect class="{class}" x="{x:.2}" y="{y:.2}" width="{rw:.2}" height="{rh:.2}" fill="{fill}" stroke="black" stroke-width="1.5"/>"#
        );
    }
    let _ = writeln!(
        out,
        r##"<circle class="agent" cx="{:.2}" cy="{:.2}" r="{:.2}" fill="#f0d000" stroke="black" stroke-width="1"/>"##,
        f.x(scene.agent_start.x),
        f.y(scene.agent_start.y),
        scene.agent_radius * SCALE
    );
    for seg in plan.segments.iter().filter(|s| s.phase == Phase::Place) {
        let pts: Vec<Vec2> = seg.states.iter().map(|c| c.objects[seg.object]).collect();
        if pts.len() < 2 {
            continue;
        }
        let (class, color) = if seg.object == scene.goal_object {
            ("goal-path", GOAL_PATH)
        } else {
            ("relocation-path", RELOCATION_PATH)
        };
        let mut coords = String::new();
        for (k, p) in pts.iter().enumerate() {
            if k > 0 {
                coords.push(' ');
            }
            let _ = write!(coords, "{:.2},{:.2}", f.x(p.x), f.y(p.y));
        }
        let _ = writeln!(
            out,
            r#"<polyline class="{class}" points="{coords}" fill="none" stroke="{color}" stroke-width="3"/>"#
        );
        for k in (ARROW_EVERY..pts.len()).step_by(ARROW_EVERY) {
            arrowhead(&mut out, &f, pts[k], pts[k] - pts[k - 1], color);
        }
        let end = pts[pts.len() - 1];
        if let Some(w) = pts.windows(2).rev().find(|w| (w[1] - w[0]).norm() > 1e-9) {
            arrowhead(&mut out, &f, end, w[1] - w[0], color);
        }
    }
    out.push_str("</svg>\n");
    out
}
