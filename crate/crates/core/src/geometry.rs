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
//! Planar geometry: points, axis-aligned rectangles, discs and their signed
//! distances.

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// A point or vector in the plane. Serializes as `[x, y]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Unit vector, or zero for a (near) zero input.
    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        if n > 1e-300 {
            self * (1.0 / n)
        } else {
            Vec2::ZERO
        }
    }

    pub fn lerp(self, other: Vec2, s: f64) -> Vec2 {
        self + (other - self) * s
    }

    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Axis-aligned rectangle. Serializes as `[x0, y0, x1, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect {
            min: Vec2::new(x0.min(x1), y0.min(y1)),
            max: Vec2::new(x0.max(x1), y0.max(y1)),
        }
    }

    pub fn from_center_half(center: Vec2, half: Vec2) -> Self {
        Rect {
            min: center - half,
            max: center + half,
        }
    }

    /// Square of side `side` centered on `center`.
    pub fn square(center: Vec2, side: f64) -> Self {
        Self::from_center_half(center, Vec2::new(side * 0.5, side * 0.5))
    }

    pub fn center(&self) -> Vec2 {
        (self.min + self.max) * 0.5
    }

    pub fn half(&self) -> Vec2 {
        (self.max - self.min) * 0.5
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// True when `other` lies entirely inside `self`.
    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.min.x >= self.min.x
            && other.min.y >= self.min.y
            && other.max.x <= self.max.x
            && other.max.y <= self.max.y
    }

    pub fn inflate(&self, by: f64) -> Rect {
        Rect {
            min: self.min - Vec2::new(by, by),
            max: self.max + Vec2::new(by, by),
        }
    }

    pub fn translate(&self, by: Vec2) -> Rect {
        Rect {
            min: self.min + by,
            max: self.max + by,
        }
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            min: Vec2::new(self.min.x.min(other.min.x), self.min.y.min(other.min.y)),
            max: Vec2::new(self.max.x.max(other.max.x), self.max.y.max(other.max.y)),
        }
    }

    /// True when the interiors intersect.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.min.x < other.max.x
            && other.min.x < self.max.x
            && self.min.y < other.max.y
            && other.min.y < self.max.y
    }

    pub fn is_valid(&self) -> bool {
        self.min.is_finite()
            && self.max.is_finite()
            && self.min.x < self.max.x
            && self.min.y < self.max.y
    }
}

impl From<[f64; 4]> for Rect {
    fn from(a: [f64; 4]) -> Self {
        Rect::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Rect> for [f64; 4] {
    fn from(r: Rect) -> Self {
        [r.min.x, r.min.y, r.max.x, r.max.y]
    }
}

/// A body footprint: a disc or an axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Disc { center: Vec2, radius: f64 },
    Rect(Rect),
}

impl Shape {
    pub fn disc(center: Vec2, radius: f64) -> Self {
        Shape::Disc { center, radius }
    }

    pub fn square(center: Vec2, side: f64) -> Self {
        Shape::Rect(Rect::square(center, side))
    }

    pub fn center(&self) -> Vec2 {
        match self {
            Shape::Disc { center, .. } => *center,
            Shape::Rect(r) => r.center(),
        }
    }

    pub fn translate(&self, by: Vec2) -> Shape {
        match *self {
            Shape::Disc { center, radius } => Shape::Disc {
                center: center + by,
                radius,
            },
            Shape::Rect(r) => Shape::Rect(r.translate(by)),
        }
    }

    /// Tight axis-aligned bounding box.
    pub fn aabb(&self) -> Rect {
        match *self {
            Shape::Disc { center, radius } => {
                Rect::from_center_half(center, Vec2::new(radius, radius))
            }
            Shape::Rect(r) => r,
        }
    }
}

/// Signed distance from point `p` to a box of half extents `half` centered at
/// the origin, with its gradient with respect to `p`.
fn point_box_sd(p: Vec2, half: Vec2) -> (f64, Vec2) {
    let sx = if p.x >= 0.0 { 1.0 } else { -1.0 };
    let sy = if p.y >= 0.0 { 1.0 } else { -1.0 };
    let qx = p.x.abs() - half.x;
    let qy = p.y.abs() - half.y;
    if qx > 0.0 || qy > 0.0 {
        let vx = qx.max(0.0);
        let vy = qy.max(0.0);
        let d = vx.hypot(vy);
        (d, Vec2::new(sx * vx / d, sy * vy / d))
    } else if qx > qy {
        (qx, Vec2::new(sx, 0.0))
    } else {
        (qy, Vec2::new(0.0, sy))
    }
}

/// Signed distance between two shapes together with its gradient with
/// respect to a rigid translation of `a` (the gradient with respect to `b`
/// is its negation).
///
/// Positive when separated, zero when touching, negative when overlapping;
/// the negative value is the depth of the minimal separating translation.
pub fn signed_distance_grad(a: &Shape, b: &Shape) -> (f64, Vec2) {
    match (a, b) {
        (
            Shape::Disc {
                center: ca,
                radius: ra,
            },
            Shape::Disc {
                center: cb,
                radius: rb,
            },
        ) => {
            let d = *ca - *cb;
            let n = d.norm();
            let g = if n > 1e-300 {
                d * (1.0 / n)
            } else {
                Vec2::new(1.0, 0.0)
            };
            (n - ra - rb, g)
        }
        (Shape::Disc { center, radius }, Shape::Rect(r)) => {
            let (d, g) = point_box_sd(*center - r.center(), r.half());
            (d - radius, g)
        }
        (Shape::Rect(r), Shape::Disc { center, radius }) => {
            let (d, g) = point_box_sd(*center - r.center(), r.half());
            (d - radius, -g)
        }
        (Shape::Rect(ra), Shape::Rect(rb)) => {
            point_box_sd(ra.center() - rb.center(), ra.half() + rb.half())
        }
    }
}

/// Signed distance between two shapes; symmetric in its arguments.
pub fn signed_distance(a: &Shape, b: &Shape) -> f64 {
    signed_distance_grad(a, b).0
}

/// Signed distance from `shape` to the complement of `bounds`: positive while
/// the shape lies strictly inside, negative once it pokes out. The gradient is
/// with respect to a translation of the shape.
pub fn bounds_distance_grad(shape: &Shape, bounds: &Rect) -> (f64, Vec2) {
    let bb = shape.aabb();
    let cands = [
        (bb.min.x - bounds.min.x, Vec2::new(1.0, 0.0)),
        (bounds.max.x - bb.max.x, Vec2::new(-1.0, 0.0)),
        (bb.min.y - bounds.min.y, Vec2::new(0.0, 1.0)),
        (bounds.max.y - bb.max.y, Vec2::new(0.0, -1.0)),
    ];
    cands
        .into_iter()
        .fold((f64::INFINITY, Vec2::ZERO), |acc, c| {
            if c.0 < acc.0 {
                c
            } else {
                acc
            }
        })
}

pub fn bounds_distance(shape: &Shape, bounds: &Rect) -> f64 {
    bounds_distance_grad(shape, bounds).0
}

/// Distance from point `p` to the segment `a`-`b`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sq();
    if len2 <= 0.0 {
        return p.distance(a);
    }
    let s = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * s)
}

/// Closest point on the boundary-or-interior of `r` to `p`.
pub fn closest_point_on_rect(r: &Rect, p: Vec2) -> Vec2 {
    Vec2::new(p.x.clamp(r.min.x, r.max.x), p.y.clamp(r.min.y, r.max.y))
}

/// Distance between the segment `a`-`b` and the rectangle; zero when they
/// intersect.
pub fn segment_rect_distance(a: Vec2, b: Vec2, r: &Rect) -> f64 {
    // clip the segment against both slabs
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let mut hit = true;
    for (p, dp, lo, hi) in [(a.x, d.x, r.min.x, r.max.x), (a.y, d.y, r.min.y, r.max.y)] {
        if dp.abs() < 1e-15 {
            if p < lo || p > hi {
                hit = false;
            }
        } else {
            let (mut u0, mut u1) = ((lo - p) / dp, (hi - p) / dp);
            if u0 > u1 {
                std::mem::swap(&mut u0, &mut u1);
            }
            t0 = t0.max(u0);
            t1 = t1.min(u1);
        }
    }
    if hit && t0 <= t1 {
        return 0.0;
    }
    let corners = [
        r.min,
        Vec2::new(r.max.x, r.min.y),
        r.max,
        Vec2::new(r.min.x, r.max.y),
    ];
    let from_ends = [a, b]
        .into_iter()
        .map(|p| p.distance(closest_point_on_rect(r, p)));
    let from_corners = corners.into_iter().map(|c| point_segment_distance(c, a, b));
    from_ends.chain(from_corners).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn unit_squares_gap() {
        let a = Shape::square(Vec2::new(0.0, 0.0), 1.0);
        let b = Shape::square(Vec2::new(3.0, 0.0), 1.0);
        assert_abs_diff_eq!(signed_distance(&a, &b), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn disc_inside_square_is_negative() {
        let a = Shape::disc(Vec2::ZERO, 0.5);
        let b = Shape::square(Vec2::ZERO, 1.0);
        assert!(signed_distance(&a, &b) < 0.0);
    }

    #[test]
    fn disc_beside_square() {
        let a = Shape::disc(Vec2::new(2.0, 0.0), 1.0);
        let b = Shape::square(Vec2::ZERO, 1.0);
        assert_abs_diff_eq!(signed_distance(&a, &b), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn diagonal_corner_distance() {
        let a = Shape::disc(Vec2::new(1.5, 1.5), 0.5);
        let b = Shape::square(Vec2::ZERO, 2.0);
        assert_abs_diff_eq!(
            signed_distance(&a, &b),
            0.5f64.hypot(0.5) - 0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn bounds_distance_inside_and_out() {
        let bounds = Rect::new(0.0, 0.0, 10.0, 10.0);
        assert_abs_diff_eq!(
            bounds_distance(&Shape::disc(Vec2::new(1.0, 5.0), 0.25), &bounds),
            0.75
        );
        assert!(bounds_distance(&Shape::square(Vec2::new(9.9, 5.0), 0.5), &bounds) < 0.0);
    }

    fn arb_shape() -> impl Strategy<Value = Shape> {
        prop_oneof![
            (-5.0..5.0f64, -5.0..5.0f64, 0.05..2.0f64)
                .prop_map(|(x, y, r)| Shape::disc(Vec2::new(x, y), r)),
            (-5.0..5.0f64, -5.0..5.0f64, 0.05..2.0f64, 0.05..2.0f64).prop_map(|(x, y, w, h)| {
                Shape::Rect(Rect::from_center_half(Vec2::new(x, y), Vec2::new(w, h)))
            }),
        ]
    }

    proptest! {
        #[test]
        fn signed_distance_is_symmetric(a in arb_shape(), b in arb_shape()) {
            let ab = signed_distance(&a, &b);
            let ba = signed_distance(&b, &a);
            prop_assert!((ab - ba).abs() < 1e-12);
        }

        #[test]
        fn gradient_matches_translation(a in arb_shape(), b in arb_shape()) {
            let (d, g) = signed_distance_grad(&a, &b);
            let h = 1e-6;
            let dx = (signed_distance(&a.translate(Vec2::new(h, 0.0)), &b)
                - signed_distance(&a.translate(Vec2::new(-h, 0.0)), &b)) / (2.0 * h);
            let dy = (signed_distance(&a.translate(Vec2::new(0.0, h)), &b)
                - signed_distance(&a.translate(Vec2::new(0.0, -h)), &b)) / (2.0 * h);
            // kinks of the max() branch are measure zero; skip points straddling one
            if d.abs() > 1e-4 && !near_kink(&a, &b) {
                prop_assert!((dx - g.x).abs() < 1e-4 && (dy - g.y).abs() < 1e-4);
            }
        }
    }

    fn near_kink(a: &Shape, b: &Shape) -> bool {
        let h = 1e-5;
        let g0 = signed_distance_grad(a, b).1;
        [
            Vec2::new(h, 0.0),
            Vec2::new(-h, 0.0),
            Vec2::new(0.0, h),
            Vec2::new(0.0, -h),
        ]
        .iter()
        .any(|&t| (signed_distance_grad(&a.translate(t), b).1 - g0).norm() > 1e-3)
    }

    #[test]
    fn segment_rect_distances() {
        let r = Rect::new(0.0, 0.0, 1.0, 1.0);
        assert_eq!(
            segment_rect_distance(Vec2::new(-1.0, 0.5), Vec2::new(2.0, 0.5), &r),
            0.0
        );
        assert_abs_diff_eq!(
            segment_rect_distance(Vec2::new(-1.0, 2.0), Vec2::new(2.0, 2.0), &r),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            segment_rect_distance(Vec2::new(2.0, 3.0), Vec2::new(4.0, 1.0), &r),
            2.0f64.sqrt() * 1.5,
            epsilon = 1e-12
        );
        assert_eq!(
            segment_rect_distance(Vec2::new(0.5, 0.5), Vec2::new(0.6, 0.5), &r),
            0.0
        );
    }

    proptest! {
        #[test]
        fn segment_distance_matches_dense_sampling(ax in -3.0..3.0f64, ay in -3.0..3.0f64, bx in -3.0..3.0f64, by in -3.0..3.0f64) {
            let r = Rect::new(0.0, 0.0, 1.0, 0.5);
            let (a, b) = (Vec2::new(ax, ay), Vec2::new(bx, by));
            let sampled = (0..=2000)
                .map(|k| {
                    let p = a.lerp(b, k as f64 / 2000.0);
                    p.distance(closest_point_on_rect(&r, p))
                })
                .fold(f64::INFINITY, f64::min);
            let exact = segment_rect_distance(a, b, &r);
            prop_assert!(exact <= sampled + 1e-12);
            prop_assert!(sampled - exact <= a.distance(b) / 2000.0 + 1e-9);
        }
    }
}
