//! Small fixed-size vector types and planar predicates.

use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[inline]
pub const fn p2(x: f64, y: f64) -> Point2 {
    Point2 { x, y }
}

#[inline]
pub const fn p3(x: f64, y: f64, z: f64) -> Point3 {
    Point3 { x, y, z }
}

impl Point2 {
    #[inline]
    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn dist(self, o: Self) -> f64 {
        (self - o).norm()
    }

    /// Counterclockwise perpendicular.
    #[inline]
    pub fn perp(self) -> Self {
        p2(-self.y, self.x)
    }

    #[inline]
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self / n
        } else {
            self
        }
    }

    #[inline]
    pub fn lerp(self, o: Self, s: f64) -> Self {
        self + (o - self) * s
    }

    #[inline]
    pub fn lift(self, z: f64) -> Point3 {
        p3(self.x, self.y, z)
    }
}

impl Point3 {
    #[inline]
    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        p3(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn dist(self, o: Self) -> f64 {
        (self - o).norm()
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self / n
        } else {
            self
        }
    }

    #[inline]
    pub fn xy(self) -> Point2 {
        p2(self.x, self.y)
    }
}

macro_rules! impl_vec_ops {
    ($t:ident, $($f:ident),+) => {
        impl Add for $t {
            type Output = $t;
            #[inline]
            fn add(self, o: $t) -> $t { $t { $($f: self.$f + o.$f),+ } }
        }
        impl Sub for $t {
            type Output = $t;
            #[inline]
            fn sub(self, o: $t) -> $t { $t { $($f: self.$f - o.$f),+ } }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            #[inline]
            fn mul(self, s: f64) -> $t { $t { $($f: self.$f * s),+ } }
        }
        impl Div<f64> for $t {
            type Output = $t;
            #[inline]
            fn div(self, s: f64) -> $t { $t { $($f: self.$f / s),+ } }
        }
        impl Neg for $t {
            type Output = $t;
            #[inline]
            fn neg(self) -> $t { $t { $($f: -self.$f),+ } }
        }
        impl AddAssign for $t {
            #[inline]
            fn add_assign(&mut self, o: $t) { $(self.$f += o.$f;)+ }
        }
        impl SubAssign for $t {
            #[inline]
            fn sub_assign(&mut self, o: $t) { $(self.$f -= o.$f;)+ }
        }
        impl MulAssign<f64> for $t {
            #[inline]
            fn mul_assign(&mut self, s: f64) { $(self.$f *= s;)+ }
        }
    };
}

impl_vec_ops!(Point2, x, y);
impl_vec_ops!(Point3, x, y, z);

/// Twice the signed area of triangle `abc`; positive when counterclockwise.
#[inline]
pub fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

/// Signed area of a closed polygon (positive when counterclockwise).
pub fn signed_area(pts: &[Point2]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        s += pts[i].cross(pts[(i + 1) % n]);
    }
    0.5 * s
}

/// Even-odd point-in-polygon test by ray casting.
pub fn point_in_polygon(p: Point2, pts: &[Point2]) -> bool {
    let n = pts.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (pts[i], pts[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from `p` to the segment `ab`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let d = b - a;
    let l2 = d.dot(d);
    if l2 == 0.0 {
        return p.dist(a);
    }
    let s = ((p - a).dot(d) / l2).clamp(0.0, 1.0);
    p.dist(a + d * s)
}

/// Minimum distance between two closed segments.
pub fn segment_segment_distance(a0: Point2, a1: Point2, b0: Point2, b1: Point2) -> f64 {
    if segments_cross_strictly(a0, a1, b0, b1) {
        return 0.0;
    }
    point_segment_distance(a0, b0, b1)
        .min(point_segment_distance(a1, b0, b1))
        .min(point_segment_distance(b0, a0, a1))
        .min(point_segment_distance(b1, a0, a1))
}

fn segments_cross_strictly(a0: Point2, a1: Point2, b0: Point2, b1: Point2) -> bool {
    let d1 = orient(a0, a1, b0);
    let d2 = orient(a0, a1, b1);
    let d3 = orient(b0, b1, a0);
    let d4 = orient(b0, b1, a1);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Parameters `(s, u)` with `a0 + s (a1 - a0) = b0 + u (b1 - b0)` for non-parallel segments.
pub fn line_intersection_params(a0: Point2, a1: Point2, b0: Point2, b1: Point2) -> Option<(f64, f64)> {
    let r = a1 - a0;
    let q = b1 - b0;
    let den = r.cross(q);
    if den == 0.0 {
        return None;
    }
    let w = b0 - a0;
    Some((w.cross(q) / den, w.cross(r) / den))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox {
    pub min: Point2,
    pub max: Point2,
}

impl BoundingBox {
    pub fn empty() -> Self {
        BoundingBox {
            min: p2(f64::INFINITY, f64::INFINITY),
            max: p2(f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn of(pts: &[Point2]) -> Self {
        let mut b = Self::empty();
        for &p in pts {
            b.include(p);
        }
        b
    }

    pub fn include(&mut self, p: Point2) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn merge(&mut self, o: &BoundingBox) {
        self.include(o.min);
        self.include(o.max);
    }

    pub fn diagonal(&self) -> f64 {
        self.min.dist(self.max)
    }

    pub fn overlaps(&self, o: &BoundingBox, pad: f64) -> bool {
        self.min.x - pad <= o.max.x
            && o.min.x - pad <= self.max.x
            && self.min.y - pad <= o.max.y
            && o.min.y - pad <= self.max.y
    }
}

/// Interior angle at `b` of the corner `a b c`, in `[0, pi]`.
pub fn corner_angle3(a: Point3, b: Point3, c: Point3) -> f64 {
    let u = a - b;
    let v = c - b;
    u.cross(v).norm().atan2(u.dot(v))
}

/// Cotangent of the angle at `b` of the corner `a b c`.
pub fn corner_cot3(a: Point3, b: Point3, c: Point3) -> f64 {
    let u = a - b;
    let v = c - b;
    let s = u.cross(v).norm();
    u.dot(v) / s
}

pub fn triangle_area3(a: Point3, b: Point3, c: Point3) -> f64 {
    0.5 * (b - a).cross(c - a).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polygon_area_and_containment() {
        let sq = [p2(0.0, 0.0), p2(2.0, 0.0), p2(2.0, 2.0), p2(0.0, 2.0)];
        assert_eq!(signed_area(&sq), 4.0);
        assert!(point_in_polygon(p2(1.0, 1.0), &sq));
        assert!(!point_in_polygon(p2(3.0, 1.0), &sq));
    }

    #[test]
    fn segment_params() {
        let (s, u) =
            line_intersection_params(p2(0.0, 0.0), p2(2.0, 0.0), p2(1.0, -1.0), p2(1.0, 1.0)).unwrap();
        assert!((s - 0.5).abs() < 1e-15 && (u - 0.5).abs() < 1e-15);
        assert!(line_intersection_params(p2(0.0, 0.0), p2(1.0, 0.0), p2(0.0, 1.0), p2(1.0, 1.0)).is_none());
    }

    #[test]
    fn segment_distance_disjoint() {
        let d = segment_segment_distance(p2(0.0, 0.0), p2(1.0, 0.0), p2(0.0, 1.0), p2(1.0, 2.0));
        assert!((d - 1.0).abs() < 1e-15);
    }
}
