//! Curve collections and the signed planar subdivision they induce.
//!
//! Two families of disjoint closed polylines, `A` and `B`, are overlaid. Their
//! transversal crossings become vertices of a half-edge subdivision of the
//! plane; every face carries the set of curves containing it and a sign given
//! by the parity of that set, so the unbounded face is `Minus` and adjacent
//! faces alternate.
//!
//! Curves without crossings receive one synthetic vertex and a single loop
//! edge, which keeps the subdivision a valid cell complex.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;


use crate::error::{Error, Result};
use crate::geom::{
    line_intersection_params, p2, point_in_polygon, point_segment_distance, segment_segment_distance,
    signed_area, BoundingBox, Point2,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    A,
    B,
}

impl Family {
    pub fn other(self) -> Family {
        match self {
            Family::A => Family::B,
            Family::B => Family::A,
        }
    }
}

/// Input description of a single curve before sampling.
#[derive(Clone, Debug, PartialEq)]
pub enum CurveShape {
    Polyline(Vec<Point2>),
    Circle { center: Point2, r: f64, samples: usize },
    Ellipse { center: Point2, rx: f64, ry: f64, rotation: f64, samples: usize },
}

impl CurveShape {
    pub fn sample(&self) -> Vec<Point2> {
        match self {
            CurveShape::Polyline(pts) => pts.clone(),
            &CurveShape::Circle { center, r, samples } => (0..samples)
                .map(|k| {
                    let a = 2.0 * PI * k as f64 / samples as f64;
                    p2(center.x + r * a.cos(), center.y + r * a.sin())
                })
                .collect(),
            &CurveShape::Ellipse { center, rx, ry, rotation, samples } => {
                let (s, c) = rotation.sin_cos();
                (0..samples)
                    .map(|k| {
                        let a = 2.0 * PI * k as f64 / samples as f64;
                        let (x, y) = (rx * a.cos(), ry * a.sin());
                        p2(center.x + c * x - s * y, center.y + s * x + c * y)
                    })
                    .collect()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Smallest admissible crossing angle in radians.
    pub theta_min: f64,
    /// Coincidence tolerance relative to the bounding-box diagonal.
    pub eps_rel: f64,
    pub max_crossings: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { theta_min: 1e-3, eps_rel: 1e-9, max_crossings: 10_000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct JordanCurve {
    pub id: usize,
    pub family: Family,
    /// Closed polyline, counterclockwise, last point implicitly joined to the first.
    pub points: Vec<Point2>,
    pub bbox: BoundingBox,
}

impl JordanCurve {
    pub fn segment(&self, i: usize) -> (Point2, Point2) {
        let n = self.points.len();
        (self.points[i % n], self.points[(i + 1) % n])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// No right turns; collinear runs (resampled polygon sides) are allowed.
    pub fn is_convex(&self) -> bool {
        let n = self.points.len();
        (0..n).all(|i| {
            let a = self.points[i];
            let b = self.points[(i + 1) % n];
            let c = self.points[(i + 2) % n];
            let (u, v) = (b - a, c - b);
            u.cross(v) >= -1e-12 * u.norm() * v.norm()
        })
    }

    fn contains(&self, p: Point2) -> bool {
        point_in_polygon(p, &self.points)
    }
}

/// Validated curve collections `A` and `B`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSet {
    curves: Vec<JordanCurve>,
    tolerances: Tolerances,
    bbox: BoundingBox,
    eps_geo: f64,
}

impl CurveSet {
    pub fn new(a: Vec<Vec<Point2>>, b: Vec<Vec<Point2>>, tolerances: Tolerances) -> Result<Self> {
        let mut curves = Vec::with_capacity(a.len() + b.len());
        let mut bbox = BoundingBox::empty();
        let tagged = a.into_iter().map(|p| (Family::A, p)).chain(b.into_iter().map(|p| (Family::B, p)));
        for (id, (family, mut points)) in tagged.enumerate() {
            if points.len() >= 2 && points.first() == points.last() {
                points.pop();
            }
            if points.len() < 3 {
                return Err(Error::InvalidCurve { curve: id, reason: "closed polyline needs at least 3 points" });
            }
            if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
                return Err(Error::InvalidCurve { curve: id, reason: "non-finite coordinate" });
            }
            if signed_area(&points) < 0.0 {
                points.reverse();
            }
            let cb = BoundingBox::of(&points);
            bbox.merge(&cb);
            curves.push(JordanCurve { id, family, points, bbox: cb });
        }
        let eps_geo = tolerances.eps_rel * bbox.diagonal().max(f64::MIN_POSITIVE);
        let set = CurveSet { curves, tolerances, bbox, eps_geo };
        for c in &set.curves {
            set.check_simple(c)?;
        }
        for (i, ci) in set.curves.iter().enumerate() {
            for cj in &set.curves[i + 1..] {
                if ci.family == cj.family && set.curves_touch(ci, cj) {
                    return Err(Error::IntraFamilyIntersection { first: ci.id, second: cj.id });
                }
            }
        }
        Ok(set)
    }

    pub fn from_shapes(a: &[CurveShape], b: &[CurveShape], tolerances: Tolerances) -> Result<Self> {
        Self::new(
            a.iter().map(CurveShape::sample).collect(),
            b.iter().map(CurveShape::sample).collect(),
            tolerances,
        )
    }

    pub fn curves(&self) -> &[JordanCurve] {
        &self.curves
    }

    pub fn curve(&self, id: usize) -> &JordanCurve {
        &self.curves[id]
    }

    pub fn family(&self, f: Family) -> impl Iterator<Item = &JordanCurve> {
        self.curves.iter().filter(move |c| c.family == f)
    }

    pub fn count(&self, f: Family) -> usize {
        self.family(f).count()
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    pub fn eps_geo(&self) -> f64 {
        self.eps_geo
    }

    /// Largest distance between two curve points.
    pub fn diameter(&self) -> f64 {
        let pts: Vec<Point2> = self.curves.iter().flat_map(|c| c.points.iter().copied()).collect();
        let mut d: f64 = 0.0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                d = d.max(pts[i].dist(pts[j]));
            }
        }
        d
    }

    pub fn all_convex(&self) -> bool {
        self.curves.iter().all(JordanCurve::is_convex)
    }

    fn check_simple(&self, c: &JordanCurve) -> Result<()> {
        let n = c.len();
        let eps = self.eps_geo;
        for i in 0..n {
            let (a0, a1) = c.segment(i);
            if a0.dist(a1) <= eps {
                return Err(Error::InvalidCurve { curve: c.id, reason: "zero-length segment" });
            }
            // Adjacent segments only share a vertex unless the polyline folds back.
            let (_, b1) = c.segment(i + 1);
            let (u, v) = (a1 - a0, b1 - a1);
            if u.cross(v).abs() <= 1e-12 * u.norm() * v.norm() && u.dot(v) < 0.0 {
                return Err(Error::SelfIntersection { curve: c.id });
            }
        }
        for i in 0..n {
            let (a0, a1) = c.segment(i);
            let ba = BoundingBox::of(&[a0, a1]);
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (b0, b1) = c.segment(j);
                if !ba.overlaps(&BoundingBox::of(&[b0, b1]), eps) {
                    continue;
                }
                if segment_segment_distance(a0, a1, b0, b1) <= eps {
                    return Err(Error::SelfIntersection { curve: c.id });
                }
            }
        }
        Ok(())
    }

    fn curves_touch(&self, ci: &JordanCurve, cj: &JordanCurve) -> bool {
        let eps = self.eps_geo;
        if !ci.bbox.overlaps(&cj.bbox, eps) {
            return false;
        }
        for i in 0..ci.len() {
            let (a0, a1) = ci.segment(i);
            let ba = BoundingBox::of(&[a0, a1]);
            if !ba.overlaps(&cj.bbox, eps) {
                continue;
            }
            for j in 0..cj.len() {
                let (b0, b1) = cj.segment(j);
                if ba.overlaps(&BoundingBox::of(&[b0, b1]), eps) && segment_segment_distance(a0, a1, b0, b1) <= eps {
                    return true;
                }
            }
        }
        false
    }
}

/// Position along a curve: segment index plus fraction in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveParam {
    pub segment: usize,
    pub frac: f64,
}

impl CurveParam {
    fn scalar(self) -> f64 {
        self.segment as f64 + self.frac
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossingPoint {
    pub id: usize,
    pub position: Point2,
    pub curve_a: usize,
    pub curve_b: usize,
    /// Angle between the forward directions of the two curves, in `(0, pi)`.
    pub angle: f64,
    pub param_a: CurveParam,
    pub param_b: CurveParam,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum LocKey {
    Vertex(usize),
    Segment(usize),
}

#[derive(Clone, Copy)]
struct Loc {
    key: LocKey,
    param: CurveParam,
}

fn snap(c: &JordanCurve, seg: usize, s: f64, eps: f64) -> Loc {
    let n = c.len();
    let (a0, a1) = c.segment(seg);
    let len = a0.dist(a1);
    if s * len <= eps {
        Loc { key: LocKey::Vertex(seg), param: CurveParam { segment: seg, frac: 0.0 } }
    } else if (1.0 - s) * len <= eps {
        let v = (seg + 1) % n;
        Loc { key: LocKey::Vertex(v), param: CurveParam { segment: v, frac: 0.0 } }
    } else {
        Loc { key: LocKey::Segment(seg), param: CurveParam { segment: seg, frac: s } }
    }
}

/// Forward and backward unit directions of a curve leaving a point.
fn rays(c: &JordanCurve, p: CurveParam) -> (Point2, Point2) {
    let n = c.len();
    let (a0, a1) = c.segment(p.segment);
    let fwd = (a1 - a0).normalized();
    if p.frac == 0.0 {
        let (b0, b1) = c.segment(p.segment + n - 1);
        (fwd, (b0 - b1).normalized())
    } else {
        (fwd, -fwd)
    }
}

fn ray_angle(u: Point2, v: Point2) -> f64 {
    u.cross(v).abs().atan2(u.dot(v))
}

/// Counterclockwise turn from `u` to `v` in `[0, 2pi)`.
pub(crate) fn ccw_angle(u: Point2, v: Point2) -> f64 {
    let a = u.cross(v).atan2(u.dot(v));
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

fn param_point(c: &JordanCurve, p: CurveParam) -> Point2 {
    let (a0, a1) = c.segment(p.segment);
    a0.lerp(a1, p.frac)
}

fn arc_positions(c: &JordanCurve) -> Vec<f64> {
    let mut acc = Vec::with_capacity(c.len() + 1);
    let mut s = 0.0;
    acc.push(0.0);
    for i in 0..c.len() {
        let (a, b) = c.segment(i);
        s += a.dist(b);
        acc.push(s);
    }
    acc
}

/// All transversal crossings between `A` and `B` curves, in canonical order
/// (by `A` curve, then position along it).
pub fn compute_crossings(curves: &CurveSet) -> Result<Vec<CrossingPoint>> {
    let eps = curves.eps_geo;
    let tol = curves.tolerances;
    let mut contacts: BTreeMap<(usize, LocKey, usize, LocKey), (Loc, Loc)> = BTreeMap::new();
    for ca in curves.family(Family::A) {
        for cb in curves.family(Family::B) {
            if !ca.bbox.overlaps(&cb.bbox, eps) {
                continue;
            }
            for i in 0..ca.len() {
                let (a0, a1) = ca.segment(i);
                let ba = BoundingBox::of(&[a0, a1]);
                if !ba.overlaps(&cb.bbox, eps) {
                    continue;
                }
                let la = a0.dist(a1);
                for j in 0..cb.len() {
                    let (b0, b1) = cb.segment(j);
                    if !ba.overlaps(&BoundingBox::of(&[b0, b1]), eps) {
                        continue;
                    }
                    let lb = b0.dist(b1);
                    let dir_a = (a1 - a0) / la;
                    let dir_b = (b1 - b0) / lb;
                    if ray_angle(dir_a, dir_b).min(PI - ray_angle(dir_a, dir_b)) < 1e-12 {
                        if segment_segment_distance(a0, a1, b0, b1) <= eps {
                            return Err(Error::TangentialContact { curve_a: ca.id, curve_b: cb.id, x: a0.x, y: a0.y });
                        }
                        continue;
                    }
                    let Some((s, u)) = line_intersection_params(a0, a1, b0, b1) else { continue };
                    if s * la < -eps || (s - 1.0) * la > eps || u * lb < -eps || (u - 1.0) * lb > eps {
                        continue;
                    }
                    let la_loc = snap(ca, i, s.clamp(0.0, 1.0), eps);
                    let lb_loc = snap(cb, j, u.clamp(0.0, 1.0), eps);
                    contacts.entry((ca.id, la_loc.key, cb.id, lb_loc.key)).or_insert((la_loc, lb_loc));
                }
            }
        }
    }

    let mut out = Vec::new();
    for ((ia, _, ib, _), (la, lb)) in contacts {
        let (ca, cb) = (curves.curve(ia), curves.curve(ib));
        let position = param_point(ca, la.param);
        let (af, ab) = rays(ca, la.param);
        let (bf, bb) = rays(cb, lb.param);
        let tangential = Error::TangentialContact { curve_a: ia, curve_b: ib, x: position.x, y: position.y };
        // The B rays must separate the two A rays around the contact point.
        let sector = ccw_angle(af, ab);
        let side = |r: Point2| ccw_angle(af, r) < sector;
        if side(bf) == side(bb) {
            return Err(tangential);
        }
        let min_angle = [af, ab]
            .iter()
            .flat_map(|&x| [bf, bb].map(move |y| ray_angle(x, y)))
            .fold(f64::INFINITY, f64::min);
        let angle = ray_angle(af, bf);
        if min_angle < tol.theta_min || angle < tol.theta_min || angle > PI - tol.theta_min {
            return Err(tangential);
        }
        out.push(CrossingPoint { id: 0, position, curve_a: ia, curve_b: ib, angle, param_a: la.param, param_b: lb.param });
    }
    if out.len() > tol.max_crossings {
        return Err(Error::TooManyCrossings { found: out.len(), max: tol.max_crossings });
    }

    // Canonical order along each A curve; reject crossings that nearly coincide along any curve.
    let arcs: Vec<Vec<f64>> = curves.curves.iter().map(arc_positions).collect();
    let arc_of = |c: usize, p: CurveParam| {
        let a = &arcs[c];
        a[p.segment] + p.frac * (a[p.segment + 1] - a[p.segment])
    };
    out.sort_by(|x, y| {
        (x.curve_a, arc_of(x.curve_a, x.param_a))
            .partial_cmp(&(y.curve_a, arc_of(y.curve_a, y.param_a)))
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    for c in curves.curves() {
        let mut along: Vec<f64> = out
            .iter()
            .filter_map(|x| {
                if x.curve_a == c.id {
                    Some(arc_of(c.id, x.param_a))
                } else if x.curve_b == c.id {
                    Some(arc_of(c.id, x.param_b))
                } else {
                    None
                }
            })
            .collect();
        along.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let total = *arcs[c.id].last().unwrap();
        let close = along.windows(2).any(|w| w[1] - w[0] <= eps)
            || (along.len() > 1 && along[0] + total - along[along.len() - 1] <= eps);
        if close {
            return Err(Error::NearDegenerate { curve: c.id });
        }
    }
    for (k, x) in out.iter_mut().enumerate() {
        x.id = k;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexKind {
    Crossing(usize),
    /// Inserted on a crossing-free curve.
    Synthetic(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArrVertex {
    pub position: Point2,
    pub kind: VertexKind,
    /// Outgoing half-edges sorted counterclockwise by initial direction.
    pub outgoing: Vec<usize>,
}

/// Arc of one curve between consecutive vertices along it.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrEdge {
    pub curve: usize,
    pub family: Family,
    pub tail: usize,
    pub head: usize,
    /// Polyline from tail to head following the curve's orientation.
    pub points: Vec<Point2>,
    /// Face on the left (the curve's interior side) and on the right.
    pub left_face: usize,
    pub right_face: usize,
}

/// Half-edge `2e` runs along edge `e` in curve direction, `2e + 1` against it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfEdge {
    pub edge: usize,
    pub origin: usize,
    pub twin: usize,
    pub next: usize,
    pub prev: usize,
    pub face: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegionClass {
    InsideBoth,
    OutsideBoth,
    AOnly,
    BOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArrangementFace {
    pub id: usize,
    /// Half-edge cycles with the face on their left; for bounded faces the
    /// first loop is the outer boundary.
    pub boundary_loops: Vec<Vec<usize>>,
    pub sign: Sign,
    pub is_unbounded: bool,
    /// Zero for the unbounded face.
    pub area: f64,
    pub containment: Vec<usize>,
    pub region_class: RegionClass,
    pub representative: Point2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arrangement {
    pub curves: CurveSet,
    pub crossings: Vec<CrossingPoint>,
    pub vertices: Vec<ArrVertex>,
    pub edges: Vec<ArrEdge>,
    pub half_edges: Vec<HalfEdge>,
    pub faces: Vec<ArrangementFace>,
    pub synthetic_vertices: Vec<usize>,
    /// Connected components of the union of all curves.
    pub components: usize,
}

pub const UNBOUNDED_FACE: usize = 0;

impl Arrangement {
    pub fn from_curves(curves: CurveSet) -> Result<Self> {
        let crossings = compute_crossings(&curves)?;
        build_arrangement(curves, crossings)
    }

    pub fn half_edge_points(&self, h: usize) -> Vec<Point2> {
        let e = &self.edges[h / 2];
        if h % 2 == 0 {
            e.points.clone()
        } else {
            e.points.iter().rev().copied().collect()
        }
    }

    /// Closed polygon of a half-edge cycle.
    pub fn loop_polygon(&self, cycle: &[usize]) -> Vec<Point2> {
        cycle_polygon(&self.edges, cycle)
    }

    pub fn bounded_faces(&self) -> impl Iterator<Item = &ArrangementFace> {
        self.faces.iter().filter(|f| !f.is_unbounded)
    }

    /// Outgoing half-edges at a crossing, counterclockwise; face `i` of the
    /// crossing lies between half-edges `i` and `i + 1`.
    pub fn crossing_half_edges(&self, crossing: usize) -> [usize; 4] {
        let v = &self.vertices[crossing];
        [v.outgoing[0], v.outgoing[1], v.outgoing[2], v.outgoing[3]]
    }

    pub fn crossing_faces(&self, crossing: usize) -> [usize; 4] {
        self.crossing_half_edges(crossing).map(|h| self.half_edges[h].face)
    }

    /// Unit direction of a half-edge as it leaves its origin.
    pub fn half_edge_direction(&self, h: usize) -> Point2 {
        let pts = self.half_edge_points(h);
        (pts[1] - pts[0]).normalized()
    }

    pub fn count_sign(&self, sign: Sign, class: RegionClass) -> usize {
        self.bounded_faces().filter(|f| f.sign == sign && f.region_class == class).count()
    }

    pub fn fi_minus(&self) -> usize {
        self.count_sign(Sign::Minus, RegionClass::InsideBoth)
    }

    pub fn fo_minus(&self) -> usize {
        self.count_sign(Sign::Minus, RegionClass::OutsideBoth)
    }

    /// Number of boundary loops of a face.
    pub fn face_loops(&self, face: usize) -> usize {
        self.faces[face].boundary_loops.len()
    }
}

fn polyline_between(c: &JordanCurve, from: CurveParam, to: CurveParam, eps: f64) -> Vec<Point2> {
    let n = c.len();
    let start = param_point(c, from);
    let end = param_point(c, to);
    let g0 = from.scalar();
    let mut g1 = to.scalar();
    if g1 <= g0 {
        g1 += n as f64;
    }
    let mut pts = vec![start];
    let first = g0.floor() as usize + 1;
    let mut m = first;
    while (m as f64) < g1 {
        let q = c.points[m % n];
        if q.dist(*pts.last().unwrap()) > eps {
            pts.push(q);
        }
        m += 1;
    }
    while pts.len() > 1 && pts.last().unwrap().dist(end) <= eps {
        pts.pop();
    }
    pts.push(end);
    pts
}

fn cycle_polygon(edges: &[ArrEdge], cyc: &[usize]) -> Vec<Point2> {
    let mut pts = Vec::new();
    for &h in cyc {
        let e = &edges[h / 2];
        if h % 2 == 0 {
            pts.extend_from_slice(&e.points[..e.points.len() - 1]);
        } else {
            pts.extend(e.points.iter().rev().take(e.points.len() - 1));
        }
    }
    pts
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Builds the half-edge subdivision, traces faces and assigns signs.
pub fn build_arrangement(curves: CurveSet, crossings: Vec<CrossingPoint>) -> Result<Arrangement> {
    let eps = curves.eps_geo;
    let ncurves = curves.curves.len();

    // Vertices along each curve.
    let mut vertices: Vec<ArrVertex> = crossings
        .iter()
        .map(|x| ArrVertex { position: x.position, kind: VertexKind::Crossing(x.id), outgoing: Vec::new() })
        .collect();
    let mut along: Vec<Vec<(CurveParam, usize)>> = vec![Vec::new(); ncurves];
    for x in &crossings {
        along[x.curve_a].push((x.param_a, x.id));
        along[x.curve_b].push((x.param_b, x.id));
    }
    let mut synthetic_vertices = Vec::new();
    for c in curves.curves() {
        if along[c.id].is_empty() {
            let v = vertices.len();
            vertices.push(ArrVertex { position: c.points[0], kind: VertexKind::Synthetic(c.id), outgoing: Vec::new() });
            along[c.id].push((CurveParam { segment: 0, frac: 0.0 }, v));
            synthetic_vertices.push(v);
        }
        along[c.id].sort_by(|x, y| x.0.scalar().partial_cmp(&y.0.scalar()).unwrap());
    }

    let mut edges = Vec::new();
    for c in curves.curves() {
        let list = &along[c.id];
        for k in 0..list.len() {
            let (p, v0) = list[k];
            let (q, v1) = list[(k + 1) % list.len()];
            let points = polyline_between(c, p, q, eps);
            if points.len() < 2 || (points.len() == 2 && v0 == v1) {
                return Err(Error::Subdivision(format!("degenerate arc on curve {}", c.id)));
            }
            edges.push(ArrEdge {
                curve: c.id,
                family: c.family,
                tail: v0,
                head: v1,
                points,
                left_face: usize::MAX,
                right_face: usize::MAX,
            });
        }
    }

    let nh = 2 * edges.len();
    let mut half_edges: Vec<HalfEdge> = (0..nh)
        .map(|h| {
            let e = &edges[h / 2];
            HalfEdge {
                edge: h / 2,
                origin: if h % 2 == 0 { e.tail } else { e.head },
                twin: h ^ 1,
                next: usize::MAX,
                prev: usize::MAX,
                face: usize::MAX,
            }
        })
        .collect();
    let dir = |h: usize| {
        let pts = &edges[h / 2].points;
        if h % 2 == 0 {
            pts[1] - pts[0]
        } else {
            pts[pts.len() - 2] - pts[pts.len() - 1]
        }
    };
    for h in 0..nh {
        vertices[half_edges[h].origin].outgoing.push(h);
    }
    for v in vertices.iter_mut() {
        v.outgoing.sort_by(|&a, &b| dir(a).angle().partial_cmp(&dir(b).angle()).unwrap());
    }
    for v in &vertices {
        if let VertexKind::Crossing(x) = v.kind {
            if v.outgoing.len() != 4 {
                return Err(Error::Subdivision(format!("crossing {x} has {} incident half-edges", v.outgoing.len())));
            }
        }
    }
    // next(h): the outgoing half-edge at head(h) immediately clockwise from twin(h).
    for h in 0..nh {
        let tw = h ^ 1;
        let out = &vertices[half_edges[tw].origin].outgoing;
        let pos = out.iter().position(|&g| g == tw).unwrap();
        let nx = out[(pos + out.len() - 1) % out.len()];
        half_edges[h].next = nx;
        half_edges[nx].prev = h;
    }

    // Curve connectivity for hole assignment and the Euler check.
    let mut uf = UnionFind::new(ncurves);
    for x in &crossings {
        uf.union(x.curve_a, x.curve_b);
    }
    let comp_of_curve: Vec<usize> = (0..ncurves).map(|c| uf.find(c)).collect();
    let mut roots: Vec<usize> = comp_of_curve.clone();
    roots.sort_unstable();
    roots.dedup();
    let components = roots.len();

    // Trace half-edge cycles.
    let mut visited = vec![false; nh];
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    for h0 in 0..nh {
        if visited[h0] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut h = h0;
        while !visited[h] {
            visited[h] = true;
            cyc.push(h);
            h = half_edges[h].next;
        }
        if h != h0 {
            return Err(Error::Subdivision("half-edge cycle does not close".into()));
        }
        cycles.push(cyc);
    }
    let polys: Vec<Vec<Point2>> = cycles.iter().map(|c| cycle_polygon(&edges, c)).collect();
    let areas: Vec<f64> = polys.iter().map(|p| signed_area(p)).collect();

    let mut faces: Vec<ArrangementFace> = vec![ArrangementFace {
        id: UNBOUNDED_FACE,
        boundary_loops: Vec::new(),
        sign: Sign::Minus,
        is_unbounded: true,
        area: 0.0,
        containment: Vec::new(),
        region_class: RegionClass::OutsideBoth,
        representative: p2(0.0, 0.0),
    }];
    let mut face_of_cycle = vec![usize::MAX; cycles.len()];
    for (ci, cyc) in cycles.iter().enumerate() {
        if areas[ci] > 0.0 {
            face_of_cycle[ci] = faces.len();
            faces.push(ArrangementFace {
                id: faces.len(),
                boundary_loops: vec![cyc.clone()],
                sign: Sign::Minus,
                is_unbounded: false,
                area: areas[ci],
                containment: Vec::new(),
                region_class: RegionClass::OutsideBoth,
                representative: p2(0.0, 0.0),
            });
        }
    }
    for (ci, cyc) in cycles.iter().enumerate() {
        if areas[ci] > 0.0 {
            continue;
        }
        let comp = comp_of_curve[edges[cyc[0] / 2].curve];
        let probe = polys[ci][0];
        let mut best: Option<(f64, usize)> = None;
        for (cj, other) in cycles.iter().enumerate() {
            if areas[cj] <= 0.0 || comp_of_curve[edges[other[0] / 2].curve] == comp {
                continue;
            }
            if point_in_polygon(probe, &polys[cj]) && best.map_or(true, |(a, _)| areas[cj] < a) {
                best = Some((areas[cj], cj));
            }
        }
        let f = best.map_or(UNBOUNDED_FACE, |(_, cj)| face_of_cycle[cj]);
        face_of_cycle[ci] = f;
        faces[f].boundary_loops.push(cyc.clone());
        if f != UNBOUNDED_FACE {
            faces[f].area += areas[ci];
        }
    }
    for (ci, cyc) in cycles.iter().enumerate() {
        for &h in cyc {
            half_edges[h].face = face_of_cycle[ci];
        }
    }
    for (e, edge) in edges.iter_mut().enumerate() {
        edge.left_face = half_edges[2 * e].face;
        edge.right_face = half_edges[2 * e + 1].face;
    }

    let (nv, ne, nf) = (vertices.len() as i64, edges.len() as i64, faces.len() as i64);
    if nv - ne + nf != 1 + components as i64 {
        return Err(Error::Subdivision(format!(
            "Euler formula violated: V={nv} E={ne} F={nf} with {components} curve components"
        )));
    }

    // Representative interior points and containment.
    let all_segments: Vec<(Point2, Point2)> =
        curves.curves.iter().flat_map(|c| (0..c.len()).map(move |i| c.segment(i))).collect();
    let bb = curves.bbox;
    for face in faces.iter_mut() {
        if face.is_unbounded {
            face.representative = p2(bb.max.x + 1.0 + bb.diagonal(), bb.max.y + 1.0 + bb.diagonal());
            continue;
        }
        face.representative = representative_point(&cycle_polygon(&edges, &face.boundary_loops[0]), &all_segments);
        face.containment =
            curves.curves.iter().filter(|c| c.contains(face.representative)).map(|c| c.id).collect();
    }

    let mut arr = Arrangement { curves, crossings, vertices, edges, half_edges, faces, synthetic_vertices, components };
    assign_signs(&mut arr)?;
    Ok(arr)
}

/// Centroid of a thin triangle erected on the longest boundary segment, on
/// the face side, short enough to stay clear of every other segment.
fn representative_point(outer: &[Point2], all_segments: &[(Point2, Point2)]) -> Point2 {
    let n = outer.len();
    let (mut best, mut best_len) = (0, -1.0);
    for i in 0..n {
        let l = outer[i].dist(outer[(i + 1) % n]);
        if l > best_len {
            best = i;
            best_len = l;
        }
    }
    let (a, b) = (outer[best], outer[(best + 1) % n]);
    let m = a.lerp(b, 0.5);
    let normal = (b - a).perp().normalized();
    let mut clearance = f64::INFINITY;
    for &(s0, s1) in all_segments {
        let d = point_segment_distance(m, s0, s1);
        if d > 1e-12 * best_len {
            clearance = clearance.min(d);
        }
    }
    let apex_height = (0.75 * best_len).min(0.5 * clearance);
    let apex = m + normal * apex_height;
    (a.lerp(b, 0.25) + a.lerp(b, 0.75) + apex) / 3.0
}

/// Signs from containment parity, region classes, and the checkerboard check.
pub fn assign_signs(arr: &mut Arrangement) -> Result<()> {
    for face in arr.faces.iter_mut() {
        face.sign = if face.containment.len() % 2 == 0 { Sign::Minus } else { Sign::Plus };
        let in_a = face.containment.iter().any(|&c| arr.curves.curves[c].family == Family::A);
        let in_b = face.containment.iter().any(|&c| arr.curves.curves[c].family == Family::B);
        face.region_class = match (in_a, in_b) {
            (true, true) => RegionClass::InsideBoth,
            (false, false) => RegionClass::OutsideBoth,
            (true, false) => RegionClass::AOnly,
            (false, true) => RegionClass::BOnly,
        };
    }
    for (e, edge) in arr.edges.iter().enumerate() {
        if arr.faces[edge.left_face].sign == arr.faces[edge.right_face].sign {
            return Err(Error::Checkerboard { edge: e });
        }
    }
    for x in 0..arr.crossings.len() {
        let f = arr.crossing_faces(x);
        for i in 0..4 {
            if arr.faces[f[i]].sign == arr.faces[f[(i + 1) % 4]].sign {
                return Err(Error::Checkerboard { edge: arr.crossing_half_edges(x)[i] / 2 });
            }
        }
    }
    Ok(())
}
