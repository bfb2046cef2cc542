//! Triangulated realization of a sheet complex in space.
//!
//! Every sheet is triangulated in the plane (constrained Delaunay with
//! refinement), lifted by a harmonic height function, and welded to its
//! neighbours through shared boundary samples. Around each helicoidal
//! crossing a disk of radius `rho` is cut out of the two single sheets and
//! replaced by a ruled helicoid band.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use spade::{AngleLimit, ConstrainedDelaunayTriangulation, RefinementParameters, Triangulation};

use crate::arrangement::{Arrangement, Family, VertexKind};
use crate::error::{Error, Result};
use crate::geom::{corner_angle3, p2, triangle_area3, Point2, Point3};
use crate::sheet::{EdgeRole, Layer, SheetComplex};
use crate::sparse::{rcm_ordering, CsrMatrix, Ldlt};
use crate::varifold::{edge_multiplicity, CrossingType};

/// Polyline corners turning by more than this are always kept as samples.
const CORNER_TURN: f64 = 10.0 * PI / 180.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshParams {
    /// Height of the B plane.
    pub t: f64,
    /// Target edge length.
    pub h: f64,
    /// Radius of the disks cut out around helicoidal crossings; `None` picks
    /// `max(3h, 5t)`, reduced if needed to fit between crossings.
    pub rho: Option<f64>,
}

impl MeshParams {
    pub fn new(t: f64, h: f64) -> Self {
        MeshParams { t, h, rho: None }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = Some(rho);
        self
    }

    /// Largest admissible cutout radius: below half the distance between
    /// crossings and below the distance from any crossing to edges not incident to it.
    pub fn rho_limit(arr: &Arrangement) -> f64 {
        let mut limit = f64::INFINITY;
        for (x, cx) in arr.crossings.iter().enumerate() {
            for cy in &arr.crossings[x + 1..] {
                limit = limit.min(0.5 * cx.position.dist(cy.position));
            }
            for e in &arr.edges {
                if e.tail == x || e.head == x {
                    continue;
                }
                for w in e.points.windows(2) {
                    limit = limit.min(crate::geom::point_segment_distance(cx.position, w[0], w[1]));
                }
            }
        }
        limit
    }

    /// Checks the parameters against the arrangement and fills in `rho`.
    pub fn resolve(&self, arr: &Arrangement) -> Result<MeshParams> {
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::MeshParams(format!("plane separation t = {} must be positive", self.t)));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::MeshParams(format!("edge length h = {} must be positive", self.h)));
        }
        let limit = Self::rho_limit(arr);
        let rho = match self.rho {
            Some(r) => r,
            None => (3.0 * self.h).max(5.0 * self.t).min(0.9 * limit),
        };
        if arr.crossings.is_empty() {
            return Ok(MeshParams { rho: Some(rho), ..*self });
        }
        if rho < 3.0 * self.h * (1.0 - 1e-12) {
            return Err(Error::MeshParams(format!("rho = {rho:.4} is below 3h = {:.4}", 3.0 * self.h)));
        }
        if rho >= limit {
            return Err(Error::MeshParams(format!("rho = {rho:.4} does not fit between crossings (limit {limit:.4})")));
        }
        Ok(MeshParams { rho: Some(rho), ..*self })
    }

    pub fn rho(&self) -> f64 {
        self.rho.unwrap_or(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VertexTag {
    OnA,
    OnB,
    Interior,
    Seam,
    Helicoid,
}

impl VertexTag {
    pub fn is_boundary(self) -> bool {
        matches!(self, VertexTag::OnA | VertexTag::OnB)
    }

    fn rank(self) -> u8 {
        match self {
            VertexTag::OnA | VertexTag::OnB => 4,
            VertexTag::Helicoid => 3,
            VertexTag::Seam => 2,
            VertexTag::Interior => 1,
        }
    }
}

/// Local frame of a helicoid band: axis through `center`, rulings turning
/// from direction `theta_a` (on the A curve, height 0) by `delta` (on the B curve, height `t`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandFrame {
    pub crossing: usize,
    pub center: Point2,
    pub theta_a: f64,
    pub delta: f64,
    pub t: f64,
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct TriMesh {
    pub vertices: Vec<Point3>,
    pub triangles: Vec<[usize; 3]>,
    pub tags: Vec<VertexTag>,
    /// Sheet that produced each triangle; `None` for band triangles and fixtures.
    pub triangle_sheet: Vec<Option<usize>>,
    pub bands: Vec<BandFrame>,
}

impl TriMesh {
    /// A mesh without provenance; `boundary` marks the fixed vertices (tagged `OnA`).
    pub fn from_parts(vertices: Vec<Point3>, triangles: Vec<[usize; 3]>, boundary: &[bool]) -> Self {
        let tags = boundary.iter().map(|&b| if b { VertexTag::OnA } else { VertexTag::Interior }).collect();
        let n = triangles.len();
        TriMesh { vertices, triangles, tags, triangle_sheet: vec![None; n], bands: Vec::new() }
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.tags[v].is_boundary()
    }

    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| !self.is_boundary(v)).collect()
    }

    pub fn area(&self) -> f64 {
        self.triangles.iter().map(|t| self.triangle_area(t)).sum()
    }

    pub fn triangle_area(&self, t: &[usize; 3]) -> f64 {
        triangle_area3(self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]])
    }

    /// Undirected edges with their incident triangles.
    pub fn edge_map(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut m: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (f, t) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                m.entry((a.min(b), a.max(b))).or_default().push(f);
            }
        }
        m
    }

    pub fn euler_characteristic(&self) -> i64 {
        let used: BTreeSet<usize> = self.triangles.iter().flatten().copied().collect();
        used.len() as i64 - self.edge_map().len() as i64 + self.triangles.len() as i64
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        let mut m = f64::INFINITY;
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| self.vertices[i]);
            m = m.min(corner_angle3(c, a, b)).min(corner_angle3(a, b, c)).min(corner_angle3(b, c, a));
        }
        m.to_degrees()
    }

    /// Boundary edge cycles, each as a vertex sequence.
    pub fn boundary_loops(&self) -> Result<Vec<Vec<usize>>> {
        let mut next: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (&(a, b), tris) in &self.edge_map() {
            if tris.len() == 1 {
                next.entry(a).or_default().push(b);
                next.entry(b).or_default().push(a);
            }
        }
        if let Some((v, _)) = next.iter().find(|(_, n)| n.len() != 2) {
            return Err(Error::NonManifold(format!("boundary vertex {v} has {} boundary edges", next[v].len())));
        }
        let mut seen = BTreeSet::new();
        let mut loops = Vec::new();
        for &start in next.keys() {
            if seen.contains(&start) {
                continue;
            }
            let mut cycle = vec![start];
            seen.insert(start);
            let (mut prev, mut cur) = (start, next[&start][0]);
            while cur != start {
                cycle.push(cur);
                seen.insert(cur);
                let n = &next[&cur];
                let nx = if n[0] == prev { n[1] } else { n[0] };
                prev = cur;
                cur = nx;
            }
            loops.push(cycle);
        }
        Ok(loops)
    }

    /// Manifold-with-boundary check: every edge has one or two triangles and
    /// the triangles around every vertex form a single fan.
    pub fn check_manifold(&self) -> Result<()> {
        let edges = self.edge_map();
        for (&(a, b), tris) in &edges {
            if tris.len() > 2 {
                return Err(Error::NonManifold(format!("edge ({a}, {b}) has {} triangles", tris.len())));
            }
        }
        let mut around: Vec<Vec<usize>> = vec![Vec::new(); self.vertices.len()];
        for (f, t) in self.triangles.iter().enumerate() {
            for &v in t {
                around[v].push(f);
            }
        }
        for (v, fan) in around.iter().enumerate() {
            if fan.len() <= 1 {
                continue;
            }
            let mut uf: Vec<usize> = (0..fan.len()).collect();
            fn find(uf: &mut [usize], mut a: usize) -> usize {
                while uf[a] != a {
                    uf[a] = uf[uf[a]];
                    a = uf[a];
                }
                a
            }
            for i in 0..fan.len() {
                for j in i + 1..fan.len() {
                    let shared = self.triangles[fan[i]].iter().filter(|&&w| w != v && self.triangles[fan[j]].contains(&w)).count();
                    if shared > 0 {
                        let (ri, rj) = (find(&mut uf, i), find(&mut uf, j));
                        uf[ri] = rj;
                    }
                }
            }
            let r0 = find(&mut uf, 0);
            if (1..fan.len()).any(|i| find(&mut uf, i) != r0) {
                return Err(Error::NonManifold(format!("vertex {v} joins separate fans")));
            }
        }
        Ok(())
    }

    /// Flips triangles so neighbours induce opposite directions on shared edges.
    pub fn orient_consistently(&mut self) -> Result<()> {
        let edges = self.edge_map();
        let n = self.triangles.len();
        let mut state = vec![0u8; n]; // 0 unvisited, 1 visited
        for seed in 0..n {
            if state[seed] != 0 {
                continue;
            }
            state[seed] = 1;
            let mut stack = vec![seed];
            while let Some(f) = stack.pop() {
                let t = self.triangles[f];
                for k in 0..3 {
                    let (a, b) = (t[k], t[(k + 1) % 3]);
                    for &g in &edges[&(a.min(b), a.max(b))] {
                        if g == f {
                            continue;
                        }
                        let same_dir = directed(&self.triangles[g], a, b);
                        if state[g] == 0 {
                            if same_dir {
                                self.triangles[g].swap(1, 2);
                            }
                            state[g] = 1;
                            stack.push(g);
                        } else if same_dir {
                            return Err(Error::OrientationConflict(a, b));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Connected components (through shared edges) as separate meshes.
    pub fn split_components(&self) -> Vec<TriMesh> {
        let n = self.triangles.len();
        let mut comp = vec![usize::MAX; n];
        let edges = self.edge_map();
        let mut count = 0;
        for seed in 0..n {
            if comp[seed] != usize::MAX {
                continue;
            }
            comp[seed] = count;
            let mut stack = vec![seed];
            while let Some(f) = stack.pop() {
                let t = self.triangles[f];
                for k in 0..3 {
                    let (a, b) = (t[k], t[(k + 1) % 3]);
                    for &g in &edges[&(a.min(b), a.max(b))] {
                        if comp[g] == usize::MAX {
                            comp[g] = count;
                            stack.push(g);
                        }
                    }
                }
            }
            count += 1;
        }
        (0..count)
            .map(|c| {
                let mut map = vec![usize::MAX; self.vertices.len()];
                let mut out = TriMesh::default();
                for (f, t) in self.triangles.iter().enumerate() {
                    if comp[f] != c {
                        continue;
                    }
                    let nt = t.map(|v| {
                        if map[v] == usize::MAX {
                            map[v] = out.vertices.len();
                            out.vertices.push(self.vertices[v]);
                            out.tags.push(self.tags[v]);
                        }
                        map[v]
                    });
                    out.triangles.push(nt);
                    out.triangle_sheet.push(self.triangle_sheet[f]);
                }
                out.bands = self
                    .bands
                    .iter()
                    .filter(|b| out.vertices.iter().any(|p| p.xy().dist(b.center) < 1e-12 * (1.0 + b.rho)))
                    .copied()
                    .collect();
                out
            })
            .collect()
    }
}

fn directed(t: &[usize; 3], a: usize, b: usize) -> bool {
    (0..3).any(|k| t[k] == a && t[(k + 1) % 3] == b)
}

// ---------------------------------------------------------------------------
// Boundary sampling

fn polyline_length(pts: &[Point2]) -> f64 {
    pts.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Samples a polyline at spacing at most `h`, keeping its sharp corners.
fn resample(pts: &[Point2], h: f64) -> Vec<Point2> {
    let n = pts.len();
    let mut keep = vec![0];
    for i in 1..n - 1 {
        let (u, v) = (pts[i] - pts[i - 1], pts[i + 1] - pts[i]);
        if u.cross(v).atan2(u.dot(v)).abs() > CORNER_TURN {
            keep.push(i);
        }
    }
    keep.push(n - 1);
    let mut out = vec![pts[0]];
    for w in keep.windows(2) {
        let piece = &pts[w[0]..=w[1]];
        let len = polyline_length(piece);
        let m = ((len / h).ceil() as usize).max(1);
        for s in 1..m {
            out.push(point_at_arclength(piece, len * s as f64 / m as f64));
        }
        out.push(pts[w[1]]);
    }
    out
}

fn point_at_arclength(pts: &[Point2], mut s: f64) -> Point2 {
    for w in pts.windows(2) {
        let l = w[0].dist(w[1]);
        if s <= l && l > 0.0 {
            return w[0].lerp(w[1], s / l);
        }
        s -= l;
    }
    *pts.last().unwrap()
}

/// First point of the polyline (starting at its centre `pts[0]`) at distance `r`,
/// and the index of the segment it lies on.
fn exit_point(pts: &[Point2], r: f64) -> Option<(Point2, usize)> {
    let c = pts[0];
    for (i, w) in pts.windows(2).enumerate() {
        if w[1].dist(c) >= r {
            let d = w[1] - w[0];
            let f = w[0] - c;
            let (a, b, cc) = (d.dot(d), 2.0 * f.dot(d), f.dot(f) - r * r);
            let disc = (b * b - 4.0 * a * cc).max(0.0);
            let s = ((-b + disc.sqrt()) / (2.0 * a)).clamp(0.0, 1.0);
            return Some((w[0] + d * s, i));
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum VKey {
    Edge { edge: usize, copy: u8, idx: usize },
    Rim { crossing: usize, side: u8, k: usize },
    Ray { crossing: usize, side: u8, k: usize, j: usize },
    Axis { crossing: usize, k: usize },
}

#[derive(Clone, Copy, Debug)]
struct KeyData {
    pos: Point2,
    z: Option<f64>,
    tag: VertexTag,
}

#[derive(Default)]
struct KeyTable {
    ids: BTreeMap<VKey, usize>,
    parent: Vec<usize>,
    data: Vec<KeyData>,
}

impl KeyTable {
    fn get(&mut self, key: VKey, data: KeyData) -> usize {
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let id = self.parent.len();
        self.ids.insert(key, id);
        self.parent.push(id);
        self.data.push(data);
        id
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) -> Result<()> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return Ok(());
        }
        let (da, db) = (self.data[ra], self.data[rb]);
        if da.tag.is_boundary() && db.tag.is_boundary() && da.tag != db.tag {
            return Err(Error::SeamBookkeeping("vertex on both boundary planes".into()));
        }
        let keep = if db.tag.rank() > da.tag.rank() { db } else { da };
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.parent[hi] = lo;
        self.data[lo] = KeyData { pos: da.pos, z: keep.z.or(da.z).or(db.z), tag: keep.tag };
        Ok(())
    }
}

/// A helicoid band over the cutout disk of one helicoidal crossing.
#[derive(Clone, Debug, PartialEq)]
pub struct HelicoidPatch {
    pub frame: BandFrame,
    /// Number of ruling intervals and radial intervals per side.
    pub n_u: usize,
    pub n_r: usize,
    /// `points[side][k][j]`: ruling `k`, radial sample `j` (`j = 0` on the axis).
    pub points: [Vec<Vec<Point3>>; 2],
    /// Index, around the crossing, of the face each side lies over.
    pub sides: [usize; 2],
    /// Outgoing half-edges along the A ray and the B ray of each side.
    pub rays: [[usize; 2]; 2],
}

impl HelicoidPatch {
    pub fn triangles(&self) -> Vec<[(usize, usize, usize); 3]> {
        let mut out = Vec::new();
        for side in 0..2 {
            for k in 0..self.n_u {
                for j in 0..self.n_r {
                    let q = [(side, k, j), (side, k + 1, j), (side, k + 1, j + 1), (side, k, j + 1)];
                    out.push([q[0], q[1], q[2]]);
                    out.push([q[0], q[2], q[3]]);
                }
            }
        }
        out
    }

    pub fn z_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in self.points.iter().flatten().flatten() {
            lo = lo.min(p.z);
            hi = hi.max(p.z);
        }
        (lo, hi)
    }
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a < -PI {
        a += 2.0 * PI;
    }
    a
}

/// Points of the ray polyline leaving `x` along outgoing half-edge `h`.
fn ray_polyline(arr: &Arrangement, h: usize) -> Vec<Point2> {
    arr.half_edge_points(h)
}

/// Builds the ruled helicoid over the cutout at a helicoidal crossing.
///
/// Ruling `k` sits at height `t k / n_u`; the first lies along the A curve
/// and the last along the B curve, and in between the polar angle is
/// interpolated at each radius, so the band turns by the sector angle. For
/// straight curves the rulings are straight and the band is an exact helicoid.
pub fn insert_helicoid(c: &SheetComplex, crossing: usize, p: &MeshParams) -> Result<HelicoidPatch> {
    let arr = c.arrangement;
    if c.crossing_types[crossing] != CrossingType::Helicoidal {
        return Err(Error::RimMismatch { crossing });
    }
    let rho = p.rho();
    let t = p.t;
    let x = arr.crossings[crossing].position;
    let hs = arr.crossing_half_edges(crossing);
    let faces = arr.crossing_faces(crossing);
    let i = (0..4).find(|&k| c.varifold.multiplicity(faces[k]) == 1).ok_or(Error::RimMismatch { crossing })?;
    let sides = [i, (i + 2) % 4];
    let family = |h: usize| arr.edges[arr.half_edges[h].edge].family;
    let rays = sides.map(|k| {
        let (r0, r1) = (hs[k], hs[(k + 1) % 4]);
        if family(r0) == Family::A {
            [r0, r1]
        } else {
            [r1, r0]
        }
    });
    let rim = |h: usize| -> Result<Point2> {
        let pts = ray_polyline(arr, h);
        exit_point(&pts, rho).map(|(q, _)| q).ok_or(Error::RimMismatch { crossing })
    };
    let mut rim_pts = [[p2(0.0, 0.0); 2]; 2];
    let mut deltas = [0.0; 2];
    for s in 0..2 {
        rim_pts[s] = [rim(rays[s][0])?, rim(rays[s][1])?];
        deltas[s] = wrap_angle((rim_pts[s][1] - x).angle() - (rim_pts[s][0] - x).angle());
    }
    let delta_abs = 0.5 * (deltas[0].abs() + deltas[1].abs());
    let n_u = ((rho * delta_abs / p.h).ceil() as usize).max(3);
    let dphi = delta_abs / n_u as f64;
    let pitch = t / delta_abs;
    let span = (rho / pitch).asinh();
    let n_r = ((span / dphi).ceil() as usize).max(3);
    let radii: Vec<f64> = (0..=n_r)
        .map(|j| if j == n_r { rho } else { pitch * (span * j as f64 / n_r as f64).sinh() })
        .collect();

    let mut points: [Vec<Vec<Point3>>; 2] = [Vec::new(), Vec::new()];
    let mut near_axis = [[0.0; 2]; 2];
    for s in 0..2 {
        // The two boundary rulings follow the curves; interior rulings
        // interpolate the polar angle between them at each radius.
        let mut curve = [Vec::new(), Vec::new()];
        for a in 0..2 {
            let pts = ray_polyline(arr, rays[s][a]);
            let mut out = vec![x];
            for &r in &radii[1..n_r] {
                out.push(exit_point(&pts, r).ok_or(Error::RimMismatch { crossing })?.0);
            }
            out.push(rim_pts[s][a]);
            curve[a] = out;
        }
        near_axis[s] = [(curve[0][1] - x).angle(), (curve[1][1] - x).angle()];
        for k in 0..=n_u {
            let u = k as f64 / n_u as f64;
            let ruling = if k == 0 {
                curve[0].iter().map(|q| q.lift(0.0)).collect()
            } else if k == n_u {
                curve[1].iter().map(|q| q.lift(t)).collect()
            } else {
                let z = t * u;
                (0..=n_r)
                    .map(|j| {
                        if j == 0 {
                            return x.lift(z);
                        }
                        let ta = (curve[0][j] - x).angle();
                        let tb = ta + wrap_angle((curve[1][j] - x).angle() - ta);
                        let th = ta + u * (tb - ta);
                        (x + p2(th.cos(), th.sin()) * radii[j]).lift(z)
                    })
                    .collect()
            };
            points[s].push(ruling);
        }
    }
    let theta_a = near_axis[0][0];
    let frame = BandFrame { crossing, center: x, theta_a, delta: wrap_angle(near_axis[0][1] - theta_a), t, rho };
    Ok(HelicoidPatch { frame, n_u, n_r, points, sides, rays })
}

/// Planar triangulation of one sheet.
#[derive(Clone, Debug)]
pub struct SheetTriangulation {
    pub sheet: usize,
    pub points: Vec<Point2>,
    /// The first `boundary` points are the polygon vertices.
    pub boundary: usize,
    pub triangles: Vec<[usize; 3]>,
}

struct Plan<'c, 'a> {
    c: &'c SheetComplex<'a>,
    p: MeshParams,
    samples: Vec<Vec<Point2>>,
    patches: BTreeMap<usize, HelicoidPatch>,
}

impl<'c, 'a> Plan<'c, 'a> {
    fn new(c: &'c SheetComplex<'a>, p: &MeshParams) -> Result<Self> {
        let arr = c.arrangement;
        let p = p.resolve(arr)?;
        let mut patches = BTreeMap::new();
        for x in 0..arr.crossings.len() {
            if c.crossing_types[x] == CrossingType::Helicoidal {
                patches.insert(x, insert_helicoid(c, x, &p)?);
            }
        }
        let helicoidal = |v: usize| match arr.vertices[v].kind {
            VertexKind::Crossing(x) => c.crossing_types[x] == CrossingType::Helicoidal,
            VertexKind::Synthetic(_) => false,
        };
        let mut samples = Vec::with_capacity(arr.edges.len());
        for (e, edge) in arr.edges.iter().enumerate() {
            let mut pts = edge.points.clone();
            if helicoidal(edge.tail) {
                let (q, i) = exit_point(&pts, p.rho()).ok_or(Error::FaceTooSmall { face: edge.left_face })?;
                pts = core::iter::once(q).chain(pts[i + 1..].iter().copied()).collect();
            }
            if helicoidal(edge.head) {
                pts.reverse();
                let (q, i) = exit_point(&pts, p.rho()).ok_or(Error::FaceTooSmall { face: edge.left_face })?;
                pts = core::iter::once(q).chain(pts[i + 1..].iter().copied()).collect();
                pts.reverse();
            }
            if pts.len() < 2 || polyline_length(&pts) < 0.5 * p.h {
                return Err(Error::FaceTooSmall { face: edge.left_face });
            }
            // Trimmed ends must stay outside the disks.
            for (end, v) in [(0usize, edge.tail), (pts.len() - 1, edge.head)] {
                if helicoidal(v) {
                    let xv = arr.vertices[v].position;
                    let inside = pts.iter().enumerate().any(|(k, q)| k != end && q.dist(xv) < p.rho() * (1.0 - 1e-9));
                    if inside {
                        return Err(Error::MeshParams(format!("edge {e} re-enters the cutout disk")));
                    }
                }
            }
            let mut s = resample(&pts, p.h);
            // Rim points must be bit-identical to the band's rim samples.
            for (end, v, h) in [(0usize, edge.tail, 2 * e), (s.len() - 1, edge.head, 2 * e + 1)] {
                if let VertexKind::Crossing(x) = arr.vertices[v].kind {
                    if let Some(patch) = patches.get(&x) {
                        s[end] = patch_rim_point(patch, h).ok_or(Error::RimMismatch { crossing: x })?;
                    }
                }
            }
            samples.push(s);
        }
        Ok(Plan { c, p, samples, patches })
    }

    fn edge_copy(&self, sheet: usize, h: usize) -> u8 {
        let arr = self.c.arrangement;
        let e = arr.half_edges[h].edge;
        match self.c.edge_role(sheet, h) {
            EdgeRole::Boundary(_) if edge_multiplicity(arr, &self.c.varifold, e) == 2 => 1,
            _ => 0,
        }
    }

    fn edge_key(&mut self, keys: &mut KeyTable, sheet: usize, h: usize, along: usize) -> usize {
        let arr = self.c.arrangement;
        let e = arr.half_edges[h].edge;
        let n = self.samples[e].len();
        let idx = if h % 2 == 0 { along } else { n - 1 - along };
        let copy = self.edge_copy(sheet, h);
        let pos = self.samples[e][idx];
        let data = match self.c.edge_role(sheet, h) {
            EdgeRole::Boundary(f) => boundary_data(pos, f, self.p.t),
            EdgeRole::Continuation { .. } => KeyData { pos, z: None, tag: VertexTag::Seam },
        };
        keys.get(VKey::Edge { edge: e, copy, idx }, data)
    }

    /// Polygon loops of a sheet as key ids.
    fn sheet_loops(&mut self, keys: &mut KeyTable, sheet: usize) -> Result<Vec<Vec<usize>>> {
        let arr = self.c.arrangement;
        let face = self.c.sheets[sheet].face;
        let mut loops = Vec::new();
        for cycle in &arr.faces[face].boundary_loops {
            let mut ids = Vec::new();
            for (k, &h) in cycle.iter().enumerate() {
                let next = cycle[(k + 1) % cycle.len()];
                let n = self.samples[arr.half_edges[h].edge].len();
                for a in 0..n - 1 {
                    ids.push(self.edge_key(keys, sheet, h, a));
                }
                let last = self.edge_key(keys, sheet, h, n - 1);
                let head = arr.half_edges[next].origin;
                let band = match arr.vertices[head].kind {
                    VertexKind::Crossing(x) => self.patches.get(&x).map(|p| (x, p.clone())),
                    _ => None,
                };
                match band {
                    None => {
                        let first = self.edge_key(keys, sheet, next, 0);
                        keys.union(last, first)?;
                    }
                    Some((x, patch)) => {
                        ids.push(last);
                        // Rim arc from the arriving ray to the leaving ray.
                        let side = patch.sides.iter().position(|&s| arr.crossing_faces(x)[s] == face && {
                            let hs = arr.crossing_half_edges(x);
                            hs[s] == next
                        });
                        let side = side.ok_or(Error::RimMismatch { crossing: x })?;
                        let leaving_is_a = patch.rays[side][0] == next;
                        let ks: Vec<usize> =
                            if leaving_is_a { (1..patch.n_u).rev().collect() } else { (1..patch.n_u).collect() };
                        for k in ks {
                            let q = patch.points[side][k][patch.n_r];
                            let data = KeyData { pos: q.xy(), z: Some(q.z), tag: VertexTag::Helicoid };
                            ids.push(keys.get(VKey::Rim { crossing: x, side: side as u8, k }, data));
                        }
                    }
                }
            }
            loops.push(ids);
        }
        Ok(loops)
    }
}

fn boundary_data(pos: Point2, f: Family, t: f64) -> KeyData {
    match f {
        Family::A => KeyData { pos, z: Some(0.0), tag: VertexTag::OnA },
        Family::B => KeyData { pos, z: Some(t), tag: VertexTag::OnB },
    }
}

/// Rim sample of `patch` on the ray of half-edge `h` (leaving or arriving at the crossing).
fn patch_rim_point(patch: &HelicoidPatch, h: usize) -> Option<Point2> {
    let leaving = [h, h ^ 1];
    for s in 0..2 {
        for (a, &ray) in patch.rays[s].iter().enumerate() {
            if leaving.contains(&ray) {
                let k = if a == 0 { 0 } else { patch.n_u };
                return Some(patch.points[s][k][patch.n_r].xy());
            }
        }
    }
    None
}

/// Constrained Delaunay triangulation of the polygon loops with target edge length `h`.
fn triangulate_polygon(face: usize, loops: &[Vec<Point2>], h: f64) -> Result<(Vec<Point2>, usize, Vec<[usize; 3]>)> {
    type SP = spade::Point2<f64>;
    let mut cdt = ConstrainedDelaunayTriangulation::<SP>::new();
    let mut handles = Vec::new();
    let mut points = Vec::new();
    for lp in loops {
        let mut ids = Vec::new();
        for &q in lp {
            let before = cdt.num_vertices();
            let hnd = cdt
                .insert(SP::new(q.x, q.y))
                .map_err(|e| Error::Triangulation { face, reason: format!("{e:?}") })?;
            if cdt.num_vertices() == before {
                return Err(Error::Triangulation { face, reason: "face boundary touches itself".to_string() });
            }
            ids.push(hnd);
            points.push(q);
        }
        handles.push(ids);
    }
    let boundary = points.len();
    for ids in &handles {
        for k in 0..ids.len() {
            let (a, b) = (ids[k], ids[(k + 1) % ids.len()]);
            if !cdt.can_add_constraint(a, b) {
                return Err(Error::Triangulation { face, reason: "boundary segments intersect".to_string() });
            }
            cdt.add_constraint(a, b);
        }
    }
    let target = 0.25 * 3.0f64.sqrt() * h * h;
    let area: f64 = loops.iter().map(|l| crate::geom::signed_area(l).abs()).sum();
    let params = RefinementParameters::<f64>::new()
        .exclude_outer_faces(true)
        .keep_constraint_edges()
        .with_angle_limit(AngleLimit::from_deg(28.0))
        .with_max_allowed_area(target)
        .with_min_required_area(1e-3 * target)
        .with_max_additional_vertices(20 * (area / target) as usize + 10 * boundary + 100);
    let result = cdt.refine(params);
    let excluded: BTreeSet<usize> = result.excluded_faces.iter().map(|f| f.index()).collect();
    let mut map = BTreeMap::new();
    for (k, ids) in handles.iter().flatten().enumerate() {
        map.insert(ids.index(), k);
    }
    let mut triangles = Vec::new();
    for f in cdt.inner_faces() {
        if excluded.contains(&f.fix().index()) {
            continue;
        }
        let tri = f.vertices().map(|v| {
            let idx = v.fix().index();
            *map.entry(idx).or_insert_with(|| {
                let q = v.position();
                points.push(p2(q.x, q.y));
                points.len() - 1
            })
        });
        triangles.push(tri);
    }
    if triangles.is_empty() {
        return Err(Error::FaceTooSmall { face });
    }
    Ok((points, boundary, triangles))
}

/// Planar triangulations of every sheet, with the cutouts already removed.
pub fn triangulate_sheets(c: &SheetComplex, p: &MeshParams) -> Result<Vec<SheetTriangulation>> {
    let mut plan = Plan::new(c, p)?;
    let mut keys = KeyTable::default();
    (0..c.sheets.len())
        .map(|s| {
            let loops = plan.sheet_loops(&mut keys, s)?;
            let pts: Vec<Vec<Point2>> = loops.iter().map(|l| l.iter().map(|&k| keys.data[k].pos).collect()).collect();
            let (points, boundary, triangles) = triangulate_polygon(c.sheets[s].face, &pts, plan.p.h)?;
            Ok(SheetTriangulation { sheet: s, points, boundary, triangles })
        })
        .collect()
}

/// Welds sheets and bands into one mesh with harmonic initial heights.
///
/// Heights solve the cotangent Laplace equation of the planar sheets, with
/// `z = 0` on A, `z = t` on B and the helicoid's heights on the cutout rims.
pub fn initial_heights(c: &SheetComplex, p: &MeshParams) -> Result<TriMesh> {
    let mut plan = Plan::new(c, p)?;
    let t = plan.p.t;
    let mut keys = KeyTable::default();
    // Sheet polygons and triangulations, in key space.
    let mut sheet_tris: Vec<(usize, Vec<usize>, Vec<[usize; 3]>)> = Vec::new();
    let mut steiner: Vec<Point2> = Vec::new();
    const STEINER: usize = usize::MAX / 2;
    for s in 0..c.sheets.len() {
        let loops = plan.sheet_loops(&mut keys, s)?;
        let pts: Vec<Vec<Point2>> = loops.iter().map(|l| l.iter().map(|&k| keys.data[k].pos).collect()).collect();
        let (points, boundary, triangles) = triangulate_polygon(c.sheets[s].face, &pts, plan.p.h)?;
        let mut ids: Vec<usize> = loops.into_iter().flatten().collect();
        for q in &points[boundary..] {
            ids.push(STEINER + steiner.len());
            steiner.push(*q);
        }
        sheet_tris.push((s, ids, triangles));
    }
    // Band vertices and the key unions at its ends.
    let mut band_tris: Vec<[usize; 3]> = Vec::new();
    let patches: Vec<HelicoidPatch> = plan.patches.values().cloned().collect();
    let arr = c.arrangement;
    for patch in &patches {
        let x = patch.frame.crossing;
        let mut grid = [vec![vec![0usize; patch.n_r + 1]; patch.n_u + 1], vec![vec![0usize; patch.n_r + 1]; patch.n_u + 1]];
        for side in 0..2 {
            for k in 0..=patch.n_u {
                for j in 0..=patch.n_r {
                    let q = patch.points[side][k][j];
                    let tag = if k == 0 {
                        VertexTag::OnA
                    } else if k == patch.n_u {
                        VertexTag::OnB
                    } else {
                        VertexTag::Helicoid
                    };
                    let data = KeyData { pos: q.xy(), z: Some(q.z), tag };
                    let id = if j == 0 {
                        keys.get(VKey::Axis { crossing: x, k }, data)
                    } else if j == patch.n_r && (k == 0 || k == patch.n_u) {
                        let ray = patch.rays[side][if k == 0 { 0 } else { 1 }];
                        let sheet = c.sheet_of(arr.crossing_faces(x)[patch.sides[side]], Layer::Only).unwrap();
                        // The ray leaves x; the sheet's half-edge along it is either the ray or its twin.
                        let face = c.sheets[sheet].face;
                        let h = if arr.half_edges[ray].face == face { ray } else { arr.half_edges[ray].twin };
                        let along = if h == ray { 0 } else { plan.samples[arr.half_edges[h].edge].len() - 1 };
                        let id = plan.edge_key(&mut keys, sheet, h, along);
                        let root = keys.find(id);
                        if keys.data[root].pos.dist(q.xy()) > 0.0 {
                            return Err(Error::RimMismatch { crossing: x });
                        }
                        id
                    } else if j == patch.n_r {
                        keys.get(VKey::Rim { crossing: x, side: side as u8, k }, data)
                    } else {
                        keys.get(VKey::Ray { crossing: x, side: side as u8, k, j }, data)
                    };
                    grid[side][k][j] = id;
                }
            }
        }
        for tri in patch.triangles() {
            band_tris.push(tri.map(|(s, k, j)| grid[s][k][j]));
        }
    }

    // Compact key classes and Steiner points into mesh vertices.
    let nk = keys.parent.len();
    let mut vid = vec![usize::MAX; nk];
    let mut pos2 = Vec::new();
    let mut z: Vec<Option<f64>> = Vec::new();
    let mut tags = Vec::new();
    for k in 0..nk {
        let r = keys.find(k);
        if vid[r] == usize::MAX {
            vid[r] = pos2.len();
            let d = keys.data[r];
            pos2.push(d.pos);
            z.push(d.z);
            tags.push(d.tag);
        }
        vid[k] = vid[r];
    }
    let steiner_base = pos2.len();
    for q in &steiner {
        pos2.push(*q);
        z.push(None);
        tags.push(VertexTag::Interior);
    }
    let resolve = |id: usize| if id >= STEINER { steiner_base + (id - STEINER) } else { vid[id] };

    let mut triangles = Vec::new();
    let mut triangle_sheet = Vec::new();
    for (s, ids, tris) in &sheet_tris {
        for tri in tris {
            triangles.push(tri.map(|l| resolve(ids[l])));
            triangle_sheet.push(Some(*s));
        }
    }
    let n_sheet_tris = triangles.len();
    for tri in &band_tris {
        triangles.push(tri.map(resolve));
        triangle_sheet.push(None);
    }

    let heights = harmonic_heights(&pos2, &z, &triangles[..n_sheet_tris])?;
    let vertices: Vec<Point3> = pos2.iter().zip(&heights).map(|(q, &h)| q.lift(h)).collect();
    let bands = patches.iter().map(|p| p.frame).collect();
    let mut mesh = TriMesh { vertices, triangles, tags, triangle_sheet, bands };
    let _ = t;
    mesh.orient_consistently()?;
    Ok(mesh)
}

/// Solves the planar cotangent Laplace equation for the free heights.
fn harmonic_heights(pos: &[Point2], fixed: &[Option<f64>], tris: &[[usize; 3]]) -> Result<Vec<f64>> {
    let n = pos.len();
    let mut free_id = vec![usize::MAX; n];
    let mut free = Vec::new();
    for v in 0..n {
        if fixed[v].is_none() {
            free_id[v] = free.len();
            free.push(v);
        }
    }
    let mut trips = Vec::new();
    let mut rhs = vec![0.0; free.len()];
    for t in tris {
        for k in 0..3 {
            let (i, j, o) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
            let (u, v) = (pos[i] - pos[o], pos[j] - pos[o]);
            let w = 0.5 * u.dot(v) / u.cross(v).abs();
            for (a, b) in [(i, j), (j, i)] {
                if free_id[a] == usize::MAX {
                    continue;
                }
                let fa = free_id[a];
                trips.push((fa, fa, w));
                match fixed[b] {
                    Some(zb) => rhs[fa] += w * zb,
                    None => trips.push((fa, free_id[b], -w)),
                }
            }
        }
    }
    let mut out: Vec<f64> = fixed.iter().map(|z| z.unwrap_or(0.0)).collect();
    if free.is_empty() {
        return Ok(out);
    }
    let a = CsrMatrix::from_triplets(free.len(), trips);
    let perm = rcm_ordering(&a);
    let f = Ldlt::factor(&a, &perm)?;
    let sol = f.solve(&rhs);
    for (k, &v) in free.iter().enumerate() {
        out[v] = sol[k];
    }
    Ok(out)
}

/// Builds, welds and checks the mesh of a sheet complex; one mesh per connected component.
pub fn assemble_mesh(c: &SheetComplex, p: &MeshParams) -> Result<Vec<TriMesh>> {
    let mesh = initial_heights(c, p)?;
    mesh.check_manifold()?;
    if let Some(v) = (0..mesh.vertices.len()).find(|&v| !mesh.triangles.iter().any(|t| t.contains(&v))) {
        return Err(Error::NonManifold(format!("vertex {v} is not used by any triangle")));
    }
    for (k, t) in mesh.triangles.iter().enumerate() {
        if !(mesh.triangle_area(t) > 0.0) {
            return Err(Error::DegenerateTriangle { triangle: k });
        }
    }
    let mut comps = mesh.split_components();
    comps.sort_by(|a, b| {
        let key = |m: &TriMesh| m.triangle_sheet.iter().flatten().min().copied().unwrap_or(usize::MAX);
        key(a).cmp(&key(b))
    });
    Ok(comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{disjoint_circles, lens};
    use crate::sheet::build_complex;
    use crate::varifold::enumerate_varifolds;

    #[test]
    fn resample_keeps_corners_and_spacing() {
        let pts = [p2(0.0, 0.0), p2(1.0, 0.0), p2(1.0, 1.0)];
        let s = resample(&pts, 0.3);
        assert!(s.contains(&p2(1.0, 0.0)));
        assert!(s.windows(2).all(|w| w[0].dist(w[1]) <= 0.3 + 1e-12));
        assert_eq!(s.first(), Some(&pts[0]));
        assert_eq!(s.last(), Some(&pts[2]));
    }

    #[test]
    fn exit_point_on_segment() {
        let pts = [p2(0.0, 0.0), p2(0.5, 0.0), p2(2.0, 0.0)];
        let (q, i) = exit_point(&pts, 1.0).unwrap();
        assert_eq!(i, 1);
        assert!((q.x - 1.0).abs() < 1e-15 && q.y == 0.0);
    }

    #[test]
    fn lens_meshes() {
        let arr = lens(256);
        let vs = enumerate_varifolds(&arr);
        let p = MeshParams::new(0.06, 0.08);
        let flat = assemble_mesh(&build_complex(&arr, &vs[0]).unwrap(), &p).unwrap();
        assert_eq!(flat.len(), 1);
        assert_eq!(flat[0].euler_characteristic(), 0);
        assert_eq!(flat[0].boundary_loops().unwrap().len(), 2);
        let doubled = assemble_mesh(&build_complex(&arr, &vs[1]).unwrap(), &p).unwrap();
        assert_eq!(doubled.len(), 2);
        for m in &doubled {
            assert_eq!(m.euler_characteristic(), 1);
            assert_eq!(m.boundary_loops().unwrap().len(), 1);
        }
        for m in flat.iter().chain(&doubled) {
            assert!(m.min_angle_deg() > 1.0, "min angle {}", m.min_angle_deg());
            for (v, q) in m.vertices.iter().enumerate() {
                assert!(q.z >= -1e-12 && q.z <= 0.06 + 1e-12, "height {} at {v}", q.z);
            }
        }
    }

    #[test]
    fn disjoint_circles_are_flat_disks() {
        let arr = disjoint_circles(64);
        let vs = enumerate_varifolds(&arr);
        let meshes = assemble_mesh(&build_complex(&arr, &vs[0]).unwrap(), &MeshParams::new(0.1, 0.2)).unwrap();
        assert_eq!(meshes.len(), 2);
        let heights: Vec<f64> = meshes.iter().map(|m| m.vertices[m.tags.iter().position(|t| t.is_boundary()).unwrap()].z).collect();
        for (m, z) in meshes.iter().zip(&heights) {
            assert!(m.vertices.iter().all(|q| (q.z - *z).abs() < 1e-12));
            assert_eq!(m.euler_characteristic(), 1);
        }
        assert!(heights.contains(&0.0) && heights.contains(&0.1));
    }

    #[test]
    fn helicoid_patch_heights() {
        let arr = lens(256);
        let vs = enumerate_varifolds(&arr);
        let c = build_complex(&arr, &vs[0]).unwrap();
        for t in [0.1, 1e-3] {
            let p = MeshParams::new(t, 0.05).with_rho(0.2).resolve(&arr).unwrap();
            let patch = insert_helicoid(&c, 0, &p).unwrap();
            let (lo, hi) = patch.z_range();
            assert!(lo == 0.0 && hi == t);
            for s in 0..2 {
                assert!(patch.points[s][0].iter().all(|q| q.z == 0.0));
                assert!(patch.points[s][patch.n_u].iter().all(|q| q.z == t));
            }
        }
    }

    #[test]
    fn rho_must_fit() {
        let arr = lens(64);
        assert!(MeshParams::new(0.05, 0.1).with_rho(0.2).resolve(&arr).is_err());
        assert!(MeshParams::new(0.05, 0.1).with_rho(5.0).resolve(&arr).is_err());
        assert!(MeshParams::new(-1.0, 0.1).resolve(&arr).is_err());
    }

    #[test]
    fn mesh_topology_matches_complex() {
        use crate::fixtures::{circle_ellipse, square_and_diamond};
        use crate::sheet::genus_and_boundaries;
        for (arr, t, h) in [(lens(256), 0.05, 0.08), (circle_ellipse(256), 0.03, 0.08), (square_and_diamond(), 0.03, 0.05)] {
            for v in enumerate_varifolds(&arr) {
                let c = build_complex(&arr, &v).unwrap();
                let topo = genus_and_boundaries(&c).unwrap();
                let meshes = assemble_mesh(&c, &MeshParams::new(t, h)).unwrap();
                assert_eq!(meshes.len(), topo.len());
                let mut got: Vec<(i64, usize)> =
                    meshes.iter().map(|m| (m.euler_characteristic(), m.boundary_loops().unwrap().len())).collect();
                let mut want: Vec<(i64, usize)> = topo.iter().map(|c| (c.chi, c.boundary_loops)).collect();
                got.sort();
                want.sort();
                assert_eq!(got, want);
                for m in &meshes {
                    assert!(m.min_angle_deg() > 1.0);
                }
            }
        }
    }

    #[test]
    fn swapping_families_mirrors_the_band() {
        use crate::arrangement::{CurveSet, Tolerances};
        use crate::fixtures::circle;
        let build = |a: f64, b: f64| {
            let set = CurveSet::new(vec![circle(a, 0.0, 1.0, 256)], vec![circle(b, 0.0, 1.0, 256)], Tolerances::default()).unwrap();
            Arrangement::from_curves(set).unwrap()
        };
        let (arr, swapped) = (build(0.0, 1.0), build(1.0, 0.0));
        let t = 0.05;
        let cloud = |arr: &Arrangement, mirror: bool| -> Vec<(i64, i64, i64)> {
            let v = enumerate_varifolds(arr).into_iter().find(|v| v.doubled_faces().next().is_none()).unwrap();
            let c = build_complex(arr, &v).unwrap();
            let p = MeshParams::new(t, 0.04).resolve(arr).unwrap();
            let x = (0..arr.crossings.len()).find(|&x| arr.crossings[x].position.y > 0.0).unwrap();
            let patch = insert_helicoid(&c, x, &p).unwrap();
            let q = |f: f64| (f * 1e7).round() as i64;
            let mut pts: Vec<_> = patch
                .points
                .iter()
                .flatten()
                .flatten()
                .map(|p| (q(p.x), q(p.y), q(if mirror { t - p.z } else { p.z })))
                .collect();
            pts.sort();
            pts.dedup();
            pts
        };
        let (a, b) = (cloud(&arr, false), cloud(&swapped, true));
        assert_eq!(a.len(), b.len());
        let close = a.iter().zip(&b).filter(|(p, q)| (p.0 - q.0).abs() <= 1 && (p.1 - q.1).abs() <= 1 && (p.2 - q.2).abs() <= 1).count();
        assert_eq!(close, a.len());
        assert_ne!(a, cloud(&swapped, false));
    }
}
