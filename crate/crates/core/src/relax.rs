//! Area relaxation with fixed boundary, and checks of the relaxed shape.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::discrete::{area_gradient, cotan_weights, mixed_areas, normal_mean_curvature, vertex_normals, Topology};
use crate::error::{Error, Result};
use crate::geom::{corner_angle3, Point2, Point3};
use crate::mesh::{BandFrame, TriMesh};
use crate::sheet::{Layer, SheetComplex};
use crate::sparse::{rcm_ordering, CsrMatrix, Ldlt};

/// Steps that would create a corner below this angle are rejected.
pub const MIN_ANGLE_DEG: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelaxParams {
    /// Stop once the largest mean curvature at a free vertex is below this.
    pub tol_h: f64,
    pub max_iters: usize,
    /// Largest displacement of any vertex in one step.
    pub max_step: f64,
}

impl RelaxParams {
    /// `tol_h = 1e-3 / diameter`, 20000 iterations, steps of at most `h / 4`.
    pub fn for_scale(diameter: f64, h: f64) -> Self {
        RelaxParams { tol_h: 1e-3 / diameter, max_iters: 20_000, max_step: 0.25 * h }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelaxReport {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// Area before the first step and after every accepted step.
    pub area_history: Vec<f64>,
    pub residual_history: Vec<f64>,
    /// Set when the line search could not reduce area any further.
    pub stalled: bool,
}

impl RelaxReport {
    pub fn area_monotone(&self) -> bool {
        self.area_history.windows(2).all(|w| w[1] <= w[0])
    }

    /// `iteration,area,residual` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,area,residual\n");
        for (i, (a, r)) in self.area_history.iter().zip(&self.residual_history).enumerate() {
            s.push_str(&alloc::format!("{i},{a:.17e},{r:.17e}\n"));
        }
        s
    }
}

fn free_mask(mesh: &TriMesh) -> Vec<bool> {
    (0..mesh.vertices.len()).map(|v| !mesh.is_boundary(v)).collect()
}

fn max_residual(mesh: &TriMesh, topo: &Topology, w: &[f64], free: &[bool]) -> f64 {
    let g = area_gradient(mesh, topo, w);
    let a = mixed_areas(mesh);
    let n = vertex_normals(mesh);
    (0..mesh.vertices.len()).filter(|&v| free[v]).map(|v| normal_mean_curvature(&g, &n, &a, v)).fold(0.0, f64::max)
}

/// Largest mean curvature over free vertices, without moving anything.
pub fn mean_curvature_residual(mesh: &TriMesh) -> Result<f64> {
    let topo = Topology::new(mesh);
    let w = cotan_weights(mesh, &topo)?;
    Ok(max_residual(mesh, &topo, &w, &free_mask(mesh)))
}

/// Normal displacement `φ n` minimizing the second-order model of area,
/// `A + Σ φ_i ⟨∇A_i, n_i⟩ + ½ Σ w_ij (φ_i − φ_j)²`, with `φ = 0` on the boundary.
fn normal_step(mesh: &TriMesh, topo: &Topology, w: &[f64], free_id: &[usize], free_list: &[usize]) -> Result<Vec<Point3>> {
    let nfree = free_list.len();
    let g = area_gradient(mesh, topo, w);
    let normals = vertex_normals(mesh);
    let mut trips = Vec::new();
    for (e, &(i, j)) in topo.edges.iter().enumerate() {
        let (a, b) = (free_id[i], free_id[j]);
        if a != usize::MAX {
            trips.push((a, a, w[e]));
        }
        if b != usize::MAX {
            trips.push((b, b, w[e]));
        }
        if a != usize::MAX && b != usize::MAX {
            trips.push((a, b, -w[e]));
            trips.push((b, a, -w[e]));
        }
    }
    let l = CsrMatrix::from_triplets(nfree, trips);
    let perm = rcm_ordering(&l);
    let f = Ldlt::factor(&l, &perm)?;
    let n: Vec<Point3> = free_list.iter().map(|&v| normals[v].normalized()).collect();
    let rhs: Vec<f64> = free_list.iter().zip(&n).map(|(&v, nv)| -g[v].dot(*nv)).collect();
    let phi = f.solve(&rhs);
    Ok(n.iter().zip(&phi).map(|(nv, p)| *nv * *p).collect())
}

fn acceptable(mesh: &TriMesh, normals: &[Point3]) -> bool {
    let min = MIN_ANGLE_DEG.to_radians();
    mesh.triangles.iter().zip(normals).all(|(t, n0)| {
        let p = t.map(|i| mesh.vertices[i]);
        let n = (p[1] - p[0]).cross(p[2] - p[0]);
        n.dot(*n0) > 0.0 && (0..3).all(|k| corner_angle3(p[(k + 2) % 3], p[k], p[(k + 1) % 3]) > min)
    })
}

/// Moves the free vertices downhill in area until the mean curvature is
/// below `tol_h` everywhere.
///
/// Each step moves vertices along their normals by the minimizer of a
/// quadratic model of area (the area gradient preconditioned by the
/// cotangent Laplacian), capped at `max_step` per vertex and halved until
/// area does not increase and no triangle flips or degenerates. Boundary
/// vertices are never written.
pub fn relax(mut mesh: TriMesh, p: &RelaxParams) -> Result<(TriMesh, RelaxReport)> {
    let topo = Topology::new(&mesh);
    let free = free_mask(&mesh);
    let mut free_id = vec![usize::MAX; free.len()];
    let mut free_list = Vec::new();
    for v in 0..free.len() {
        if free[v] {
            free_id[v] = free_list.len();
            free_list.push(v);
        }
    }
    let mut area = mesh.area();
    let mut report =
        RelaxReport { iterations: 0, residual: 0.0, converged: false, area_history: vec![area], residual_history: Vec::new(), stalled: false };
    loop {
        let w = cotan_weights(&mesh, &topo)?;
        let residual = max_residual(&mesh, &topo, &w, &free);
        report.residual = residual;
        report.residual_history.push(residual);
        if residual <= p.tol_h {
            report.converged = true;
            break;
        }
        if report.iterations >= p.max_iters || free_list.is_empty() {
            break;
        }
        let dir = normal_step(&mesh, &topo, &w, &free_id, &free_list)?;
        let longest = dir.iter().map(|d| d.norm()).fold(0.0, f64::max);
        let mut s = if longest > p.max_step { p.max_step / longest } else { 1.0 };
        let normals: Vec<Point3> = mesh
            .triangles
            .iter()
            .map(|t| (mesh.vertices[t[1]] - mesh.vertices[t[0]]).cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]))
            .collect();
        let mut trial = mesh.clone();
        let mut accepted = false;
        let mut inverted = false;
        for _ in 0..40 {
            for (k, &v) in free_list.iter().enumerate() {
                trial.vertices[v] = mesh.vertices[v] + dir[k] * s;
            }
            let ok_shape = acceptable(&trial, &normals);
            inverted |= !ok_shape;
            if ok_shape {
                let a = trial.area();
                if a <= area {
                    accepted = true;
                    area = a;
                    break;
                }
            }
            s *= 0.5;
        }
        if !accepted {
            if inverted {
                return Err(Error::TriangleInversion { iteration: report.iterations });
            }
            report.stalled = true;
            break;
        }
        mesh = trial;
        report.iterations += 1;
        report.area_history.push(area);
    }
    Ok((mesh, report))
}

// ---------------------------------------------------------------------------
// Shape checks

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphVerdict {
    pub pass: bool,
    /// Smallest `|n_z|` among checked triangles (1 when none were checked).
    pub worst: f64,
    pub worst_triangle: Option<usize>,
    pub worst_location: Option<Point3>,
    pub checked: usize,
}

/// Checks `|⟨n, e₃⟩| ≥ x` on every triangle whose centroid projects outside
/// all disks of radius `rho` around `centers`.
pub fn graph_check(mesh: &TriMesh, centers: &[Point2], rho: f64, x: f64) -> GraphVerdict {
    let mut v = GraphVerdict { pass: true, worst: 1.0, worst_triangle: None, worst_location: None, checked: 0 };
    for (f, t) in mesh.triangles.iter().enumerate() {
        let p = t.map(|i| mesh.vertices[i]);
        let c = (p[0] + p[1] + p[2]) / 3.0;
        if centers.iter().any(|q| q.dist(c.xy()) < rho) {
            continue;
        }
        v.checked += 1;
        let n = (p[1] - p[0]).cross(p[2] - p[0]).normalized();
        let nz = n.z.abs();
        if nz < v.worst {
            v.worst = nz;
            v.worst_triangle = Some(f);
            v.worst_location = Some(c);
        }
    }
    v.pass = v.worst >= x;
    v
}

/// Least-squares fit of the helicoid `z = z₀ + c φ` to the vertices inside
/// the cylinder of radius `frame.rho` around the band axis, where `φ` is the
/// polar angle about the crossing reduced modulo `π` (a ruling and its
/// opposite half share one height). The misfit of a point is its distance
/// to the helicoid to first order, `|z − z₀ − c φ| / √(1 + c²/r²)`; `z₀` is
/// solved in closed form and `c` by a scan plus golden-section refinement.
/// Returns the RMS distance divided by `t`.
pub fn helicoid_fit(mesh: &TriMesh, frame: &BandFrame) -> Result<f64> {
    let mid = frame.theta_a + 0.5 * frame.delta;
    let mut pts = Vec::new();
    for q in &mesh.vertices {
        let d = q.xy() - frame.center;
        let r = d.norm();
        if r >= frame.rho * (1.0 - 1e-9) || r < 1e-9 * frame.rho {
            continue;
        }
        let mut phi = (d.angle() - mid) % PI;
        if phi >= 0.5 * PI {
            phi -= PI;
        } else if phi < -0.5 * PI {
            phi += PI;
        }
        pts.push((r, phi, q.z));
    }
    const NEEDED: usize = 10;
    if pts.len() < NEEDED {
        return Err(Error::TooFewVertices { found: pts.len(), needed: NEEDED });
    }
    let mean_sq = |c: f64| -> f64 {
        let (mut sw, mut swz) = (0.0, 0.0);
        for &(r, phi, z) in &pts {
            let w = 1.0 / (1.0 + c * c / (r * r));
            sw += w;
            swz += w * (z - c * phi);
        }
        let z0 = swz / sw;
        pts.iter().map(|&(r, phi, z)| (z - z0 - c * phi).powi(2) / (1.0 + c * c / (r * r))).sum::<f64>() / pts.len() as f64
    };
    let c0 = frame.t / frame.delta.abs().max(1e-12);
    let span = 4.0 * c0;
    let steps = 400;
    let grid = |k: usize| -span + 2.0 * span * k as f64 / steps as f64;
    let best = (0..=steps).min_by(|&a, &b| mean_sq(grid(a)).total_cmp(&mean_sq(grid(b)))).unwrap();
    let (mut lo, mut hi) = (grid(best.saturating_sub(1)), grid((best + 1).min(steps)));
    let g = 0.5 * (5.0f64.sqrt() - 1.0);
    for _ in 0..80 {
        let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if mean_sq(x1) <= mean_sq(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    Ok(mean_sq(0.5 * (lo + hi)).sqrt() / frame.t)
}

/// Smallest `z_top − z_bottom` between the TOP and BOTTOM sheets over
/// `face`, sampled at the TOP sheet's vertices. `None` if the face is not doubled.
pub fn sheet_separation(meshes: &[TriMesh], c: &SheetComplex, face: usize) -> Option<f64> {
    let top = c.sheet_of(face, Layer::Top)?;
    let bottom = c.sheet_of(face, Layer::Bottom)?;
    let collect = |s: usize| -> Vec<[Point3; 3]> {
        meshes
            .iter()
            .flat_map(|m| {
                m.triangles
                    .iter()
                    .zip(&m.triangle_sheet)
                    .filter(move |(_, &ts)| ts == Some(s))
                    .map(move |(t, _)| t.map(|i| m.vertices[i]))
            })
            .collect()
    };
    let (tt, bt) = (collect(top), collect(bottom));
    let mut gap = f64::INFINITY;
    for q in tt.iter().flatten() {
        for tri in &bt {
            if let Some(z) = interpolate_z(tri, q.xy()) {
                gap = gap.min(q.z - z);
            }
        }
    }
    gap.is_finite().then_some(gap)
}

fn interpolate_z(t: &[Point3; 3], q: Point2) -> Option<f64> {
    let (a, b, c) = (t[0].xy(), t[1].xy(), t[2].xy());
    let d = (b - a).cross(c - a);
    if d.abs() < 1e-300 {
        return None;
    }
    let l1 = (q - a).cross(c - a) / d;
    let l2 = (b - a).cross(q - a) / d;
    let l0 = 1.0 - l1 - l2;
    let eps = 1e-12;
    (l0 >= -eps && l1 >= -eps && l2 >= -eps).then(|| l0 * t[0].z + l1 * t[1].z + l2 * t[2].z)
}

/// Pairs of non-adjacent triangles that intersect, found through a uniform
/// spatial hash with cell size `cell`. Empty for an embedded mesh.
pub fn self_intersections(mesh: &TriMesh, cell: f64) -> Vec<(usize, usize)> {
    let key = |p: Point3| ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64, (p.z / cell).floor() as i64);
    let mut grid: BTreeMap<(i64, i64, i64), Vec<usize>> = BTreeMap::new();
    for (f, t) in mesh.triangles.iter().enumerate() {
        let p = t.map(|i| mesh.vertices[i]);
        let lo = key(Point3 { x: p[0].x.min(p[1].x).min(p[2].x), y: p[0].y.min(p[1].y).min(p[2].y), z: p[0].z.min(p[1].z).min(p[2].z) });
        let hi = key(Point3 { x: p[0].x.max(p[1].x).max(p[2].x), y: p[0].y.max(p[1].y).max(p[2].y), z: p[0].z.max(p[1].z).max(p[2].z) });
        for i in lo.0..=hi.0 {
            for j in lo.1..=hi.1 {
                for k in lo.2..=hi.2 {
                    grid.entry((i, j, k)).or_default().push(f);
                }
            }
        }
    }
    let mut out = alloc::collections::BTreeSet::new();
    for cellv in grid.values() {
        for (a, &f) in cellv.iter().enumerate() {
            for &g in &cellv[a + 1..] {
                let (tf, tg) = (mesh.triangles[f], mesh.triangles[g]);
                if tf.iter().any(|v| tg.contains(v)) {
                    continue;
                }
                let pf = tf.map(|i| mesh.vertices[i]);
                let pg = tg.map(|i| mesh.vertices[i]);
                if triangles_intersect(&pf, &pg) {
                    out.insert((f.min(g), f.max(g)));
                }
            }
        }
    }
    out.into_iter().collect()
}

fn segment_hits_triangle(p: Point3, q: Point3, t: &[Point3; 3]) -> bool {
    let e1 = t[1] - t[0];
    let e2 = t[2] - t[0];
    let d = q - p;
    let h = d.cross(e2);
    let a = e1.dot(h);
    if a.abs() < 1e-300 {
        return false;
    }
    let s = p - t[0];
    let u = s.dot(h) / a;
    if !(0.0..=1.0).contains(&u) {
        return false;
    }
    let qv = s.cross(e1);
    let v = d.dot(qv) / a;
    if v < 0.0 || u + v > 1.0 {
        return false;
    }
    let r = e2.dot(qv) / a;
    (0.0..=1.0).contains(&r)
}

fn triangles_intersect(a: &[Point3; 3], b: &[Point3; 3]) -> bool {
    (0..3).any(|k| segment_hits_triangle(a[k], a[(k + 1) % 3], b) || segment_hits_triangle(b[k], b[(k + 1) % 3], a))
}
