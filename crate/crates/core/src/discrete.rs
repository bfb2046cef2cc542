//! Discrete differential operators on triangle meshes: cotangent weights,
//! mixed vertex areas, angle defects and mean-curvature vectors.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geom::{corner_angle3, Point3};
use crate::mesh::TriMesh;

/// Edge list of a mesh with, per triangle, the edge opposite each corner.
#[derive(Clone, Debug)]
pub struct Topology {
    pub edges: Vec<(usize, usize)>,
    pub opposite: Vec<[usize; 3]>,
    /// Number of triangles on each edge.
    pub valence: Vec<u8>,
}

impl Topology {
    pub fn new(mesh: &TriMesh) -> Self {
        let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges = Vec::new();
        let mut valence = Vec::new();
        let mut opposite = Vec::with_capacity(mesh.triangles.len());
        for t in &mesh.triangles {
            let mut o = [0; 3];
            for k in 0..3 {
                let (a, b) = (t[(k + 1) % 3], t[(k + 2) % 3]);
                let key = (a.min(b), a.max(b));
                let id = *ids.entry(key).or_insert_with(|| {
                    edges.push(key);
                    valence.push(0);
                    edges.len() - 1
                });
                valence[id] += 1;
                o[k] = id;
            }
            opposite.push(o);
        }
        Topology { edges, opposite, valence }
    }
}

/// `w_e = (cot α + cot β) / 2` for every edge; the gradient of total area
/// with respect to vertex `i` is `Σ_j w_ij (x_i − x_j)`.
pub fn cotan_weights(mesh: &TriMesh, topo: &Topology) -> Result<Vec<f64>> {
    let mut w = vec![0.0; topo.edges.len()];
    for (f, t) in mesh.triangles.iter().enumerate() {
        let p = t.map(|i| mesh.vertices[i]);
        let dbl = (p[1] - p[0]).cross(p[2] - p[0]).norm();
        if !(dbl > 0.0) {
            return Err(Error::DegenerateTriangle { triangle: f });
        }
        for k in 0..3 {
            let (a, b) = (p[(k + 1) % 3] - p[k], p[(k + 2) % 3] - p[k]);
            w[topo.opposite[f][k]] += 0.5 * a.dot(b) / dbl;
        }
    }
    Ok(w)
}

/// Mixed (Voronoi, with the obtuse-triangle clamp) vertex areas.
pub fn mixed_areas(mesh: &TriMesh) -> Vec<f64> {
    let mut area = vec![0.0; mesh.vertices.len()];
    for t in &mesh.triangles {
        let p = t.map(|i| mesh.vertices[i]);
        let tri = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
        let ang = [0, 1, 2].map(|k| corner_angle3(p[(k + 2) % 3], p[k], p[(k + 1) % 3]));
        if let Some(obtuse) = (0..3).find(|&k| ang[k] > 0.5 * PI) {
            for k in 0..3 {
                area[t[k]] += if k == obtuse { 0.5 * tri } else { 0.25 * tri };
            }
        } else {
            for k in 0..3 {
                let (i, j) = ((k + 1) % 3, (k + 2) % 3);
                let cot_k = 1.0 / ang[k].tan();
                // Edge i–j is opposite corner k; its Voronoi share goes to i and j.
                let l2 = (p[i] - p[j]).norm_sq();
                area[t[i]] += 0.125 * l2 * cot_k;
                area[t[j]] += 0.125 * l2 * cot_k;
            }
        }
    }
    area
}

/// Sum of interior angles at each vertex.
pub fn angle_sums(mesh: &TriMesh) -> Vec<f64> {
    let mut s = vec![0.0; mesh.vertices.len()];
    for t in &mesh.triangles {
        let p = t.map(|i| mesh.vertices[i]);
        for k in 0..3 {
            s[t[k]] += corner_angle3(p[(k + 2) % 3], p[k], p[(k + 1) % 3]);
        }
    }
    s
}

/// Per-vertex curvature data. Boundary vertices (as found from the mesh
/// topology) carry geodesic turning instead of a defect.
#[derive(Clone, Debug)]
pub struct Curvature {
    /// Angle defect `2π − Σθ` at interior vertices, 0 on the boundary.
    pub defect: Vec<f64>,
    /// `π − Σθ` at boundary vertices, 0 inside.
    pub turning: Vec<f64>,
    pub area: Vec<f64>,
    /// Gaussian curvature `defect / area`.
    pub k: Vec<f64>,
    pub on_boundary: Vec<bool>,
}

pub fn boundary_vertices(mesh: &TriMesh, topo: &Topology) -> Vec<bool> {
    let mut b = vec![false; mesh.vertices.len()];
    for (e, &(i, j)) in topo.edges.iter().enumerate() {
        if topo.valence[e] == 1 {
            b[i] = true;
            b[j] = true;
        }
    }
    b
}

pub fn discrete_curvature(mesh: &TriMesh) -> Result<Curvature> {
    let topo = Topology::new(mesh);
    for (f, t) in mesh.triangles.iter().enumerate() {
        if !(mesh.triangle_area(t) > 0.0) {
            return Err(Error::DegenerateTriangle { triangle: f });
        }
    }
    let on_boundary = boundary_vertices(mesh, &topo);
    let sums = angle_sums(mesh);
    let area = mixed_areas(mesh);
    let n = mesh.vertices.len();
    let mut defect = vec![0.0; n];
    let mut turning = vec![0.0; n];
    let mut k = vec![0.0; n];
    for v in 0..n {
        if on_boundary[v] {
            turning[v] = PI - sums[v];
        } else if area[v] > 0.0 {
            defect[v] = 2.0 * PI - sums[v];
            k[v] = defect[v] / area[v];
        }
    }
    Ok(Curvature { defect, turning, area, k, on_boundary })
}

/// Area gradient `Σ_j w_ij (x_i − x_j)` at every vertex.
pub fn area_gradient(mesh: &TriMesh, topo: &Topology, w: &[f64]) -> Vec<Point3> {
    let mut g = vec![Point3::default(); mesh.vertices.len()];
    for (e, &(i, j)) in topo.edges.iter().enumerate() {
        let d = (mesh.vertices[i] - mesh.vertices[j]) * w[e];
        g[i] += d;
        g[j] -= d;
    }
    g
}

/// Area-weighted vertex normals (not normalized).
pub fn vertex_normals(mesh: &TriMesh) -> Vec<Point3> {
    let mut n = vec![Point3::default(); mesh.vertices.len()];
    for t in &mesh.triangles {
        let p = t.map(|i| mesh.vertices[i]);
        let f = (p[1] - p[0]).cross(p[2] - p[0]);
        for &v in t {
            n[v] += f;
        }
    }
    n
}

/// Scalar mean curvature `|⟨∇A_i, n_i⟩| / (2 A_i)` from precomputed
/// gradient, normals and areas. The tangential part of the cotangent
/// gradient reflects sampling, not shape, and is left out.
pub fn normal_mean_curvature(g: &[Point3], normals: &[Point3], area: &[f64], v: usize) -> f64 {
    let n = normals[v].normalized();
    if area[v] > 0.0 {
        g[v].dot(n).abs() / (2.0 * area[v])
    } else {
        f64::INFINITY
    }
}

/// Mean curvature at the vertices selected by `free` (0 elsewhere).
pub fn mean_curvature(mesh: &TriMesh, free: &[bool]) -> Result<Vec<f64>> {
    let topo = Topology::new(mesh);
    let w = cotan_weights(mesh, &topo)?;
    let g = area_gradient(mesh, &topo, &w);
    let a = mixed_areas(mesh);
    let n = vertex_normals(mesh);
    Ok((0..mesh.vertices.len()).map(|v| if free[v] { normal_mean_curvature(&g, &n, &a, v) } else { 0.0 }).collect())
}
