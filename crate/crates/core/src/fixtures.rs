//! Reference configurations and analytic surface samples used by tests,
//! the acceptance suite and the CLI examples.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::arrangement::{Arrangement, CurveSet, CurveShape, Tolerances};
use crate::geom::{p2, Point2, Point3};
use crate::mesh::TriMesh;

pub fn circle(cx: f64, cy: f64, r: f64, samples: usize) -> Vec<Point2> {
    CurveShape::Circle { center: p2(cx, cy), r, samples }.sample()
}

pub fn ellipse(cx: f64, cy: f64, rx: f64, ry: f64, rotation: f64, samples: usize) -> Vec<Point2> {
    CurveShape::Ellipse { center: p2(cx, cy), rx, ry, rotation, samples }.sample()
}

/// Regular polygon with `n` corners, optionally resampled so that every side
/// carries `per_side` segments.
pub fn regular_polygon(cx: f64, cy: f64, r: f64, n: usize, phase: f64, per_side: usize) -> Vec<Point2> {
    let corners: Vec<Point2> = (0..n)
        .map(|k| {
            let a = phase + 2.0 * PI * k as f64 / n as f64;
            p2(cx + r * a.cos(), cy + r * a.sin())
        })
        .collect();
    let mut out = Vec::with_capacity(n * per_side);
    for k in 0..n {
        let (a, b) = (corners[k], corners[(k + 1) % n]);
        for j in 0..per_side {
            out.push(a.lerp(b, j as f64 / per_side as f64));
        }
    }
    out
}

/// Star-shaped perturbation of a circle, `r(θ) = r (1 + Σ a_k cos(kθ + φ_k))`
/// with `modes[j] = (a_k, φ_k)` for `k = j + 2`. Simple as long as
/// `Σ |a_k| < 1`.
pub fn wobbly_circle(cx: f64, cy: f64, r: f64, modes: &[(f64, f64)], samples: usize) -> Vec<Point2> {
    (0..samples)
        .map(|i| {
            let th = 2.0 * PI * i as f64 / samples as f64;
            let s: f64 = modes.iter().enumerate().map(|(j, &(a, ph))| a * ((j + 2) as f64 * th + ph).cos()).sum();
            let rr = r * (1.0 + s);
            p2(cx + rr * th.cos(), cy + rr * th.sin())
        })
        .collect()
}

fn build(a: Vec<Vec<Point2>>, b: Vec<Vec<Point2>>) -> Arrangement {
    let set = CurveSet::new(a, b, Tolerances::default()).expect("fixture curves are valid");
    Arrangement::from_curves(set).expect("fixture arrangement builds")
}

/// Unit circles centred at `(0,0)` (family A) and `(1,0)` (family B).
pub fn lens_curves(samples: usize) -> (Vec<Vec<Point2>>, Vec<Vec<Point2>>) {
    (vec![circle(0.0, 0.0, 1.0, samples)], vec![circle(1.0, 0.0, 1.0, samples)])
}

pub fn lens(samples: usize) -> Arrangement {
    let (a, b) = lens_curves(samples);
    build(a, b)
}

pub fn disjoint_circles(samples: usize) -> Arrangement {
    build(vec![circle(0.0, 0.0, 1.0, samples)], vec![circle(3.0, 0.0, 1.0, samples)])
}

/// Unit circle (A) and an ellipse with semi-axes 1.5 and 0.6 (B): four crossings.
pub fn circle_ellipse_curves(samples: usize) -> (Vec<Vec<Point2>>, Vec<Vec<Point2>>) {
    (vec![circle(0.0, 0.0, 1.0, samples)], vec![ellipse(0.0, 0.0, 1.5, 0.6, 0.0, samples)])
}

pub fn circle_ellipse(samples: usize) -> Arrangement {
    let (a, b) = circle_ellipse_curves(samples);
    build(a, b)
}

/// Axis-aligned square `[-1,1]^2` (A) against the diamond `|x|+|y| = 1.3` (B).
pub fn square_and_diamond_curves() -> (Vec<Vec<Point2>>, Vec<Vec<Point2>>) {
    (
        vec![vec![p2(-1.0, -1.0), p2(1.0, -1.0), p2(1.0, 1.0), p2(-1.0, 1.0)]],
        vec![vec![p2(1.3, 0.0), p2(0.0, 1.3), p2(-1.3, 0.0), p2(0.0, -1.3)]],
    )
}

pub fn square_and_diamond() -> Arrangement {
    let (a, b) = square_and_diamond_curves();
    build(a, b)
}

// ---------------------------------------------------------------------------
// Analytic surface samples

/// Mesh of concentric rings: ring `k` (of `n`) is the closed curve
/// `embed(k, θ)`, with about `ring_len(k) / h` samples; ring 0 is a point.
fn ring_mesh(n: usize, h: f64, ring_len: impl Fn(usize) -> f64, embed: impl Fn(usize, f64) -> Point3) -> TriMesh {
    let mut verts = Vec::new();
    let mut rings: Vec<(usize, usize, f64)> = Vec::new(); // (first, count, phase)
    for k in 0..=n {
        let m = if k == 0 { 1 } else { ((ring_len(k) / h).round() as usize).max(6) };
        let phase = if k % 2 == 0 { 0.0 } else { PI / m as f64 };
        rings.push((verts.len(), m, phase));
        for j in 0..m {
            verts.push(embed(k, phase + 2.0 * PI * j as f64 / m as f64));
        }
    }
    let mut tris = Vec::new();
    for k in 0..n {
        let (a0, am, ap) = rings[k];
        let (b0, bm, bp) = rings[k + 1];
        if am == 1 {
            for j in 0..bm {
                tris.push([a0, b0 + j, b0 + (j + 1) % bm]);
            }
            continue;
        }
        // Zip the two rings by increasing angle.
        let ang = |phase: f64, m: usize, j: usize| phase + 2.0 * PI * j as f64 / m as f64;
        let (mut i, mut j) = (0, 0);
        while i < am || j < bm {
            let next_a = ang(ap, am, i + 1);
            let next_b = ang(bp, bm, j + 1);
            if j >= bm || (i < am && next_a <= next_b) {
                tris.push([a0 + i % am, b0 + j % bm, a0 + (i + 1) % am]);
                i += 1;
            } else {
                tris.push([a0 + i % am, b0 + j % bm, b0 + (j + 1) % bm]);
                j += 1;
            }
        }
    }
    let last = rings[n];
    let boundary: Vec<bool> = (0..verts.len()).map(|v| v >= last.0).collect();
    TriMesh::from_parts(verts, tris, &boundary)
}

/// Flat disk of radius `r` in the plane `z = 0`, edge length about `h`.
pub fn flat_disk(r: f64, h: f64) -> TriMesh {
    let n = ((r / h).ceil() as usize).max(1);
    ring_mesh(n, h, |k| 2.0 * PI * r * k as f64 / n as f64, |k, th| {
        let rr = r * k as f64 / n as f64;
        Point3 { x: rr * th.cos(), y: rr * th.sin(), z: 0.0 }
    })
}

/// Cap `{polar angle ≤ cap}` of the unit sphere, centred on the north
/// pole; `cap = π/2` is the hemisphere with the equator as boundary.
pub fn sphere_cap(cap: f64, h: f64) -> TriMesh {
    let n = ((cap / h).ceil() as usize).max(1);
    let polar = move |k: usize| cap * k as f64 / n as f64;
    ring_mesh(n, h, |k| 2.0 * PI * polar(k).sin(), |k, th| {
        let p = polar(k);
        Point3 { x: p.sin() * th.cos(), y: p.sin() * th.sin(), z: p.cos() }
    })
}

pub fn hemisphere(h: f64) -> TriMesh {
    sphere_cap(0.5 * PI, h)
}

/// Closed unit sphere: icosahedron subdivided `levels` times and projected.
pub fn unit_sphere(levels: u32) -> TriMesh {
    let g = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut verts: Vec<Point3> = [
        (-1.0, g, 0.0), (1.0, g, 0.0), (-1.0, -g, 0.0), (1.0, -g, 0.0),
        (0.0, -1.0, g), (0.0, 1.0, g), (0.0, -1.0, -g), (0.0, 1.0, -g),
        (g, 0.0, -1.0), (g, 0.0, 1.0), (-g, 0.0, -1.0), (-g, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Point3 { x, y, z }.normalized())
    .collect();
    let mut tris: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..levels {
        let mut mid = alloc::collections::BTreeMap::new();
        let mut next = Vec::with_capacity(tris.len() * 4);
        for t in &tris {
            let m = [0, 1, 2].map(|k| {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    verts.push(((verts[a] + verts[b]) * 0.5).normalized());
                    verts.len() - 1
                })
            });
            next.push([t[0], m[0], m[2]]);
            next.push([t[1], m[1], m[0]]);
            next.push([t[2], m[2], m[1]]);
            next.push([m[0], m[1], m[2]]);
        }
        tris = next;
    }
    let n = verts.len();
    TriMesh::from_parts(verts, tris, &vec![false; n])
}

/// Exact samples of the right helicoid `(s cos φ, s sin φ, c φ)` for
/// `s ∈ [−rho, rho]`, `φ ∈ [−span/2, span/2]`, on a grid with `2 n_s` by
/// `n_phi` cells; the grid border is the boundary.
pub fn helicoid_grid(rho: f64, pitch: f64, span: f64, n_s: usize, n_phi: usize) -> TriMesh {
    let ns = 2 * n_s;
    let id = |i: usize, j: usize| i * (n_phi + 1) + j;
    let mut verts = Vec::new();
    let mut boundary = Vec::new();
    for i in 0..=ns {
        let s = -rho + 2.0 * rho * i as f64 / ns as f64;
        for j in 0..=n_phi {
            let phi = -0.5 * span + span * j as f64 / n_phi as f64;
            verts.push(Point3 { x: s * phi.cos(), y: s * phi.sin(), z: pitch * phi });
            boundary.push(i == 0 || i == ns || j == 0 || j == n_phi);
        }
    }
    let mut tris = Vec::new();
    for i in 0..ns {
        for j in 0..n_phi {
            tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriMesh::from_parts(verts, tris, &boundary)
}
