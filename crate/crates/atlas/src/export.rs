//! OBJ meshes and SVG renders of arrangements.

use std::fmt::Write;

use atlas_core::arrangement::{Arrangement, Sign};
use atlas_core::mesh::TriMesh;
use atlas_core::varifold::Varifold;

/// Wavefront OBJ with `v x y z` lines and 1-based `f i j k` faces.
pub fn to_obj(mesh: &TriMesh) -> String {
    let mut s = String::with_capacity(40 * (mesh.vertices.len() + mesh.triangles.len()));
    for v in &mesh.vertices {
        writeln!(s, "v {:.17e} {:.17e} {:.17e}", v.x, v.y, v.z).unwrap();
    }
    for t in &mesh.triangles {
        writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
    }
    s
}

/// Parses the subset of OBJ written by [`to_obj`].
pub fn parse_obj(text: &str) -> Option<(Vec<[f64; 3]>, Vec<[usize; 3]>)> {
    let mut v = Vec::new();
    let mut f = Vec::new();
    for line in text.lines() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it.map(|x| x.parse().ok()).collect::<Option<_>>()?;
                v.push([*c.first()?, *c.get(1)?, *c.get(2)?]);
            }
            Some("f") => {
                let c: Vec<usize> = it.map(|x| x.parse().ok()).collect::<Option<_>>()?;
                if c.len() != 3 || c.iter().any(|&i| i == 0) {
                    return None;
                }
                f.push([c[0] - 1, c[1] - 1, c[2] - 1]);
            }
            _ => {}
        }
    }
    Some((v, f))
}

/// Faces filled by sign (MINUS gray, PLUS white), curves as strokes and
/// crossings as dots. With a varifold, faces are labelled by multiplicity.
pub fn arrangement_svg(arr: &Arrangement, labels: Option<&Varifold>) -> String {
    let bb = arr.curves.bbox();
    let pad = 0.05 * bb.diagonal().max(1e-9);
    let (x0, y0) = (bb.min.x - pad, bb.min.y - pad);
    let (w, h) = (bb.max.x - bb.min.x + 2.0 * pad, bb.max.y - bb.min.y + 2.0 * pad);
    let scale = 800.0 / w.max(h);
    // SVG's y axis points down.
    let px = |x: f64, y: f64| ((x - x0) * scale, (y0 + h - y) * scale);
    let stroke = 1.5;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.1}" height="{:.1}" viewBox="0 0 {:.1} {:.1}">"#,
        w * scale,
        h * scale,
        w * scale,
        h * scale
    )
    .unwrap();
    writeln!(s, r##"<rect width="100%" height="100%" fill="#b0b0b0"/>"##).unwrap();
    for f in arr.bounded_faces() {
        let fill = match f.sign {
            Sign::Plus => "#ffffff",
            Sign::Minus => "#b0b0b0",
        };
        let mut d = String::new();
        for cycle in &f.boundary_loops {
            for (k, p) in arr.loop_polygon(cycle).iter().enumerate() {
                let (x, y) = px(p.x, p.y);
                write!(d, "{}{x:.2},{y:.2} ", if k == 0 { "M" } else { "L" }).unwrap();
            }
            d.push_str("Z ");
        }
        writeln!(s, r#"<path d="{}" fill="{fill}" fill-rule="evenodd" stroke="none"/>"#, d.trim_end()).unwrap();
    }
    for c in arr.curves.curves() {
        let colour = match c.family {
            atlas_core::arrangement::Family::A => "#1f4e9c",
            atlas_core::arrangement::Family::B => "#b3261e",
        };
        let pts: Vec<String> = c
            .points
            .iter()
            .map(|p| {
                let (x, y) = px(p.x, p.y);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        writeln!(s, r#"<polygon points="{}" fill="none" stroke="{colour}" stroke-width="{stroke}"/>"#, pts.join(" "))
            .unwrap();
    }
    for x in &arr.crossings {
        let (cx, cy) = px(x.position.x, x.position.y);
        writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="black"/>"#).unwrap();
    }
    if let Some(v) = labels {
        for f in arr.bounded_faces() {
            let (x, y) = px(f.representative.x, f.representative.y);
            writeln!(
                s,
                r#"<text x="{x:.2}" y="{y:.2}" font-size="16" text-anchor="middle" font-family="sans-serif">{}</text>"#,
                v.multiplicity(f.id)
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}
