//! The abstract surface obtained by stacking sheets over faces and gluing
//! them along curves and across crossings.
//!
//! Cell counts here are made directly from the glued pieces (corners
//! identified by union-find), so they serve as an independent check on the
//! closed-form Euler characteristic of [`crate::varifold::compute_stats`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::arrangement::{Arrangement, Family};
use crate::error::{Error, Result};
use crate::varifold::{classify_crossing, edge_multiplicity, CrossingType, Varifold};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Layer {
    Only,
    Top,
    Bottom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sheet {
    pub face: usize,
    pub layer: Layer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeamKind {
    SmoothContinuation,
    HelicoidalBand,
    Boundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeamSite {
    Edge(usize),
    Crossing(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Seam {
    pub kind: SeamKind,
    pub site: SeamSite,
    pub sheets: Vec<usize>,
}

/// What a sheet meets along one of its boundary half-edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeRole {
    /// The sheet ends on the curve: at height 0 for family A, `t` for B.
    Boundary(Family),
    /// The sheet continues smoothly into `sheet` across the twin half-edge.
    Continuation { sheet: usize },
}

#[derive(Clone, Debug)]
pub struct SheetComplex<'a> {
    pub arrangement: &'a Arrangement,
    pub varifold: Varifold,
    pub sheets: Vec<Sheet>,
    pub seams: Vec<Seam>,
    pub crossing_types: Vec<CrossingType>,
    /// Sheets over each face, indexed `[Only|Top, Bottom]`.
    face_sheets: Vec<[Option<usize>; 2]>,
}

impl<'a> SheetComplex<'a> {
    pub fn sheet_of(&self, face: usize, layer: Layer) -> Option<usize> {
        match layer {
            Layer::Only | Layer::Top => self.face_sheets[face][0].filter(|&s| self.sheets[s].layer == layer),
            Layer::Bottom => self.face_sheets[face][1],
        }
    }

    pub fn sheets_over(&self, face: usize) -> impl Iterator<Item = usize> + '_ {
        self.face_sheets[face].iter().flatten().copied()
    }

    /// Role of half-edge `h` (which must bound the face of `sheet`) for that sheet.
    pub fn edge_role(&self, sheet: usize, h: usize) -> EdgeRole {
        let arr = self.arrangement;
        let he = &arr.half_edges[h];
        let edge = &arr.edges[he.edge];
        let other_face = arr.half_edges[he.twin].face;
        match self.sheets[sheet].layer {
            Layer::Only => match self.varifold.multiplicity(other_face) {
                0 => EdgeRole::Boundary(edge.family),
                _ => {
                    let layer = match edge.family {
                        Family::A => Layer::Top,
                        Family::B => Layer::Bottom,
                    };
                    EdgeRole::Continuation { sheet: self.sheet_of(other_face, layer).expect("doubled neighbour") }
                }
            },
            layer => {
                let continues = matches!((layer, edge.family), (Layer::Top, Family::A) | (Layer::Bottom, Family::B));
                if continues {
                    EdgeRole::Continuation { sheet: self.sheet_of(other_face, Layer::Only).expect("single neighbour") }
                } else {
                    EdgeRole::Boundary(edge.family)
                }
            }
        }
    }

    /// The two single sheets joined by the band at a helicoidal crossing,
    /// in the counterclockwise order of their faces around the crossing.
    pub fn band_sheets(&self, crossing: usize) -> Option<[usize; 2]> {
        self.seams.iter().find_map(|s| match (s.kind, s.site) {
            (SeamKind::HelicoidalBand, SeamSite::Crossing(x)) if x == crossing => Some([s.sheets[0], s.sheets[1]]),
            _ => None,
        })
    }
}

pub fn build_complex<'a>(arr: &'a Arrangement, v: &Varifold) -> Result<SheetComplex<'a>> {
    let mut sheets = Vec::new();
    let mut face_sheets = vec![[None, None]; arr.faces.len()];
    for f in &arr.faces {
        match v.multiplicity(f.id) {
            0 => {}
            1 => {
                face_sheets[f.id][0] = Some(sheets.len());
                sheets.push(Sheet { face: f.id, layer: Layer::Only });
            }
            2 => {
                face_sheets[f.id] = [Some(sheets.len()), Some(sheets.len() + 1)];
                sheets.push(Sheet { face: f.id, layer: Layer::Top });
                sheets.push(Sheet { face: f.id, layer: Layer::Bottom });
            }
            m => return Err(Error::SeamBookkeeping(format!("face {} has multiplicity {m}", f.id))),
        }
    }
    let mut crossing_types = Vec::with_capacity(arr.crossings.len());
    for x in 0..arr.crossings.len() {
        crossing_types.push(classify_crossing(arr, v, x)?);
    }
    let mut c = SheetComplex {
        arrangement: arr,
        varifold: v.clone(),
        sheets,
        seams: Vec::new(),
        crossing_types,
        face_sheets,
    };

    for (e, edge) in arr.edges.iter().enumerate() {
        let (hi, lo) = {
            let (l, r) = (edge.left_face, edge.right_face);
            if v.multiplicity(l) >= v.multiplicity(r) {
                (l, r)
            } else {
                (r, l)
            }
        };
        match edge_multiplicity(arr, v, e) {
            1 => {
                let s = c.sheet_of(hi, Layer::Only).ok_or_else(|| Error::SeamBookkeeping(format!("edge {e}")))?;
                c.seams.push(Seam { kind: SeamKind::Boundary, site: SeamSite::Edge(e), sheets: vec![s] });
            }
            _ => {
                let (cont, stop) = match edge.family {
                    Family::A => (Layer::Top, Layer::Bottom),
                    Family::B => (Layer::Bottom, Layer::Top),
                };
                let single = c.sheet_of(lo, Layer::Only);
                let (Some(single), Some(sc), Some(ss)) = (single, c.sheet_of(hi, cont), c.sheet_of(hi, stop)) else {
                    return Err(Error::SeamBookkeeping(format!("doubled edge {e} lacks sheets")));
                };
                c.seams.push(Seam { kind: SeamKind::SmoothContinuation, site: SeamSite::Edge(e), sheets: vec![sc, single] });
                c.seams.push(Seam { kind: SeamKind::Boundary, site: SeamSite::Edge(e), sheets: vec![ss] });
            }
        }
    }
    for x in 0..arr.crossings.len() {
        if c.crossing_types[x] != CrossingType::Helicoidal {
            continue;
        }
        let faces = arr.crossing_faces(x);
        let ones: Vec<usize> = faces.iter().copied().filter(|&f| v.multiplicity(f) == 1).collect();
        let [f, g] = ones[..] else {
            return Err(Error::SeamBookkeeping(format!("helicoidal crossing {x} without two single faces")));
        };
        let (s, r) = (c.sheet_of(f, Layer::Only).unwrap(), c.sheet_of(g, Layer::Only).unwrap());
        c.seams.push(Seam { kind: SeamKind::HelicoidalBand, site: SeamSite::Crossing(x), sheets: vec![s, r] });
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComponentTopology {
    pub chi: i64,
    pub boundary_loops: usize,
    pub genus: usize,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// The glued cell structure, assembled piece by piece.
struct Cells {
    /// Vertex class of every cell vertex, per component.
    vertex_comp: Vec<Option<usize>>,
    /// (endpoint classes, component, is_boundary) for every 1-cell.
    edges: Vec<(usize, usize, usize, bool)>,
    /// Component of every 2-cell.
    faces: Vec<usize>,
    components: usize,
}

fn glue(c: &SheetComplex) -> Result<Cells> {
    let arr = c.arrangement;
    let nh = arr.half_edges.len();
    let ns = c.sheets.len();
    // Nodes: start(s, h) = 2 (s nh + h), end(s, h) = 2 (s nh + h) + 1.
    let node = |s: usize, h: usize, end: bool| 2 * (s * nh + h) + end as usize;
    let mut verts = UnionFind::new(2 * ns * nh);
    let mut sheet_uf = UnionFind::new(ns);
    let mut edges_raw: Vec<(usize, usize, usize, bool)> = Vec::new(); // (a, b, sheet, boundary)
    let mut faces = Vec::new();
    let mut used = vec![false; 2 * ns * nh];

    let loops_of = |s: usize| &arr.faces[c.sheets[s].face].boundary_loops;
    let helicoidal = |vertex: usize| match arr.vertices[vertex].kind {
        crate::arrangement::VertexKind::Crossing(x) => c.crossing_types[x] == CrossingType::Helicoidal,
        _ => false,
    };

    // Sheet-edges that continue into another sheet are glued once, from the side with the smaller id.
    for s in 0..ns {
        let loops = loops_of(s);
        for cycle in loops {
            for (k, &h) in cycle.iter().enumerate() {
                let prev = cycle[(k + cycle.len() - 1) % cycle.len()];
                used[node(s, h, false)] = true;
                used[node(s, h, true)] = true;
                let origin = arr.half_edges[h].origin;
                if helicoidal(origin) {
                    // Rim arc cut out of the sheet corner.
                    edges_raw.push((node(s, prev, true), node(s, h, false), s, false));
                } else {
                    verts.union(node(s, prev, true), node(s, h, false));
                }
                match c.edge_role(s, h) {
                    EdgeRole::Boundary(_) => edges_raw.push((node(s, h, false), node(s, h, true), s, true)),
                    EdgeRole::Continuation { sheet } => {
                        let tw = arr.half_edges[h].twin;
                        verts.union(node(s, h, false), node(sheet, tw, true));
                        verts.union(node(s, h, true), node(sheet, tw, false));
                        sheet_uf.union(s, sheet);
                        if s < sheet {
                            edges_raw.push((node(s, h, false), node(s, h, true), s, false));
                        }
                    }
                }
            }
        }
        // A sheet over a face with holes becomes a disk after cutting along bridges.
        for cycle in loops.iter().skip(1) {
            edges_raw.push((node(s, loops[0][0], false), node(s, cycle[0], false), s, false));
        }
        faces.push(s);
    }

    // Bands: one quad per helicoidal crossing, bounded by the two rims and
    // two boundary segments (along the A-line and the B-line).
    for seam in &c.seams {
        let (SeamKind::HelicoidalBand, SeamSite::Crossing(x)) = (seam.kind, seam.site) else { continue };
        let hs = arr.crossing_half_edges(x);
        let faces_x = arr.crossing_faces(x);
        let ones: Vec<usize> = (0..4).filter(|&k| c.varifold.multiplicity(faces_x[k]) == 1).collect();
        let [i, j] = ones[..] else {
            return Err(Error::SeamBookkeeping(format!("band at crossing {x}")));
        };
        // Face k leaves x along hs[k] and arrives along the twin of hs[k+1].
        let rim = |k: usize| -> (usize, usize, usize) {
            let s = c.sheet_of(faces_x[k], Layer::Only).expect("single sheet");
            let arrive = arr.half_edges[hs[(k + 1) % 4]].twin;
            (s, node(s, hs[k], false), node(s, arrive, true))
        };
        let (si, si_leave, si_arrive) = rim(i);
        let (sj, sj_leave, sj_arrive) = rim(j);
        sheet_uf.union(si, sj);
        // Opposite rays belong to the same curve; each boundary segment passes through x.
        edges_raw.push((si_leave, sj_leave, si, true));
        edges_raw.push((si_arrive, sj_arrive, si, true));
        faces.push(si);
    }

    let mut comp_id = vec![usize::MAX; ns];
    let mut components = 0;
    for s in 0..ns {
        let r = sheet_uf.find(s);
        if comp_id[r] == usize::MAX {
            comp_id[r] = components;
            components += 1;
        }
        comp_id[s] = comp_id[r];
    }
    let sheet_of_node = |n: usize| (n / 2) / nh;
    let mut vertex_comp = vec![None; 2 * ns * nh];
    for n in 0..2 * ns * nh {
        if used[n] {
            let r = verts.find(n);
            vertex_comp[r] = Some(comp_id[sheet_of_node(n)]);
        }
    }
    let edges = edges_raw
        .into_iter()
        .map(|(a, b, s, bd)| (verts.find(a), verts.find(b), comp_id[s], bd))
        .collect();
    let faces = faces.into_iter().map(|s| comp_id[s]).collect();
    Ok(Cells { vertex_comp, edges, faces, components })
}

/// `V - E + F` of the glued cell complex.
pub fn cw_euler_characteristic(c: &SheetComplex) -> Result<i64> {
    let cells = glue(c)?;
    let v = cells.vertex_comp.iter().filter(|x| x.is_some()).count() as i64;
    Ok(v - cells.edges.len() as i64 + cells.faces.len() as i64)
}

/// Euler characteristic, boundary loop count and genus of every connected component.
pub fn genus_and_boundaries(c: &SheetComplex) -> Result<Vec<ComponentTopology>> {
    let cells = glue(c)?;
    let nc = cells.components;
    let mut chi = vec![0i64; nc];
    for comp in cells.vertex_comp.iter().flatten() {
        chi[*comp] += 1;
    }
    for &(_, _, comp, _) in &cells.edges {
        chi[comp] -= 1;
    }
    for &comp in &cells.faces {
        chi[comp] += 1;
    }
    // Boundary loops: connected pieces of the boundary graph, every vertex of degree two.
    let nv = cells.vertex_comp.len();
    let mut deg = vec![0usize; nv];
    let mut uf = UnionFind::new(nv);
    for &(a, b, _, bd) in &cells.edges {
        if bd {
            deg[a] += 1;
            deg[b] += 1;
            uf.union(a, b);
        }
    }
    let mut boundary = vec![0usize; nc];
    for n in 0..nv {
        if deg[n] == 0 {
            continue;
        }
        if deg[n] != 2 {
            return Err(Error::SeamBookkeeping(format!("boundary vertex of degree {}", deg[n])));
        }
        if uf.find(n) == n {
            boundary[cells.vertex_comp[n].expect("boundary vertex has a component")] += 1;
        }
    }
    (0..nc)
        .map(|k| {
            let twice_g = 2 - chi[k] - boundary[k] as i64;
            if twice_g < 0 || twice_g % 2 != 0 {
                return Err(Error::NonIntegerGenus { component: k, chi: chi[k], boundary: boundary[k] });
            }
            Ok(ComponentTopology { chi: chi[k], boundary_loops: boundary[k], genus: (twice_g / 2) as usize })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{circle_ellipse, disjoint_circles, lens, square_and_diamond};
    use crate::varifold::{compute_stats, enumerate_varifolds};

    #[test]
    fn lens_flat_is_annulus() {
        let arr = lens(64);
        let vs = enumerate_varifolds(&arr);
        let c = build_complex(&arr, &vs[0]).unwrap();
        assert_eq!(c.sheets.len(), 2);
        assert_eq!(c.seams.iter().filter(|s| s.kind == SeamKind::HelicoidalBand).count(), 2);
        assert_eq!(cw_euler_characteristic(&c).unwrap(), 0);
        let topo = genus_and_boundaries(&c).unwrap();
        assert_eq!(topo, vec![ComponentTopology { chi: 0, boundary_loops: 2, genus: 0 }]);
    }

    #[test]
    fn lens_doubled_is_two_disks() {
        let arr = lens(64);
        let vs = enumerate_varifolds(&arr);
        let c = build_complex(&arr, &vs[1]).unwrap();
        assert_eq!(c.sheets.len(), 4);
        assert!(c.seams.iter().all(|s| s.kind != SeamKind::HelicoidalBand));
        assert_eq!(cw_euler_characteristic(&c).unwrap(), 2);
        let topo = genus_and_boundaries(&c).unwrap();
        assert_eq!(topo.len(), 2);
        assert!(topo.iter().all(|t| *t == ComponentTopology { chi: 1, boundary_loops: 1, genus: 0 }));
    }

    #[test]
    fn disjoint_disks() {
        let arr = disjoint_circles(32);
        let vs = enumerate_varifolds(&arr);
        let c = build_complex(&arr, &vs[0]).unwrap();
        assert!(c.seams.iter().all(|s| s.kind == SeamKind::Boundary));
        assert_eq!(genus_and_boundaries(&c).unwrap().len(), 2);
        assert_eq!(cw_euler_characteristic(&c).unwrap(), 2);
    }

    #[test]
    fn cw_count_matches_formula() {
        for arr in [lens(64), circle_ellipse(96), square_and_diamond(), disjoint_circles(16)] {
            for v in enumerate_varifolds(&arr) {
                let c = build_complex(&arr, &v).unwrap();
                let chi = cw_euler_characteristic(&c).unwrap();
                assert_eq!(chi, compute_stats(&arr, &v).unwrap().chi);
                let topo = genus_and_boundaries(&c).unwrap();
                assert_eq!(topo.iter().map(|t| t.chi).sum::<i64>(), chi);
                assert_eq!(topo.iter().map(|t| t.boundary_loops).sum::<usize>(), arr.curves.curves().len());
            }
        }
    }

    #[test]
    fn square_and_diamond_flat_genus() {
        let arr = square_and_diamond();
        let vs = enumerate_varifolds(&arr);
        let c = build_complex(&arr, &vs[0]).unwrap();
        let topo = genus_and_boundaries(&c).unwrap();
        // Eight bands join the eight triangular tips into one surface with two boundary curves.
        assert_eq!(topo, vec![ComponentTopology { chi: 0, boundary_loops: 2, genus: 0 }]);
    }

    #[test]
    fn edge_roles_follow_family() {
        let arr = lens(64);
        let vs = enumerate_varifolds(&arr);
        let c = build_complex(&arr, &vs[1]).unwrap();
        let lens_face = c.sheets.iter().find(|s| s.layer == Layer::Top).unwrap().face;
        let top = c.sheet_of(lens_face, Layer::Top).unwrap();
        let bottom = c.sheet_of(lens_face, Layer::Bottom).unwrap();
        for cycle in &arr.faces[lens_face].boundary_loops {
            for &h in cycle {
                let fam = arr.edges[arr.half_edges[h].edge].family;
                match fam {
                    Family::A => {
                        assert!(matches!(c.edge_role(top, h), EdgeRole::Continuation { .. }));
                        assert_eq!(c.edge_role(bottom, h), EdgeRole::Boundary(Family::A));
                    }
                    Family::B => {
                        assert_eq!(c.edge_role(top, h), EdgeRole::Boundary(Family::B));
                        assert!(matches!(c.edge_role(bottom, h), EdgeRole::Continuation { .. }));
                    }
                }
            }
        }
    }
}
