//! Admissible multiplicity assignments over the faces of an arrangement.
//!
//! A varifold gives every face a multiplicity in `{0, 1, 2}`: the unbounded
//! face is empty, `Plus` faces carry one sheet, `Minus` faces carry zero or
//! two, neighbouring faces differ by exactly one, and every crossing keeps
//! at least one of its four faces empty. The only freedom is the choice of
//! which bounded `Minus` faces are doubled, subject to the crossing rule.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::arrangement::{Arrangement, RegionClass, Sign, VertexKind, UNBOUNDED_FACE};
use crate::error::{Error, Result};
use crate::sheet::{build_complex, genus_and_boundaries};

/// Largest number of bounded faces the exhaustive oracle accepts.
pub const ORACLE_FACE_LIMIT: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Varifold {
    multiplicities: Vec<u8>,
}

impl Varifold {
    pub fn new(multiplicities: Vec<u8>) -> Self {
        Varifold { multiplicities }
    }

    pub fn multiplicity(&self, face: usize) -> u8 {
        self.multiplicities[face]
    }

    pub fn multiplicities(&self) -> &[u8] {
        &self.multiplicities
    }

    /// Faces carrying two sheets.
    pub fn doubled_faces(&self) -> impl Iterator<Item = usize> + '_ {
        self.multiplicities.iter().enumerate().filter(|(_, &m)| m == 2).map(|(f, _)| f)
    }

    pub fn area(&self, arr: &Arrangement) -> f64 {
        arr.faces.iter().map(|f| self.multiplicities[f.id] as f64 * f.area).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Violation {
    Length,
    Unbounded,
    Sign(usize),
    Jump(usize),
    FullCrossing(usize),
}

fn first_violation(arr: &Arrangement, m: &[u8]) -> Option<Violation> {
    if m.len() != arr.faces.len() {
        return Some(Violation::Length);
    }
    if m[UNBOUNDED_FACE] != 0 {
        return Some(Violation::Unbounded);
    }
    for f in &arr.faces {
        let ok = match f.sign {
            Sign::Plus => m[f.id] == 1,
            Sign::Minus => m[f.id] == 0 || m[f.id] == 2,
        };
        if !ok {
            return Some(Violation::Sign(f.id));
        }
    }
    for (e, edge) in arr.edges.iter().enumerate() {
        if m[edge.left_face].abs_diff(m[edge.right_face]) != 1 {
            return Some(Violation::Jump(e));
        }
    }
    (0..arr.crossings.len())
        .find(|&x| arr.crossing_faces(x).iter().all(|&f| m[f] != 0))
        .map(Violation::FullCrossing)
}

/// Checks every admissibility rule directly against the definition.
pub fn check_admissible(arr: &Arrangement, v: &Varifold) -> Result<()> {
    let m = v.multiplicities();
    let msg = match first_violation(arr, m) {
        None => return Ok(()),
        Some(Violation::Length) => format!("expected {} faces, got {}", arr.faces.len(), m.len()),
        Some(Violation::Unbounded) => "unbounded face must be empty".into(),
        Some(Violation::Sign(f)) => format!("face {f} has multiplicity {}", m[f]),
        Some(Violation::Jump(e)) => format!("multiplicity jump across edge {e}"),
        Some(Violation::FullCrossing(x)) => format!("crossing {x} has no empty face"),
    };
    Err(Error::Inadmissible(msg))
}

/// All admissible varifolds, in lexicographic order of their multiplicity vectors.
///
/// Backtracks over the bounded `Minus` faces, highest crossing degree first;
/// doubling a face immediately empties every face it shares a crossing with.
pub fn enumerate_varifolds(arr: &Arrangement) -> Vec<Varifold> {
    let nf = arr.faces.len();
    let mut base = vec![0u8; nf];
    let mut free = Vec::new();
    for f in arr.bounded_faces() {
        match f.sign {
            Sign::Plus => base[f.id] = 1,
            Sign::Minus => free.push(f.id),
        }
    }
    // Conflicts: two Minus faces meeting at a crossing cannot both be doubled.
    let mut conflicts: Vec<Vec<usize>> = vec![Vec::new(); nf];
    let mut never_double = vec![false; nf];
    let mut degree = vec![0usize; nf];
    for x in 0..arr.crossings.len() {
        let faces = arr.crossing_faces(x);
        let minus: Vec<usize> = faces.iter().copied().filter(|&f| arr.faces[f].sign == Sign::Minus).collect();
        for &f in &minus {
            degree[f] += 1;
        }
        if let [f, g] = minus[..] {
            if f == g {
                never_double[f] = true;
            } else {
                conflicts[f].push(g);
                conflicts[g].push(f);
            }
        }
    }
    never_double[UNBOUNDED_FACE] = true;
    free.sort_by(|&a, &b| degree[b].cmp(&degree[a]).then(a.cmp(&b)));

    #[derive(Clone, Copy, PartialEq)]
    enum Domain {
        Open,
        Zero,
        Two,
    }
    let mut domain = vec![Domain::Open; nf];
    for f in 0..nf {
        if never_double[f] {
            domain[f] = Domain::Zero;
        }
    }

    fn search(
        k: usize,
        order: &[usize],
        conflicts: &[Vec<usize>],
        domain: &mut Vec<Domain>,
        base: &[u8],
        out: &mut Vec<Varifold>,
    ) {
        if k == order.len() {
            let mut m = base.to_vec();
            for (f, d) in domain.iter().enumerate() {
                if *d == Domain::Two {
                    m[f] = 2;
                }
            }
            out.push(Varifold::new(m));
            return;
        }
        let f = order[k];
        match domain[f] {
            Domain::Zero | Domain::Two => search(k + 1, order, conflicts, domain, base, out),
            Domain::Open => {
                domain[f] = Domain::Zero;
                search(k + 1, order, conflicts, domain, base, out);
                // Forward check: every conflicting face must still be able to stay empty.
                if conflicts[f].iter().all(|&g| domain[g] != Domain::Two) {
                    let forced: Vec<usize> =
                        conflicts[f].iter().copied().filter(|&g| domain[g] == Domain::Open).collect();
                    domain[f] = Domain::Two;
                    for &g in &forced {
                        domain[g] = Domain::Zero;
                    }
                    search(k + 1, order, conflicts, domain, base, out);
                    for &g in &forced {
                        domain[g] = Domain::Open;
                    }
                }
                domain[f] = Domain::Open;
            }
        }
    }

    let mut out = Vec::new();
    search(0, &free, &conflicts, &mut domain, &base, &mut out);
    out.sort();
    out.dedup();
    out
}

/// Exhaustive enumeration of `{0,1,2}^bounded` checked against the definition.
pub fn brute_force_enumerate(arr: &Arrangement) -> Result<Vec<Varifold>> {
    let bounded: Vec<usize> = arr.bounded_faces().map(|f| f.id).collect();
    if bounded.len() > ORACLE_FACE_LIMIT {
        return Err(Error::OracleLimit { faces: bounded.len(), limit: ORACLE_FACE_LIMIT });
    }
    let mut m = vec![0u8; arr.faces.len()];
    let mut out = Vec::new();
    loop {
        if first_violation(arr, &m).is_none() {
            out.push(Varifold::new(m.clone()));
        }
        // Odometer step over the bounded faces.
        let mut i = 0;
        loop {
            if i == bounded.len() {
                out.sort();
                return Ok(out);
            }
            let f = bounded[i];
            if m[f] < 2 {
                m[f] += 1;
                break;
            }
            m[f] = 0;
            i += 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CrossingType {
    /// Pattern `(0,1,0,1)`: one twisted band joins the two single sheets.
    Helicoidal,
    /// Pattern `(0,1,2,1)`: two disjoint graphs stacked over the crossing.
    DoubleGraph,
}

/// Multiplicities of the four faces around a crossing, counterclockwise,
/// rotated so that the first entry is the first empty face.
pub fn crossing_pattern(arr: &Arrangement, v: &Varifold, crossing: usize) -> [u8; 4] {
    let m = arr.crossing_faces(crossing).map(|f| v.multiplicity(f));
    let start = (0..4).find(|&i| m[i] == 0).unwrap_or(0);
    [m[start], m[(start + 1) % 4], m[(start + 2) % 4], m[(start + 3) % 4]]
}

pub fn classify_crossing(arr: &Arrangement, v: &Varifold, crossing: usize) -> Result<CrossingType> {
    match crossing_pattern(arr, v, crossing) {
        [0, 1, 0, 1] => Ok(CrossingType::Helicoidal),
        [0, 1, 2, 1] => Ok(CrossingType::DoubleGraph),
        pattern => Err(Error::CrossingPattern { crossing, pattern }),
    }
}

pub fn edge_multiplicity(arr: &Arrangement, v: &Varifold, edge: usize) -> u8 {
    let e = &arr.edges[edge];
    v.multiplicity(e.left_face).max(v.multiplicity(e.right_face))
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarifoldStats {
    pub v1: usize,
    pub v2: usize,
    pub e1: usize,
    pub e2: usize,
    pub f1: usize,
    pub f2: usize,
    /// Holes (boundary loops beyond the first) of single and doubled faces.
    pub h1: usize,
    pub h2: usize,
    /// Synthetic vertices on edges of multiplicity one and two.
    pub s1: usize,
    pub s2: usize,
    pub chi: i64,
    pub area: f64,
    pub fi_minus: usize,
    pub fo_minus: usize,
    pub crossing_types: Vec<CrossingType>,
}

/// Cell counts and the Euler characteristic
/// `(v1 + 2 v2) - (e1 + 2 e2) + (f1 + 2 f2)`.
///
/// Faces that are not disks (possible only when the curves do not form a
/// connected set) contribute their own Euler characteristic `1 - holes`;
/// synthetic vertices count with the multiplicity of their loop edge.
pub fn compute_stats(arr: &Arrangement, v: &Varifold) -> Result<VarifoldStats> {
    let mut crossing_types = Vec::with_capacity(arr.crossings.len());
    for x in 0..arr.crossings.len() {
        crossing_types.push(classify_crossing(arr, v, x)?);
    }
    let v1 = crossing_types.iter().filter(|&&t| t == CrossingType::Helicoidal).count();
    let v2 = crossing_types.len() - v1;
    let (mut e1, mut e2) = (0, 0);
    for e in 0..arr.edges.len() {
        match edge_multiplicity(arr, v, e) {
            1 => e1 += 1,
            _ => e2 += 1,
        }
    }
    let (mut f1, mut f2, mut h1, mut h2) = (0, 0, 0, 0);
    for f in arr.bounded_faces() {
        let holes = f.boundary_loops.len() - 1;
        match v.multiplicity(f.id) {
            1 => {
                f1 += 1;
                h1 += holes;
            }
            2 => {
                f2 += 1;
                h2 += holes;
            }
            _ => {}
        }
    }
    let (mut s1, mut s2) = (0, 0);
    for &sv in &arr.synthetic_vertices {
        let VertexKind::Synthetic(curve) = arr.vertices[sv].kind else { continue };
        let e = arr.edges.iter().position(|e| e.curve == curve).expect("loop edge");
        match edge_multiplicity(arr, v, e) {
            1 => s1 += 1,
            _ => s2 += 1,
        }
    }
    let vertices = (v1 + 2 * v2 + s1 + 2 * s2) as i64;
    let edges = (e1 + 2 * e2) as i64;
    let faces = (f1 as i64 - h1 as i64) + 2 * (f2 as i64 - h2 as i64);
    Ok(VarifoldStats {
        v1,
        v2,
        e1,
        e2,
        f1,
        f2,
        h1,
        h2,
        s1,
        s2,
        chi: vertices - edges + faces,
        area: v.area(arr),
        fi_minus: arr.fi_minus(),
        fo_minus: arr.fo_minus(),
        crossing_types,
    })
}

/// `2^fi + 2^fo`, counting bounded `Minus` faces inside both regions and outside both.
pub fn upper_bound(arr: &Arrangement) -> u128 {
    let pow = |k: usize| if k >= 127 { u128::MAX / 2 } else { 1u128 << k };
    pow(arr.count_sign(Sign::Minus, RegionClass::InsideBoth))
        .saturating_add(pow(arr.count_sign(Sign::Minus, RegionClass::OutsideBoth)))
}

/// Index of the unique varifold without doubled faces.
///
/// Also confirms that it has strictly the least area and the largest total
/// genus among `vs`.
pub fn least_area_varifold(arr: &Arrangement, vs: &[Varifold]) -> Result<usize> {
    let flat: Vec<usize> = (0..vs.len()).filter(|&i| vs[i].doubled_faces().next().is_none()).collect();
    let [idx] = flat[..] else {
        return Err(Error::LeastArea(format!("{} varifolds without doubled faces", flat.len())));
    };
    let area0 = vs[idx].area(arr);
    let genus = |v: &Varifold| -> Result<usize> {
        let c = build_complex(arr, v)?;
        Ok(genus_and_boundaries(&c)?.iter().map(|r| r.genus).sum())
    };
    let g0 = genus(&vs[idx])?;
    for (i, v) in vs.iter().enumerate() {
        if i == idx {
            continue;
        }
        if v.area(arr) <= area0 {
            return Err(Error::LeastArea(format!("varifold {i} has area {} <= {area0}", v.area(arr))));
        }
        if genus(v)? > g0 {
            return Err(Error::LeastArea(format!("varifold {i} has larger genus than the least-area one")));
        }
    }
    Ok(idx)
}
