use std::f64::consts::PI;

use atlas_core::arrangement::{Arrangement, CurveSet, Family, Sign, Tolerances};
use atlas_core::fixtures::wobbly_circle;
use atlas_core::geom::Point2;
use atlas_core::sheet::{build_complex, cw_euler_characteristic, genus_and_boundaries};
use atlas_core::varifold::{
    brute_force_enumerate, check_admissible, classify_crossing, compute_stats, enumerate_varifolds, upper_bound,
};
use proptest::prelude::*;

/// Winding number by summing signed angles; independent of the
/// ray-crossing test used inside the library.
fn winding(p: Point2, poly: &[Point2]) -> i32 {
    let mut total = 0.0;
    for i in 0..poly.len() {
        let a = poly[i] - p;
        let b = poly[(i + 1) % poly.len()] - p;
        total += a.cross(b).atan2(a.dot(b));
    }
    (total / (2.0 * PI)).round() as i32
}

prop_compose! {
    fn modes()(a2 in -0.12..0.12f64, p2 in 0.0..6.28f64, a3 in -0.08..0.08f64, p3 in 0.0..6.28f64) -> Vec<(f64, f64)> {
        vec![(a2, p2), (a3, p3)]
    }
}

prop_compose! {
    /// One perturbed circle per family, the second shifted and rescaled.
    fn pair()(ma in modes(), mb in modes(), dx in -1.6..1.6f64, dy in -1.6..1.6f64, r in 0.5..1.4f64)
        -> (Vec<Point2>, Vec<Point2>) {
        (wobbly_circle(0.0, 0.0, 1.0, &ma, 96), wobbly_circle(dx, dy, r, &mb, 96))
    }
}

fn arrangement(a: Vec<Vec<Point2>>, b: Vec<Vec<Point2>>) -> Option<Arrangement> {
    let set = CurveSet::new(a, b, Tolerances::default()).ok()?;
    Arrangement::from_curves(set).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subdivision_invariants((a, b) in pair()) {
        let Some(arr) = arrangement(vec![a], vec![b]) else { return Ok(()) };
        let (v, e, f) = (arr.vertices.len() as i64, arr.edges.len() as i64, arr.faces.len() as i64);
        prop_assert_eq!(v - e + f, 1 + arr.components as i64);
        for edge in &arr.edges {
            prop_assert_ne!(arr.faces[edge.left_face].sign, arr.faces[edge.right_face].sign);
        }
        for x in 0..arr.crossings.len() {
            let s = arr.crossing_faces(x).map(|f| arr.faces[f].sign);
            for k in 0..4 {
                prop_assert_ne!(s[k], s[(k + 1) % 4]);
            }
        }
        for face in arr.bounded_faces() {
            let inside: i32 = arr.curves.curves().iter().map(|c| winding(face.representative, &c.points)).sum();
            let expect = if inside % 2 == 0 { Sign::Minus } else { Sign::Plus };
            prop_assert_eq!(face.sign, expect);
            prop_assert!(face.area > 0.0);
        }
    }

    #[test]
    fn enumeration_agrees_with_oracle((a, b) in pair()) {
        let Some(arr) = arrangement(vec![a], vec![b]) else { return Ok(()) };
        let vs = enumerate_varifolds(&arr);
        prop_assert_eq!(&vs, &brute_force_enumerate(&arr).unwrap());
        prop_assert!((vs.len() as u128) <= upper_bound(&arr));
        prop_assert_eq!(vs.iter().filter(|v| v.doubled_faces().next().is_none()).count(), 1);
        for v in &vs {
            check_admissible(&arr, v).unwrap();
            for x in 0..arr.crossings.len() {
                prop_assert!(classify_crossing(&arr, v, x).is_ok());
            }
            let stats = compute_stats(&arr, v).unwrap();
            let c = build_complex(&arr, v).unwrap();
            prop_assert_eq!(stats.chi, cw_euler_characteristic(&c).unwrap());
            let comps = genus_and_boundaries(&c).unwrap();
            prop_assert_eq!(stats.chi, comps.iter().map(|t| t.chi).sum::<i64>());
        }
    }

    /// Listing the curves of a family in another order relabels faces but
    /// changes nothing else.
    #[test]
    fn curve_order_is_irrelevant(m in modes(), dx in 1.0..1.6f64, s in 0.4..0.8f64) {
        let a0 = wobbly_circle(-dx, 0.0, s, &m, 64);
        let a1 = wobbly_circle(dx, 0.0, s, &[], 64);
        let b = wobbly_circle(0.0, 0.0, dx, &[], 128);
        let (Some(x), Some(y)) =
            (arrangement(vec![a0.clone(), a1.clone()], vec![b.clone()]), arrangement(vec![a1, a0], vec![b]))
        else {
            return Ok(());
        };
        let profile = |arr: &Arrangement| {
            let mut f: Vec<(Sign, _, i64)> =
                arr.faces.iter().map(|f| (f.sign, f.region_class, (f.area * 1e6).round() as i64)).collect();
            f.sort();
            (arr.crossings.len(), arr.edges.len(), f, enumerate_varifolds(arr).len())
        };
        prop_assert_eq!(profile(&x), profile(&y));
    }
}

#[test]
fn family_curves_are_counterclockwise() {
    let mut cw = wobbly_circle(0.0, 0.0, 1.0, &[(0.1, 0.3)], 50);
    cw.reverse();
    let arr = arrangement(vec![cw], vec![wobbly_circle(1.0, 0.0, 1.0, &[], 50)]).unwrap();
    for c in arr.curves.family(Family::A) {
        assert!(atlas_core::geom::signed_area(&c.points) > 0.0);
    }
}
