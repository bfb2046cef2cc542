use atlas_core::fixtures::{flat_disk, hemisphere, sphere_cap};
use atlas_core::stability::{smallest_eigenvalue, JacobiProblem};
use nalgebra::{DMatrix, SymmetricEigen};

/// First zero of the Bessel function J₀, squared.
const J01_SQ: f64 = 2.404_825_557_695_773 * 2.404_825_557_695_773;

/// Smallest eigenvalue of `S u = λ M u` by a dense symmetric solve.
fn dense_lambda1(p: &JacobiProblem) -> f64 {
    let n = p.dim();
    let a = p.pencil();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            m[(i, j)] = v / (p.m[i] * p.m[j]).sqrt();
        }
    }
    SymmetricEigen::new(m).eigenvalues.min()
}

#[test]
fn hemisphere_first_eigenvalue_is_two() {
    let coarse = smallest_eigenvalue(&JacobiProblem::laplace(&hemisphere(0.05)).unwrap(), 1e-10).unwrap().value;
    let fine = smallest_eigenvalue(&JacobiProblem::laplace(&hemisphere(0.025)).unwrap(), 1e-10).unwrap().value;
    assert!((coarse - 2.0).abs() < 0.05 * 2.0, "h = 0.05: {coarse}");
    assert!((fine - 2.0).abs() < (coarse - 2.0).abs(), "no improvement: {coarse} -> {fine}");
}

#[test]
fn disk_matches_dense_solve_and_bessel() {
    let m = flat_disk(1.0, 0.12);
    let p = JacobiProblem::laplace(&m).unwrap();
    assert!(p.dim() < 600);
    let sparse = smallest_eigenvalue(&p, 1e-12).unwrap().value;
    let dense = dense_lambda1(&p);
    assert!((sparse - dense).abs() < 1e-8 * dense, "{sparse} vs {dense}");
    assert!((dense - J01_SQ).abs() < 0.05 * J01_SQ, "{dense} vs {J01_SQ}");
}

#[test]
fn jacobi_pencil_on_caps_matches_dense() {
    // Pulled back to the Gauss image the pencil is S − 2M; its sign flips
    // at the hemisphere.
    for (cap, positive) in [(1.2, true), (1.9, false)] {
        let p = JacobiProblem::gauss_image_pullback(&sphere_cap(cap, 0.15)).unwrap();
        let sparse = smallest_eigenvalue(&p, 1e-12).unwrap().value;
        let dense = dense_lambda1(&p);
        assert!((sparse - dense).abs() < 1e-7 * dense.abs().max(1.0), "{sparse} vs {dense}");
        assert_eq!(dense > 0.0, positive, "cap {cap}: {dense}");
    }
}
