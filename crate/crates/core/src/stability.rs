//! Second variation of area: the Dirichlet Jacobi pencil `(S + 2C, M)` and
//! the Gauss-image sufficient condition for stability.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::discrete::{cotan_weights, discrete_curvature, Curvature, Topology};
use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::sparse::{smallest_eigenpair, CsrMatrix, EigenPair};

pub const DEFAULT_EIGEN_TOL: f64 = 1e-8;
pub const DEFAULT_EIGEN_ITERS: usize = 1000;

/// Operators restricted to the interior vertices (Dirichlet conditions).
#[derive(Clone, Debug)]
pub struct JacobiProblem {
    /// Mesh vertex of each unknown.
    pub interior: Vec<usize>,
    /// Cotangent stiffness.
    pub s: CsrMatrix,
    /// Lumped (mixed-area) mass.
    pub m: Vec<f64>,
    /// Lumped curvature mass `K_i A_i`.
    pub c: Vec<f64>,
}

impl JacobiProblem {
    fn with_curvature_mass(mesh: &TriMesh, curvature_mass: impl Fn(usize, &Curvature) -> f64) -> Result<Self> {
        let curv = discrete_curvature(mesh)?;
        let topo = Topology::new(mesh);
        let w = cotan_weights(mesh, &topo)?;
        let n = mesh.vertices.len();
        let mut id = vec![usize::MAX; n];
        let mut interior = Vec::new();
        for v in 0..n {
            if !mesh.is_boundary(v) && !curv.on_boundary[v] {
                id[v] = interior.len();
                interior.push(v);
            }
        }
        let mut trips = Vec::new();
        for (e, &(i, j)) in topo.edges.iter().enumerate() {
            let (a, b) = (id[i], id[j]);
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
        let s = CsrMatrix::from_triplets(interior.len(), trips);
        let m = interior.iter().map(|&v| curv.area[v]).collect();
        let c = interior.iter().map(|&v| curvature_mass(v, &curv)).collect();
        Ok(JacobiProblem { interior, s, m, c })
    }

    /// `Q(u) = ∫ |∇u|² + 2K u²` with `K` from angle defects.
    pub fn jacobi(mesh: &TriMesh) -> Result<Self> {
        Self::with_curvature_mass(mesh, |v, c| c.defect[v])
    }

    /// Plain Dirichlet Laplacian (`C = 0`).
    pub fn laplace(mesh: &TriMesh) -> Result<Self> {
        Self::with_curvature_mass(mesh, |_, _| 0.0)
    }

    /// Jacobi problem of a surface whose Gauss map covers `mesh` (a piece of
    /// the unit sphere) once, written in the pulled-back metric, where
    /// `K ≡ −1`: the pencil becomes `(S − 2M, M)`.
    pub fn gauss_image_pullback(mesh: &TriMesh) -> Result<Self> {
        Self::with_curvature_mass(mesh, |v, c| -c.area[v])
    }

    pub fn dim(&self) -> usize {
        self.interior.len()
    }

    /// `S + 2C`.
    pub fn pencil(&self) -> CsrMatrix {
        self.s.add_diagonal(2.0, &self.c)
    }

    /// `uᵀ (S + 2C) u`.
    pub fn quadratic_form(&self, u: &[f64]) -> f64 {
        self.s.quad_form(u) + 2.0 * u.iter().zip(&self.c).map(|(x, c)| c * x * x).sum::<f64>()
    }

    /// Largest row sum of `|M⁻¹ (S + 2C)|`, a bound on the pencil's spectral radius.
    pub fn norm_estimate(&self) -> f64 {
        let a = self.pencil();
        (0..a.dim()).map(|i| a.row(i).1.iter().map(|x| x.abs()).sum::<f64>() / self.m[i]).fold(0.0, f64::max)
    }
}

pub fn smallest_eigenvalue(p: &JacobiProblem, tol: f64) -> Result<EigenPair> {
    smallest_eigenpair(&p.pencil(), &p.m, tol, DEFAULT_EIGEN_ITERS)
}

/// `∫ |K| dA`, the area of the Gauss image counted with multiplicity.
pub fn gauss_image_area(mesh: &TriMesh) -> Result<f64> {
    let c = discrete_curvature(mesh)?;
    Ok(c.defect.iter().map(|d| d.abs()).sum())
}

/// `Σ K dA + Σ turning`, which equals `2π χ` for any triangulated surface.
pub fn gauss_bonnet_total(mesh: &TriMesh) -> Result<f64> {
    let c = discrete_curvature(mesh)?;
    Ok(c.defect.iter().sum::<f64>() + c.turning.iter().sum::<f64>())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Unstable,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub lambda1: f64,
    pub gauss_image_area: f64,
    /// `gauss_image_area < 2π`.
    pub stable_sufficient: bool,
    pub verdict: Verdict,
    pub margin: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Spectral verdict with margin (default `10 · tol · ‖pencil‖`), combined
/// with the Gauss-image test. The sufficient test passing while `λ₁` is
/// not positive is reported as an error.
pub fn verdict_for(p: &JacobiProblem, gauss_area: f64, margin: Option<f64>, tol: f64) -> Result<StabilityReport> {
    let pair = smallest_eigenvalue(p, tol)?;
    let margin = margin.unwrap_or_else(|| 10.0 * tol * p.norm_estimate());
    let stable_sufficient = gauss_area < 2.0 * PI;
    let spectral = if pair.value > margin {
        Verdict::Stable
    } else if pair.value < -margin {
        Verdict::Unstable
    } else {
        Verdict::Indeterminate
    };
    if stable_sufficient && spectral != Verdict::Stable {
        return Err(Error::StabilityConflict { gauss_area, lambda1: pair.value });
    }
    let verdict = if stable_sufficient { Verdict::Stable } else { spectral };
    Ok(StabilityReport {
        lambda1: pair.value,
        gauss_image_area: gauss_area,
        stable_sufficient,
        verdict,
        margin,
        iterations: pair.iterations,
        residual: pair.residual,
    })
}

pub fn stability_verdict(mesh: &TriMesh, margin: Option<f64>) -> Result<StabilityReport> {
    let p = JacobiProblem::jacobi(mesh)?;
    verdict_for(&p, gauss_image_area(mesh)?, margin, DEFAULT_EIGEN_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{flat_disk, helicoid_grid, sphere_cap, unit_sphere};

    #[test]
    fn flat_disk_is_stable() {
        let m = flat_disk(1.0, 0.1);
        let r = stability_verdict(&m, None).unwrap();
        assert_eq!(r.verdict, Verdict::Stable);
        assert!(r.gauss_image_area < 1e-12);
        let l = smallest_eigenvalue(&JacobiProblem::laplace(&m).unwrap(), 1e-8).unwrap();
        assert!((l.value - r.lambda1).abs() < 1e-9 * l.value);
    }

    #[test]
    fn closed_sphere_gauss_area() {
        let g = gauss_image_area(&unit_sphere(3)).unwrap();
        assert!((g - 4.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn helicoid_curvature_negative() {
        let m = helicoid_grid(0.5, 0.3, 1.5, 8, 12);
        let c = discrete_curvature(&m).unwrap();
        for v in 0..m.vertices.len() {
            if !c.on_boundary[v] {
                assert!(c.k[v] < 0.0, "K = {} at {v}", c.k[v]);
            }
        }
    }

    #[test]
    fn caps_beyond_hemisphere_are_unstable() {
        let big = sphere_cap(0.5 * PI + 0.3, 0.08);
        let p = JacobiProblem::gauss_image_pullback(&big).unwrap();
        let r = verdict_for(&p, 4.0 * PI, None, 1e-8).unwrap();
        assert_eq!(r.verdict, Verdict::Unstable);
        let small = sphere_cap(0.5 * PI - 0.3, 0.08);
        let p = JacobiProblem::gauss_image_pullback(&small).unwrap();
        assert_eq!(verdict_for(&p, 4.0 * PI, None, 1e-8).unwrap().verdict, Verdict::Stable);
    }

    #[test]
    fn gauss_bonnet_on_disk_and_cap() {
        for m in [flat_disk(1.0, 0.2), sphere_cap(1.0, 0.1)] {
            assert!((gauss_bonnet_total(&m).unwrap() - 2.0 * PI).abs() < 1e-9);
        }
    }
}
