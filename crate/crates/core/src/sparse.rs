//! Sparse symmetric matrices, envelope `LDLᵀ` with inertia, and the
//! smallest eigenpair of a pencil `(A, M)` with diagonal `M`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Symmetric matrix in compressed row form, both triangles stored.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries. The caller supplies both `(i, j)` and `(j, i)`.
    pub fn from_triplets(n: usize, mut trips: Vec<(usize, usize, f64)>) -> Self {
        trips.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0; n + 1];
        let mut col = Vec::with_capacity(trips.len());
        let mut val: Vec<f64> = Vec::with_capacity(trips.len());
        let mut last = None;
        for (i, j, v) in trips {
            if last == Some((i, j)) {
                *val.last_mut().unwrap() += v;
            } else {
                col.push(j);
                val.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { n, row_ptr, col, val }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col[r.clone()], &self.val[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        c.binary_search(&j).map(|k| v[k]).unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).map(|(&j, &a)| a * x[j]).sum()
            })
            .collect()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul_vec(x))
    }

    /// `self + s * diag(d)`.
    pub fn add_diagonal(&self, s: f64, d: &[f64]) -> CsrMatrix {
        let mut out = self.clone();
        for (i, &di) in d.iter().enumerate() {
            let (c, _) = self.row(i);
            match c.binary_search(&i) {
                Ok(k) => out.val[self.row_ptr[i] + k] += s * di,
                Err(_) => return self.add_diagonal_slow(s, d),
            }
        }
        out
    }

    fn add_diagonal_slow(&self, s: f64, d: &[f64]) -> CsrMatrix {
        let mut trips = self.triplets();
        trips.extend(d.iter().enumerate().map(|(i, &di)| (i, i, s * di)));
        CsrMatrix::from_triplets(self.n, trips)
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            let (c, v) = self.row(i);
            t.extend(c.iter().zip(v).map(|(&j, &a)| (i, j, a)));
        }
        t
    }

    /// Principal submatrix on `keep` (indices into `self`, in the new order).
    pub fn principal(&self, keep: &[usize]) -> CsrMatrix {
        let mut map = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            map[i] = k;
        }
        let mut trips = Vec::new();
        for (k, &i) in keep.iter().enumerate() {
            let (c, v) = self.row(i);
            for (&j, &a) in c.iter().zip(v) {
                if map[j] != usize::MAX {
                    trips.push((k, map[j], a));
                }
            }
        }
        CsrMatrix::from_triplets(keep.len(), trips)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Reverse Cuthill–McKee ordering; `perm[new] = old`.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs = |start: usize, visited: &mut Vec<bool>, out: &mut Vec<usize>| -> usize {
        // Returns the last vertex of the deepest level.
        let begin = out.len();
        visited[start] = true;
        out.push(start);
        let mut head = begin;
        while head < out.len() {
            let v = out[head];
            head += 1;
            let mut nbrs: Vec<usize> = a.row(v).0.iter().copied().filter(|&w| !visited[w]).collect();
            nbrs.sort_by_key(|&w| (degree[w], w));
            for w in nbrs {
                visited[w] = true;
                out.push(w);
            }
        }
        *out.last().unwrap()
    };
    for s in 0..n {
        if visited[s] {
            continue;
        }
        // Pseudo-peripheral start: one sweep from the minimum-degree vertex of the component.
        let mut scratch_visited = visited.clone();
        let mut comp = Vec::new();
        bfs(s, &mut scratch_visited, &mut comp);
        let start = comp.iter().copied().min_by_key(|&v| (degree[v], v)).unwrap();
        let mut sv = visited.clone();
        let mut tmp = Vec::new();
        let far = bfs(start, &mut sv, &mut tmp);
        bfs(far, &mut visited, &mut order);
    }
    order.reverse();
    order
}

/// Envelope `LDLᵀ` factorization of `P (A - shift M) Pᵀ`.
#[derive(Clone, Debug)]
pub struct Ldlt {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl Ldlt {
    pub fn factor(a: &CsrMatrix, perm: &[usize]) -> Result<Ldlt> {
        Self::factor_shifted(a, 0.0, &[], perm)
    }

    /// Factors `A - shift * diag(mass)`; an empty `mass` means no shift.
    pub fn factor_shifted(a: &CsrMatrix, shift: f64, mass: &[f64], perm: &[usize]) -> Result<Ldlt> {
        let n = a.dim();
        let mut inv = vec![0; n];
        for (k, &i) in perm.iter().enumerate() {
            inv[i] = k;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (k, &i) in perm.iter().enumerate() {
            for &j in a.row(i).0 {
                first[k] = first[k].min(inv[j]);
            }
        }
        let mut start = vec![0; n + 1];
        for k in 0..n {
            start[k + 1] = start[k] + (k - first[k]);
        }
        let mut l = vec![0.0; start[n]];
        let mut d = vec![0.0; n];
        let mut scale = 0.0f64;
        for k in 0..n {
            let i = perm[k];
            let (c, v) = a.row(i);
            let mut diag = 0.0;
            for (&j, &x) in c.iter().zip(v) {
                let jj = inv[j];
                if jj < k {
                    l[start[k] + jj - first[k]] = x;
                } else if jj == k {
                    diag = x;
                }
            }
            if !mass.is_empty() {
                diag -= shift * mass[i];
            }
            scale = scale.max(diag.abs());
            // Row k first holds u_j = L_kj D_j (finished rows j hold L), then L_kj.
            let fk = first[k];
            for j in fk..k {
                let fj = first[j].max(fk);
                let mut s = l[start[k] + j - fk];
                if fj < j {
                    let rk = &l[start[k] + fj - fk..start[k] + j - fk];
                    let rj = &l[start[j] + fj - first[j]..start[j] + j - first[j]];
                    s -= dot(rk, rj);
                }
                l[start[k] + j - fk] = s;
            }
            let mut dk = diag;
            for j in fk..k {
                let u = l[start[k] + j - fk];
                let lkj = u / d[j];
                dk -= u * lkj;
                l[start[k] + j - fk] = lkj;
            }
            if !(dk.abs() > 1e-14 * scale.max(f64::MIN_POSITIVE)) || !dk.is_finite() {
                return Err(Error::Factorization { row: k, pivot: dk });
            }
            d[k] = dk;
        }
        Ok(Ldlt { perm: perm.to_vec(), first, start, l, d })
    }

    /// Number of negative pivots, which equals the number of eigenvalues below the shift.
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for k in 0..n {
            let fk = self.first[k];
            let row = &self.l[self.start[k]..self.start[k + 1]];
            y[k] -= dot(row, &y[fk..k]);
        }
        for k in 0..n {
            y[k] /= self.d[k];
        }
        for k in (0..n).rev() {
            let fk = self.first[k];
            let yk = y[k];
            let row = &self.l[self.start[k]..self.start[k + 1]];
            for (j, &lkj) in row.iter().enumerate() {
                y[fk + j] -= lkj * yk;
            }
        }
        let mut x = vec![0.0; n];
        for (k, &i) in self.perm.iter().enumerate() {
            x[i] = y[k];
        }
        x
    }
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    /// Eigenvector normalized so that `uᵀ M u = 1`.
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub factorizations: usize,
    /// `‖A u - λ M u‖ / (‖A u‖ + |λ| ‖M u‖)`.
    pub residual: f64,
}

/// Gershgorin lower bound for the spectrum of `M^{-1/2} A M^{-1/2}`.
pub fn gershgorin_lower_bound(a: &CsrMatrix, mass: &[f64]) -> f64 {
    (0..a.dim())
        .map(|i| {
            let (c, v) = a.row(i);
            let mut off = 0.0;
            let mut diag = 0.0;
            for (&j, &x) in c.iter().zip(v) {
                if j == i {
                    diag = x / mass[i];
                } else {
                    off += x.abs() / (mass[i] * mass[j]).sqrt();
                }
            }
            diag - off
        })
        .fold(f64::INFINITY, f64::min)
}

/// Smallest eigenpair of `A u = λ M u`, `M = diag(mass) > 0`.
///
/// The eigenvalue is first bracketed by inertia counts (Sylvester's law on
/// `A - σM`), then refined by inverse iteration shifted just below the
/// bracket, which converges quickly because the shift is much closer to
/// `λ₁` than to `λ₂`. The start vector is all ones, so runs are reproducible.
pub fn smallest_eigenpair(a: &CsrMatrix, mass: &[f64], tol: f64, max_iters: usize) -> Result<EigenPair> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::EigenNonConvergence { iterations: 0, residual: f64::NAN });
    }
    let perm = rcm_ordering(a);
    let mut factorizations = 0;
    let mut count_below = |sigma: f64| -> Result<(usize, Option<Ldlt>)> {
        let mut s = sigma;
        for attempt in 0..8 {
            factorizations += 1;
            match Ldlt::factor_shifted(a, s, mass, &perm) {
                Ok(f) => return Ok((f.negative_pivots(), Some(f))),
                Err(e) if attempt == 7 => return Err(e),
                Err(_) => s = sigma + (1.0 + s.abs()) * 1e-10 * (attempt + 1) as f64,
            }
        }
        unreachable!()
    };

    let ones = vec![1.0; n];
    let mut lo = gershgorin_lower_bound(a, mass);
    let mut hi = a.quad_form(&ones) / dot(&ones, mass);
    let width0 = (hi - lo).abs().max(1e-300);
    let spread = hi.abs().max(lo.abs()).max(1e-300);
    lo -= 1e-12 * spread;
    hi += 1e-9 * spread + 1e-12 * width0;
    let (mut below_lo, mut f_lo) = count_below(lo)?;
    if below_lo != 0 {
        return Err(Error::Factorization { row: 0, pivot: lo });
    }
    // Bisect until the bracket is narrow relative to its location.
    let mut bisections = 0;
    while hi - lo > 1e-4 * hi.abs().max(lo.abs()).max(1e-8 * width0) && bisections < 200 {
        let mid = 0.5 * (lo + hi);
        let (k, f) = count_below(mid)?;
        if k == 0 {
            lo = mid;
            f_lo = f;
            below_lo = 0;
        } else {
            hi = mid;
        }
        bisections += 1;
    }
    let _ = below_lo;
    let fact = f_lo.expect("factorization at the lower bracket");

    let mut u = ones;
    normalize_m(&mut u, mass);
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iters {
        let rhs: Vec<f64> = u.iter().zip(mass).map(|(x, m)| x * m).collect();
        let mut w = fact.solve(&rhs);
        normalize_m(&mut w, mass);
        u = w;
        let au = a.mul_vec(&u);
        lambda = dot(&u, &au);
        let mut r2 = 0.0;
        let mut au2 = 0.0;
        let mut mu2 = 0.0;
        for i in 0..n {
            let mu = mass[i] * u[i];
            r2 += (au[i] - lambda * mu).powi(2);
            au2 += au[i] * au[i];
            mu2 += mu * mu;
        }
        residual = r2.sqrt() / (au2.sqrt() + lambda.abs() * mu2.sqrt()).max(f64::MIN_POSITIVE);
        if residual <= tol {
            // Fix the sign deterministically: largest-magnitude entry positive.
            let imax = (0..n).max_by(|&i, &j| u[i].abs().total_cmp(&u[j].abs())).unwrap();
            if u[imax] < 0.0 {
                u.iter_mut().for_each(|x| *x = -*x);
            }
            return Ok(EigenPair { value: lambda, vector: u, iterations: it, factorizations, residual });
        }
    }
    let _ = lambda;
    Err(Error::EigenNonConvergence { iterations: max_iters, residual })
}

fn normalize_m(u: &mut [f64], mass: &[f64]) {
    let s: f64 = u.iter().zip(mass).map(|(x, m)| x * x * m).sum::<f64>().sqrt();
    if s > 0.0 {
        u.iter_mut().for_each(|x| *x /= s);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn ldlt_solves_path_laplacian() {
        let a = path_laplacian(50);
        let perm = rcm_ordering(&a);
        let f = Ldlt::factor(&a, &perm).unwrap();
        assert_eq!(f.negative_pivots(), 0);
        let x_true: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.mul_vec(&x_true);
        let x = f.solve(&b);
        for (p, q) in x.iter().zip(&x_true) {
            assert!((p - q).abs() < 1e-10);
        }
    }

    #[test]
    fn inertia_counts_eigenvalues() {
        // Eigenvalues of the path Laplacian: 2 - 2 cos(k pi / (n+1)).
        let n = 20;
        let a = path_laplacian(n);
        let perm = rcm_ordering(&a);
        let mass = vec![1.0; n];
        for sigma in [0.1, 0.5, 1.1, 2.5, 3.9] {
            let expected = (1..=n)
                .filter(|&k| 2.0 - 2.0 * (k as f64 * core::f64::consts::PI / (n as f64 + 1.0)).cos() < sigma)
                .count();
            let f = Ldlt::factor_shifted(&a, sigma, &mass, &perm).unwrap();
            assert_eq!(f.negative_pivots(), expected, "sigma {sigma}");
        }
    }

    #[test]
    fn smallest_eigenvalue_of_path() {
        let n = 40;
        let a = path_laplacian(n);
        let mass = vec![1.0; n];
        let e = smallest_eigenpair(&a, &mass, 1e-10, 500).unwrap();
        let exact = 2.0 - 2.0 * (core::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!((e.value - exact).abs() < 1e-9 * exact.max(1.0), "{} vs {exact}", e.value);
        assert!(e.vector.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn rcm_is_permutation() {
        let a = path_laplacian(17);
        let mut p = rcm_ordering(&a);
        p.sort();
        assert_eq!(p, (0..17).collect::<Vec<_>>());
    }
}
