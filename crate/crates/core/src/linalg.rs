//! Dense matrix decompositions.
//!
//! The SVD is a one-sided (Hestenes) Jacobi iteration run on the rows of the
//! short side of the matrix. Rotating pairs of rows until they are mutually
//! orthogonal implicitly diagonalizes the small Gram matrix `M Mᵀ` without
//! ever forming it, so small singular values keep full relative accuracy.

use crate::tensor::Matrix;

const JACOBI_TOL: f64 = 1e-15;
const MAX_SWEEPS: usize = 100;

/// Thin SVD `M = U diag(s) Vᵀ` with `p = min(rows, cols)` triplets.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `rows × p`, orthonormal columns.
    pub u: Matrix,
    /// Descending, nonnegative.
    pub s: Vec<f64>,
    /// `cols × p`, orthonormal columns.
    pub v: Matrix,
}

impl Svd {
    pub fn reconstruct(&self) -> Matrix {
        let us = Matrix::from_fn(self.u.rows(), self.s.len(), |r, c| self.u.get(r, c) * self.s[c]);
        us.matmul(&self.v.transpose()).expect("factor dims agree")
    }
}

pub fn matrix_svd(m: &Matrix) -> Svd {
    if m.rows() <= m.cols() {
        wide_svd(m)
    } else {
        let t = wide_svd(&m.transpose());
        Svd { u: t.v, s: t.s, v: t.u }
    }
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> f64 {
    matrix_svd(m).s[0]
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rotate(a: &mut [f64], b: &mut [f64], c: f64, s: f64) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xp, yp) = (*x, *y);
        *x = c * xp - s * yp;
        *y = s * xp + c * yp;
    }
}

fn pair_mut(rows: &mut [Vec<f64>], p: usize, q: usize) -> (&mut Vec<f64>, &mut Vec<f64>) {
    debug_assert!(p < q);
    let (lo, hi) = rows.split_at_mut(q);
    (&mut lo[p], &mut hi[0])
}

fn wide_svd(m: &Matrix) -> Svd {
    let (rows, cols) = (m.rows(), m.cols());
    let mut w: Vec<Vec<f64>> = (0..rows).map(|r| m.row(r).to_vec()).collect();
    let mut j: Vec<Vec<f64>> = (0..rows)
        .map(|r| (0..rows).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..rows {
            for q in p + 1..rows {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (wp, wq) = pair_mut(&mut w, p, q);
                rotate(wp, wq, c, s);
                let (jp, jq) = pair_mut(&mut j, p, q);
                rotate(jp, jq, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = w.iter().map(|row| dot(row, row).sqrt()).collect();
    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));

    let s: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
    let u = Matrix::from_fn(rows, rows, |r, c| j[order[c]][r]);

    // right vectors: normalized rotated rows; null directions are completed
    let cutoff = s.first().copied().unwrap_or(0.0) * f64::EPSILON * cols as f64;
    let mut vcols: Vec<Vec<f64>> = Vec::with_capacity(rows);
    for (&i, &sigma) in order.iter().zip(&s) {
        if sigma > cutoff && sigma > 0.0 {
            vcols.push(w[i].iter().map(|x| x / sigma).collect());
        }
    }
    complete_orthonormal(&mut vcols, cols, rows);
    let v = Matrix::from_fn(cols, rows, |r, c| vcols[c][r]);
    Svd { u, s, v }
}

/// Extends `basis` (orthonormal vectors of length `dim`) to `target` vectors
/// using projected coordinate axes.
pub(crate) fn complete_orthonormal(basis: &mut Vec<Vec<f64>>, dim: usize, target: usize) {
    debug_assert!(target <= dim);
    while basis.len() < target {
        // squared residuals of the axes sum to dim - len, so at least one
        // axis reaches the average
        let floor = 0.999 * (dim - basis.len()) as f64 / dim as f64;
        let mut added = false;
        for axis in 0..dim {
            let mut v = vec![0.0; dim];
            v[axis] = 1.0;
            for _ in 0..2 {
                for b in basis.iter() {
                    let proj = dot(&v, b);
                    v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
                }
            }
            let sq = dot(&v, &v);
            if sq >= floor {
                let norm = sq.sqrt();
                v.iter_mut().for_each(|x| *x /= norm);
                basis.push(v);
                added = true;
                break;
            }
        }
        assert!(added, "basis completion failed");
    }
}

/// Orthonormalizes the columns of `m` (rows ≥ cols) by twice-iterated
/// modified Gram-Schmidt. Dependent columns are replaced by completion vectors.
pub fn orthonormalize_columns(m: &Matrix) -> Matrix {
    let (rows, cols) = (m.rows(), m.cols());
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cols);
    for c in 0..cols {
        let mut v = m.column(c);
        let start = dot(&v, &v).sqrt();
        for _ in 0..2 {
            for b in &basis {
                let proj = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= proj * y);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-10 * start.max(f64::MIN_POSITIVE) {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        } else {
            let target = basis.len() + 1;
            complete_orthonormal(&mut basis, rows, target);
        }
    }
    Matrix::from_fn(rows, cols, |r, c| basis[c][r])
}
