//! Mode-wise singular subspaces from sketches.
//!
//! * `Exact`: top-r left singular vectors of the unfolding `M_j`.
//! * `Direct`: the same, computed from the unfolding of one sketch.
//! * `Product`: top-r left singular vectors of `M_j(Â₁) M_j(Â₂)ᵀ`, where the
//!   two sketches are drawn independently from child seeds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::matrix_svd;
use crate::rng::mix64;
use crate::sketch::{sparsify, SketchReport};
use crate::spectral::{gap_from_values, is_gap_degenerate, top_left_singular_vectors, FactorBasis};
use crate::tensor::{DenseTensor, Matrix};

/// Stream constants for the two sketches of the product estimator.
/// Child seed `i` is `mix64(seed ^ PRODUCT_STREAMS[i])`.
pub const PRODUCT_STREAMS: [u64; 2] = [0x5851_F42D_4C95_7F2D, 0x1405_7B7E_F767_814F];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Direct,
    Product,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HosvdDiagnostics {
    /// `σ_r − σ_{r+1}` of the exact unfolding, or of `M_j M_jᵀ` for `Product`.
    pub eigengap: f64,
    /// Leading singular value of the same matrix.
    pub sigma_1: f64,
    pub gap_degenerate: bool,
    pub sketch_reports: Vec<SketchReport>,
}

#[derive(Debug, Clone)]
pub struct HosvdResult {
    pub mode: usize,
    pub rank: usize,
    pub basis: FactorBasis,
    pub method: Method,
    pub diagnostics: HosvdDiagnostics,
}

/// The two child seeds used by [`hosvd_product`].
pub fn product_seeds(seed: u64) -> (u64, u64) {
    (mix64(seed ^ PRODUCT_STREAMS[0]), mix64(seed ^ PRODUCT_STREAMS[1]))
}

/// Singular values of the exact unfolding, padded with zeros to its row count.
fn unfolding_spectrum(a: &DenseTensor, mode: usize) -> Result<Vec<f64>> {
    let m = a.matricize(mode)?;
    let mut s = matrix_svd(&m).s;
    s.resize(m.rows(), 0.0);
    Ok(s)
}

fn diagnostics(spectrum: &[f64], rank: usize, reports: Vec<SketchReport>) -> HosvdDiagnostics {
    let gap = gap_from_values(spectrum, rank);
    let sigma_1 = spectrum[0];
    HosvdDiagnostics {
        eigengap: gap,
        sigma_1,
        gap_degenerate: is_gap_degenerate(gap, sigma_1),
        sketch_reports: reports,
    }
}

fn check_rank(a: &DenseTensor, mode: usize, rank: usize) -> Result<()> {
    let rows = a.shape().unfolding(mode)?.rows;
    if rank == 0 || rank > rows {
        return Err(Error::Rank {
            rank,
            reason: format!("must be in 1..={rows}"),
        });
    }
    Ok(())
}

pub fn hosvd_exact(a: &DenseTensor, mode: usize, rank: usize) -> Result<HosvdResult> {
    check_rank(a, mode, rank)?;
    let m = a.matricize(mode)?;
    let basis = top_left_singular_vectors(&m, rank)?;
    let spectrum = unfolding_spectrum(a, mode)?;
    Ok(HosvdResult {
        mode,
        rank,
        basis,
        method: Method::Exact,
        diagnostics: diagnostics(&spectrum, rank, Vec::new()),
    })
}

/// Basis from a single sketch, without the exact-input diagnostics.
pub fn direct_basis(a: &DenseTensor, n: u64, mode: usize, rank: usize, seed: u64) -> Result<(FactorBasis, SketchReport)> {
    check_rank(a, mode, rank)?;
    let (sketch, report) = sparsify(a, n, seed)?;
    let m = sketch.matricize(mode)?.to_dense();
    Ok((top_left_singular_vectors(&m, rank)?, report))
}

/// `M_j(Â₁) M_j(Â₂)ᵀ` for the two child sketches of `seed`.
pub fn product_matrix(a: &DenseTensor, n: u64, mode: usize, seed: u64) -> Result<(Matrix, [SketchReport; 2])> {
    let (s1, s2) = product_seeds(seed);
    let (r1, r2) = rayon::join(|| sparsify(a, n, s1), || sparsify(a, n, s2));
    let (sk1, rep1) = r1?;
    let (sk2, rep2) = r2?;
    let p = sk1.matricize(mode)?.mul_transpose(&sk2.matricize(mode)?)?;
    Ok((p, [rep1, rep2]))
}

/// Basis from two independent sketches, without the exact-input diagnostics.
pub fn product_basis(a: &DenseTensor, n: u64, mode: usize, rank: usize, seed: u64) -> Result<(FactorBasis, [SketchReport; 2])> {
    check_rank(a, mode, rank)?;
    let (p, reports) = product_matrix(a, n, mode, seed)?;
    Ok((top_left_singular_vectors(&p, rank)?, reports))
}

pub fn hosvd_direct(a: &DenseTensor, n: u64, mode: usize, rank: usize, seed: u64) -> Result<HosvdResult> {
    let (basis, report) = direct_basis(a, n, mode, rank, seed)?;
    let spectrum = unfolding_spectrum(a, mode)?;
    Ok(HosvdResult {
        mode,
        rank,
        basis,
        method: Method::Direct,
        diagnostics: diagnostics(&spectrum, rank, vec![report]),
    })
}

pub fn hosvd_product(a: &DenseTensor, n: u64, mode: usize, rank: usize, seed: u64) -> Result<HosvdResult> {
    let (basis, reports) = product_basis(a, n, mode, rank, seed)?;
    // singular values of M Mᵀ are the squares of those of M
    let gram_spectrum: Vec<f64> = unfolding_spectrum(a, mode)?.iter().map(|s| s * s).collect();
    Ok(HosvdResult {
        mode,
        rank,
        basis,
        method: Method::Product,
        diagnostics: diagnostics(&gram_spectrum, rank, reports.to_vec()),
    })
}
