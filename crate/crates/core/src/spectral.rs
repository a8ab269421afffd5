//! Spectral norms and singular subspaces.
//!
//! The tensor spectral norm `sup ⟨A, u_1 ⊗ ⋯ ⊗ u_k⟩` over unit vectors is
//! estimated from below by alternating rank-one maximization (higher-order
//! power iteration) with several starts. The returned value is always an
//! attained inner product, so it never exceeds the true norm.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{complete_orthonormal, matrix_svd};
use crate::rng::{derive_seed, seeded_rng};
use crate::tensor::{DenseTensor, Matrix, Shape, SparseTensor};

/// Orthonormality tolerance enforced by [`FactorBasis::new`].
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Gaps at or below this fraction of `σ_1` are treated as degenerate.
pub const GAP_DEGENERACY_RATIO: f64 = 1e-12;

/// A `d × r` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorBasis {
    columns: Matrix,
}

impl FactorBasis {
    pub fn new(columns: Matrix) -> Result<Self> {
        if columns.cols() > columns.rows() {
            return Err(Error::Rank {
                rank: columns.cols(),
                reason: format!("exceeds dimension {}", columns.rows()),
            });
        }
        let gram = columns.t_matmul(&columns)?;
        let err = gram.sub(&Matrix::identity(columns.cols()))?.max_abs();
        if err > ORTHONORMAL_TOL {
            return Err(Error::Contract(format!(
                "columns are not orthonormal (max deviation {err:e})"
            )));
        }
        Ok(Self { columns })
    }

    pub(crate) fn from_orthonormal_unchecked(columns: Matrix) -> Self {
        Self { columns }
    }

    pub fn dim(&self) -> usize {
        self.columns.rows()
    }

    pub fn rank(&self) -> usize {
        self.columns.cols()
    }

    pub fn columns(&self) -> &Matrix {
        &self.columns
    }

    /// `U Uᵀ`.
    pub fn projector(&self) -> Matrix {
        self.columns
            .matmul(&self.columns.transpose())
            .expect("square by construction")
    }

    /// Right-multiplies by an `r × r` matrix, which is assumed orthogonal.
    pub fn rotated(&self, q: &Matrix) -> Result<FactorBasis> {
        FactorBasis::new(self.columns.matmul(q)?)
    }
}

/// Result of [`tensor_spectral_norm`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub unit_factors: Vec<Vec<f64>>,
    pub restarts_used: usize,
    pub iterations_used: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormSettings {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    /// Seeds the random starts.
    pub seed: u64,
}

impl Default for NormSettings {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iters: 200,
            tol: 1e-9,
            seed: 0,
        }
    }
}

impl NormSettings {
    fn validate(&self) -> Result<()> {
        if self.restarts < 1 || self.max_iters < 1 || self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Contract(format!(
                "need restarts >= 1, max_iters >= 1 and tol > 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// A tensor that can be contracted against one vector per mode.
pub trait Multilinear: Sync {
    fn shape(&self) -> &Shape;

    /// Contraction with every factor except the one at 0-based `mode`.
    fn contract_except(&self, mode: usize, factors: &[Vec<f64>]) -> Vec<f64>;

    /// `⟨A, u_1 ⊗ ⋯ ⊗ u_k⟩`.
    fn inner(&self, factors: &[Vec<f64>]) -> f64;

    /// Dense mode unfolding, 0-based mode.
    fn unfold(&self, mode: usize) -> Matrix;

    fn is_zero(&self) -> bool;
}

fn weight_except(idx: &[usize], factors: &[Vec<f64>], skip: usize) -> f64 {
    idx.iter()
        .zip(factors)
        .enumerate()
        .filter(|(s, _)| *s != skip)
        .map(|(_, (&i, u))| u[i])
        .product()
}

fn weight(idx: &[usize], factors: &[Vec<f64>]) -> f64 {
    idx.iter().zip(factors).map(|(&i, u)| u[i]).product()
}

impl Multilinear for DenseTensor {
    fn shape(&self) -> &Shape {
        DenseTensor::shape(self)
    }

    fn contract_except(&self, mode: usize, factors: &[Vec<f64>]) -> Vec<f64> {
        let shape = DenseTensor::shape(self);
        let mut out = vec![0.0; shape.dim(mode)];
        let mut idx = vec![0usize; shape.order()];
        for &v in self.values() {
            if v != 0.0 {
                out[idx[mode]] += v * weight_except(&idx, factors, mode);
            }
            odometer_step(&mut idx, shape.dims());
        }
        out
    }

    fn inner(&self, factors: &[Vec<f64>]) -> f64 {
        let shape = DenseTensor::shape(self);
        let mut idx = vec![0usize; shape.order()];
        let mut acc = 0.0;
        for &v in self.values() {
            if v != 0.0 {
                acc += v * weight(&idx, factors);
            }
            odometer_step(&mut idx, shape.dims());
        }
        acc
    }

    fn unfold(&self, mode: usize) -> Matrix {
        self.matricize(mode + 1).expect("mode in range")
    }

    fn is_zero(&self) -> bool {
        self.values().iter().all(|&v| v == 0.0)
    }
}

impl Multilinear for SparseTensor {
    fn shape(&self) -> &Shape {
        SparseTensor::shape(self)
    }

    fn contract_except(&self, mode: usize, factors: &[Vec<f64>]) -> Vec<f64> {
        let shape = SparseTensor::shape(self);
        let mut out = vec![0.0; shape.dim(mode)];
        let mut idx = vec![0usize; shape.order()];
        for &(l, v) in self.entries() {
            shape.decode_into(l, &mut idx);
            out[idx[mode]] += v * weight_except(&idx, factors, mode);
        }
        out
    }

    fn inner(&self, factors: &[Vec<f64>]) -> f64 {
        let shape = SparseTensor::shape(self);
        let mut idx = vec![0usize; shape.order()];
        self.entries()
            .iter()
            .map(|&(l, v)| {
                shape.decode_into(l, &mut idx);
                v * weight(&idx, factors)
            })
            .sum()
    }

    fn unfold(&self, mode: usize) -> Matrix {
        self.matricize(mode + 1).expect("mode in range").to_dense()
    }

    fn is_zero(&self) -> bool {
        self.nnz() == 0
    }
}

#[inline]
fn odometer_step(idx: &mut [usize], dims: &[usize]) {
    for (i, &d) in idx.iter_mut().zip(dims).rev() {
        *i += 1;
        if *i < d {
            return;
        }
        *i = 0;
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// One run of alternating rank-one maximization.
#[derive(Debug, Clone)]
pub struct RestartTrace {
    pub factors: Vec<Vec<f64>>,
    /// Objective before the first sweep, then after every sweep.
    pub objectives: Vec<f64>,
    pub converged: bool,
}

impl RestartTrace {
    pub fn sweeps(&self) -> usize {
        self.objectives.len() - 1
    }
}

/// Runs alternating updates from `factors` until the relative change of the
/// objective drops to `tol` or `max_iters` sweeps are done.
pub fn power_iteration<T: Multilinear + ?Sized>(
    a: &T,
    mut factors: Vec<Vec<f64>>,
    max_iters: usize,
    tol: f64,
) -> RestartTrace {
    let k = a.shape().order();
    let mut objectives = vec![a.inner(&factors)];
    let mut converged = false;
    for _ in 0..max_iters {
        for mode in 0..k {
            let mut g = a.contract_except(mode, &factors);
            if normalize(&mut g) > 0.0 {
                factors[mode] = g;
            }
        }
        let obj = a.inner(&factors);
        let prev = *objectives.last().expect("nonempty");
        objectives.push(obj);
        if (obj - prev).abs() <= tol * obj.abs() {
            converged = true;
            break;
        }
    }
    RestartTrace {
        factors,
        objectives,
        converged,
    }
}

fn hosvd_start<T: Multilinear + ?Sized>(a: &T) -> Vec<Vec<f64>> {
    (0..a.shape().order())
        .map(|mode| matrix_svd(&a.unfold(mode)).u.column(0))
        .collect()
}

fn random_start(shape: &Shape, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded_rng(seed);
    shape
        .dims()
        .iter()
        .map(|&d| {
            let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            if normalize(&mut v) == 0.0 {
                v[0] = 1.0;
            }
            v
        })
        .collect()
}

/// Lower-bound estimate of the tensor spectral norm.
///
/// Start 0 uses the leading left singular vector of every unfolding; the
/// remaining starts are Gaussian, seeded from `settings.seed` and the start
/// index, and run in parallel.
pub fn tensor_spectral_norm<T: Multilinear + ?Sized>(a: &T, settings: &NormSettings) -> Result<NormEstimate> {
    settings.validate()?;
    let shape = a.shape();
    if a.is_zero() {
        let unit_factors = shape
            .dims()
            .iter()
            .map(|&d| {
                let mut v = vec![0.0; d];
                v[0] = 1.0;
                v
            })
            .collect();
        return Ok(NormEstimate {
            value: 0.0,
            unit_factors,
            restarts_used: 0,
            iterations_used: 0,
            converged: true,
        });
    }
    let traces: Vec<RestartTrace> = (0..settings.restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                hosvd_start(a)
            } else {
                random_start(shape, derive_seed(settings.seed, r as u64))
            };
            power_iteration(a, start, settings.max_iters, settings.tol)
        })
        .collect();

    let iterations_used = traces.iter().map(RestartTrace::sweeps).sum();
    let best = traces
        .into_iter()
        .map(|t| (a.inner(&t.factors), t))
        .fold(None::<(f64, RestartTrace)>, |best, cur| match best {
            Some(b) if b.0 >= cur.0 => Some(b),
            _ => Some(cur),
        })
        .expect("at least one restart");
    Ok(NormEstimate {
        value: best.0,
        unit_factors: best.1.factors,
        restarts_used: settings.restarts,
        iterations_used,
        converged: best.1.converged,
    })
}

/// Left singular vectors of the `r` largest singular values.
pub fn top_left_singular_vectors(m: &Matrix, r: usize) -> Result<FactorBasis> {
    if r == 0 || r > m.rows() {
        return Err(Error::Rank {
            rank: r,
            reason: format!("must be in 1..={}", m.rows()),
        });
    }
    let svd = matrix_svd(m);
    if r <= svd.u.cols() {
        return Ok(FactorBasis::from_orthonormal_unchecked(svd.u.leading_columns(r)));
    }
    // tall matrix asked for more directions than it has singular values
    let mut cols: Vec<Vec<f64>> = (0..svd.u.cols()).map(|c| svd.u.column(c)).collect();
    complete_orthonormal(&mut cols, m.rows(), r);
    Ok(FactorBasis::from_orthonormal_unchecked(Matrix::from_fn(m.rows(), r, |i, c| cols[c][i])))
}

fn check_compatible(u: &FactorBasis, v: &FactorBasis) -> Result<()> {
    if u.dim() != v.dim() || u.rank() != v.rank() {
        return Err(Error::Shape(format!(
            "bases are {}x{} and {}x{}",
            u.dim(),
            u.rank(),
            v.dim(),
            v.rank()
        )));
    }
    Ok(())
}

fn residual_norm(u: &FactorBasis, v: &FactorBasis) -> f64 {
    let proj = u.columns().matmul(&u.columns().t_matmul(v.columns()).expect("dims checked")).expect("dims checked");
    let resid = v.columns().sub(&proj).expect("dims checked");
    matrix_svd(&resid).s[0]
}

/// Spectral distance `‖U Uᵀ − V Vᵀ‖` between two equal-rank subspaces.
///
/// Equal to `sqrt(1 − σ_min(UᵀV)²)`, but evaluated as `‖(I − U Uᵀ) V‖`, which
/// stays accurate when the subspaces nearly coincide.
pub fn subspace_distance(u: &FactorBasis, v: &FactorBasis) -> Result<f64> {
    check_compatible(u, v)?;
    let d = residual_norm(u, v).max(residual_norm(v, u));
    Ok(d.clamp(0.0, 1.0))
}

/// `sqrt(max(0, 1 − σ_min(UᵀV)²))`; loses accuracy below about 1e-8.
pub fn subspace_distance_from_cosines(u: &FactorBasis, v: &FactorBasis) -> Result<f64> {
    check_compatible(u, v)?;
    let c = u.columns().t_matmul(v.columns())?;
    let smin = *matrix_svd(&c).s.last().expect("rank >= 1");
    Ok((1.0 - smin * smin).max(0.0).sqrt())
}

/// `σ_r(M) − σ_{r+1}(M)`, with `σ_{r+1} = 0` at full rank.
pub fn eigengap(m: &Matrix, r: usize) -> Result<f64> {
    let p = m.rows().min(m.cols());
    if r == 0 || r > p {
        return Err(Error::Rank {
            rank: r,
            reason: format!("must be in 1..={p}"),
        });
    }
    let s = matrix_svd(m).s;
    Ok(gap_from_values(&s, r))
}

pub(crate) fn gap_from_values(s: &[f64], r: usize) -> f64 {
    let next = s.get(r).copied().unwrap_or(0.0);
    (s[r - 1] - next).max(0.0)
}

/// Whether `gap` is too small relative to `sigma_1` for subspace bounds to mean anything.
pub fn is_gap_degenerate(gap: f64, sigma_1: f64) -> bool {
    gap <= GAP_DEGENERACY_RATIO * sigma_1
}

/// `‖A‖_F² / value²`. Because the estimate is a lower bound on the norm,
/// this is an upper bound on the stable rank.
pub fn stable_rank(a: &DenseTensor, norm: &NormEstimate) -> Result<f64> {
    if norm.value.is_nan() || norm.value <= 0.0 {
        return Err(Error::Undefined("stable rank of a zero-norm tensor".into()));
    }
    let f = a.frobenius_norm();
    Ok(f * f / (norm.value * norm.value))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(d: &[usize]) -> Shape {
        Shape::new(d.to_vec()).unwrap()
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = seeded_rng(seed);
        Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
    }

    fn random_tensor(dims: &[usize], seed: u64) -> DenseTensor {
        let mut rng = seeded_rng(seed);
        DenseTensor::from_fn(shape(dims), |_| rng.sample(StandardNormal)).unwrap()
    }

    fn basis(m: Matrix) -> FactorBasis {
        FactorBasis::new(m).unwrap()
    }

    fn unit(d: usize, i: usize) -> Matrix {
        Matrix::from_fn(d, 1, |r, _| if r == i { 1.0 } else { 0.0 })
    }

    #[test]
    fn rank_one_norm_is_product_of_norms() {
        let u = [1.0, -2.0, 0.5];
        let v = [3.0, 1.0];
        let w = [0.2, 0.4, -1.0, 2.0];
        let a = DenseTensor::from_fn(shape(&[3, 2, 4]), |i| u[i[0]] * v[i[1]] * w[i[2]]).unwrap();
        let n = |x: &[f64]| x.iter().map(|y| y * y).sum::<f64>().sqrt();
        let want = n(&u) * n(&v) * n(&w);
        let est = tensor_spectral_norm(&a, &NormSettings::default()).unwrap();
        assert!((est.value - want).abs() <= 1e-10 * want);
        let sparse = tensor_spectral_norm(&a.to_sparse(), &NormSettings::default()).unwrap();
        assert!((sparse.value - want).abs() <= 1e-10 * want);
    }

    #[test]
    fn matrix_norm_matches_svd() {
        for seed in 0..10 {
            let m = random_matrix(8, 8, seed);
            let est = tensor_spectral_norm(&m.to_tensor(), &NormSettings { restarts: 5, ..Default::default() }).unwrap();
            let s1 = matrix_svd(&m).s[0];
            assert!((est.value - s1).abs() <= 1e-8 * s1, "{} vs {}", est.value, s1);
        }
    }

    /// Exhaustive grid over the unit sphere in R² for each of the three modes.
    fn orthogonal_diag_grid_max() -> f64 {
        let steps = (std::f64::consts::TAU / 1e-3) as usize;
        let angles: Vec<(f64, f64)> = (0..steps).map(|s| {
            let t = s as f64 * 1e-3;
            (t.cos(), t.sin())
        }).collect();
        // ⟨A, u⊗v⊗w⟩ = 2 u1 v1 w1 + u2 v2 w2; maximize over w in closed form
        let mut best: f64 = 0.0;
        for &(u1, u2) in &angles {
            for &(v1, v2) in &angles {
                let (x, y) = (2.0 * u1 * v1, u2 * v2);
                best = best.max((x * x + y * y).sqrt());
            }
        }
        best
    }

    #[test]
    fn orthogonal_diagonal_tensor() {
        let mut vals = vec![0.0; 8];
        vals[0] = 2.0;
        vals[7] = 1.0;
        let a = DenseTensor::new(shape(&[2, 2, 2]), vals).unwrap();
        let grid = orthogonal_diag_grid_max();
        assert!((grid - 2.0).abs() < 1e-6);
        let est = tensor_spectral_norm(&a, &NormSettings::default()).unwrap();
        assert!((est.value - 2.0).abs() < 1e-6);
        assert!((stable_rank(&a, &est).unwrap() - 1.25).abs() < 1e-5);
    }

    #[test]
    fn estimate_is_attained_inner_product() {
        let a = random_tensor(&[5, 6, 7], 3);
        let est = tensor_spectral_norm(&a, &NormSettings::default()).unwrap();
        for u in &est.unit_factors {
            let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
        let inner = a.inner(&est.unit_factors);
        assert!((inner - est.value).abs() <= 1e-12 * est.value);
        assert!(est.value <= a.frobenius_norm());
        assert_eq!(est.restarts_used, 10);
    }

    #[test]
    fn sweeps_are_monotone() {
        for seed in 0..8 {
            let a = random_tensor(&[4, 5, 3, 4], seed);
            let start = random_start(a.shape(), seed + 100);
            let trace = power_iteration(&a, start, 200, 1e-12);
            for w in trace.objectives[1..].windows(2) {
                assert!(w[1] >= w[0] - 1e-12 * w[0].abs(), "{:?}", w);
            }
        }
    }

    #[test]
    fn zero_tensor_norm() {
        let z = DenseTensor::zeros(shape(&[3, 3, 3]));
        let est = tensor_spectral_norm(&z, &NormSettings::default()).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(est.converged);
        assert!(matches!(stable_rank(&z, &est), Err(Error::Undefined(_))));
    }

    #[test]
    fn bad_settings_rejected() {
        let a = random_tensor(&[2, 2], 1);
        for s in [
            NormSettings { restarts: 0, ..Default::default() },
            NormSettings { max_iters: 0, ..Default::default() },
            NormSettings { tol: 0.0, ..Default::default() },
        ] {
            assert!(tensor_spectral_norm(&a, &s).is_err());
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let a = random_tensor(&[6, 6, 6], 9);
        let s = NormSettings { seed: 4, ..Default::default() };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        let e1 = one.install(|| tensor_spectral_norm(&a, &s).unwrap());
        let e8 = many.install(|| tensor_spectral_norm(&a, &s).unwrap());
        assert_eq!(e1, e8);
    }

    #[test]
    fn stable_rank_examples() {
        let eye = Matrix::identity(5).to_tensor();
        let est = tensor_spectral_norm(&eye, &NormSettings::default()).unwrap();
        assert!((stable_rank(&eye, &est).unwrap() - 5.0).abs() < 1e-8);
        let r1 = DenseTensor::from_fn(shape(&[3, 4, 2]), |i| (i[0] + 1) as f64 * (2.0 - i[1] as f64) * (i[2] as f64 + 0.5)).unwrap();
        let est = tensor_spectral_norm(&r1, &NormSettings::default()).unwrap();
        assert!((stable_rank(&r1, &est).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn top_vectors_examples() {
        let b = top_left_singular_vectors(&Matrix::from_diag(&[3.0, 2.0, 1.0]), 2).unwrap();
        let want = basis(Matrix::from_fn(3, 2, |r, c| if r == c { 1.0 } else { 0.0 }));
        assert!(subspace_distance(&b, &want).unwrap() < 1e-12);

        let x = [1.0, 2.0, -2.0];
        let y = [0.5, 1.0, 3.0, -1.0];
        let m = Matrix::from_fn(3, 4, |r, c| x[r] * y[c]);
        let b = top_left_singular_vectors(&m, 1).unwrap();
        let dot: f64 = (0..3).map(|i| b.columns().get(i, 0) * x[i] / 3.0).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-12);

        assert!(matches!(top_left_singular_vectors(&m, 4), Err(Error::Rank { .. })));
        assert!(matches!(top_left_singular_vectors(&m, 0), Err(Error::Rank { .. })));
    }

    #[test]
    fn top_vectors_of_tall_matrix_complete_the_basis() {
        let m = random_matrix(6, 2, 3);
        let b = top_left_singular_vectors(&m, 4).unwrap();
        assert_eq!(b.rank(), 4);
        FactorBasis::new(b.columns().clone()).unwrap();
    }

    #[test]
    fn subspace_distance_examples() {
        let q = crate::linalg::orthonormalize_columns(&random_matrix(7, 3, 5));
        let u = basis(q.clone());
        assert!(subspace_distance(&u, &u).unwrap() < 1e-12);
        let e1 = basis(unit(2, 0));
        let e2 = basis(unit(2, 1));
        assert!((subspace_distance(&e1, &e2).unwrap() - 1.0).abs() < 1e-15);
        let rot = crate::linalg::orthonormalize_columns(&random_matrix(3, 3, 6));
        let v = u.rotated(&rot).unwrap();
        assert!(subspace_distance(&u, &v).unwrap() < 1e-12);
        assert!(subspace_distance(&u, &e1).is_err());
    }

    #[test]
    fn eigengap_examples() {
        assert_eq!(eigengap(&Matrix::from_diag(&[3.0, 1.0]), 1).unwrap(), 2.0);
        let g = eigengap(&Matrix::identity(3), 1).unwrap();
        assert_eq!(g, 0.0);
        assert!(is_gap_degenerate(g, 1.0));
        assert_eq!(eigengap(&Matrix::from_diag(&[5.0, 4.0, 0.0]), 2).unwrap(), 4.0);
        assert_eq!(eigengap(&Matrix::from_diag(&[5.0, 4.0, 1.0]), 3).unwrap(), 1.0);
        assert!(eigengap(&Matrix::identity(3), 4).is_err());
        assert!(eigengap(&Matrix::identity(3), 0).is_err());
    }

    #[test]
    fn factor_basis_rejects_non_orthonormal() {
        assert!(FactorBasis::new(Matrix::from_fn(3, 2, |_, _| 1.0)).is_err());
        assert!(FactorBasis::new(Matrix::identity(2).scale(1.0 + 1e-8)).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn distance_properties(d in 2usize..9, seed in any::<u64>(), r_frac in 0.0f64..1.0) {
                let r = 1 + ((d - 1) as f64 * r_frac) as usize;
                let u = basis(crate::linalg::orthonormalize_columns(&random_matrix(d, r, seed)));
                let v = basis(crate::linalg::orthonormalize_columns(&random_matrix(d, r, seed ^ 1)));
                let duv = subspace_distance(&u, &v).unwrap();
                let dvu = subspace_distance(&v, &u).unwrap();
                prop_assert!((0.0..=1.0).contains(&duv));
                prop_assert_eq!(duv, dvu);
                let cos = subspace_distance_from_cosines(&u, &v).unwrap();
                prop_assert!((duv - cos).abs() < 1e-7);
                let proj = u.projector().sub(&v.projector()).unwrap();
                prop_assert!((duv - matrix_svd(&proj).s[0]).abs() < 1e-9);
                let q = crate::linalg::orthonormalize_columns(&random_matrix(r, r, seed ^ 2));
                let vq = v.rotated(&q).unwrap();
                prop_assert!((subspace_distance(&u, &vq).unwrap() - duv).abs() < 1e-10);
            }
        }
    }
}
