//! Planted low-rank test instances.
//!
//! `A = Σ_t λ_t u_{1,t} ⊗ ⋯ ⊗ u_{k,t} + σ G / √(d_1⋯d_k)` with column-orthonormal
//! factors, a superdiagonal core `λ_t = decay^(t-1)` and i.i.d. standard normal `G`.
//! With orthonormal factors the singular values of every unfolding are exactly
//! the `λ_t`, which makes gaps and norms available in closed form.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::orthonormalize_columns;
use crate::rng::seeded_rng;
use crate::spectral::FactorBasis;
use crate::tensor::{DenseTensor, Matrix, Shape};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuckerSpec {
    pub dims: Shape,
    pub ranks: Vec<usize>,
    pub core_decay: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

impl TuckerSpec {
    pub fn validate(&self) -> Result<()> {
        if self.ranks.len() != self.dims.order() {
            return Err(Error::Spec(format!(
                "{} ranks for an order-{} tensor",
                self.ranks.len(),
                self.dims.order()
            )));
        }
        for (j, (&r, &d)) in self.ranks.iter().zip(self.dims.dims()).enumerate() {
            if r == 0 || r > d {
                return Err(Error::Spec(format!("rank {r} of mode {} not in 1..={d}", j + 1)));
            }
        }
        if !(self.core_decay > 0.0 && self.core_decay <= 1.0) {
            return Err(Error::Spec(format!("core_decay {} not in (0, 1]", self.core_decay)));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Spec(format!("noise_sigma {} must be finite and >= 0", self.noise_sigma)));
        }
        Ok(())
    }

    /// Number of superdiagonal core entries.
    pub fn core_len(&self) -> usize {
        self.ranks.iter().copied().min().unwrap_or(0)
    }

    pub fn core_diagonal(&self) -> Vec<f64> {
        (0..self.core_len()).map(|t| self.core_decay.powi(t as i32)).collect()
    }
}

/// Planted tensor and the mode subspaces that carry its signal.
///
/// A superdiagonal core only touches the first `min_j r_j` columns of each
/// factor, so the returned bases have that many columns.
pub fn gen_tucker(spec: &TuckerSpec) -> Result<(DenseTensor, Vec<FactorBasis>)> {
    spec.validate()?;
    let mut rng = seeded_rng(spec.seed);
    let shape = spec.dims.clone();
    let m = spec.core_len();
    let factors: Vec<Matrix> = shape
        .dims()
        .iter()
        .zip(&spec.ranks)
        .map(|(&d, &r)| {
            let g = Matrix::from_fn(d, r, |_, _| rng.sample(StandardNormal));
            orthonormalize_columns(&g)
        })
        .collect();
    let core = spec.core_diagonal();

    let mut values = DenseTensor::from_fn(shape.clone(), |idx| {
        (0..m)
            .map(|t| core[t] * idx.iter().zip(&factors).map(|(&i, u)| u.get(i, t)).product::<f64>())
            .sum()
    })?
    .into_values();

    if spec.noise_sigma > 0.0 {
        let scale = spec.noise_sigma / (shape.total() as f64).sqrt();
        for v in &mut values {
            *v += scale * rng.sample::<f64, _>(StandardNormal);
        }
    }

    let planted = factors
        .iter()
        .map(|u| FactorBasis::new(u.leading_columns(m)))
        .collect::<Result<Vec<_>>>()?;
    Ok((DenseTensor::new(shape, values)?, planted))
}

/// Matrix instance `U diag(decay^(t-1)) Vᵀ + noise`, with its planted left subspace.
pub fn gen_matrix(
    rows: usize,
    cols: usize,
    rank: usize,
    decay: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<(Matrix, FactorBasis)> {
    let spec = TuckerSpec {
        dims: Shape::new(vec![rows, cols]).map_err(|e| Error::Spec(e.to_string()))?,
        ranks: vec![rank, rank],
        core_decay: decay,
        noise_sigma,
        seed,
    };
    let (a, mut planted) = gen_tucker(&spec)?;
    Ok((a.to_matrix()?, planted.swap_remove(0)))
}
