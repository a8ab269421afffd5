//! Shared fixtures for the criterion benchmarks.

use tensparse_core::{gen_tucker, DenseTensor, Shape, TuckerSpec};

/// Planted rank-2 cube with light noise.
pub fn planted_cube(d: usize, seed: u64) -> DenseTensor {
    gen_tucker(&TuckerSpec {
        dims: Shape::new(vec![d, d, d]).expect("nonzero dims"),
        ranks: vec![2, 2, 2],
        core_decay: 0.5,
        noise_sigma: 0.01,
        seed,
    })
    .expect("valid spec")
    .0
}

/// Budgets as fractions of the tensor's entry count.
pub fn budget_fractions(a: &DenseTensor, fractions: &[f64]) -> Vec<u64> {
    let total = a.shape().total() as f64;
    fractions.iter().map(|f| ((f * total).round() as u64).max(1)).collect()
}
