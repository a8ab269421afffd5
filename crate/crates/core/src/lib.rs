//! Randomized element-wise tensor sparsification and sketch-based HOSVD.
//!
//! Modes and multi-indices in public APIs are 1-based; linear offsets are
//! 0-based in row-major order, as in the on-disk formats.

pub mod error;
pub mod experiment;
pub mod hosvd;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod sketch;
pub mod spectral;
pub mod synth;
pub mod tensor;

pub use error::{Error, ErrorKind, Result};
pub use experiment::{
    compare_direct_vs_product, fit_loglog_slope, run_budget_sweep, sweep_tensor, ComparisonTable, HosvdTarget,
    LogLogFit, PlanInput, SweepField, SweepOutcome, SweepPlan, SweepRecord,
};
pub use hosvd::{hosvd_direct, hosvd_exact, hosvd_product, HosvdDiagnostics, HosvdResult, Method};
pub use io::{load_any, load_dense, load_sparse, save_dense, save_sparse, AnyTensor};
pub use sketch::{classify_entry, expected_nnz, keep_probability, sparsify, sparsify_baseline_zero_small, Regime, SketchReport};
pub use spectral::{
    eigengap, stable_rank, subspace_distance, tensor_spectral_norm, top_left_singular_vectors, FactorBasis,
    NormEstimate, NormSettings,
};
pub use synth::{gen_matrix, gen_tucker, TuckerSpec};
pub use tensor::{densify, sparsify_exact, DenseTensor, Matrix, Shape, SparseMatrix, SparseTensor};
