//! Budget sweeps, scaling fits and estimator comparisons.
//!
//! Every trial draws its randomness from `(plan seed, budget, trial index)`,
//! so a plan produces the same records regardless of scheduling.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hosvd::{direct_basis, hosvd_exact, product_basis};
use crate::io::load_dense;
use crate::linalg::matrix_svd;
use crate::rng::{derive_seed, seeded_rng, trial_seed};
use crate::sketch::sparsify;
use crate::spectral::{stable_rank, subspace_distance, tensor_spectral_norm, top_left_singular_vectors, FactorBasis, NormEstimate, NormSettings};
use crate::synth::{gen_tucker, TuckerSpec};
use crate::tensor::DenseTensor;

/// Where a sweep gets its tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanInput {
    File(PathBuf),
    Generator(TuckerSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HosvdTarget {
    pub mode: usize,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub input: PlanInput,
    pub budgets: Vec<u64>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub hosvd: Vec<HosvdTarget>,
    #[serde(default)]
    pub estimator: NormSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl SweepPlan {
    pub fn from_json(text: &str) -> Result<Self> {
        let plan: SweepPlan = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    /// Reads a plan file; relative input paths are taken relative to it.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut plan = Self::from_json(&std::fs::read_to_string(path)?)?;
        if let PlanInput::File(p) = &mut plan.input {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.budgets.is_empty() {
            return Err(Error::Plan("no budgets".into()));
        }
        if self.budgets[0] < 1 {
            return Err(Error::Plan("budgets must be at least 1".into()));
        }
        if self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Plan(format!("budgets {:?} not strictly increasing", self.budgets)));
        }
        if self.trials < 1 {
            return Err(Error::Plan("trials must be at least 1".into()));
        }
        let mut modes: Vec<usize> = self.hosvd.iter().map(|t| t.mode).collect();
        modes.sort_unstable();
        if modes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Plan("at most one HOSVD target per mode".into()));
        }
        Ok(())
    }

    pub fn load_input(&self) -> Result<DenseTensor> {
        match &self.input {
            PlanInput::File(p) => load_dense(p),
            PlanInput::Generator(spec) => Ok(gen_tucker(spec)?.0),
        }
    }
}

/// One `(budget, trial)` measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub budget_n: u64,
    pub trial_seed: u64,
    pub nnz: u64,
    pub rel_spectral_error: f64,
    /// Whether the norm estimate of the error tensor met its tolerance.
    pub converged: bool,
    /// One entry per plan HOSVD target, in plan order.
    pub subspace_errors: Vec<f64>,
    pub wall_time_ms: f64,
}

/// Spectral norm used for error measurements: exact for matrices, the
/// multi-start estimator otherwise.
pub fn measured_norm(a: &DenseTensor, settings: &NormSettings) -> Result<NormEstimate> {
    if a.shape().order() == 2 {
        let m = a.to_matrix()?;
        let svd = matrix_svd(&m);
        return Ok(NormEstimate {
            value: svd.s[0],
            unit_factors: vec![svd.u.column(0), svd.v.column(0)],
            restarts_used: 0,
            iterations_used: 0,
            converged: true,
        });
    }
    tensor_spectral_norm(a, settings)
}

/// Summary of the input that a sweep was run on.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    pub input_norm: NormEstimate,
    pub stable_rank: f64,
    /// `sr(A) · d_max^(1 - k/2)`: relative errors below this are in the high-accuracy regime.
    pub high_accuracy_threshold: f64,
}

pub fn run_budget_sweep(plan: &SweepPlan) -> Result<Vec<SweepRecord>> {
    let a = plan.load_input()?;
    Ok(sweep_tensor(&a, plan)?.records)
}

pub fn sweep_tensor(a: &DenseTensor, plan: &SweepPlan) -> Result<SweepOutcome> {
    plan.validate()?;
    let settings = plan.estimator;
    let input_norm = measured_norm(a, &settings)?;
    let exact_bases: Vec<FactorBasis> = plan
        .hosvd
        .iter()
        .map(|t| hosvd_exact(a, t.mode, t.rank).map(|r| r.basis))
        .collect::<Result<_>>()?;

    let jobs: Vec<(u64, usize)> = plan
        .budgets
        .iter()
        .flat_map(|&n| (0..plan.trials).map(move |t| (n, t)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|&(n, t)| {
            let seed = trial_seed(plan.seed, n, t as u64);
            let started = Instant::now();
            let (sketch, report) = sparsify(a, n, seed)?;
            let diff = sketch.to_dense().sub(a)?;
            let err = measured_norm(&diff, &settings)?;
            let rel = if input_norm.value > 0.0 {
                err.value / input_norm.value
            } else {
                0.0
            };
            let subspace_errors = plan
                .hosvd
                .iter()
                .zip(&exact_bases)
                .map(|(target, exact)| {
                    let m = sketch.matricize(target.mode)?.to_dense();
                    subspace_distance(&top_left_singular_vectors(&m, target.rank)?, exact)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepRecord {
                budget_n: n,
                trial_seed: seed,
                nnz: report.actual_nnz,
                rel_spectral_error: rel,
                converged: err.converged,
                subspace_errors,
                wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let stable_rank = if input_norm.value > 0.0 {
        stable_rank(a, &input_norm)?
    } else {
        f64::NAN
    };
    let k = a.shape().order() as f64;
    let high_accuracy_threshold = stable_rank * (a.shape().max_dim() as f64).powf(1.0 - k / 2.0);
    Ok(SweepOutcome {
        records,
        input_norm,
        stable_rank,
        high_accuracy_threshold,
    })
}

/// CSV header for a plan with the given HOSVD targets.
pub fn csv_header(targets: &[HosvdTarget]) -> Vec<String> {
    let mut h: Vec<String> = ["budget_n", "trial_seed", "nnz", "rel_spectral_error", "converged"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend(targets.iter().map(|t| format!("subspace_error_mode{}", t.mode)));
    h.push("wall_time_ms".into());
    h
}

pub fn write_csv(w: impl Write, targets: &[HosvdTarget], records: &[SweepRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(csv_header(targets))?;
    for r in records {
        let mut row = vec![
            r.budget_n.to_string(),
            r.trial_seed.to_string(),
            r.nnz.to_string(),
            r.rel_spectral_error.to_string(),
            r.converged.to_string(),
        ];
        row.extend(r.subspace_errors.iter().map(f64::to_string));
        row.push(format!("{:.3}", r.wall_time_ms));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Quantity fitted by [`fit_loglog_slope`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepField {
    RelSpectralError,
    Nnz,
    /// Index into [`SweepRecord::subspace_errors`].
    SubspaceError(usize),
}

impl SweepField {
    fn get(&self, r: &SweepRecord) -> Result<f64> {
        Ok(match *self {
            SweepField::RelSpectralError => r.rel_spectral_error,
            SweepField::Nnz => r.nnz as f64,
            SweepField::SubspaceError(i) => *r
                .subspace_errors
                .get(i)
                .ok_or_else(|| Error::Fit(format!("record has no subspace error #{i}")))?,
        })
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty sample");
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Linear-interpolated quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Per-budget medians of `field`, ascending by budget.
pub fn medians_by_budget(records: &[SweepRecord], field: SweepField) -> Result<Vec<(u64, f64)>> {
    let mut groups: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry(r.budget_n).or_default().push(field.get(r)?);
    }
    Ok(groups.into_iter().map(|(n, mut v)| (n, median(&mut v))).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(u64, f64)>,
}

/// Least-squares slope of `log(median field)` against `log(n)`.
pub fn fit_loglog_slope(records: &[SweepRecord], field: SweepField) -> Result<LogLogFit> {
    fit_points(medians_by_budget(records, field)?)
}

fn fit_points(points: Vec<(u64, f64)>) -> Result<LogLogFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 distinct budgets, got {}", points.len())));
    }
    if let Some(&(n, m)) = points.iter().find(|(_, m)| !(*m > 0.0 && m.is_finite())) {
        return Err(Error::Fit(format!("median {m} at budget {n} is not positive")));
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, m)| m.ln()).collect();
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if syy <= 1e-24 * len {
        return Err(Error::Fit("medians are constant".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(LogLogFit {
        slope,
        intercept,
        r_squared: 1.0 - sse / syy,
        points,
    })
}

/// Budgets in the high-accuracy regime: median relative error below
/// `threshold`. Falls back to the upper half of the budget range when that
/// selects fewer than three budgets.
pub fn high_accuracy_budgets(records: &[SweepRecord], threshold: f64) -> Result<Vec<u64>> {
    let medians = medians_by_budget(records, SweepField::RelSpectralError)?;
    let selected: Vec<u64> = medians.iter().filter(|(_, m)| *m < threshold).map(|&(n, _)| n).collect();
    if selected.len() >= 3 {
        return Ok(selected);
    }
    let half = medians.len() / 2;
    Ok(medians[half..].iter().map(|&(n, _)| n).collect())
}

/// Log-log fit of the relative spectral error over the high-accuracy budgets.
pub fn fit_high_accuracy(outcome: &SweepOutcome) -> Result<LogLogFit> {
    let keep = high_accuracy_budgets(&outcome.records, outcome.high_accuracy_threshold)?;
    let subset: Vec<SweepRecord> = outcome
        .records
        .iter()
        .filter(|r| keep.contains(&r.budget_n))
        .cloned()
        .collect();
    fit_loglog_slope(&subset, SweepField::RelSpectralError)
}

/// Median with a bootstrap interquartile range of the median.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MedianSummary {
    pub median: f64,
    pub iqr_low: f64,
    pub iqr_high: f64,
    pub samples: Vec<f64>,
}

const BOOTSTRAP_RESAMPLES: usize = 200;

fn summarize(samples: Vec<f64>, seed: u64) -> MedianSummary {
    let mut rng = seeded_rng(seed);
    let n = samples.len();
    let mut boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let mut draw: Vec<f64> = (0..n).map(|_| samples[rng.random_range(0..n)]).collect();
            median(&mut draw)
        })
        .collect();
    boot.sort_by(f64::total_cmp);
    let median = median(&mut samples.clone());
    MedianSummary {
        median,
        iqr_low: quantile_sorted(&boot, 0.25),
        iqr_high: quantile_sorted(&boot, 0.75),
        samples,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub budget_n: u64,
    pub direct: MedianSummary,
    pub product: MedianSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub mode: usize,
    pub rank: usize,
    pub eigengap: f64,
    pub rows: Vec<ComparisonRow>,
}

/// Median subspace error of the direct and product estimators per budget.
///
/// Refuses inputs whose exact unfolding has a degenerate gap at `rank`.
pub fn compare_direct_vs_product(
    a: &DenseTensor,
    budgets: &[u64],
    mode: usize,
    rank: usize,
    trials: usize,
    seed: u64,
) -> Result<ComparisonTable> {
    if trials < 1 {
        return Err(Error::Plan("trials must be at least 1".into()));
    }
    let exact = hosvd_exact(a, mode, rank)?;
    if exact.diagnostics.gap_degenerate {
        return Err(Error::GapDegenerate {
            gap: exact.diagnostics.eigengap,
            sigma_1: exact.diagnostics.sigma_1,
        });
    }
    let rows = budgets
        .iter()
        .map(|&n| {
            let pairs = (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let ts = trial_seed(seed, n, t);
                    let (d, _) = direct_basis(a, n, mode, rank, ts)?;
                    let (p, _) = product_basis(a, n, mode, rank, ts)?;
                    Ok((subspace_distance(&d, &exact.basis)?, subspace_distance(&p, &exact.basis)?))
                })
                .collect::<Result<Vec<(f64, f64)>>>()?;
            let (direct, product): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let boot_seed = derive_seed(seed, n);
            Ok(ComparisonRow {
                budget_n: n,
                direct: summarize(direct, boot_seed),
                product: summarize(product, derive_seed(boot_seed, 1)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonTable {
        mode,
        rank,
        eigengap: exact.diagnostics.eigengap,
        rows,
    })
}
