//! Entry-wise tensor sparsification.
//!
//! Entries are split by magnitude relative to the global Frobenius norm:
//! large entries (`|a| >= ‖A‖_F / √n`) are kept verbatim, moderate entries are kept
//! with probability `n a² / ‖A‖_F²`, and small entries (`|a| <= ‖A‖_F / √(d_1⋯d_k)`)
//! with the uniform probability `n / (d_1⋯d_k)`. Kept entries are rescaled by
//! `1 / P`, which makes the sketch an unbiased estimate of the input.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::per_entry_uniform;
use crate::tensor::{DenseTensor, SparseTensor};

/// Offsets per parallel work unit. Fixed so that floating-point reductions
/// are associated the same way regardless of the thread count.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Large,
    Moderate,
    Small,
}

/// Classification thresholds for one input and budget.
#[derive(Debug, Clone, Copy)]
pub struct Thresholds {
    fro: f64,
    fro_sq: f64,
    budget: f64,
    large: f64,
    small: f64,
    small_probability: f64,
}

impl Thresholds {
    pub fn new(fro: f64, n: u64, total: u64) -> Result<Self> {
        if n < 1 {
            return Err(Error::Budget(n));
        }
        if !(fro >= 0.0 && fro.is_finite()) {
            return Err(Error::Contract(format!("Frobenius norm {fro} is not a finite nonnegative number")));
        }
        if total == 0 {
            return Err(Error::Contract("total size must be positive".into()));
        }
        let budget = n as f64;
        Ok(Self {
            fro,
            fro_sq: fro * fro,
            budget,
            large: fro / budget.sqrt(),
            small: fro / (total as f64).sqrt(),
            small_probability: (budget / total as f64).min(1.0),
        })
    }

    pub fn large_threshold(&self) -> f64 {
        self.large
    }

    pub fn small_threshold(&self) -> f64 {
        self.small
    }

    /// Regime of an entry with magnitude `abs_a`.
    ///
    /// When `n >= total` the two thresholds cross and an entry can satisfy both
    /// the large and small tests; it is reported as large, and both branches
    /// keep it with probability 1 anyway.
    pub fn classify(&self, abs_a: f64) -> Result<Regime> {
        if self.fro == 0.0 && abs_a > 0.0 {
            return Err(Error::Contract(format!(
                "entry magnitude {abs_a} with zero Frobenius norm"
            )));
        }
        Ok(if abs_a == 0.0 {
            Regime::Small
        } else if abs_a >= self.large {
            Regime::Large
        } else if abs_a <= self.small {
            Regime::Small
        } else {
            Regime::Moderate
        })
    }

    fn probability_of(&self, regime: Regime, a: f64) -> f64 {
        match regime {
            Regime::Large => 1.0,
            Regime::Moderate => (self.budget * a * a / self.fro_sq).min(1.0),
            Regime::Small => self.small_probability,
        }
    }

    pub fn keep_probability(&self, a: f64) -> Result<f64> {
        let regime = self.classify(a.abs())?;
        Ok(self.probability_of(regime, a))
    }
}

pub fn classify_entry(abs_a: f64, fro: f64, n: u64, total: u64) -> Result<Regime> {
    if abs_a < 0.0 || abs_a.is_nan() {
        return Err(Error::Contract(format!("magnitude {abs_a} must be nonnegative")));
    }
    Thresholds::new(fro, n, total)?.classify(abs_a)
}

/// Retention probability of entry `a` under budget `n`.
///
/// Zero entries are never stored, so the value returned for `a == 0` (the
/// small-regime probability) has no effect on any sketch.
pub fn keep_probability(a: f64, fro: f64, n: u64, total: u64) -> Result<f64> {
    Thresholds::new(fro, n, total)?.keep_probability(a)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeCount {
    pub candidates: u64,
    pub retained: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeCounts {
    pub large: RegimeCount,
    pub moderate: RegimeCount,
    pub small: RegimeCount,
}

impl RegimeCounts {
    fn slot(&mut self, r: Regime) -> &mut RegimeCount {
        match r {
            Regime::Large => &mut self.large,
            Regime::Moderate => &mut self.moderate,
            Regime::Small => &mut self.small,
        }
    }

    fn merge(&mut self, other: &RegimeCounts) {
        for r in [Regime::Large, Regime::Moderate, Regime::Small] {
            let o = match r {
                Regime::Large => other.large,
                Regime::Moderate => other.moderate,
                Regime::Small => other.small,
            };
            let s = self.slot(r);
            s.candidates += o.candidates;
            s.retained += o.retained;
        }
    }
}

/// Provenance of one sketch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SketchReport {
    pub budget_n: u64,
    pub seed: u64,
    pub counts: RegimeCounts,
    pub expected_nnz: f64,
    pub actual_nnz: u64,
    pub fro_norm_input: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SmallPolicy {
    Sample,
    Drop,
}

/// Unbiased three-regime sparsification of `a` with budget `n`.
pub fn sparsify(a: &DenseTensor, n: u64, seed: u64) -> Result<(SparseTensor, SketchReport)> {
    run(a, n, seed, SmallPolicy::Sample)
}

/// Same classification and draws as [`sparsify`], but small entries are always
/// dropped. Biased; kept as a comparison baseline.
pub fn sparsify_baseline_zero_small(
    a: &DenseTensor,
    n: u64,
    seed: u64,
) -> Result<(SparseTensor, SketchReport)> {
    run(a, n, seed, SmallPolicy::Drop)
}

struct ChunkOut {
    entries: Vec<(usize, f64)>,
    counts: RegimeCounts,
    expected: f64,
}

fn run(a: &DenseTensor, n: u64, seed: u64, policy: SmallPolicy) -> Result<(SparseTensor, SketchReport)> {
    let fro = a.frobenius_norm();
    let th = Thresholds::new(fro, n, a.shape().total() as u64)?;

    let chunks: Vec<ChunkOut> = a
        .values()
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| {
            let base = ci * CHUNK;
            let mut out = ChunkOut {
                entries: Vec::new(),
                counts: RegimeCounts::default(),
                expected: 0.0,
            };
            for (off, &v) in chunk.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                let l = base + off;
                // fro > 0 whenever a nonzero entry exists, so classify cannot fail
                let regime = th.classify(v.abs()).expect("nonzero entry implies positive norm");
                let p = match (regime, policy) {
                    (Regime::Small, SmallPolicy::Drop) => 0.0,
                    _ => th.probability_of(regime, v),
                };
                let slot = out.counts.slot(regime);
                slot.candidates += 1;
                out.expected += p;
                if per_entry_uniform(seed, l as u64) < p {
                    slot.retained += 1;
                    out.entries.push((l, if p == 1.0 { v } else { v / p }));
                }
            }
            out
        })
        .collect();

    let mut entries = Vec::with_capacity(chunks.iter().map(|c| c.entries.len()).sum());
    let mut counts = RegimeCounts::default();
    let mut expected_nnz = 0.0;
    for c in chunks {
        entries.extend(c.entries);
        counts.merge(&c.counts);
        expected_nnz += c.expected;
    }
    let report = SketchReport {
        budget_n: n,
        seed,
        counts,
        expected_nnz,
        actual_nnz: entries.len() as u64,
        fro_norm_input: fro,
    };
    Ok((SparseTensor::from_parts_unchecked(a.shape().clone(), entries), report))
}

/// Expected number of stored entries of [`sparsify`]: the sum of retention
/// probabilities over the nonzero entries.
pub fn expected_nnz(a: &DenseTensor, n: u64) -> Result<f64> {
    let th = Thresholds::new(a.frobenius_norm(), n, a.shape().total() as u64)?;
    let partial: Vec<f64> = a
        .values()
        .par_chunks(CHUNK)
        .map(|chunk| {
            chunk
                .iter()
                .filter(|&&v| v != 0.0)
                .map(|&v| th.keep_probability(v).expect("nonzero entry implies positive norm"))
                .sum::<f64>()
        })
        .collect();
    Ok(partial.into_iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Shape;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn shape(d: &[usize]) -> Shape {
        Shape::new(d.to_vec()).unwrap()
    }

    fn gaussian(dims: &[usize], seed: u64) -> DenseTensor {
        let mut rng = crate::rng::seeded_rng(seed);
        let s = shape(dims);
        let vals = (0..s.total()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        DenseTensor::new(s, vals).unwrap()
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_entry(0.6, 1.0, 4, 100).unwrap(), Regime::Large);
        assert_eq!(classify_entry(0.2, 1.0, 4, 100).unwrap(), Regime::Moderate);
        assert_eq!(classify_entry(0.05, 1.0, 4, 100).unwrap(), Regime::Small);
    }

    #[test]
    fn classify_boundaries_follow_the_inequalities() {
        assert_eq!(classify_entry(0.5, 1.0, 4, 100).unwrap(), Regime::Large);
        assert_eq!(classify_entry(0.1, 1.0, 4, 100).unwrap(), Regime::Small);
        let th = Thresholds::new(3.7, 17, 1234).unwrap();
        assert_eq!(th.classify(th.large_threshold()).unwrap(), Regime::Large);
        assert_eq!(th.classify(th.small_threshold()).unwrap(), Regime::Small);
    }

    #[test]
    fn classify_errors() {
        assert!(matches!(classify_entry(0.1, 0.0, 4, 100), Err(Error::Contract(_))));
        assert!(matches!(classify_entry(0.1, 1.0, 0, 100), Err(Error::Budget(0))));
        assert_eq!(classify_entry(0.0, 0.0, 4, 100).unwrap(), Regime::Small);
    }

    #[test]
    fn probability_examples() {
        assert!((keep_probability(0.2, 1.0, 4, 100).unwrap() - 0.16).abs() < 1e-15);
        assert!((keep_probability(0.05, 1.0, 4, 100).unwrap() - 0.04).abs() < 1e-15);
        assert_eq!(keep_probability(-0.6, 1.0, 4, 100).unwrap(), 1.0);
        for a in [1e-6, 0.01, 0.1, 0.3, 0.9] {
            assert_eq!(keep_probability(a, 1.0, 100, 100).unwrap(), 1.0);
            assert_eq!(keep_probability(a, 1.0, 500, 100).unwrap(), 1.0);
        }
    }

    #[test]
    fn full_budget_is_exact_copy() {
        let a = gaussian(&[3, 4, 5], 1);
        for n in [60, 61, 10_000] {
            let (s, rep) = sparsify(&a, n, 9).unwrap();
            assert_eq!(s.to_dense(), a);
            assert_eq!(rep.actual_nnz, 60);
            assert_eq!(rep.expected_nnz, 60.0);
        }
    }

    #[test]
    fn zero_tensor_gives_empty_sketch() {
        let z = DenseTensor::zeros(shape(&[4, 4]));
        let (s, rep) = sparsify(&z, 3, 1).unwrap();
        assert_eq!(s.nnz(), 0);
        assert_eq!(rep.expected_nnz, 0.0);
        assert_eq!(expected_nnz(&z, 3).unwrap(), 0.0);
    }

    #[test]
    fn zero_budget_rejected() {
        let a = gaussian(&[2, 2], 1);
        assert!(matches!(sparsify(&a, 0, 1), Err(Error::Budget(0))));
        assert!(matches!(expected_nnz(&a, 0), Err(Error::Budget(0))));
    }

    #[test]
    fn retained_values_are_rescaled_exactly() {
        let a = gaussian(&[6, 7, 8], 3);
        let n = 40;
        let fro = a.frobenius_norm();
        let (s, rep) = sparsify(&a, n, 77).unwrap();
        for &(l, v) in s.entries() {
            let orig = a.values()[l];
            let p = keep_probability(orig, fro, n, 336).unwrap();
            if p == 1.0 {
                assert_eq!(v, orig);
            } else {
                assert_eq!(v, orig / p);
            }
        }
        assert_eq!(rep.counts.large.candidates, rep.counts.large.retained);
        assert!(rep.expected_nnz <= 2.0 * n as f64);
        let kept = rep.counts.large.retained + rep.counts.moderate.retained + rep.counts.small.retained;
        assert_eq!(kept, rep.actual_nnz);
        assert_eq!(rep.actual_nnz as usize, s.nnz());
        assert_eq!(rep.fro_norm_input, fro);
    }

    #[test]
    fn expected_nnz_examples() {
        let a = gaussian(&[5, 5, 5], 8);
        assert_eq!(expected_nnz(&a, 125).unwrap(), 125.0);
        let mut vals = a.values().to_vec();
        vals[3] = 0.0;
        vals[50] = 0.0;
        let b = DenseTensor::new(a.shape().clone(), vals).unwrap();
        assert_eq!(expected_nnz(&b, 200).unwrap(), 123.0);
    }

    #[test]
    fn report_expected_nnz_matches_analytic() {
        let a = gaussian(&[9, 9, 9], 4);
        let (_, rep) = sparsify(&a, 50, 1).unwrap();
        assert!((rep.expected_nnz - expected_nnz(&a, 50).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn baseline_all_small_is_empty_all_large_is_exact() {
        // constant magnitude: every entry sits exactly on fro/sqrt(total) = 4/4
        let vals = (0..16).map(|i| if i % 3 == 0 { -1.0 } else { 1.0 }).collect();
        let c = DenseTensor::new(shape(&[4, 4]), vals).unwrap();
        let (s, _) = sparsify_baseline_zero_small(&c, 5, 1).unwrap();
        assert_eq!(s.nnz(), 0);
        // one dominant entry with n = 1: the threshold is fro itself
        let mut vals = vec![0.0; 20];
        vals[7] = -2.5;
        let one = DenseTensor::new(shape(&[4, 5]), vals).unwrap();
        let (s, rep) = sparsify_baseline_zero_small(&one, 1, 1).unwrap();
        assert_eq!(s.to_dense(), one);
        assert_eq!(rep.counts.large.retained, 1);
        // two equal entries, n = 2: both sit on the large threshold
        let mut vals = vec![0.0; 20];
        vals[2] = 1.0;
        vals[9] = -1.0;
        let two = DenseTensor::new(shape(&[4, 5]), vals).unwrap();
        let (s, _) = sparsify_baseline_zero_small(&two, 2, 3).unwrap();
        assert_eq!(s.to_dense(), two);
    }

    #[test]
    fn baseline_support_is_subset_under_shared_draws() {
        let a = gaussian(&[8, 8, 8], 12);
        for seed in 0..20 {
            let (full, _) = sparsify(&a, 60, seed).unwrap();
            let (base, rep) = sparsify_baseline_zero_small(&a, 60, seed).unwrap();
            assert_eq!(rep.counts.small.retained, 0);
            let support: std::collections::HashSet<usize> = full.entries().iter().map(|e| e.0).collect();
            for &(l, v) in base.entries() {
                assert!(support.contains(&l));
                assert_eq!(full.entries().iter().find(|e| e.0 == l).unwrap().1, v);
            }
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let a = gaussian(&[30, 30, 30], 5);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        let r1 = one.install(|| sparsify(&a, 2000, 11).unwrap());
        let r8 = many.install(|| sparsify(&a, 2000, 11).unwrap());
        assert_eq!(r1.0, r8.0);
        assert_eq!(r1.1, r8.1);
        assert_eq!(r1.1.expected_nnz.to_bits(), r8.1.expected_nnz.to_bits());
    }

    #[test]
    fn report_json_field_names() {
        let a = gaussian(&[3, 3], 2);
        let (_, rep) = sparsify(&a, 2, 5).unwrap();
        let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
        for key in ["budget_n", "seed", "counts", "expected_nnz", "actual_nnz", "fro_norm_input"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        for r in ["large", "moderate", "small"] {
            assert!(v["counts"][r]["candidates"].is_u64());
            assert!(v["counts"][r]["retained"].is_u64());
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn exactly_one_regime_and_valid_probability(
                a in 0.0f64..10.0,
                fro in 1e-3f64..10.0,
                n in 1u64..5000,
                total in 1u64..5000,
                pick in 0u8..3,
            ) {
                let th = Thresholds::new(fro, n, total).unwrap();
                let abs_a = match pick {
                    0 => a,
                    1 => th.large_threshold(),
                    _ => th.small_threshold(),
                };
                let regime = th.classify(abs_a).unwrap();
                let large = abs_a >= th.large_threshold();
                let small = abs_a <= th.small_threshold();
                let moderate = !large && !small;
                match regime {
                    Regime::Large => prop_assert!(large),
                    Regime::Small => prop_assert!(small && !large),
                    Regime::Moderate => prop_assert!(moderate),
                }
                if n < total {
                    // thresholds are ordered, so the three tests are mutually exclusive
                    prop_assert_eq!(large as u8 + small as u8 + moderate as u8, 1);
                }
                let p = th.keep_probability(abs_a).unwrap();
                prop_assert!((0.0..=1.0).contains(&p));
                if regime == Regime::Moderate {
                    prop_assert!(p < 1.0);
                }
            }

            #[test]
            fn expected_nnz_within_twice_budget(
                dims in prop::collection::vec(1usize..7, 1..4),
                n in 1u64..400,
                seed in any::<u64>(),
                heavy in any::<bool>(),
            ) {
                let mut a = gaussian(&dims, seed);
                if heavy {
                    let mut v = a.values().to_vec();
                    v[0] *= 50.0;
                    a = DenseTensor::new(a.shape().clone(), v).unwrap();
                }
                prop_assert!(expected_nnz(&a, n).unwrap() <= 2.0 * n as f64 + 1e-9);
            }
        }
    }
}
