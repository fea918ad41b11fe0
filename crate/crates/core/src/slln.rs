//! Convergence diagnostics for normalized weighted sums.
//!
//! Almost-sure convergence is operationalized as decay of the blockwise
//! sup-error: for each dyadic checkpoint `N`, the largest |T_m| over
//! `m ∈ [N, 2N]` is recorded per path, then aggregated by median and 95th
//! percentile across paths. A law of large numbers shows up as the medians
//! falling block after block; a failing one shows up as a plateau.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{self, KahanSum};
use crate::model::{sample_path, SequenceModel};
use crate::rng::StreamId;
use crate::types::{log_cap, MomentOrder, SamplePath, WeightScheme};

/// Normalization of the centered weighted sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormalizerKind {
    /// Divide by `n`.
    KolmogorovN,
    /// Divide by `n^{1/p} · Log n`, `1 < p < 2`.
    MzP(MomentOrder),
}

impl NormalizerKind {
    /// Marcinkiewicz–Zygmund normalizer; requires `p` strictly inside (1, 2).
    pub fn mz(p: f64) -> Result<Self> {
        let order = MomentOrder::new(p)?;
        if order.get() <= 1.0 {
            return Err(Error::Domain("the MZ normalizer requires 1 < p < 2".to_string()));
        }
        Ok(NormalizerKind::MzP(order))
    }

    #[inline]
    pub fn norm(&self, n: usize) -> f64 {
        match self {
            NormalizerKind::KolmogorovN => n as f64,
            NormalizerKind::MzP(p) => {
                let nf = n as f64;
                math::powf(nf, 1.0 / p.get()) * log_cap(nf)
            }
        }
    }

    pub fn describe(&self) -> alloc::string::String {
        match self {
            NormalizerKind::KolmogorovN => "kolmogorov".to_string(),
            NormalizerKind::MzP(p) => alloc::format!("mz(p={})", p.get()),
        }
    }
}

/// `T_n = Σ_{k≤n} a_k (X_k - E X_k) / norm(n)` for `n = 1..=len`, one pass
/// with compensated summation. Centering uses the exact marginal mean.
pub fn weighted_sum_path(
    path: &SamplePath,
    weights: &WeightScheme,
    normalizer: &NormalizerKind,
) -> Vec<f64> {
    let mean = path.model.marginal.mean();
    let mut acc = KahanSum::new();
    let mut out = Vec::with_capacity(path.len());
    for (i, &x) in path.values.iter().enumerate() {
        let k = i + 1;
        acc.add(weights.weight(k) * (x - mean));
        out.push(acc.value() / normalizer.norm(k));
    }
    out
}

/// Dyadic checkpoints `2^10, 2^11, …, n_max`.
pub fn dyadic_checkpoints(n_max: usize) -> Result<Vec<usize>> {
    if n_max < (1 << 10) || !n_max.is_power_of_two() {
        return Err(Error::Domain("n_max must be a power of two, at least 2^10".to_string()));
    }
    let mut cps = Vec::new();
    let mut n = 1usize << 10;
    while n <= n_max {
        cps.push(n);
        n *= 2;
    }
    Ok(cps)
}

/// Blockwise sup-errors of one path: entry `i` is
/// `max_{m ∈ [N_i, 2 N_i]} |T_m|` for checkpoint `N_i`. The simulated path
/// has length `2·n_max` so the last block is complete.
pub fn path_block_sups(
    model: &SequenceModel,
    weights: &WeightScheme,
    normalizer: &NormalizerKind,
    n_max: usize,
    stream: StreamId,
) -> Result<Vec<f64>> {
    let checkpoints = dyadic_checkpoints(n_max)?;
    let len = 2 * n_max;
    let path = sample_path(model, len, stream)?;
    let mean = model.marginal.mean();
    let mut acc = KahanSum::new();
    let mut sups = alloc::vec![0.0f64; checkpoints.len()];
    for (i, &x) in path.values.iter().enumerate() {
        let k = i + 1;
        acc.add(weights.weight(k) * (x - mean));
        let t = math::abs(acc.value()) / normalizer.norm(k);
        // Blocks [N, 2N] share endpoints; both take the boundary value.
        for (ci, &n) in checkpoints.iter().enumerate() {
            if k >= n && k <= 2 * n {
                if t > sups[ci] {
                    sups[ci] = t;
                }
            }
        }
    }
    Ok(sups)
}

/// Aggregate convergence diagnostics across paths.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub checkpoints: Vec<usize>,
    pub median_sup: Vec<f64>,
    pub p95_sup: Vec<f64>,
    /// `decay_ratio[i] = median_sup[i] / median_sup[i-1]`; the first entry is
    /// NaN (no predecessor).
    pub decay_ratio: Vec<f64>,
}

impl ConvergenceReport {
    /// True when medians strictly decrease across all checkpoints.
    pub fn strictly_decreasing(&self) -> bool {
        self.median_sup.windows(2).all(|w| w[1] < w[0])
    }

    /// Largest finite decay ratio.
    pub fn worst_ratio(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for &r in &self.decay_ratio {
            if r.is_finite() && r > worst {
                worst = r;
            }
        }
        worst
    }
}

/// Combines per-path blockwise sups (ordered by path index) into a report.
/// The reduction is a fixed-order aggregation, so any scheduling of the
/// per-path work yields identical output.
pub fn aggregate_block_sups(checkpoints: &[usize], per_path: &[Vec<f64>]) -> ConvergenceReport {
    let m = per_path.len();
    let mut median_sup = Vec::with_capacity(checkpoints.len());
    let mut p95_sup = Vec::with_capacity(checkpoints.len());
    let mut column = alloc::vec![0.0f64; m];
    for ci in 0..checkpoints.len() {
        for (pi, sups) in per_path.iter().enumerate() {
            column[pi] = sups[ci];
        }
        median_sup.push(math::median(&column));
        p95_sup.push(math::percentile(&column, 0.95));
    }
    let mut decay_ratio = Vec::with_capacity(checkpoints.len());
    for i in 0..median_sup.len() {
        if i == 0 {
            decay_ratio.push(f64::NAN);
        } else {
            decay_ratio.push(median_sup[i] / median_sup[i - 1]);
        }
    }
    ConvergenceReport { checkpoints: checkpoints.into(), median_sup, p95_sup, decay_ratio }
}

/// Simulates `paths` independent trajectories and aggregates their blockwise
/// sup-errors. Deterministic per master seed; paths are independent work
/// units keyed by path index.
pub fn convergence_diagnostic(
    model: &SequenceModel,
    weights: &WeightScheme,
    normalizer: &NormalizerKind,
    n_max: usize,
    paths: usize,
    master_seed: u64,
) -> Result<ConvergenceReport> {
    if paths < 30 {
        return Err(Error::Domain("need at least 30 paths for stable aggregates".to_string()));
    }
    let checkpoints = dyadic_checkpoints(n_max)?;
    let mut per_path = Vec::with_capacity(paths);
    for p in 0..paths {
        per_path.push(path_block_sups(
            model,
            weights,
            normalizer,
            n_max,
            StreamId::new(master_seed, p as u64),
        )?);
    }
    Ok(aggregate_block_sups(&checkpoints, &per_path))
}

/// Negative-control entry point: identical mechanics, used to show the
/// absence of decay when the summability hypotheses fail.
pub fn counterexample_probe(
    model: &SequenceModel,
    weights: &WeightScheme,
    normalizer: &NormalizerKind,
    n_max: usize,
    paths: usize,
    master_seed: u64,
) -> Result<ConvergenceReport> {
    convergence_diagnostic(model, weights, normalizer, n_max, paths, master_seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Correlation, Family};
    use crate::types::Marginal;

    #[test]
    fn point_mass_paths_are_exactly_zero() {
        let model = SequenceModel::independent(Marginal::PointMass { c: 3.5 });
        let path = sample_path(&model, 64, StreamId::new(1, 0)).unwrap();
        let t = weighted_sum_path(&path, &WeightScheme::Constant { c: 2.0 }, &NormalizerKind::KolmogorovN);
        assert!(t.iter().all(|&v| v == 0.0));
        let sups = path_block_sups(
            &model,
            &WeightScheme::Constant { c: 1.0 },
            &NormalizerKind::KolmogorovN,
            1 << 10,
            StreamId::new(1, 0),
        )
        .unwrap();
        assert!(sups.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_point_arithmetic() {
        // X = (1, -1), a ≡ 1, E X = 0 under point evaluation: T_1 = 1, T_2 = 0.
        let model = SequenceModel::independent(Marginal::StandardNormal);
        let path = SamplePath {
            values: alloc::vec![1.0, -1.0],
            model,
            stream: StreamId::new(0, 0),
        };
        let t = weighted_sum_path(&path, &WeightScheme::Constant { c: 1.0 }, &NormalizerKind::KolmogorovN);
        assert_eq!(t, alloc::vec![1.0, 0.0]);
    }

    #[test]
    fn mz_normalizer_value() {
        let norm = NormalizerKind::mz(1.5).unwrap();
        // 8^{2/3} · ln 8 = 4 · 2.0794415… = 8.3177661667…
        assert!((norm.norm(8) - 8.317766166719343).abs() < 1e-12);
        assert!(NormalizerKind::mz(1.0).is_err());
        assert!(NormalizerKind::mz(2.0).is_err());
    }

    #[test]
    fn scale_equivariance_of_weighted_sums() {
        let model = SequenceModel::independent(Marginal::Uniform01);
        let path = sample_path(&model, 512, StreamId::new(7, 3)).unwrap();
        let base = weighted_sum_path(&path, &WeightScheme::Constant { c: 1.0 }, &NormalizerKind::KolmogorovN);
        // Power-of-two scale: bit exact.
        let doubled = weighted_sum_path(&path, &WeightScheme::Constant { c: 2.0 }, &NormalizerKind::KolmogorovN);
        for i in 0..base.len() {
            assert_eq!(doubled[i], 2.0 * base[i]);
        }
        // Generic scale: exact up to roundoff of the rescaled terms (the
        // centered sums cancel, so compare on an absolute scale).
        let scaled = weighted_sum_path(&path, &WeightScheme::Constant { c: 3.0 }, &NormalizerKind::KolmogorovN);
        for i in 0..base.len() {
            let want = 3.0 * base[i];
            assert!((scaled[i] - want).abs() <= 1e-13 * want.abs().max(1.0));
        }
    }

    #[test]
    fn coarse_bound_for_bounded_marginals() {
        let model = SequenceModel::coupled_bernoulli();
        let path = sample_path(&model, 2048, StreamId::new(3, 1)).unwrap();
        let w = WeightScheme::BoundedSinusoid { base: 1.0, amplitude: 0.5 };
        let t = weighted_sum_path(&path, &w, &NormalizerKind::KolmogorovN);
        // |T_n| ≤ sup|a| (max|X| + |E X|) = 1.5 · 1.5.
        assert!(t.iter().all(|&v| v.abs() <= 1.5 * 1.5 + 1e-12));
    }

    #[test]
    fn aggregate_is_permutation_invariant() {
        let model = SequenceModel::independent(Marginal::Uniform01);
        let w = WeightScheme::Constant { c: 1.0 };
        let n_max = 1 << 10;
        let checkpoints = dyadic_checkpoints(n_max).unwrap();
        let mut per_path: Vec<Vec<f64>> = (0..31)
            .map(|p| {
                path_block_sups(&model, &w, &NormalizerKind::KolmogorovN, n_max, StreamId::new(5, p))
                    .unwrap()
            })
            .collect();
        let a = aggregate_block_sups(&checkpoints, &per_path);
        per_path.reverse();
        let b = aggregate_block_sups(&checkpoints, &per_path);
        assert_eq!(a.median_sup, b.median_sup);
        assert_eq!(a.p95_sup, b.p95_sup);
    }

    #[test]
    fn preconditions() {
        let model = SequenceModel::independent(Marginal::Uniform01);
        let w = WeightScheme::Constant { c: 1.0 };
        assert!(convergence_diagnostic(&model, &w, &NormalizerKind::KolmogorovN, 1000, 32, 1).is_err());
        assert!(convergence_diagnostic(&model, &w, &NormalizerKind::KolmogorovN, 1 << 10, 10, 1).is_err());
    }

    #[test]
    fn iid_uniform_decays_at_the_classical_rate() {
        // Calibrated band around 1/√2 per doubling for a finite-variance
        // iid sequence under the n-normalizer.
        let model = SequenceModel::independent(Marginal::Uniform01);
        let w = WeightScheme::Constant { c: 1.0 };
        let rep =
            convergence_diagnostic(&model, &w, &NormalizerKind::KolmogorovN, 1 << 13, 100, 99)
                .unwrap();
        assert!(rep.strictly_decreasing(), "medians: {:?}", rep.median_sup);
        for &r in &rep.decay_ratio[1..] {
            assert!(r > 0.55 && r < 0.85, "ratios: {:?}", rep.decay_ratio);
        }
    }

    #[test]
    fn common_factor_plateaus() {
        let model = SequenceModel::new(
            Family::GaussianCopula(Correlation::Equicorrelated { rho: 0.9 }),
            Marginal::StandardNormal,
        )
        .unwrap();
        let w = WeightScheme::Constant { c: 1.0 };
        let rep = counterexample_probe(&model, &w, &NormalizerKind::KolmogorovN, 1 << 12, 40, 99).unwrap();
        // The shared factor keeps the block sups near |√ρ·W|: no SLLN decay.
        for &r in &rep.decay_ratio[1..] {
            assert!(r > 0.9, "ratios: {:?}", rep.decay_ratio);
        }
    }
}
