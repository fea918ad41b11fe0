//! Shared mathematical vocabulary: marginals, weight schemes, truncation,
//! the capped logarithm and path containers.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::rng::StreamId;

/// `log(|x| ∨ e)`: even, and always ≥ 1.
#[inline]
pub fn log_cap(x: f64) -> f64 {
    let a = math::abs(x);
    if a <= core::f64::consts::E {
        1.0
    } else {
        math::ln(a)
    }
}

/// Two-sided clamp of `x` to `[-ell, ell]`. `ell` must be positive.
#[inline]
pub fn truncate_g(x: f64, ell: f64) -> Result<f64> {
    if !(ell > 0.0) {
        return Err(Error::Domain("truncation level must be > 0".to_string()));
    }
    Ok(clamp_sym(x, ell))
}

/// Unchecked clamp used in inner loops where `ell > 0` is already known.
#[inline]
pub(crate) fn clamp_sym(x: f64, ell: f64) -> f64 {
    if x > ell {
        ell
    } else if x < -ell {
        -ell
    } else {
        x
    }
}

/// Common marginal law of a sequence. Every variant exposes its exact mean
/// and, where finite, its exact second moment, so centering never relies on
/// sample averages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    /// 0 or 1, each with probability 1/2.
    BernoulliHalf,
    /// Uniform on [0, 1).
    Uniform01,
    StandardNormal,
    /// Pareto with survival `y^{-tail}` on [1, ∞), shifted by its mean so
    /// that E X = 0 exactly. Finite q-th moment iff q < tail.
    CenteredPareto { tail: f64 },
    /// Degenerate at `c`.
    PointMass { c: f64 },
}

impl Marginal {
    pub fn centered_pareto(tail: f64) -> Result<Self> {
        if !(tail > 1.0) {
            return Err(Error::InvalidModel(
                "pareto tail exponent must be > 1 so the mean exists".to_string(),
            ));
        }
        Ok(Marginal::CenteredPareto { tail })
    }

    pub fn mean(&self) -> f64 {
        match self {
            Marginal::BernoulliHalf => 0.5,
            Marginal::Uniform01 => 0.5,
            Marginal::StandardNormal => 0.0,
            Marginal::CenteredPareto { .. } => 0.0,
            Marginal::PointMass { c } => *c,
        }
    }

    /// Exact raw second moment, `None` when infinite.
    pub fn second_moment(&self) -> Option<f64> {
        match self {
            Marginal::BernoulliHalf => Some(0.5),
            Marginal::Uniform01 => Some(1.0 / 3.0),
            Marginal::StandardNormal => Some(1.0),
            Marginal::CenteredPareto { tail } => {
                if *tail > 2.0 {
                    let m = tail / (tail - 1.0);
                    Some(tail / (tail - 2.0) - m * m)
                } else {
                    None
                }
            }
            Marginal::PointMass { c } => Some(c * c),
        }
    }

    pub fn variance(&self) -> Option<f64> {
        let m = self.mean();
        self.second_moment().map(|s| s - m * m)
    }

    /// CDF with the right-continuous `P{X ≤ x}` convention.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Marginal::BernoulliHalf => {
                if x < 0.0 {
                    0.0
                } else if x < 1.0 {
                    0.5
                } else {
                    1.0
                }
            }
            Marginal::Uniform01 => x.clamp(0.0, 1.0),
            Marginal::StandardNormal => math::norm_cdf(x),
            Marginal::CenteredPareto { tail } => {
                let y = x + tail / (tail - 1.0);
                if y < 1.0 {
                    0.0
                } else {
                    1.0 - math::powf(y, -tail)
                }
            }
            Marginal::PointMass { c } => {
                if x < *c {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    /// Generalized inverse CDF for `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Marginal::BernoulliHalf => {
                if u < 0.5 {
                    0.0
                } else {
                    1.0
                }
            }
            Marginal::Uniform01 => u,
            Marginal::StandardNormal => {
                // u = 0 would map to -inf; the smallest representable draw
                // of the 53-bit uniform is mapped to the matching quantile.
                let u = math::max(u, 0.5 / (1u64 << 53) as f64);
                math::norm_quantile(u)
            }
            Marginal::CenteredPareto { tail } => {
                let u = math::min(u, 1.0 - 0.5 / (1u64 << 53) as f64);
                math::powf(1.0 - u, -1.0 / tail) - tail / (tail - 1.0)
            }
            Marginal::PointMass { c } => *c,
        }
    }

    /// True when |X| has a finite almost-sure bound.
    pub fn bound(&self) -> Option<f64> {
        match self {
            Marginal::BernoulliHalf => Some(1.0),
            Marginal::Uniform01 => Some(1.0),
            Marginal::PointMass { c } => Some(math::abs(*c)),
            _ => None,
        }
    }
}

/// Moment order `p ∈ [1, 2)` of the dominating variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentOrder {
    p: f64,
}

impl MomentOrder {
    pub fn new(p: f64) -> Result<Self> {
        if !(1.0..2.0).contains(&p) {
            return Err(Error::Domain("moment order requires 1 <= p < 2".to_string()));
        }
        Ok(Self { p })
    }

    pub fn get(&self) -> f64 {
        self.p
    }
}

/// Deterministic rule producing weights `a_1, a_2, …`, generated lazily by
/// index. A valid scheme keeps the running mean of squared weights below its
/// declared bound for every n.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightScheme {
    Constant { c: f64 },
    /// `a_k = base + amplitude · sin k`.
    BoundedSinusoid { base: f64, amplitude: f64 },
    /// `a_k = c · (-1)^{k+1}` (starts positive).
    SignedAlternating { c: f64 },
    /// Cycles through `values` (a_k = values[(k-1) mod len]).
    CustomTable { values: Vec<f64> },
}

impl WeightScheme {
    /// `a_k` for `k ≥ 1`.
    pub fn weight(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        match self {
            WeightScheme::Constant { c } => *c,
            WeightScheme::BoundedSinusoid { base, amplitude } => {
                base + amplitude * math::sin(k as f64)
            }
            WeightScheme::SignedAlternating { c } => {
                if k % 2 == 1 {
                    *c
                } else {
                    -*c
                }
            }
            WeightScheme::CustomTable { values } => values[(k - 1) % values.len()],
        }
    }

    /// Global bound for `sup_k |a_k|`.
    pub fn sup_abs(&self) -> f64 {
        match self {
            WeightScheme::Constant { c } => math::abs(*c),
            WeightScheme::BoundedSinusoid { base, amplitude } => {
                math::abs(*base) + math::abs(*amplitude)
            }
            WeightScheme::SignedAlternating { c } => math::abs(*c),
            WeightScheme::CustomTable { values } => {
                values.iter().fold(0.0, |acc, v| math::max(acc, math::abs(*v)))
            }
        }
    }

    /// Declared upper bound for `sup_n n^{-1} Σ_{k≤n} a_k²`.
    pub fn declared_square_bound(&self) -> f64 {
        match self {
            WeightScheme::Constant { c } => c * c,
            WeightScheme::BoundedSinusoid { base, amplitude } => {
                let m = math::abs(*base) + math::abs(*amplitude);
                m * m
            }
            WeightScheme::SignedAlternating { c } => c * c,
            WeightScheme::CustomTable { values } => {
                values.iter().fold(0.0, |acc, v| math::max(acc, v * v))
            }
        }
    }

    /// Largest running Cesàro mean of squared weights over `1..=n_max`.
    pub fn cesaro_square_mean_max(&self, n_max: usize) -> f64 {
        let mut acc = math::KahanSum::new();
        let mut worst = 0.0;
        for k in 1..=n_max {
            let a = self.weight(k);
            acc.add(a * a);
            worst = math::max(worst, acc.value() / k as f64);
        }
        worst
    }

    /// Checks the declared Cesàro bound by direct scan.
    pub fn is_valid_upto(&self, n_max: usize) -> bool {
        self.cesaro_square_mean_max(n_max) <= self.declared_square_bound() + 1e-12
    }
}

/// First `n` weights of a scheme.
pub fn weights(scheme: &WeightScheme, n: usize) -> Vec<f64> {
    (1..=n).map(|k| scheme.weight(k)).collect()
}

/// One realized trajectory together with the address that regenerates it
/// bit-identically.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub values: Vec<f64>,
    pub model: crate::model::SequenceModel,
    pub stream: StreamId,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
