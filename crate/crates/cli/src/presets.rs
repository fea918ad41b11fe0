//! Named model and regression presets. Model presets can be overridden or
//! extended by `<name>.preset` files in the directory named by the
//! `PQDLAB_PRESET_DIR` environment variable (same `[model]` grammar as the
//! config file).

use pqdlab_core::model::{Correlation, Family};
use pqdlab_core::regress::{DesignRule, EivModel, MatrixDesign, RegressPreset};
use pqdlab_core::{Marginal, SequenceModel};

use crate::config::{parse_config_fragment_model, ModelSpec};

pub fn builtin_model(name: &str) -> Option<SequenceModel> {
    let m = match name {
        "independent_uniform" => SequenceModel::independent(Marginal::Uniform01),
        "independent_normal" => SequenceModel::independent(Marginal::StandardNormal),
        "pareto18_independent" => {
            SequenceModel::independent(Marginal::centered_pareto(1.8).unwrap())
        }
        "coupled_bernoulli" => SequenceModel::coupled_bernoulli(),
        "gauss_gap_half_normal" => SequenceModel::new(
            Family::GaussianCopula(Correlation::GapGeometric { phi: 0.5 }),
            Marginal::StandardNormal,
        )
        .unwrap()
        // Every pair law is determined by the index gap, so the first-index
        // pair family {(1, j)} spans them all; declared for the collapsed
        // single-sum evaluators.
        .declare_delta_second_index_only(true)
        .unwrap(),
        "gauss_equi09_normal" => SequenceModel::new(
            Family::GaussianCopula(Correlation::Equicorrelated { rho: 0.9 }),
            Marginal::StandardNormal,
        )
        .unwrap(),
        "gauss_product_half_normal" => SequenceModel::new(
            Family::GaussianCopula(Correlation::ProductGeometric { lambda: 0.5 }),
            Marginal::StandardNormal,
        )
        .unwrap(),
        "fgm_theta1_uniform" => {
            SequenceModel::new(Family::FgmCopula { theta: 1.0 }, Marginal::Uniform01).unwrap()
        }
        "fgm_theta05_uniform" => {
            SequenceModel::new(Family::FgmCopula { theta: 0.5 }, Marginal::Uniform01).unwrap()
        }
        "point_mass_2" => SequenceModel::independent(Marginal::PointMass { c: 2.0 }),
        _ => return None,
    };
    Some(m)
}

pub fn builtin_model_names() -> &'static [&'static str] {
    &[
        "independent_uniform",
        "independent_normal",
        "pareto18_independent",
        "coupled_bernoulli",
        "gauss_gap_half_normal",
        "gauss_equi09_normal",
        "gauss_product_half_normal",
        "fgm_theta1_uniform",
        "fgm_theta05_uniform",
        "point_mass_2",
    ]
}

/// Resolves a model spec: inline models pass through; preset names look in
/// `PQDLAB_PRESET_DIR` (when set) for `<name>.preset`, then in the builtin
/// table.
pub fn resolve_model(spec: &ModelSpec) -> Result<SequenceModel, String> {
    match spec {
        ModelSpec::Inline(m) => Ok(*m),
        ModelSpec::Preset(name) => {
            if let Ok(dir) = std::env::var("PQDLAB_PRESET_DIR") {
                let path = std::path::Path::new(&dir).join(format!("{name}.preset"));
                if path.exists() {
                    let src = std::fs::read_to_string(&path)
                        .map_err(|e| format!("cannot read preset file {}: {e}", path.display()))?;
                    return parse_config_fragment_model(&src)
                        .map_err(|e| format!("preset file {}: {e}", path.display()));
                }
            }
            builtin_model(name).ok_or_else(|| {
                format!(
                    "unknown model preset `{name}` (builtin: {})",
                    builtin_model_names().join(", ")
                )
            })
        }
    }
}

fn independent_normal() -> SequenceModel {
    SequenceModel::independent(Marginal::StandardNormal)
}

fn product_normal() -> SequenceModel {
    SequenceModel::new(
        Family::GaussianCopula(Correlation::ProductGeometric { lambda: 0.5 }),
        Marginal::StandardNormal,
    )
    .unwrap()
}

fn gap_normal() -> SequenceModel {
    SequenceModel::new(
        Family::GaussianCopula(Correlation::GapGeometric { phi: 0.5 }),
        Marginal::StandardNormal,
    )
    .unwrap()
}

/// Builtin regression presets (model + truth).
pub fn builtin_regress(name: &str) -> Option<RegressPreset> {
    let preset = match name {
        // Errors-in-variables with growing design: both consistency ratios
        // behave, independent errors satisfy the part-split series trivially.
        "eiv_linear" => RegressPreset::Eiv(EivModel {
            alpha: 0.0,
            beta: 1.0,
            design: DesignRule::Linear,
            eps: independent_normal(),
            delta: independent_normal(),
        }),
        // Noise-free sanity preset: every estimator recovers the truth
        // exactly.
        "eiv_zero_noise" => RegressPreset::Eiv(EivModel {
            alpha: 0.25,
            beta: 1.25,
            design: DesignRule::Linear,
            eps: SequenceModel::independent(Marginal::PointMass { c: 0.0 }),
            delta: SequenceModel::independent(Marginal::PointMass { c: 0.0 }),
        }),
        // Same design with dependent PQD errors whose dependence decays in
        // both indices (the part-split series is certified convergent).
        "eiv_linear_pqd" => RegressPreset::Eiv(EivModel {
            alpha: 0.0,
            beta: 1.0,
            design: DesignRule::Linear,
            eps: product_normal(),
            delta: product_normal(),
        }),
        // Negative control: noise-to-signal stays at one, the slope
        // attenuates toward β/2 and never recovers.
        "eiv_alternating" => RegressPreset::Eiv(EivModel {
            alpha: 0.0,
            beta: 1.0,
            design: DesignRule::Alternating,
            eps: independent_normal(),
            delta: independent_normal(),
        }),
        // Bounded-mean design: the intercept is consistent too.
        "eiv_alternating_sqrt" => RegressPreset::Eiv(EivModel {
            alpha: 0.5,
            beta: 1.0,
            design: DesignRule::AlternatingSqrt,
            eps: independent_normal(),
            delta: independent_normal(),
        }),
        // Forced failure: a constant regressor observed without noise has no
        // centered variation.
        "eiv_degenerate" => RegressPreset::Eiv(EivModel {
            alpha: 0.0,
            beta: 1.0,
            design: DesignRule::Constant { c: 1.0 },
            eps: SequenceModel::independent(Marginal::PointMass { c: 0.0 }),
            delta: SequenceModel::independent(Marginal::PointMass { c: 0.0 }),
        }),
        // Two bounded orthogonal-ish columns; the error dependence decays in
        // both indices, so the cubic-kernel design series carries a certified
        // tail and the scaled inverse diagonal stays bounded.
        "ls_intercept_alternating" => RegressPreset::Ls {
            design: MatrixDesign::InterceptAlternating,
            beta: vec![1.0, -2.0],
            eps: product_normal(),
        },
        // Gap-decaying error variant (convergent series, conservative
        // certificate).
        "ls_intercept_alternating_gap" => RegressPreset::Ls {
            design: MatrixDesign::InterceptAlternating,
            beta: vec![1.0, -2.0],
            eps: gap_normal(),
        },
        // Stochastic growing design: smallest Gram eigenvalue grows faster
        // than n, covering the spectral-radius route to consistency.
        "ls_stochastic_growing" => RegressPreset::Ls {
            design: MatrixDesign::StochasticGrowing { p: 2, growth: 0.1 },
            beta: vec![1.0, -2.0],
            eps: product_normal(),
        },
        // Scalar ridge/shrinkage presets: Σx² grows like n^{1.2}, so its
        // inverse is o(1/n), fast enough for strong consistency of the
        // penalized fit.
        "ridge_growing" => RegressPreset::Scalar {
            design: DesignRule::Power { q: 0.1 },
            beta: 1.0,
            eps: product_normal(),
        },
        "ridge_growing_independent" => RegressPreset::Scalar {
            design: DesignRule::Power { q: 0.1 },
            beta: 1.0,
            eps: independent_normal(),
        },
        _ => return None,
    };
    Some(preset)
}

pub fn builtin_regress_names() -> &'static [&'static str] {
    &[
        "eiv_linear",
        "eiv_zero_noise",
        "eiv_linear_pqd",
        "eiv_alternating",
        "eiv_alternating_sqrt",
        "eiv_degenerate",
        "ls_intercept_alternating",
        "ls_intercept_alternating_gap",
        "ls_stochastic_growing",
        "ridge_growing",
        "ridge_growing_independent",
    ]
}

pub fn resolve_regress(name: &str) -> Result<RegressPreset, String> {
    builtin_regress(name).ok_or_else(|| {
        format!(
            "unknown regression preset `{name}` (builtin: {})",
            builtin_regress_names().join(", ")
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_models_resolve() {
        for name in builtin_model_names() {
            assert!(builtin_model(name).is_some(), "{name}");
        }
        assert!(builtin_model("nope").is_none());
    }

    #[test]
    fn builtin_regressions_resolve() {
        for name in builtin_regress_names() {
            assert!(builtin_regress(name).is_some(), "{name}");
        }
    }
}
