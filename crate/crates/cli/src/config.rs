//! Experiment configuration: a line-oriented sectioned key-value format and
//! a JSON equivalent, parsed into one normalized structure with strict
//! validation (unknown keys rejected, precise error locations).

use std::collections::BTreeMap;
use std::fmt;

use pqdlab_core::conditions::ConditionId;
use pqdlab_core::model::{Correlation, Family};
use pqdlab_core::regress::EstimatorKind;
use pqdlab_core::slln::NormalizerKind;
use pqdlab_core::{Marginal, SequenceModel, WeightScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Sample,
    Diagnose,
    Conditions,
    Slln,
    Regress,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Sample => "sample",
            ExperimentKind::Diagnose => "diagnose",
            ExperimentKind::Conditions => "conditions",
            ExperimentKind::Slln => "slln",
            ExperimentKind::Regress => "regress",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "sample" => ExperimentKind::Sample,
            "diagnose" => ExperimentKind::Diagnose,
            "conditions" => ExperimentKind::Conditions,
            "slln" => ExperimentKind::Slln,
            "regress" => ExperimentKind::Regress,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn as_str(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Model reference: a named preset or an inline family/marginal definition.
#[derive(Debug, Clone)]
pub enum ModelSpec {
    Preset(String),
    Inline(SequenceModel),
}

#[derive(Debug, Clone)]
pub struct ConditionsSpec {
    pub id: ConditionId,
    pub k_max: usize,
    pub t_cutoff: f64,
    pub tolerance: f64,
    pub p: f64,
    pub c: f64,
    pub budget: usize,
    pub grid: usize,
}

#[derive(Debug, Clone)]
pub struct RegressSpec {
    pub preset: String,
    pub estimator: EstimatorKind,
    pub n_grid: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub master_seed: u64,
    pub out_dir: String,
    pub format: OutputFormat,
    pub svg: bool,
    pub n_max: usize,
    pub paths: usize,
    pub model: Option<ModelSpec>,
    pub weights: WeightScheme,
    pub normalizer: NormalizerKind,
    pub conditions: ConditionsSpec,
    pub regress: Option<RegressSpec>,
}

/// Collected validation failures, each carrying its source location.
#[derive(Debug, Clone)]
pub struct ConfigError {
    pub errors: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.errors.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "config error: {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

fn one(err: String) -> ConfigError {
    ConfigError { errors: vec![err] }
}

#[derive(Debug, Clone)]
struct RawItem {
    value: String,
    locus: String,
}

type Raw = BTreeMap<String, RawItem>;

fn parse_text(src: &str) -> Result<Raw, ConfigError> {
    let mut raw = Raw::new();
    let mut section = String::new();
    let mut errors = Vec::new();
    for (idx, line_raw) in src.lines().enumerate() {
        let lineno = idx + 1;
        let line = line_raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            match name.strip_suffix(']') {
                Some(name) if !name.trim().is_empty() => {
                    section = name.trim().to_string();
                }
                _ => errors.push(format!("line {lineno}: malformed section header `{line}`")),
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errors.push(format!("line {lineno}: expected `key = value`, got `{line}`"));
            continue;
        };
        if section.is_empty() {
            errors.push(format!("line {lineno}: key `{}` appears before any [section]", key.trim()));
            continue;
        }
        let full = format!("{section}.{}", key.trim());
        let item = RawItem { value: value.trim().to_string(), locus: format!("line {lineno}") };
        if raw.insert(full.clone(), item).is_some() {
            errors.push(format!("line {lineno}: duplicate key `{full}`"));
        }
    }
    if errors.is_empty() {
        Ok(raw)
    } else {
        Err(ConfigError { errors })
    }
}

fn json_scalar(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        serde_json::Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn parse_json(src: &str) -> Result<Raw, ConfigError> {
    let value: serde_json::Value = serde_json::from_str(src)
        .map_err(|e| one(format!("invalid JSON: {e}")))?;
    let serde_json::Value::Object(sections) = value else {
        return Err(one("top level must be an object of sections".into()));
    };
    let mut raw = Raw::new();
    let mut errors = Vec::new();
    for (section, body) in sections {
        let serde_json::Value::Object(entries) = body else {
            errors.push(format!("$.{section}: section must be an object"));
            continue;
        };
        for (key, v) in entries {
            let locus = format!("$.{section}.{key}");
            let value = match &v {
                serde_json::Value::Array(items) => {
                    let mut parts = Vec::with_capacity(items.len());
                    let mut ok = true;
                    for item in items {
                        match json_scalar(item) {
                            Some(s) => parts.push(s),
                            None => {
                                errors.push(format!("{locus}: array entries must be scalars"));
                                ok = false;
                                break;
                            }
                        }
                    }
                    if !ok {
                        continue;
                    }
                    parts.join(",")
                }
                other => match json_scalar(other) {
                    Some(s) => s,
                    None => {
                        errors.push(format!("{locus}: value must be a scalar or array"));
                        continue;
                    }
                },
            };
            raw.insert(format!("{section}.{key}"), RawItem { value, locus });
        }
    }
    if errors.is_empty() {
        Ok(raw)
    } else {
        Err(ConfigError { errors })
    }
}

/// Typed accessor over the raw map, consuming entries as they are read so
/// leftovers can be reported as unknown keys.
struct Reader {
    raw: Raw,
    errors: Vec<String>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<RawItem> {
        self.raw.remove(key)
    }

    fn err(&mut self, item: &RawItem, key: &str, msg: &str) {
        self.errors.push(format!("{} ({key}): {msg}", item.locus));
    }

    fn string(&mut self, key: &str) -> Option<String> {
        self.take(key).map(|i| i.value)
    }

    fn u64(&mut self, key: &str) -> Option<u64> {
        let item = self.take(key)?;
        match item.value.parse::<u64>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.err(&item, key, "expected an unsigned integer");
                None
            }
        }
    }

    fn usize(&mut self, key: &str) -> Option<usize> {
        self.u64(key).map(|v| v as usize)
    }

    fn f64(&mut self, key: &str) -> Option<f64> {
        let item = self.take(key)?;
        match item.value.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                self.err(&item, key, "expected a finite number");
                None
            }
        }
    }

    fn bool(&mut self, key: &str) -> Option<bool> {
        let item = self.take(key)?;
        match item.value.as_str() {
            "true" => Some(true),
            "false" => Some(false),
            _ => {
                self.err(&item, key, "expected true or false");
                None
            }
        }
    }

    fn usize_list(&mut self, key: &str) -> Option<Vec<usize>> {
        let item = self.take(key)?;
        let mut out = Vec::new();
        for part in item.value.split(',') {
            match part.trim().parse::<usize>() {
                Ok(v) => out.push(v),
                Err(_) => {
                    self.err(&item, key, "expected a comma-separated list of integers");
                    return None;
                }
            }
        }
        Some(out)
    }

    fn f64_list(&mut self, key: &str) -> Option<Vec<f64>> {
        let item = self.take(key)?;
        let mut out = Vec::new();
        for part in item.value.split(',') {
            match part.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => out.push(v),
                _ => {
                    self.err(&item, key, "expected a comma-separated list of numbers");
                    return None;
                }
            }
        }
        Some(out)
    }
}

fn build_marginal(r: &mut Reader) -> Option<Marginal> {
    let item = r.take("model.marginal")?;
    let m = match item.value.as_str() {
        "uniform01" => Marginal::Uniform01,
        "bernoulli_half" => Marginal::BernoulliHalf,
        "standard_normal" => Marginal::StandardNormal,
        "centered_pareto" => {
            let tail = r.f64("model.tail").unwrap_or(f64::NAN);
            match Marginal::centered_pareto(tail) {
                Ok(m) => m,
                Err(e) => {
                    r.err(&item, "model.tail", &e.to_string());
                    return None;
                }
            }
        }
        "point_mass" => {
            let c = r.f64("model.value").unwrap_or(0.0);
            Marginal::PointMass { c }
        }
        other => {
            r.err(
                &item,
                "model.marginal",
                &format!("unknown marginal `{other}` (uniform01 | bernoulli_half | standard_normal | centered_pareto | point_mass)"),
            );
            return None;
        }
    };
    Some(m)
}

fn build_model(r: &mut Reader) -> Option<ModelSpec> {
    if let Some(name) = r.string("model.preset") {
        if let Some(item) = r.take("model.family") {
            r.err(&item, "model.family", "model.preset and an inline family are mutually exclusive");
            return None;
        }
        return Some(ModelSpec::Preset(name));
    }
    let fam_item = r.take("model.family")?;
    let family = match fam_item.value.as_str() {
        "independent" => Family::Independent,
        "coupled_bernoulli" => Family::CoupledBernoulli,
        "fgm" => {
            let theta = r.f64("model.theta").unwrap_or(f64::NAN);
            Family::FgmCopula { theta }
        }
        "gaussian_equi" => {
            let rho = r.f64("model.rho").unwrap_or(f64::NAN);
            Family::GaussianCopula(Correlation::Equicorrelated { rho })
        }
        "gaussian_gap" => {
            let phi = r.f64("model.phi").unwrap_or(f64::NAN);
            Family::GaussianCopula(Correlation::GapGeometric { phi })
        }
        "gaussian_product" => {
            let lambda = r.f64("model.lambda").unwrap_or(f64::NAN);
            Family::GaussianCopula(Correlation::ProductGeometric { lambda })
        }
        other => {
            r.err(
                &fam_item,
                "model.family",
                &format!("unknown family `{other}` (independent | coupled_bernoulli | fgm | gaussian_equi | gaussian_gap | gaussian_product)"),
            );
            return None;
        }
    };
    let marginal = if family == Family::CoupledBernoulli {
        // Fixed marginal; accept an explicit matching one.
        match build_marginal(r) {
            Some(m) => m,
            None => Marginal::BernoulliHalf,
        }
    } else {
        match build_marginal(r) {
            Some(m) => m,
            None => {
                r.errors.push(format!(
                    "{} (model.family): inline models need a model.marginal entry",
                    fam_item.locus
                ));
                return None;
            }
        }
    };
    let mut model = match SequenceModel::new(family, marginal) {
        Ok(m) => m,
        Err(e) => {
            r.err(&fam_item, "model.family", &e.to_string());
            return None;
        }
    };
    if let Some(flag) = r.bool("model.delta_second_index_only") {
        match model.declare_delta_second_index_only(flag) {
            Ok(m) => model = m,
            Err(e) => {
                r.errors.push(format!("model.delta_second_index_only: {e}"));
                return None;
            }
        }
    }
    Some(ModelSpec::Inline(model))
}

fn build_weights(r: &mut Reader) -> Option<WeightScheme> {
    let item = r.take("weights.kind")?;
    let w = match item.value.as_str() {
        "constant" => WeightScheme::Constant { c: r.f64("weights.c").unwrap_or(1.0) },
        "signed_alternating" => {
            WeightScheme::SignedAlternating { c: r.f64("weights.c").unwrap_or(1.0) }
        }
        "bounded_sinusoid" => WeightScheme::BoundedSinusoid {
            base: r.f64("weights.base").unwrap_or(1.0),
            amplitude: r.f64("weights.amplitude").unwrap_or(0.5),
        },
        "custom_table" => {
            let values = r.f64_list("weights.values").unwrap_or_default();
            if values.is_empty() {
                r.err(&item, "weights.values", "custom_table needs a non-empty values list");
                return None;
            }
            WeightScheme::CustomTable { values }
        }
        other => {
            r.err(
                &item,
                "weights.kind",
                &format!("unknown scheme `{other}` (constant | signed_alternating | bounded_sinusoid | custom_table)"),
            );
            return None;
        }
    };
    Some(w)
}

fn build_normalizer(r: &mut Reader) -> Option<NormalizerKind> {
    let item = r.take("normalizer.kind")?;
    match item.value.as_str() {
        "kolmogorov" => Some(NormalizerKind::KolmogorovN),
        "mz" => {
            let p = r.f64("normalizer.p").unwrap_or(f64::NAN);
            match NormalizerKind::mz(p) {
                Ok(n) => Some(n),
                Err(_) => {
                    r.err(
                        &item,
                        "normalizer.p",
                        &format!("p = {p} is out of range: this normalizer requires 1 < p < 2"),
                    );
                    None
                }
            }
        }
        other => {
            r.err(&item, "normalizer.kind", &format!("unknown normalizer `{other}` (kolmogorov | mz)"));
            None
        }
    }
}

pub const DEFAULT_N_MAX: usize = 1 << 14;
pub const DEFAULT_PATHS: usize = 100;

fn build(mut r: Reader) -> Result<ExperimentConfig, ConfigError> {
    let kind = match r.string("experiment.kind") {
        Some(k) => match ExperimentKind::parse(&k) {
            Some(k) => Some(k),
            None => {
                r.errors.push(format!(
                    "experiment.kind: unknown kind `{k}` (sample | diagnose | conditions | slln | regress)"
                ));
                None
            }
        },
        None => {
            r.errors.push("experiment.kind: missing required field".into());
            None
        }
    };
    let master_seed = match r.u64("experiment.master_seed") {
        Some(s) => Some(s),
        None => {
            if !r.errors.iter().any(|e| e.contains("master_seed")) {
                r.errors.push("experiment.master_seed: missing required field".into());
            }
            None
        }
    };
    let out_dir = r.string("experiment.out").unwrap_or_else(|| "pqdlab-out".into());
    let format = match r.string("experiment.format") {
        None => OutputFormat::Csv,
        Some(f) => match f.as_str() {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            other => {
                r.errors.push(format!("experiment.format: unknown format `{other}` (csv | json)"));
                OutputFormat::Csv
            }
        },
    };
    let svg = r.bool("experiment.svg").unwrap_or(false);
    let n_max = r.usize("experiment.n_max").unwrap_or(DEFAULT_N_MAX);
    let paths = r.usize("experiment.paths").unwrap_or(DEFAULT_PATHS);

    let model = build_model(&mut r);
    let weights = build_weights(&mut r).unwrap_or(WeightScheme::Constant { c: 1.0 });
    let normalizer = build_normalizer(&mut r).unwrap_or(NormalizerKind::KolmogorovN);

    let conditions = ConditionsSpec {
        id: match r.string("conditions.id") {
            None => ConditionId::C2_2,
            Some(s) => match ConditionId::parse(&s) {
                Some(id) => id,
                None => {
                    r.errors.push(format!(
                        "conditions.id: unknown condition `{s}` (c2_2 | c2_8 | c2_9 | c2_16 | c2_17_weak | c3_4)"
                    ));
                    ConditionId::C2_2
                }
            },
        },
        k_max: r.usize("conditions.k_max").unwrap_or(128),
        t_cutoff: r.f64("conditions.t_cutoff").unwrap_or(1e7),
        tolerance: r.f64("conditions.tolerance").unwrap_or(1e-6),
        p: r.f64("conditions.p").unwrap_or(1.5),
        c: r.f64("conditions.c").unwrap_or(1.0),
        budget: r.usize("conditions.budget").unwrap_or(40_000),
        grid: r.usize("conditions.grid").unwrap_or(40),
    };

    let regress = match r.string("regress.preset") {
        None => None,
        Some(preset) => {
            let estimator = match r.string("regress.estimator") {
                None => EstimatorKind::EivBeta,
                Some(s) => match s.as_str() {
                    "eiv_beta" => EstimatorKind::EivBeta,
                    "eiv_alpha" => EstimatorKind::EivAlpha,
                    "ls_vector" => EstimatorKind::LsVector,
                    "ridge_gamma" => EstimatorKind::RidgeGamma,
                    "shrinkage_theta" => EstimatorKind::ShrinkageTheta,
                    other => {
                        r.errors.push(format!(
                            "regress.estimator: unknown estimator `{other}` (eiv_beta | eiv_alpha | ls_vector | ridge_gamma | shrinkage_theta)"
                        ));
                        EstimatorKind::EivBeta
                    }
                },
            };
            let n_grid = r
                .usize_list("regress.n_grid")
                .unwrap_or_else(|| vec![1000, 10_000, 100_000]);
            Some(RegressSpec { preset, estimator, n_grid })
        }
    };

    // Kind-level requirements.
    if let Some(kind) = kind {
        match kind {
            ExperimentKind::Sample | ExperimentKind::Conditions | ExperimentKind::Slln
            | ExperimentKind::Diagnose => {
                if model.is_none() && !r.errors.iter().any(|e| e.contains("model.")) {
                    r.errors.push(format!(
                        "[model]: the {} experiment needs a model section (preset or inline family/marginal)",
                        kind.as_str()
                    ));
                }
            }
            ExperimentKind::Regress => {
                if regress.is_none() {
                    r.errors.push("[regress]: the regress experiment needs a regress.preset entry".into());
                }
            }
        }
        if kind == ExperimentKind::Slln {
            if !n_max.is_power_of_two() || n_max < (1 << 10) {
                r.errors.push(format!(
                    "experiment.n_max: slln runs need a power of two, at least {} (got {n_max})",
                    1 << 10
                ));
            }
            if paths < 30 {
                r.errors.push(format!(
                    "experiment.paths: slln aggregates need at least 30 paths (got {paths})"
                ));
            }
        }
    }
    if paths == 0 {
        r.errors.push("experiment.paths: must be at least 1".into());
    }
    if let Some(spec) = &regress {
        if spec.n_grid.is_empty() || spec.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            r.errors.push("regress.n_grid: must be a strictly increasing list".into());
        }
    }

    // Everything the builders did not consume is unknown.
    let leftovers: Vec<String> = r
        .raw
        .iter()
        .map(|(k, item)| format!("{} ({k}): unknown key", item.locus))
        .collect();
    r.errors.extend(leftovers);

    if !r.errors.is_empty() {
        return Err(ConfigError { errors: r.errors });
    }
    Ok(ExperimentConfig {
        kind: kind.unwrap(),
        master_seed: master_seed.unwrap(),
        out_dir,
        format,
        svg,
        n_max,
        paths,
        model,
        weights,
        normalizer,
        conditions,
        regress,
    })
}

/// Parses a config document; JSON when the first non-space byte is `{`,
/// the sectioned text format otherwise.
pub fn parse_config(src: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw = if src.trim_start().starts_with('{') { parse_json(src)? } else { parse_text(src)? };
    build(Reader { raw, errors: Vec::new() })
}

/// Parses a standalone `[model]` fragment (used by preset files). The
/// fragment must define an inline model; referencing another preset is
/// rejected.
pub fn parse_config_fragment_model(src: &str) -> Result<SequenceModel, ConfigError> {
    let raw = if src.trim_start().starts_with('{') { parse_json(src)? } else { parse_text(src)? };
    let mut r = Reader { raw, errors: Vec::new() };
    let spec = build_model(&mut r);
    let leftovers: Vec<String> = r
        .raw
        .iter()
        .map(|(k, item)| format!("{} ({k}): unknown key", item.locus))
        .collect();
    r.errors.extend(leftovers);
    match spec {
        Some(ModelSpec::Inline(m)) if r.errors.is_empty() => Ok(m),
        Some(ModelSpec::Preset(_)) => {
            r.errors.push("model.preset: preset files must define the model inline".into());
            Err(ConfigError { errors: r.errors })
        }
        _ => {
            if r.errors.is_empty() {
                r.errors.push("[model]: missing model definition".into());
            }
            Err(ConfigError { errors: r.errors })
        }
    }
}

/// Full validation pass returning the normalized echo, defaults filled.
/// Referenced presets must exist (the preset directory is consulted exactly
/// as at run time).
pub fn validate_config_text(src: &str) -> Result<String, ConfigError> {
    let cfg = parse_config(src)?;
    let mut errors = Vec::new();
    if let Some(spec) = &cfg.model {
        if let Err(e) = crate::presets::resolve_model(spec) {
            errors.push(format!("model.preset: {e}"));
        }
    }
    if let Some(spec) = &cfg.regress {
        if let Err(e) = crate::presets::resolve_regress(&spec.preset) {
            errors.push(format!("regress.preset: {e}"));
        }
    }
    if !errors.is_empty() {
        return Err(ConfigError { errors });
    }
    Ok(normalized_text(&cfg))
}

fn weights_text(w: &WeightScheme) -> String {
    match w {
        WeightScheme::Constant { c } => format!("kind = constant\nc = {c}"),
        WeightScheme::SignedAlternating { c } => format!("kind = signed_alternating\nc = {c}"),
        WeightScheme::BoundedSinusoid { base, amplitude } => {
            format!("kind = bounded_sinusoid\nbase = {base}\namplitude = {amplitude}")
        }
        WeightScheme::CustomTable { values } => {
            let list: Vec<String> = values.iter().map(|v| v.to_string()).collect();
            format!("kind = custom_table\nvalues = {}", list.join(","))
        }
    }
}

fn model_text(spec: &ModelSpec) -> String {
    match spec {
        ModelSpec::Preset(name) => format!("preset = {name}"),
        ModelSpec::Inline(m) => {
            let mut out = String::new();
            match m.family {
                Family::Independent => out.push_str("family = independent\n"),
                Family::CoupledBernoulli => out.push_str("family = coupled_bernoulli\n"),
                Family::FgmCopula { theta } => {
                    out.push_str(&format!("family = fgm\ntheta = {theta}\n"));
                }
                Family::GaussianCopula(Correlation::Equicorrelated { rho }) => {
                    out.push_str(&format!("family = gaussian_equi\nrho = {rho}\n"));
                }
                Family::GaussianCopula(Correlation::GapGeometric { phi }) => {
                    out.push_str(&format!("family = gaussian_gap\nphi = {phi}\n"));
                }
                Family::GaussianCopula(Correlation::ProductGeometric { lambda }) => {
                    out.push_str(&format!("family = gaussian_product\nlambda = {lambda}\n"));
                }
            }
            match m.marginal {
                Marginal::Uniform01 => out.push_str("marginal = uniform01"),
                Marginal::BernoulliHalf => out.push_str("marginal = bernoulli_half"),
                Marginal::StandardNormal => out.push_str("marginal = standard_normal"),
                Marginal::CenteredPareto { tail } => {
                    out.push_str(&format!("marginal = centered_pareto\ntail = {tail}"));
                }
                Marginal::PointMass { c } => {
                    out.push_str(&format!("marginal = point_mass\nvalue = {c}"));
                }
            }
            out.push_str(&format!("\ndelta_second_index_only = {}", m.delta_second_index_only));
            out
        }
    }
}

/// Canonical text form of a parsed config (also the hashing basis for the
/// run manifest, so text and JSON inputs of the same experiment agree).
pub fn normalized_text(cfg: &ExperimentConfig) -> String {
    let mut out = String::new();
    out.push_str("[experiment]\n");
    out.push_str(&format!("kind = {}\n", cfg.kind.as_str()));
    out.push_str(&format!("master_seed = {}\n", cfg.master_seed));
    out.push_str(&format!("out = {}\n", cfg.out_dir));
    out.push_str(&format!("format = {}\n", cfg.format.as_str()));
    out.push_str(&format!("svg = {}\n", cfg.svg));
    out.push_str(&format!("n_max = {}\n", cfg.n_max));
    out.push_str(&format!("paths = {}\n", cfg.paths));
    if let Some(model) = &cfg.model {
        out.push_str("\n[model]\n");
        out.push_str(&model_text(model));
        out.push('\n');
    }
    out.push_str("\n[weights]\n");
    out.push_str(&weights_text(&cfg.weights));
    out.push('\n');
    out.push_str("\n[normalizer]\n");
    match cfg.normalizer {
        NormalizerKind::KolmogorovN => out.push_str("kind = kolmogorov\n"),
        NormalizerKind::MzP(p) => out.push_str(&format!("kind = mz\np = {}\n", p.get())),
    }
    out.push_str("\n[conditions]\n");
    out.push_str(&format!("id = {}\n", cfg.conditions.id.as_str()));
    out.push_str(&format!("k_max = {}\n", cfg.conditions.k_max));
    out.push_str(&format!("t_cutoff = {}\n", cfg.conditions.t_cutoff));
    out.push_str(&format!("tolerance = {}\n", cfg.conditions.tolerance));
    out.push_str(&format!("p = {}\n", cfg.conditions.p));
    out.push_str(&format!("c = {}\n", cfg.conditions.c));
    out.push_str(&format!("budget = {}\n", cfg.conditions.budget));
    out.push_str(&format!("grid = {}\n", cfg.conditions.grid));
    if let Some(spec) = &cfg.regress {
        out.push_str("\n[regress]\n");
        out.push_str(&format!("preset = {}\n", spec.preset));
        out.push_str(&format!("estimator = {}\n", spec.estimator.as_str()));
        let grid: Vec<String> = spec.n_grid.iter().map(|n| n.to_string()).collect();
        out.push_str(&format!("n_grid = {}\n", grid.join(",")));
    }
    out
}
