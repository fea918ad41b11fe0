//! Experiment orchestration: fans path/replicate work units out to a worker
//! pool, reduces them in index order (so the worker count never touches the
//! numbers), and writes reports plus a content-hashed manifest.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use pqdlab_core::conditions::{
    eval_condition_2_16, eval_condition_2_17_weak, eval_condition_2_2, eval_condition_2_8,
    eval_condition_2_9, eval_condition_3_4, ConditionId, SeriesOptions,
};
use pqdlab_core::gfunc;
use pqdlab_core::regress::{
    aggregate_consistency, check_eiv_design, replicate_abs_err, RegressPreset,
};
use pqdlab_core::slln::{aggregate_block_sups, dyadic_checkpoints, path_block_sups};
use pqdlab_core::{analytic_delta, sample_pairs, sample_path, Error as CoreError, StreamId};

use crate::config::{normalized_text, ExperimentConfig, ExperimentKind, OutputFormat};
use crate::presets::{resolve_model, resolve_regress};
use crate::report;
use crate::svg;

/// Failure modes mapped to process exit codes by the binary.
#[derive(Debug)]
pub enum RunError {
    /// Exit code 2.
    Config(String),
    /// Exit code 3.
    Degenerate(String),
    /// Exit code 4.
    Io(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Degenerate(m) => write!(f, "degenerate model: {m}"),
            RunError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Degenerate(_) => 3,
            RunError::Io(_) => 4,
        }
    }
}

fn core_err(context: &str, e: CoreError) -> RunError {
    match e {
        CoreError::DegenerateDesign(_) | CoreError::SingularPivot { .. } => {
            RunError::Degenerate(format!("{context}: {e}"))
        }
        other => RunError::Config(format!("{context}: {other}")),
    }
}

/// Runs `count` independent work units on `workers` threads and returns the
/// results in index order. The reduction order is fixed, so output is
/// identical for any worker count.
pub fn parallel_map_indexed<T, F>(count: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.max(1).min(count.max(1));
    if workers <= 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..count).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let value = f(i);
                slots.lock().unwrap()[i] = Some(value);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|v| v.unwrap()).collect()
}

/// Output file sink that records content hashes for the manifest.
struct Sink {
    dir: PathBuf,
    outputs: Vec<(String, String)>,
}

impl Sink {
    fn new(dir: &str) -> Result<Self, RunError> {
        let dir = PathBuf::from(dir);
        fs::create_dir_all(&dir)
            .map_err(|e| RunError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir, outputs: Vec::new() })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<(), RunError> {
        let path = self.dir.join(name);
        write_file(&path, content.as_bytes())?;
        self.outputs.push((name.to_string(), report::sha256_hex(content.as_bytes())));
        Ok(())
    }

    fn finish(mut self, config_text: &str, master_seed: u64) -> Result<(), RunError> {
        self.outputs.sort();
        let manifest = report::manifest_json(
            &report::sha256_hex(config_text.as_bytes()),
            master_seed,
            &self.outputs,
        );
        write_file(&self.dir.join("manifest.json"), manifest.as_bytes())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    let mut f = fs::File::create(path)
        .map_err(|e| RunError::Io(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(bytes)
        .map_err(|e| RunError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Executes one experiment configuration end to end.
pub fn run(cfg: &ExperimentConfig, workers: usize) -> Result<(), RunError> {
    let mut sink = Sink::new(&cfg.out_dir)?;
    match cfg.kind {
        ExperimentKind::Sample => run_sample(cfg, &mut sink)?,
        ExperimentKind::Diagnose => run_diagnose(cfg, &mut sink)?,
        ExperimentKind::Conditions => run_conditions(cfg, &mut sink)?,
        ExperimentKind::Slln => run_slln(cfg, workers, &mut sink)?,
        ExperimentKind::Regress => run_regress(cfg, workers, &mut sink)?,
    }
    sink.finish(&normalized_text(cfg), cfg.master_seed)
}

fn model_of(cfg: &ExperimentConfig) -> Result<pqdlab_core::SequenceModel, RunError> {
    let spec = cfg.model.as_ref().ok_or_else(|| RunError::Config("missing [model]".into()))?;
    resolve_model(spec).map_err(RunError::Config)
}

fn run_sample(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), RunError> {
    let model = model_of(cfg)?;
    let path = sample_path(&model, cfg.n_max, StreamId::new(cfg.master_seed, 0))
        .map_err(|e| core_err("sample", e))?;
    match cfg.format {
        OutputFormat::Csv => sink.write("sample.csv", &report::sample_csv(&path.values)),
        OutputFormat::Json => sink.write("sample.json", &report::sample_json(&path.values)),
    }
}

/// Dependence diagnostic: empirical Δ̂ with binomial standard errors on a
/// 5×5 quantile grid for the pairs (1,2) and (2,3), against the closed form
/// when one exists.
fn run_diagnose(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), RunError> {
    let model = model_of(cfg)?;
    let budget = cfg.conditions.budget.max(gfunc::MIN_EMPIRICAL_PAIRS);
    let mut rows = Vec::new();
    for (pi, (k, j)) in [(1usize, 2usize), (2, 3)].iter().enumerate() {
        let stream = StreamId::new(cfg.master_seed, pi as u64);
        let (xs, ys) =
            sample_pairs(&model, *k, *j, budget, stream).map_err(|e| core_err("diagnose", e))?;
        let grid = grid_points(&model);
        for &x in &grid {
            for &y in &grid {
                let d = gfunc::empirical_delta(&xs, &ys, x, y)
                    .map_err(|e| core_err("diagnose", e))?;
                let joint = xs
                    .iter()
                    .zip(ys.iter())
                    .filter(|(a, b)| **a <= x && **b <= y)
                    .count() as f64
                    / xs.len() as f64;
                let se = ((joint * (1.0 - joint)).max(1e-12) / xs.len() as f64).sqrt();
                let ana = analytic_delta(&model, *k, *j, x, y)
                    .map_err(|e| core_err("diagnose", e))?;
                rows.push(report::DeltaRow {
                    k: *k,
                    j: *j,
                    x,
                    y,
                    delta_hat: d,
                    se,
                    delta_analytic: ana,
                });
            }
        }
    }
    sink.write("delta.csv", &report::delta_csv(&rows))
}

/// 5-point marginal-quantile grid for the Δ̂ diagnostic.
fn grid_points(model: &pqdlab_core::SequenceModel) -> Vec<f64> {
    [0.2, 0.35, 0.5, 0.65, 0.8].iter().map(|&u| model.marginal.quantile(u)).collect()
}

fn run_conditions(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), RunError> {
    let model = model_of(cfg)?;
    let spec = &cfg.conditions;
    let opts = SeriesOptions {
        k_max: spec.k_max,
        t_cutoff: spec.t_cutoff,
        tolerance: spec.tolerance,
        empirical_pairs: spec.budget,
        grid_points: spec.grid,
        stream: StreamId::new(cfg.master_seed, 0),
    };
    let rep = match spec.id {
        ConditionId::C2_2 => eval_condition_2_2(&model, &cfg.weights, &opts),
        ConditionId::C2_8 => eval_condition_2_8(&model, &cfg.weights, &opts),
        ConditionId::C2_9 => eval_condition_2_9(&model, &cfg.weights, spec.p, spec.c, &opts),
        ConditionId::C2_16 => eval_condition_2_16(&model, &opts),
        ConditionId::C2_17Weak => eval_condition_2_17_weak(&model, &opts),
        ConditionId::C3_4 => eval_condition_3_4(&model, &opts),
        other => {
            return Err(RunError::Config(format!(
                "condition {} is produced by the regress design checks, not the conditions experiment",
                other.as_str()
            )))
        }
    }
    .map_err(|e| core_err("conditions", e))?;
    match cfg.format {
        OutputFormat::Csv => sink.write("conditions.csv", &report::condition_csv(&rep)),
        OutputFormat::Json => sink.write("conditions.json", &report::condition_json(&rep)),
    }
}

fn run_slln(cfg: &ExperimentConfig, workers: usize, sink: &mut Sink) -> Result<(), RunError> {
    let model = model_of(cfg)?;
    let checkpoints = dyadic_checkpoints(cfg.n_max).map_err(|e| core_err("slln", e))?;
    let results: Vec<Result<Vec<f64>, CoreError>> =
        parallel_map_indexed(cfg.paths, workers, |p| {
            path_block_sups(
                &model,
                &cfg.weights,
                &cfg.normalizer,
                cfg.n_max,
                StreamId::new(cfg.master_seed, p as u64),
            )
        });
    let mut per_path = Vec::with_capacity(cfg.paths);
    for r in results {
        per_path.push(r.map_err(|e| core_err("slln", e))?);
    }
    let rep = aggregate_block_sups(&checkpoints, &per_path);
    match cfg.format {
        OutputFormat::Csv => sink.write("slln.csv", &report::convergence_csv(&rep))?,
        OutputFormat::Json => sink.write("slln.json", &report::convergence_json(&rep))?,
    }
    if cfg.svg {
        let pts: Vec<(f64, f64)> = rep
            .checkpoints
            .iter()
            .zip(&rep.median_sup)
            .map(|(n, m)| (*n as f64, *m))
            .collect();
        sink.write("slln.svg", &svg::loglog_polyline(&pts, "n", "median sup error"))?;
    }
    Ok(())
}

fn run_regress(cfg: &ExperimentConfig, workers: usize, sink: &mut Sink) -> Result<(), RunError> {
    let spec = cfg
        .regress
        .as_ref()
        .ok_or_else(|| RunError::Config("missing [regress] section".into()))?;
    let preset = resolve_regress(&spec.preset).map_err(RunError::Config)?;
    // Design-level diagnostics first, when the preset has a scalar design.
    if let RegressPreset::Eiv(m) = &preset {
        let diag = check_eiv_design(&m.design, &spec.n_grid).map_err(|e| core_err("regress", e))?;
        sink.write("design.csv", &report::design_csv(&diag))?;
    }
    let replicates = cfg.paths;
    let mut errs_by_n: Vec<Vec<f64>> = Vec::with_capacity(spec.n_grid.len());
    for &n in &spec.n_grid {
        let results: Vec<Result<f64, CoreError>> =
            parallel_map_indexed(replicates, workers, |rep| {
                replicate_abs_err(&preset, spec.estimator, n, cfg.master_seed, rep as u64)
            });
        let mut errs = Vec::with_capacity(replicates);
        for r in results {
            errs.push(r.map_err(|e| core_err("regress", e))?);
        }
        errs_by_n.push(errs);
    }
    let trace = aggregate_consistency(spec.estimator, &spec.n_grid, &errs_by_n);
    match cfg.format {
        OutputFormat::Csv => sink.write("trace.csv", &report::trace_csv(&trace))?,
        OutputFormat::Json => sink.write("trace.json", &report::trace_json(&trace))?,
    }
    if cfg.svg {
        let pts: Vec<(f64, f64)> = trace
            .n_grid
            .iter()
            .zip(&trace.median_abs_err)
            .map(|(n, m)| (*n as f64, *m))
            .collect();
        sink.write("trace.svg", &svg::loglog_polyline(&pts, "n", "median |error|"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_is_order_stable() {
        let a = parallel_map_indexed(100, 1, |i| i * i);
        let b = parallel_map_indexed(100, 4, |i| i * i);
        assert_eq!(a, b);
        assert_eq!(a[7], 49);
        assert!(parallel_map_indexed(0, 4, |i| i).is_empty());
    }
}
