//! `pqdlab` — batch experiments over pairwise PQD sequence models:
//! sampling, dependence diagnostics, series-condition evaluation, weighted-
//! sum convergence runs and estimator consistency experiments.

use std::process::ExitCode;

use pqdlab_cli::config::{self, ExperimentKind, OutputFormat};
use pqdlab_cli::runner::{self, RunError};

const USAGE: &str = "\
usage: pqdlab <sample|diagnose|conditions|slln|regress|validate> [flags]

flags:
  --config PATH     experiment configuration (sectioned text or JSON)
  --seed U64        override [experiment] master_seed
  --paths N         override [experiment] paths (slln paths / regress replicates)
  --n-max N         override [experiment] n_max
  --out DIR         override [experiment] out
  --format csv|json override [experiment] format
  --workers N       worker threads (default: available parallelism)
  --svg             also write SVG plots

environment:
  PQDLAB_PRESET_DIR directory searched first for <name>.preset model files

exit codes: 0 success, 2 config error, 3 degenerate model, 4 i/o error
";

struct Flags {
    config: Option<String>,
    seed: Option<u64>,
    paths: Option<usize>,
    n_max: Option<usize>,
    out: Option<String>,
    format: Option<OutputFormat>,
    workers: Option<usize>,
    svg: bool,
}

fn parse_flags(args: &[String]) -> Result<Flags, String> {
    let mut flags = Flags {
        config: None,
        seed: None,
        paths: None,
        n_max: None,
        out: None,
        format: None,
        workers: None,
        svg: false,
    };
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut value = |name: &str| {
            it.next().map(|s| s.to_string()).ok_or_else(|| format!("{name} needs a value"))
        };
        match arg.as_str() {
            "--config" => flags.config = Some(value("--config")?),
            "--seed" => {
                flags.seed = Some(
                    value("--seed")?
                        .parse()
                        .map_err(|_| "--seed needs an unsigned integer".to_string())?,
                )
            }
            "--paths" => {
                flags.paths = Some(
                    value("--paths")?
                        .parse()
                        .map_err(|_| "--paths needs an unsigned integer".to_string())?,
                )
            }
            "--n-max" => {
                flags.n_max = Some(
                    value("--n-max")?
                        .parse()
                        .map_err(|_| "--n-max needs an unsigned integer".to_string())?,
                )
            }
            "--out" => flags.out = Some(value("--out")?),
            "--format" => {
                flags.format = Some(match value("--format")?.as_str() {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    other => return Err(format!("--format: unknown format `{other}`")),
                })
            }
            "--workers" => {
                flags.workers = Some(
                    value("--workers")?
                        .parse()
                        .map_err(|_| "--workers needs an unsigned integer".to_string())?,
                )
            }
            "--svg" => flags.svg = true,
            other => return Err(format!("unknown flag `{other}`")),
        }
    }
    Ok(flags)
}

fn load_config(flags: &Flags) -> Result<String, RunError> {
    let path = flags
        .config
        .as_ref()
        .ok_or_else(|| RunError::Config("--config PATH is required".into()))?;
    std::fs::read_to_string(path)
        .map_err(|e| RunError::Io(format!("cannot read config {path}: {e}")))
}

fn real_main() -> Result<(), RunError> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first() else {
        eprint!("{USAGE}");
        return Err(RunError::Config("missing command".into()));
    };
    if command == "--help" || command == "-h" || command == "help" {
        print!("{USAGE}");
        return Ok(());
    }
    let flags = parse_flags(&args[1..]).map_err(RunError::Config)?;

    if command == "validate" {
        let text = load_config(&flags)?;
        let echo = config::validate_config_text(&text)
            .map_err(|e| RunError::Config(e.to_string()))?;
        print!("{echo}");
        return Ok(());
    }

    let kind = ExperimentKind::parse(command).ok_or_else(|| {
        RunError::Config(format!("unknown command `{command}` (see --help)"))
    })?;
    let text = load_config(&flags)?;
    let mut cfg =
        config::parse_config(&text).map_err(|e| RunError::Config(e.to_string()))?;
    if cfg.kind != kind {
        return Err(RunError::Config(format!(
            "config declares kind `{}` but the `{}` command was invoked",
            cfg.kind.as_str(),
            command
        )));
    }
    if let Some(seed) = flags.seed {
        cfg.master_seed = seed;
    }
    if let Some(paths) = flags.paths {
        cfg.paths = paths;
    }
    if let Some(n_max) = flags.n_max {
        cfg.n_max = n_max;
    }
    if let Some(out) = flags.out {
        cfg.out_dir = out;
    }
    if let Some(format) = flags.format {
        cfg.format = format;
    }
    if flags.svg {
        cfg.svg = true;
    }
    let workers = flags
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    runner::run(&cfg, workers)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pqdlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
