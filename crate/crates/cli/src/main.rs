//! Command-line front end for the verification harness. Every run
//! emits one JSON report and sets the exit code from its verdict:
//! 0 pass, 1 fail, 2 inconclusive, 3 usage or configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gssf_core::catalog::{builtin_space, BUILTIN_NAMES};
use gssf_core::harness::{
    derivation_identity_check, equivalence_matrix, run_theorem, run_validation, Scenario,
    SigmaMode,
};
use gssf_core::report::Report;

#[derive(Debug, Parser)]
#[command(name = "gssf-lab", version, about = "curvature-ansatz verification lab")]
struct Cli {
    /// Optional key=value defaults file: `tol.forward`, `tol.identity`,
    /// `samples`, and `box.<space>` sampling boxes.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Inspect the model catalog
    Spaces {
        #[command(subcommand)]
        action: SpacesAction,
    },
    /// Check a model against its closed-form structure and curvature
    Validate {
        #[arg(long)]
        space: String,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one theorem check on a scenario
    Theorem {
        /// Theorem id, e.g. T-QSsigma.
        #[arg(long)]
        id: String,
        #[arg(long)]
        space: String,
        /// Geometric sigma from this embedding.
        #[arg(long, conflicts_with = "synthetic")]
        embedding: Option<String>,
        /// Synthetic sigma on the free-standing model (seeded by --seed).
        #[arg(long)]
        synthetic: bool,
        /// Pseudo-parallelism function L1 (default 0).
        #[arg(long = "L1")]
        l1: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Mode::Forward)]
        mode: Mode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the condition-equivalence matrix on an embedded scenario
    Equivalence {
        #[arg(long)]
        space: String,
        #[arg(long)]
        embedding: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum SpacesAction {
    /// Print name, dimension, and curvature parameters per model
    List,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Forward,
    Identity,
}

struct Defaults {
    tol_forward: f64,
    tol_identity: f64,
    samples: usize,
    boxes: Vec<(String, Vec<(f64, f64)>)>,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults {
            tol_forward: 1e-7,
            tol_identity: 1e-6,
            samples: 50,
            boxes: Vec::new(),
        }
    }
}

fn parse_box(value: &str) -> Result<Vec<(f64, f64)>, String> {
    value
        .split(',')
        .map(|iv| {
            let (lo, hi) = iv
                .split_once(':')
                .ok_or_else(|| format!("interval '{iv}' is not lo:hi"))?;
            let lo: f64 = lo.trim().parse().map_err(|_| format!("bad bound '{lo}'"))?;
            let hi: f64 = hi.trim().parse().map_err(|_| format!("bad bound '{hi}'"))?;
            if !(lo < hi) {
                return Err(format!("empty interval '{iv}'"));
            }
            Ok((lo, hi))
        })
        .collect()
}

fn load_defaults(path: Option<&Path>) -> Result<Defaults, String> {
    let mut d = Defaults::default();
    let Some(path) = path else { return Ok(d) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", lineno + 1))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "tol.forward" => {
                d.tol_forward = value
                    .parse()
                    .map_err(|_| format!("config line {}: bad tolerance", lineno + 1))?
            }
            "tol.identity" => {
                d.tol_identity = value
                    .parse()
                    .map_err(|_| format!("config line {}: bad tolerance", lineno + 1))?
            }
            "samples" => {
                d.samples = value
                    .parse()
                    .map_err(|_| format!("config line {}: bad sample count", lineno + 1))?
            }
            _ => match key.strip_prefix("box.") {
                Some(space) => {
                    let b = parse_box(value)
                        .map_err(|e| format!("config line {}: {e}", lineno + 1))?;
                    d.boxes.push((space.to_string(), b));
                }
                None => return Err(format!("config line {}: unknown key '{key}'", lineno + 1)),
            },
        }
    }
    Ok(d)
}

fn emit(report: &Report, out: Option<&Path>) -> Result<ExitCode, String> {
    let json = report.to_json();
    match out {
        Some(path) => {
            std::fs::write(path, &json)
                .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            eprintln!(
                "{}: verdict {}, max residual {} -> {}",
                report.scenario.command,
                report.verdict,
                report.max_residual,
                path.display()
            );
        }
        None => print!("{json}"),
    }
    Ok(ExitCode::from(u8::try_from(report.exit_code()).unwrap_or(3)))
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let defaults = load_defaults(cli.config.as_deref())?;
    let box_for = |space: &str, embedding: Option<&str>| -> Option<Vec<(f64, f64)>> {
        // An embedded scenario samples the embedding chart, so an
        // override keyed by the embedding name wins over the space key.
        embedding
            .and_then(|e| defaults.boxes.iter().find(|(n, _)| n == e))
            .or_else(|| defaults.boxes.iter().find(|(n, _)| n == space))
            .map(|(_, b)| b.clone())
    };
    match cli.command {
        Command::Spaces { action: SpacesAction::List } => {
            println!(
                "{:<22} {:>3} {:>8} {:>8} {:>8} {:>10} {:>10}",
                "name", "dim", "f1", "f2", "f3", "phi-sec", "scalar"
            );
            for name in BUILTIN_NAMES {
                let space = builtin_space(name).map_err(|e| e.to_string())?;
                let p = space.params;
                let n = (space.dim() - 1) / 2;
                println!(
                    "{:<22} {:>3} {:>8.3} {:>8.3} {:>8.3} {:>10.3} {:>10.3}",
                    space.name,
                    space.dim(),
                    p.f1,
                    p.f2,
                    p.f3,
                    p.f1 + 3.0 * p.f2,
                    p.scalar_curvature(n),
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { space, samples, tol, seed, out } => {
            let scenario = Scenario {
                space: space.clone(),
                embedding: None,
                sigma_mode: SigmaMode::Synthetic { seed: seed.unwrap_or(42) },
                samples: samples.unwrap_or(defaults.samples),
                tol: tol.unwrap_or(defaults.tol_forward),
                l1: None,
                seed: seed.unwrap_or(42),
                box_override: box_for(&space, None),
            };
            let report = run_validation(&scenario).map_err(|e| e.to_string())?;
            emit(&report, out.as_deref())
        }
        Command::Theorem {
            id,
            space,
            embedding,
            synthetic,
            l1,
            samples,
            tol,
            seed,
            mode,
            out,
        } => {
            if embedding.is_none() && !synthetic {
                return Err("choose a sigma source: --embedding <name> or --synthetic".into());
            }
            let seed = seed.unwrap_or(42);
            let scenario = Scenario {
                space: space.clone(),
                embedding: embedding.clone(),
                sigma_mode: if synthetic {
                    SigmaMode::Synthetic { seed }
                } else {
                    SigmaMode::Geometric
                },
                samples: samples.unwrap_or(defaults.samples),
                tol: tol.unwrap_or(match mode {
                    Mode::Forward => defaults.tol_forward,
                    Mode::Identity => defaults.tol_identity,
                }),
                l1,
                seed,
                box_override: box_for(&space, embedding.as_deref()),
            };
            let report = match mode {
                Mode::Forward => run_theorem(&id, &scenario),
                Mode::Identity => derivation_identity_check(&id, &scenario),
            }
            .map_err(|e| e.to_string())?;
            emit(&report, Some(out.as_path()))
        }
        Command::Equivalence { space, embedding, out } => {
            let scenario = Scenario {
                space: space.clone(),
                embedding: Some(embedding.clone()),
                sigma_mode: SigmaMode::Geometric,
                samples: defaults.samples,
                tol: defaults.tol_forward,
                l1: None,
                seed: 42,
                box_override: box_for(&space, Some(embedding.as_str())),
            };
            let report = equivalence_matrix(&scenario).map_err(|e| e.to_string())?;
            emit(&report, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
