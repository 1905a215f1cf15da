use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rpd_cli::analyze;
use rpd_cli::config::Observable;
use rpd_cli::error::{CliError, Result};
use rpd_cli::{run_sweep, ExperimentConfig};

/// Projected-ensemble sweeps over random permutation states.
#[derive(Parser, Debug)]
#[command(name = "rpd", version)]
struct Cli {
    /// Master seed, overriding the config (run-sweep) or the default (validate).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; falls back to RPD_THREADS, then to the number of CPUs.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output path; reports go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a parameter sweep described by a TOML config.
    RunSweep { config: PathBuf },
    /// Post-process sweep outputs.
    #[command(subcommand)]
    Analyze(Analyze),
}

#[derive(Subcommand, Debug)]
enum Analyze {
    /// Crossing point of two sizes' curves.
    Crossing {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "trace_dist_haar")]
        observable: String,
        /// Moment order; defaults to 2 for trace-distance observables.
        #[arg(long)]
        k: Option<usize>,
        /// Two sizes to intersect, e.g. `14,18`; defaults to the two largest.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
    },
    /// Finite-size scaling collapse at fixed x*.
    Fss {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "coherence")]
        observable: String,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        x_star: f64,
        /// ν grid as `start:stop:step`.
        #[arg(long)]
        nu_grid: Option<String>,
    },
    /// Binned distributions from histogram sidecars, as CSV.
    Distributions {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Exact-oracle checks.
    Validate {
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
}

fn resolve_k(observable: &str, k: Option<usize>) -> Result<Option<usize>> {
    let o = Observable::from_name(observable)
        .ok_or_else(|| CliError::Config(format!("unknown observable '{observable}'")))?;
    Ok(if o.is_moment() {
        Some(k.unwrap_or(2))
    } else {
        None
    })
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn emit_json<T: serde::Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    emit(out, &bytes)
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::RunSweep { config } => {
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if let Some(s) = cli.seed {
                cfg.master_seed = s;
            }
            let path = out
                .map(Path::to_path_buf)
                .or_else(|| cfg.output.clone())
                .ok_or_else(|| {
                    CliError::Config("no output path: set `output` or pass --out".into())
                })?;
            let summary = run_sweep(&cfg, &path, cli.threads)?;
            println!(
                "{}",
                serde_json::json!({
                    "output": summary.output,
                    "computed_points": summary.computed_points,
                    "skipped_points": summary.skipped_points,
                })
            );
            Ok(())
        }
        Command::Analyze(Analyze::Crossing {
            inputs,
            observable,
            k,
            sizes,
        }) => {
            let records = analyze::load_records(&inputs)?;
            let k = resolve_k(&observable, k)?;
            let sizes = match sizes.as_deref() {
                None => None,
                Some(&[a, b]) => Some([a, b]),
                Some(_) => return Err(CliError::Config("--sizes takes exactly two sizes".into())),
            };
            emit_json(out, &analyze::crossing(&records, &observable, k, sizes)?)
        }
        Command::Analyze(Analyze::Fss {
            inputs,
            observable,
            k,
            x_star,
            nu_grid,
        }) => {
            let records = analyze::load_records(&inputs)?;
            let k = resolve_k(&observable, k)?;
            let grid = nu_grid.as_deref().map(analyze::parse_grid).transpose()?;
            emit_json(out, &analyze::fss(&records, &observable, k, x_star, grid)?)
        }
        Command::Analyze(Analyze::Distributions { inputs }) => {
            emit(out, &analyze::distributions(&inputs)?)
        }
        Command::Analyze(Analyze::Validate { n }) => {
            let checks = analyze::validate(n, cli.seed.unwrap_or(0))?;
            emit_json(out, &checks)?;
            match checks.iter().filter(|c| !c.passed).count() {
                0 => Ok(()),
                failed => Err(CliError::ValidationFailed(failed)),
            }
        }
    }
}

fn report(kind: &str, message: &str) {
    eprintln!(
        "{}",
        serde_json::json!({ "error": { "kind": kind, "message": message } })
    );
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            report("usage", e.to_string().trim_end());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(e.kind(), &e.to_string());
            ExitCode::FAILURE
        }
    }
}
