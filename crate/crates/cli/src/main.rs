mod commands;
mod config;
mod error;
mod record;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hombell::optimize::{LocalMethod, OptimizeOptions, ShareMode};

use commands::Outcome;
use config::{
    load, EnergyConfig, FidelityOptConfig, OptimizeConfig, PrepareConfig, QubitScanConfig, SweepConfig, SweepKind,
    ThresholdConfig,
};
use error::{CliError, CliResult};
use record::{now, version, ResultRecord};

/// Bell tests with binned homodyne measurements on photonic states.
#[derive(Parser)]
#[command(name = "hombell", version = env!("CARGO_PKG_VERSION"))]
struct Cli {
    /// Worker threads for multistart searches.
    #[arg(long, global = true, env = "HOMBELL_WORKERS")]
    workers: Option<usize>,
    /// Write the full result record (JSON) here.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximize the Bell score at one local dimension.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        grow_bins: bool,
        #[arg(long)]
        inequality_file: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Best score over a dimension or efficiency grid; CSV on stdout.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: Option<SweepKind>,
        /// Comma-separated dimensions.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        /// Comma-separated efficiencies.
        #[arg(long, value_delimiter = ',')]
        etas: Option<Vec<f64>>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        inequality_file: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Scan qubit pairs embedded in the Fock space; CSV on stdout.
    QubitScan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        l_max: Option<usize>,
    },
    /// Scores for states with a fixed total photon number; CSV on stdout.
    EnergyCheck {
        #[command(flatten)]
        common: Common,
        /// Comma-separated photon numbers.
        #[arg(long, value_delimiter = ',')]
        photons: Option<Vec<usize>>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Critical detector efficiency by bisection; CSV on stdout.
    Threshold {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        bracket_tol: Option<f64>,
        #[arg(long)]
        inequality_file: Option<PathBuf>,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Simulate a heralded Gaussian circuit.
    Prepare {
        #[command(flatten)]
        common: Common,
        /// Circuit JSON.
        #[arg(long)]
        circuit: Option<PathBuf>,
    },
    /// Fit a circuit to a target state, then score the prepared state.
    FidelityOpt {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n_modes: Option<usize>,
        /// State record or optimize result record.
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long, alias = "rng")]
        rng_seed: Option<u64>,
        /// Comma-separated efficiencies at which to score the prepared state.
        #[arg(long, value_delimiter = ',')]
        bell_etas: Option<Vec<f64>>,
    },
    /// Re-run a saved record and check its scores agree within 1e-9.
    Replay { record: PathBuf },
    /// Parse and validate an inequality file.
    LoadInequality { path: PathBuf },
}

#[derive(Args)]
struct Common {
    /// TOML or JSON configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    NelderMead,
    Gradient,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShareArg {
    Shared,
    Independent,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long, alias = "rng")]
    rng_seed: Option<u64>,
    /// Intervals per setting.
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long, value_enum)]
    share_mode: Option<ShareArg>,
    #[arg(long)]
    max_iters: Option<u64>,
}

impl SearchArgs {
    fn apply(&self, o: &mut OptimizeOptions) {
        if let Some(v) = self.seeds {
            o.seeds = v;
        }
        if let Some(v) = self.rng_seed {
            o.rng_seed = v;
        }
        if let Some(v) = self.q {
            o.q = v;
        }
        if let Some(v) = self.max_iters {
            o.max_iters = v;
        }
        if let Some(m) = self.method {
            o.method = match m {
                MethodArg::NelderMead => LocalMethod::NelderMead,
                MethodArg::Gradient => LocalMethod::Gradient,
            };
        }
        if let Some(s) = self.share_mode {
            o.share_mode = match s {
                ShareArg::Shared => ShareMode::PerSettingSharedBetweenParties,
                ShareArg::Independent => ShareMode::FullyIndependent,
            };
        }
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn run(command: Command) -> CliResult<(String, Outcome)> {
    let outcome = match command {
        Command::Optimize {
            common,
            dim,
            eta,
            grow_bins,
            inequality_file,
            search,
        } => {
            let mut c: OptimizeConfig = load(common.config.as_deref())?;
            set(&mut c.dim, dim);
            if eta.is_some() {
                c.eta = eta;
            }
            c.grow_bins |= grow_bins;
            if inequality_file.is_some() {
                c.bell.inequality_file = inequality_file;
            }
            search.apply(&mut c.search);
            ("optimize", commands::optimize(c)?)
        }
        Command::Sweep {
            common,
            kind,
            dims,
            etas,
            dim,
            inequality_file,
            search,
        } => {
            let mut c: SweepConfig = load(common.config.as_deref())?;
            set(&mut c.kind, kind);
            set(&mut c.dims, dims);
            set(&mut c.etas, etas);
            set(&mut c.dim, dim);
            if inequality_file.is_some() {
                c.bell.inequality_file = inequality_file;
            }
            search.apply(&mut c.search);
            ("sweep", commands::sweep(c)?)
        }
        Command::QubitScan { common, l_max } => {
            let mut c: QubitScanConfig = load(common.config.as_deref())?;
            set(&mut c.l_max, l_max);
            ("qubit-scan", commands::qubit_scan(c)?)
        }
        Command::EnergyCheck {
            common,
            photons,
            search,
        } => {
            let mut c: EnergyConfig = load(common.config.as_deref())?;
            set(&mut c.photons, photons);
            search.apply(&mut c.search);
            ("energy-check", commands::energy_check(c)?)
        }
        Command::Threshold {
            common,
            dim,
            bracket_tol,
            inequality_file,
            search,
        } => {
            let mut c: ThresholdConfig = load(common.config.as_deref())?;
            set(&mut c.dim, dim);
            set(&mut c.bracket_tol, bracket_tol);
            if inequality_file.is_some() {
                c.bell.inequality_file = inequality_file;
            }
            search.apply(&mut c.search);
            ("threshold", commands::threshold(c)?)
        }
        Command::Prepare { common, circuit } => {
            let mut c: PrepareConfig = load(common.config.as_deref())?;
            if circuit.is_some() {
                c.circuit_file = circuit;
            }
            ("prepare", commands::prepare(c)?)
        }
        Command::FidelityOpt {
            common,
            n_modes,
            target,
            seeds,
            rng_seed,
            bell_etas,
        } => {
            let mut c: FidelityOptConfig = load(common.config.as_deref())?;
            set(&mut c.n_modes, n_modes);
            if target.is_some() {
                c.target_file = target;
            }
            set(&mut c.circuit.seeds, seeds);
            set(&mut c.circuit.rng_seed, rng_seed);
            set(&mut c.bell_etas, bell_etas);
            ("fidelity-opt", commands::fidelity_opt(c)?)
        }
        Command::LoadInequality { path } => ("load-inequality", commands::load_inequality(&path)?),
        Command::Replay { record } => return replay(&record),
    };
    Ok((outcome.0.to_string(), outcome.1))
}

fn rerun(command: &str, config: serde_json::Value) -> CliResult<Outcome> {
    fn parse<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> CliResult<T> {
        serde_json::from_value(v).map_err(|e| CliError::invalid("record config", e))
    }
    match command {
        "optimize" => commands::optimize(parse(config)?),
        "sweep" => commands::sweep(parse(config)?),
        "qubit-scan" => commands::qubit_scan(parse(config)?),
        "energy-check" => commands::energy_check(parse(config)?),
        "threshold" => commands::threshold(parse(config)?),
        "prepare" => commands::prepare(parse(config)?),
        "fidelity-opt" => commands::fidelity_opt(parse(config)?),
        "load-inequality" => {
            #[derive(serde::Deserialize)]
            struct P {
                path: PathBuf,
            }
            let p: P = parse(config)?;
            commands::load_inequality(&p.path)
        }
        other => Err(CliError::Invalid(format!("record has unknown command {other:?}"))),
    }
}

fn replay(path: &Path) -> CliResult<(String, Outcome)> {
    let saved: ResultRecord = config::read_json(path)?;
    let fresh = rerun(&saved.command, saved.config.clone())?;
    if fresh.scores.len() != saved.scores.len() {
        return Err(CliError::Numerical(format!(
            "replay produced {} scores, record has {}",
            fresh.scores.len(),
            saved.scores.len()
        )));
    }
    for (k, (a, b)) in saved.scores.iter().zip(&fresh.scores).enumerate() {
        if !((a - b).abs() <= 1e-9) {
            return Err(CliError::Numerical(format!("replay score {k}: recorded {a}, got {b}")));
        }
    }
    eprintln!("replay ok: {} scores agree within 1e-9", fresh.scores.len());
    Ok((saved.command, Outcome { csv: None, ..fresh }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    let is_replay = matches!(cli.command, Command::Replay { .. });
    let started_at = now();
    match run(cli.command) {
        Ok((command, outcome)) => {
            let record = ResultRecord {
                command,
                version: version(),
                started_at,
                finished_at: now(),
                config: outcome.config,
                scores: outcome.scores,
                result: outcome.result,
            };
            let json = serde_json::to_string_pretty(&record).expect("serializable record");
            if let Some(path) = &cli.output {
                if let Err(e) = std::fs::write(path, json.as_bytes()) {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            match outcome.csv {
                Some(csv) => print!("{csv}"),
                None if cli.output.is_none() && !is_replay => println!("{json}"),
                None => {}
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
