//! `larckit` command-line interface.
//!
//! Exit codes: 0 success (or hypotheses verified), 1 numerical failure,
//! 2 unreadable or invalid input, 3 hypotheses unmet.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use larckit::blocks::block_lie_closure;
use larckit::lie::larc_check;
use larckit::linop::ControlSchedule;
use larckit::models::{make_harmonic_oscillator, make_jaynes_cummings, make_thm2_model, Coupling, SpectrumKind};
use larckit::nalgebra::DVector;
use larckit::num_complex::Complex64;
use larckit::report::{
    analyze, kronecker_command, larc_history_csv, product_error_csv, recurrence_command, simulate_command, to_json,
    AnalyzeOptions, ComplexEntry, SystemConfig, Tolerances,
};
use larckit::torus::SearchOptions;
use larckit::{ControlSystem, Error};

#[derive(Parser)]
#[command(name = "larckit", version, about = "Controllability analysis for bilinear quantum control systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// System description (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Truncation dimensions, e.g. `2,4,8`.
    #[arg(long, global = true, value_delimiter = ',')]
    trunc: Vec<usize>,
    /// Tolerance override `KEY=VAL` (repeatable).
    #[arg(long, global = true)]
    tol: Vec<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// CSV output for convergence curves.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral checks, coupling graph, closure and certificates.
    Analyze {
        #[arg(long)]
        no_certificates: bool,
        /// Force (`true`) or suppress (`false`) the block report.
        #[arg(long)]
        blocks: Option<bool>,
    },
    /// Lie closure of projections and controls at each truncation.
    Closure,
    /// Kronecker certificate for the drift frequencies.
    Kronecker {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        target: Vec<f64>,
        #[arg(long, default_value_t = 1e-2)]
        delta: f64,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        max_windows: Option<u64>,
    },
    /// Recurrence time of the drift flow on random test vectors.
    Recurrence {
        #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
        t_minus: f64,
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
        #[arg(long, default_value_t = 3)]
        vectors: usize,
    },
    /// Block decomposition and per-block closures.
    Blocks {
        /// Hamiltonians generating the algebra: 0 is the drift, l is H_l.
        #[arg(long, value_delimiter = ',')]
        generators: Vec<usize>,
    },
    /// Propagator of a piecewise-constant schedule.
    Simulate {
        /// Schedule JSON `{"segments": [{"duration": .., "controls": [..]}]}`.
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// Initial vectors JSON: a list of vectors of numbers or `[re, im]` pairs.
        #[arg(long)]
        initial: Option<PathBuf>,
    },
    /// Trotter and commutator product-formula errors for the drift and H_1.
    Products {
        #[arg(long, default_value_t = 1)]
        kmin: u32,
        #[arg(long, default_value_t = 12)]
        kmax: u32,
    },
    /// Writes a built-in model as a system description.
    Model {
        #[arg(long, value_enum)]
        kind: ModelKind,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 6)]
        cutoff: usize,
        /// `omega_A,omega_C,omega_I`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [1.0, 1.3, 0.7])]
        omega: Vec<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Thm2,
    Jc,
    Oscillator,
}

/// Error with its exit code.
struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::Json(_) | Error::Io(_) => 2,
            _ => 1,
        };
        Failure(code, e.to_string())
    }
}

fn input_error(e: impl std::fmt::Display) -> Failure {
    Failure(2, e.to_string())
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure(1, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_config(common: &Common) -> Result<SystemConfig, Failure> {
    let path = common.config.as_ref().ok_or_else(|| input_error("--config is required"))?;
    SystemConfig::load(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn overrides(common: &Common) -> Result<Tolerances, Failure> {
    let mut t = Tolerances::default();
    for kv in &common.tol {
        let (k, v) = kv.split_once('=').ok_or_else(|| input_error(format!("--tol expects KEY=VAL, got {kv:?}")))?;
        t.set(k, v).map_err(input_error)?;
    }
    Ok(t)
}

fn load_system(common: &Common) -> Result<(SystemConfig, ControlSystem, Tolerances), Failure> {
    let cfg = load_config(common)?;
    let tol = cfg.tolerances.merged(&overrides(common)?);
    let sys = cfg.to_system().map_err(input_error)?;
    Ok((cfg, sys, tol))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn truncations(common: &Common, cfg: &SystemConfig, dim: usize) -> Vec<usize> {
    if !common.trunc.is_empty() {
        common.trunc.clone()
    } else if !cfg.truncations.is_empty() {
        cfg.truncations.clone()
    } else {
        vec![dim]
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let common = &cli.common;
    let out = common.out.as_deref();
    match cli.command {
        Command::Analyze { no_certificates, blocks } => {
            let cfg = load_config(common)?;
            let opts = AnalyzeOptions {
                truncations: common.trunc.clone(),
                seed: common.seed,
                tolerances: overrides(common)?,
                skip_certificates: no_certificates,
                blocks,
            };
            let report = analyze(&cfg, &opts)?;
            write_output(out, &to_json(&report)?)?;
            if let Some(p) = &common.csv {
                write_output(Some(p), &larc_history_csv(&report.larc))?;
            }
            Ok(report.verdict.exit_code() as u8)
        }
        Command::Closure => {
            let (cfg, sys, tol) = load_system(common)?;
            let report = larc_check(&sys, &truncations(common, &cfg, sys.dim()), tol.closure_options())?;
            write_output(out, &to_json(&report)?)?;
            if let Some(p) = &common.csv {
                write_output(Some(p), &larc_history_csv(&report))?;
            }
            Ok(0)
        }
        Command::Kronecker {
            target,
            delta,
            horizon,
            max_windows,
        } => {
            let (_, sys, _) = load_system(common)?;
            let mut opts = SearchOptions {
                initial_horizon: horizon,
                ..Default::default()
            };
            if let Some(m) = max_windows {
                opts.max_windows = m;
            }
            let result = kronecker_command(&sys, &target, delta, &opts)?;
            write_output(out, &to_json(&result)?)?;
            Ok(0)
        }
        Command::Recurrence { t_minus, eps, vectors } => {
            let (_, sys, _) = load_system(common)?;
            let result = recurrence_command(&sys, t_minus, eps, vectors, common.seed, &SearchOptions::default())?;
            write_output(out, &to_json(&result)?)?;
            Ok(0)
        }
        Command::Blocks { generators } => {
            let (_, sys, tol) = load_system(common)?;
            let chosen = if !generators.is_empty() {
                generators
            } else if sys.num_controls() > 0 {
                vec![0, 1]
            } else {
                vec![0]
            };
            let report = block_lie_closure(&sys, &chosen, tol.closure_options(), common.seed)?;
            write_output(out, &to_json(&report)?)?;
            Ok(0)
        }
        Command::Simulate { schedule, initial } => {
            let (_, sys, _) = load_system(common)?;
            let schedule: ControlSchedule = match schedule {
                Some(p) => read_json(&p)?,
                None => ControlSchedule::default(),
            };
            let initial: Vec<DVector<Complex64>> = match initial {
                Some(p) => {
                    let raw: Vec<Vec<ComplexEntry>> = read_json(&p)?;
                    raw.into_iter()
                        .map(|v| DVector::from_iterator(v.len(), v.into_iter().map(ComplexEntry::value)))
                        .collect()
                }
                None => Vec::new(),
            };
            let result = simulate_command(&sys, &schedule, &initial)?;
            write_output(out, &to_json(&result)?)?;
            Ok(0)
        }
        Command::Products { kmin, kmax } => {
            let (_, sys, _) = load_system(common)?;
            let h1 = sys
                .controls()
                .first()
                .ok_or_else(|| input_error("products needs at least one control"))?;
            if kmin > kmax || kmax > 20 {
                return Err(input_error("need kmin <= kmax <= 20"));
            }
            let csv = product_error_csv(sys.drift_matrix(), h1, kmin..=kmax)?;
            write_output(common.csv.as_deref().or(out), &csv)?;
            Ok(0)
        }
        Command::Model { kind, n, cutoff, omega } => {
            let sys = match kind {
                ModelKind::Thm2 => make_thm2_model(n, SpectrumKind::SqrtPrimes, Coupling::Tridiagonal)?,
                ModelKind::Jc => {
                    if omega.len() != 3 {
                        return Err(input_error("--omega expects omega_A,omega_C,omega_I"));
                    }
                    make_jaynes_cummings(omega[0], omega[1], omega[2], cutoff)?
                }
                ModelKind::Oscillator => ControlSystem::new(make_harmonic_oscillator(cutoff)?, vec![])?,
            };
            let mut cfg = SystemConfig::from_system(&sys);
            cfg.truncations = common.trunc.clone();
            write_output(out, &to_json(&cfg)?)?;
            Ok(0)
        }
    }
}

fn init_threads() {
    if let Some(n) = std::env::var("LARCKIT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    init_threads();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("larckit: {msg}");
            ExitCode::from(code)
        }
    }
}
