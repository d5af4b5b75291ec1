use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bethe_segment::boundary::TransferCase;
use bethe_segment::config::RunConfig;
use bethe_segment::par::Executor;
use bethe_segment::report::{all_passed, emit_report, Format};
use bethe_segment::runs::{self, SolveReport};
use bethe_segment::solver::SolverOptions;
use bethe_segment::suites::{self, RunOptions};
use clap::{Parser, Subcommand};
use num_complex::Complex64 as C64;

/// Residual above which `hamiltonian --check` fails.
const HAMILTONIAN_TOL: f64 = 1e-7;

#[derive(Parser)]
#[command(name = "bethe-segment", version, about = "Verification harness and Bethe root solver for the open XXZ chain with triangular boundaries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run property suites and print one report per check.
    Verify {
        /// Suite id, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        case: Option<TransferCase>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        /// Record wall-clock time per check (reports are then not byte-stable).
        #[arg(long)]
        timings: bool,
        /// Evaluate samples on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Solve the Bethe equations and compare with exact diagonalization.
    Solve {
        #[arg(long)]
        case: TransferCase,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = SolverOptions::default().n_starts)]
        starts: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Eigenvalues of the transfer matrix at one spectral point.
    Spectrum {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        case: TransferCase,
        /// Spectral parameter as `RE,IM`.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        u: C64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Spectrum of the open-chain Hamiltonian.
    Hamiltonian {
        #[arg(long)]
        n: usize,
        /// Compare with the Hamiltonian extracted from the transfer matrix.
        #[arg(long)]
        check: bool,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// List suite ids with a one-line description.
    ListSuites,
}

fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected RE,IM, got `{s}`"))?;
    let part = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok(C64::new(part(re)?, part(im)?))
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::from_path(p).with_context(|| format!("reading config {}", p.display())),
        None => Ok(RunConfig::default()),
    }
}

fn fmt_c(z: C64) -> String {
    format!("{:+.10e}{:+.10e}i", z.re, z.im)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
            || matches!(c.downcast_ref::<bethe_segment::Error>(), Some(bethe_segment::Error::Io(io)) if io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

/// Returns whether every check passed.
fn run(cli: Cli) -> Result<bool> {
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Verify { suite, n, case, seed, config, json, timings, sequential } => {
            let mut cfg = load_config(config.as_ref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if n.is_some() {
                cfg.n = n;
            }
            if case.is_some() {
                cfg.case = case;
            }
            if suite != "all" {
                cfg.suites = vec![suite];
            }
            cfg.validate()?;
            let executor = if sequential { Executor::Sequential } else { Executor::Parallel };
            let reports = suites::run_suites(&cfg, &RunOptions { executor, record_timing: timings })?;
            if reports.is_empty() {
                bail!("no checks selected");
            }
            emit_report(&reports, if json { Format::Json } else { Format::Table }, &mut out)?;
            Ok(all_passed(&reports))
        }
        Command::Solve { case, n, starts, seed, config, json } => {
            let cfg = load_config(config.as_ref())?;
            let opts = SolverOptions { n_starts: starts, seed: seed.unwrap_or(cfg.seed), ..SolverOptions::default() };
            let report = runs::run_solve(&cfg, case, n, &opts)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            } else {
                print_solve(&report, &mut out)?;
            }
            Ok(true)
        }
        Command::Spectrum { n, case, u, config, json } => {
            let cfg = load_config(config.as_ref())?;
            let spec = runs::transfer_spectrum(&cfg, case, n, u)?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&spec)?)?;
            } else {
                for z in spec {
                    writeln!(out, "{}", fmt_c(z))?;
                }
            }
            Ok(true)
        }
        Command::Hamiltonian { n, check, config, json } => {
            let cfg = load_config(config.as_ref())?;
            let report = runs::hamiltonian(&cfg, n, check)?;
            let passed = report.check_residual.is_none_or(|r| r < HAMILTONIAN_TOL);
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            } else {
                for z in &report.spectrum {
                    writeln!(out, "{}", fmt_c(*z))?;
                }
                if let Some(r) = report.check_residual {
                    writeln!(out, "transfer-matrix check: {r:.3e} (tol {HAMILTONIAN_TOL:.0e}) {}", if passed { "pass" } else { "FAIL" })?;
                }
            }
            Ok(passed)
        }
        Command::ListSuites => {
            let width = suites::list_suites().iter().map(|s| s.id.len()).max().unwrap_or(0);
            for s in suites::list_suites() {
                writeln!(out, "{:<width$}  {}", s.id, s.description)?;
            }
            Ok(true)
        }
    }
}

fn print_solve(r: &SolveReport, out: &mut impl Write) -> Result<()> {
    writeln!(out, "case {}  N = {}", r.case, r.n)?;
    for s in &r.sectors {
        writeln!(out, "sector M = {}: {} starts, {} failed, {} root sets", s.sector_m, s.starts, s.failed, s.root_sets.len())?;
        for set in &s.root_sets {
            let roots: Vec<String> = set.roots.iter().map(|z| fmt_c(*z)).collect();
            let status = if set.null_vector { "null".to_string() } else { format!("match {:.1e}", set.max_match_distance()) };
            writeln!(out, "  [{}]  |E| {:.1e}  {status}", roots.join(", "), set.max_residual)?;
            if let Some(e) = set.energy.filter(|_| !set.null_vector) {
                writeln!(out, "    energy {}", fmt_c(e))?;
            }
        }
    }
    writeln!(out, "transfer spectrum: {}/{} eigenvalues reached", r.matched, r.exact.len())?;
    if let Some(h) = &r.hamiltonian {
        writeln!(out, "hamiltonian spectrum: {}/{} energies reached", h.matched, h.spectrum.len())?;
    }
    Ok(())
}
