use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use extremalflow::analytic::escape_certificate;
use extremalflow::classify::{bisect_sigma_star, sweep_unchecked};
use extremalflow::config::RunConfig;
use extremalflow::evolve::evolve;
use extremalflow::output::{write_bracket, write_run, write_sweep};
use extremalflow::verify::run_all;
use extremalflow::FlowError;

const EXIT_CONFIG: u8 = 1;
const EXIT_BLOWUP: u8 = 2;
const EXIT_CHECK: u8 = 3;

/// Driven curvature flow of pinned curves.
#[derive(Debug, Parser)]
#[command(name = "extremalflow", version)]
struct Cli {
    /// TOML configuration; every key is optional.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Initial amplitude (overrides `sigma`).
    #[arg(long, global = true, value_name = "F", allow_negative_numbers = true)]
    sigma: Option<f64>,
    /// Grid size (overrides `grid_n`).
    #[arg(long, global = true, value_name = "N")]
    grid: Option<usize>,
    /// Only print errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve one amplitude and write snapshots, diagnostics and a summary.
    Run,
    /// Classify every amplitude in `sigmas`.
    Sweep,
    /// Bracket the threshold amplitude.
    Bisect,
    /// Run the acceptance checks.
    Verify,
}

fn load(cli: &Cli) -> Result<RunConfig, FlowError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.sigma {
        cfg.sigma = s;
    }
    if let Some(n) = cli.grid {
        cfg.grid_n = n;
    }
    if let Some(d) = &cli.out {
        cfg.out_dir = d.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<u8, FlowError> {
    match cli.command {
        Command::Run => {
            let tols = cfg.tolerances();
            let traj = evolve(&cfg.family()?, &cfg.step_control(), &tols)?;
            let s = write_run(&cfg.out_dir, &traj, &tols)?;
            if !cli.quiet {
                println!(
                    "sigma = {}: {} ({:?} at t = {:.4}), final word [{}], output in {}",
                    s.sigma,
                    s.category,
                    s.event,
                    s.t_event,
                    s.final_sgn.as_deref().unwrap_or(""),
                    cfg.out_dir.display()
                );
            }
            Ok(if s.blowup { EXIT_BLOWUP } else { 0 })
        }
        Command::Sweep => {
            let table = sweep_unchecked(&cfg.family()?, &cfg.sigmas, &cfg.step_control(), &cfg.tolerances())?;
            let path = write_sweep(&cfg.out_dir, &table)?;
            if !cli.quiet {
                for r in &table.rows {
                    let w = r.final_sgn.as_ref().map(|w| w.to_string()).unwrap_or_default();
                    println!("{:>12} {:<14} t = {:<10.4} [{w}]", r.sigma, r.category.to_string(), r.t_event);
                }
                println!("wrote {}", path.display());
            }
            if table.rows.iter().any(|r| r.blowup) {
                return Ok(EXIT_BLOWUP);
            }
            if let Err(e) = table.audit() {
                eprintln!("{e}");
                return Ok(EXIT_CHECK);
            }
            Ok(0)
        }
        Command::Bisect => {
            let fam = cfg.family()?;
            let hi = match cfg.bisect_hi {
                Some(h) => h,
                None => escape_certificate(&fam.params, fam.phi)?.sigma,
            };
            let b = bisect_sigma_star(&fam, cfg.bisect_lo, hi, cfg.bisect_width, &cfg.step_control(), &cfg.tolerances())?;
            let path = write_bracket(&cfg.out_dir, &b)?;
            if !cli.quiet {
                println!("threshold in [{}, {}] (width {:.3e}, {} runs); wrote {}", b.lo, b.hi, b.width, b.log.len(), path.display());
            }
            Ok(0)
        }
        Command::Verify => {
            let reports = run_all(&cfg.verify_settings());
            for r in &reports {
                if !cli.quiet || !r.passed {
                    println!("{}", r.line());
                }
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            if !cli.quiet {
                println!("{} passed, {failed} failed", reports.len() - failed);
            }
            Ok(if failed == 0 { 0 } else { EXIT_CHECK })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let code = match load(&cli).and_then(|cfg| run(&cli, &cfg)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                FlowError::Blowup(_) => EXIT_BLOWUP,
                _ => EXIT_CONFIG,
            }
        }
    };
    ExitCode::from(code)
}
