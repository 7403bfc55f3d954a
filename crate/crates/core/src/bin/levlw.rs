use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use levlw::config::RunConfig;
use levlw::pipeline::{self, exit_code};
use levlw::Error;

#[derive(Parser)]
#[command(
    name = "levlw",
    version,
    about = "Linewidth estimation and collapse-model bounds for levitated particles"
)]
struct Cli {
    /// TOML run configuration. Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides `out` from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate trapped-particle records.
    Simulate,
    /// Fit linewidths of recorded or simulated data (.levt or .csv).
    Analyze {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Linewidth against pressure and the excess-damping bound.
    Sweep,
    /// Exclusion maps for the dissipative collapse models.
    Bounds,
    /// Run the reproduction suite and print one line per criterion.
    ReproducePaper,
}

fn run(cli: Cli) -> levlw::Result<()> {
    if let Some(n) = pipeline::threads_from_env()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::from_toml_str("")?,
    };
    pipeline::apply_overrides(&mut cfg, cli.seed);
    let out = cfg.out_dir(cli.out.as_deref());

    let warnings = match cli.command {
        Command::Simulate => pipeline::cmd_simulate(&cfg, &out)?.warnings,
        Command::Analyze { inputs } => {
            let a = pipeline::cmd_analyze(&cfg, &inputs, &out)?;
            for r in &a.records {
                println!(
                    "{} {}: gamma = {:.4e} +/- {:.2e} Hz",
                    r.name, r.axis, r.r2_fit.gamma_hz, r.r2_fit.gamma_err_hz
                );
            }
            a.warnings
        }
        Command::Sweep => {
            let s = pipeline::cmd_sweep(&cfg, &out)?;
            println!(
                "excess damping {:.3e} +/- {:.2e} Hz, slope {:.4e} Hz/mbar, upper bound {:.3e} Hz (one-sided {:.3e})",
                s.fit.intercept,
                s.fit.intercept_err(),
                s.fit.slope,
                s.fit.intercept_upper,
                s.fit.intercept_upper_one_sided
            );
            s.warnings
        }
        Command::Bounds => {
            let b = pipeline::cmd_bounds(&cfg, &out)?;
            for iv in &b.ddp_scan {
                println!("dDP excluded R0 in [{:.3e}, {:.3e}] m", iv.lo, iv.hi);
            }
            b.warnings
        }
        Command::ReproducePaper => {
            let r = pipeline::reproduce_paper(&cfg, &out)?;
            for c in &r.criteria {
                println!("[{}] {} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.title, c.detail);
            }
            Vec::new()
        }
    };
    for w in warnings {
        eprintln!("warning: {w}");
    }
    println!("wrote {}", out.join("manifest.txt").display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
