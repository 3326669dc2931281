//! Command line for the source reconstruction suite.
//!
//! Subcommands map one-to-one onto the library stages: `mlf` evaluates the
//! special function, `forward` solves for u(., T), `observe` draws seeded
//! noisy samples on the midpoint grid, `estimate` reconstructs the source
//! from an observations file, and `experiment` runs the Monte Carlo rate
//! study. Everything but `mlf` reads one TOML config (schema in the config
//! module docs and the README) and writes CSV with a `#` metadata prologue.
//! Exit codes: 0 success, 2 bad configuration or arguments, 3 numerical
//! failure.

use clap::{Parser, Subcommand};
use fracsource::config::{load, LoadedConfig};
use fracsource::csvio;
use fracsource::estimator::{estimate, ZeroMode};
use fracsource::experiment::run_experiment;
use fracsource::forward::forward_map;
use fracsource::mittag_leffler::{mlf, MlfQuery};
use fracsource::observation::observe;
use fracsource::Result;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "fracsource",
    version,
    about = "Source reconstruction for 1-D time-fractional diffusion from noisy final-time data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate E_{alpha,beta}(z) for z <= 0 and print it to stdout.
    Mlf {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
    },
    /// Solve the forward problem and write u(., T) samples (columns x, uT).
    Forward {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample u(., T) on the midpoint grid with seeded noise
    /// (columns k, x_k, u_tilde, sigma).
    Observe {
        #[arg(long)]
        config: PathBuf,
        /// Override the seed from the [noise] section.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct source coefficients from an observations CSV
    /// (columns p, c_tilde; optionally a dense table x, f_tilde).
    Estimate {
        #[arg(long)]
        config: PathBuf,
        /// Observations CSV produced by `observe`.
        #[arg(long)]
        obs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the reconstruction sampled on a uniform grid.
        #[arg(long)]
        dense_out: Option<PathBuf>,
        /// Divide the zero mode by Gamma(alpha) * b_0 instead of b_0.
        #[arg(long)]
        paper_literal: bool,
    },
    /// Monte Carlo risk-versus-n study
    /// (columns n, M, risk, stderr, I1, I2, I3, bound).
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Override the seed from the [noise] section.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Apply the literal zero-mode normalization inside every estimate.
        #[arg(long)]
        paper_literal: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn zero_mode(paper_literal: bool) -> ZeroMode {
    if paper_literal {
        ZeroMode::Literal
    } else {
        ZeroMode::Consistent
    }
}

fn out_file(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// x_i = i pi / nx for i = 0..=nx, the uniform grid used by dense outputs.
fn uniform_grid(nx: usize) -> impl Iterator<Item = f64> {
    (0..=nx).map(move |i| i as f64 * std::f64::consts::PI / nx as f64)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Mlf { alpha, beta, z } => {
            let value = mlf(MlfQuery::new(alpha, beta, z)?);
            println!("{value:.14e}");
            Ok(())
        }
        Command::Forward { config, out } => {
            let LoadedConfig { config, digest } = load(&config)?;
            let spec = config.problem_spec()?;
            let f = config.source()?;
            let nx = config.forward_nx()?;
            let u_t = forward_map(&spec, &f)?;
            let mut w = out_file(&out)?;
            csvio::write_metadata(
                &mut w,
                &[
                    ("version", env!("CARGO_PKG_VERSION").into()),
                    ("config", digest),
                ],
            )?;
            csvio::write_xy(
                &mut w,
                "x",
                "uT",
                uniform_grid(nx).map(|x| (x, u_t.synthesize(x))),
            )?;
            Ok(w.flush()?)
        }
        Command::Observe { config, seed, out } => {
            let LoadedConfig { config, digest } = load(&config)?;
            let spec = config.problem_spec()?;
            let f = config.source()?;
            let noise = config.noise_spec(seed)?;
            let n = config.observe_n()?;
            let obs = observe(&spec, &f, n, &noise)?;
            let mut w = out_file(&out)?;
            csvio::write_metadata(
                &mut w,
                &[
                    ("version", env!("CARGO_PKG_VERSION").into()),
                    ("config", digest),
                    ("seed", noise.seed.to_string()),
                ],
            )?;
            csvio::write_observations(&mut w, &obs)?;
            Ok(w.flush()?)
        }
        Command::Estimate {
            config,
            obs,
            out,
            dense_out,
            paper_literal,
        } => {
            let LoadedConfig { config, digest } = load(&config)?;
            let spec = config.problem_spec()?;
            let observations = csvio::read_observations(&mut BufReader::new(File::open(&obs)?))?;
            let m = config.estimate_m(observations.len())?;
            let mode = zero_mode(paper_literal);
            let est = estimate(&observations, &spec, m, mode)?;
            let meta = [
                ("version", env!("CARGO_PKG_VERSION").to_string()),
                ("config", digest),
                ("n", observations.len().to_string()),
                ("M", m.to_string()),
                (
                    "zero_mode",
                    match mode {
                        ZeroMode::Consistent => "consistent".into(),
                        ZeroMode::Literal => "literal".into(),
                    },
                ),
            ];
            let mut w = out_file(&out)?;
            csvio::write_metadata(&mut w, &meta)?;
            csvio::write_estimate(&mut w, &est)?;
            w.flush()?;
            if let Some(path) = dense_out {
                let nx = config.dense_nx().unwrap_or(256);
                let mut w = out_file(&path)?;
                csvio::write_metadata(&mut w, &meta)?;
                csvio::write_xy(
                    &mut w,
                    "x",
                    "f_tilde",
                    uniform_grid(nx).map(|x| (x, est.coefficients().synthesize(x))),
                )?;
                w.flush()?;
            }
            Ok(())
        }
        Command::Experiment {
            config,
            seed,
            out,
            paper_literal,
        } => {
            let LoadedConfig { config, digest } = load(&config)?;
            let cfg = config.experiment(seed, zero_mode(paper_literal))?;
            let result = run_experiment(&cfg)?;
            let mut meta = vec![
                ("version", env!("CARGO_PKG_VERSION").to_string()),
                ("config", digest),
                ("seed", cfg.noise.seed.to_string()),
            ];
            if let Some(slope) = result.slope {
                meta.push(("slope", csvio::fmt17(slope)));
            }
            let mut w = out_file(&out)?;
            csvio::write_metadata(&mut w, &meta)?;
            csvio::write_experiment(&mut w, &result)?;
            Ok(w.flush()?)
        }
    }
}
