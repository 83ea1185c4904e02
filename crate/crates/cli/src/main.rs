//! `ewens-charpoly`: samplers, exact oracles and convergence experiments for
//! characteristic polynomials of generalized-Ewens permutation matrices.
//!
//! Every command prints JSON lines (one report per line) to stdout or to
//! `--out`; `portrait` writes a binary PPM (or a CSV grid dump with `--csv`).
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical or domain error,
//! 3 threshold failure in `--assert` mode.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ewens_charpoly::charpoly::log_product;
use ewens_charpoly::complex::{format_complex, parse_complex};
use ewens_charpoly::limit_field::LimitSampler;
use ewens_charpoly::portrait::{self, PhasePortrait};
use ewens_charpoly::{stats, Complex64, CycleSampler, Error, ThetaSequence};

#[derive(Debug, Parser)]
#[command(name = "ewens-charpoly", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw cycle types at size n and report p_n(z).
    Sample(Opts),
    /// Monte Carlo E|p_n(z)|^2 against the exact finite-n value.
    SecondMoment(Opts),
    /// Joint and marginal TV distance of (C_1..C_kmax) to the Poisson limit.
    Traces(Opts),
    /// Draw limit-field samples and report F(z) and f(z).
    LimitSample(Opts),
    /// Monte Carlo covariance of (f(z), f(w)) against the closed form.
    Covariance(Opts),
    /// Two-sample KS distance between p_n(z) and the limit field F(z).
    Converge(Opts),
    /// Phase portrait of p_n (or of F with --limit) as binary PPM.
    Portrait(Opts),
    /// Exhaustive enumeration against generating-function extraction.
    EnumerateCheck(Opts),
}

#[derive(Debug, Args)]
struct Opts {
    /// ewens:THETA, scaled:THETA:RHO or custom:T1,...,Tk|THETA:RHO
    #[arg(long, default_value = "ewens:1")]
    family: ThetaSequence,
    /// Permutation size.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Number of cycle counts compared in `traces`.
    #[arg(long, default_value_t = 3)]
    kmax: usize,
    /// Ensemble size (command-specific default).
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Complex point "a+bi".
    #[arg(long, default_value = "0.5", value_parser = parse_point)]
    z: Complex64,
    /// Second complex point for `covariance`.
    #[arg(long, default_value = "0.5", value_parser = parse_point)]
    w: Complex64,
    /// Portrait grid size.
    #[arg(long, default_value_t = 512)]
    grid: usize,
    /// Output file (stdout when absent; required for binary portraits).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the limit field instead of a finite-n sample.
    #[arg(long)]
    limit: bool,
    /// Dump portrait grid values as CSV instead of PPM.
    #[arg(long)]
    csv: bool,
    /// Exit with code 3 when the experiment misses its threshold.
    #[arg(long)]
    assert: bool,
}

fn parse_point(s: &str) -> Result<Complex64, String> {
    parse_complex(s).map_err(|e| e.to_string())
}

enum Failure {
    Usage(anyhow::Error),
    Numerical(anyhow::Error),
    Threshold(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::Config(_) => Failure::Usage(e.into()),
            _ => Failure::Numerical(e.into()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numerical(e.into())
    }
}

fn open_output(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path)
                .with_context(|| format!("cannot create {}", path.display()))
                .map_err(Failure::Numerical)?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(out: &mut dyn Write, value: &impl serde::Serialize) -> Result<(), Failure> {
    serde_json::to_writer(&mut *out, value).map_err(|e| Failure::Numerical(e.into()))?;
    writeln!(out)?;
    Ok(())
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Sample(o) => {
            let sampler = CycleSampler::new(&o.family, o.n)?;
            let mut out = open_output(&o.out)?;
            for i in 0..o.samples.unwrap_or(1) {
                let ct = sampler.sample(&mut ewens_charpoly::ensemble::replica_rng(o.seed, i as u64));
                let p = ewens_charpoly::eval_charpoly(&ct, o.z)?;
                emit(
                    &mut out,
                    &json!({
                        "experiment": "sample",
                        "family": o.family.to_string(),
                        "n": o.n,
                        "seed": o.seed,
                        "replica": i,
                        "cycle_counts": ct.sparse(),
                        "num_cycles": ct.num_cycles(),
                        "z": format_complex(o.z),
                        "p_n": [p.value.re, p.value.im],
                        "log_p_n": [p.log_value.re, p.log_value.im],
                    }),
                )?;
            }
            out.flush()?;
        }
        Command::SecondMoment(o) => {
            let r = stats::mc_second_moment(&o.family, o.n, o.z, o.samples.unwrap_or(100_000), o.seed)?;
            let mut out = open_output(&o.out)?;
            emit(&mut out, &r)?;
            out.flush()?;
        }
        Command::Traces(o) => {
            let r = stats::trace_distribution_test(&o.family, o.n, o.kmax, o.samples.unwrap_or(100_000), o.seed)?;
            let mut out = open_output(&o.out)?;
            emit(&mut out, &r)?;
            out.flush()?;
            let worst = r.marginal_tv.iter().copied().fold(r.joint_tv, f64::max);
            if o.assert && worst >= r.threshold {
                return Err(Failure::Threshold(format!("TV distance {worst} >= {}", r.threshold)));
            }
        }
        Command::LimitSample(o) => {
            let sampler = LimitSampler::new(&o.family, o.z.norm().max(0.5), stats::LIMIT_EPS)?;
            let mut out = open_output(&o.out)?;
            for i in 0..o.samples.unwrap_or(1) {
                let s = sampler.sample_with(&mut ewens_charpoly::ensemble::replica_rng(o.seed, i as u64), o.seed);
                let big_f = s.eval_big_f(o.z)?;
                let f = s.eval_f(o.z, s.series_depth(stats::LIMIT_EPS))?;
                let y: std::collections::BTreeMap<usize, u64> =
                    s.y.iter()
                        .enumerate()
                        .filter(|(_, &y)| y > 0)
                        .map(|(i, &y)| (i + 1, y))
                        .collect();
                emit(
                    &mut out,
                    &json!({
                        "experiment": "limit_sample",
                        "family": o.family.to_string(),
                        "seed": o.seed,
                        "replica": i,
                        "depth": s.depth,
                        "delta": s.delta,
                        "eps": s.eps,
                        "y": y,
                        "z": format_complex(o.z),
                        "big_f": [big_f.re, big_f.im],
                        "f": [f.re, f.im],
                    }),
                )?;
            }
            out.flush()?;
        }
        Command::Covariance(o) => {
            let r = stats::covariance_test(&o.family, o.z, o.w, o.samples.unwrap_or(100_000), o.seed)?;
            let mut out = open_output(&o.out)?;
            emit(&mut out, &r)?;
            out.flush()?;
            if o.assert && r.z_sigma >= 3.0 {
                return Err(Failure::Threshold(format!("z_sigma {} >= 3", r.z_sigma)));
            }
        }
        Command::Converge(o) => {
            let r = stats::charpoly_vs_limit_test(&o.family, o.n, o.z, o.samples.unwrap_or(10_000), o.seed)?;
            let mut out = open_output(&o.out)?;
            emit(&mut out, &r)?;
            out.flush()?;
            if o.assert && !r.passed() {
                return Err(Failure::Threshold(format!(
                    "KS(log|p_n|) {} >= {}",
                    r.ks_log_abs, r.threshold
                )));
            }
        }
        Command::Portrait(o) => portrait_cmd(&o)?,
        Command::EnumerateCheck(o) => {
            let r = stats::enumerate_check(&o.family, o.n)?;
            let mut out = open_output(&o.out)?;
            emit(&mut out, &r)?;
            out.flush()?;
            if o.assert && !r.passed() {
                return Err(Failure::Threshold(format!(
                    "max error {} >= {}",
                    r.max_abs_error, r.tolerance
                )));
            }
        }
    }
    Ok(())
}

fn portrait_cmd(o: &Opts) -> Result<(), Failure> {
    let path = o
        .out
        .as_ref()
        .ok_or_else(|| Failure::Usage(anyhow::anyhow!("portrait needs --out")))?;
    // the grid reaches |z| = 0.98, so a limit sample must be valid there
    let (factors, summary) = if o.limit {
        let s = LimitSampler::new(&o.family, portrait::EXTENT, stats::LIMIT_EPS)?
            .sample_with(&mut ewens_charpoly::ensemble::replica_rng(o.seed, 0), o.seed);
        (s.factors(), json!({ "source": "limit", "depth": s.depth }))
    } else {
        let ct = ewens_charpoly::sample_cycle_type(&o.family, o.n, o.seed)?.cycle_type;
        (
            ct.factors(),
            json!({ "source": "finite", "n": o.n, "num_cycles": ct.num_cycles() }),
        )
    };
    let mut file = BufWriter::new(
        File::create(path)
            .with_context(|| format!("cannot create {}", path.display()))
            .map_err(Failure::Numerical)?,
    );
    if o.csv {
        writeln!(file, "x,y,re,im")?;
        let eval = |z| log_product(factors.iter().copied(), z).exp();
        for (z, v) in portrait::grid_values(o.grid, eval)? {
            writeln!(file, "{},{},{},{}", z.re, z.im, v.re, v.im)?;
        }
    } else {
        PhasePortrait::of_factors(&factors, o.grid)?.write_ppm(&mut file)?;
    }
    file.flush()?;
    let mut line = json!({
        "experiment": "portrait",
        "family": o.family.to_string(),
        "grid": o.grid,
        "seed": o.seed,
        "format": if o.csv { "csv" } else { "ppm" },
        "out": path.display().to_string(),
    });
    line.as_object_mut()
        .expect("object")
        .extend(summary.as_object().expect("object").clone());
    let mut stdout = io::stdout().lock();
    emit(&mut stdout, &line)?;
    stdout.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Threshold(msg)) => {
            eprintln!("threshold failure: {msg}");
            ExitCode::from(3)
        }
    }
}
