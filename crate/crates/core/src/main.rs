//! `inar`: simulate underreported INAR processes, transform between
//! equivalent parameterisations and check equivalences.
//!
//! Exit codes: 0 success, 1 equivalence or check failure, 2 input error,
//! 3 reporting probability outside the admissible interval.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use inar_equiv::diagnostics::{appendix_checks, equivalence_mc_test, moments_of};
use inar_equiv::equivalence::{
    canonicalize, expand_lags, figure1_curve, transform_a, transform_c, write_curve_csv,
    DEFAULT_LAG_CUTOFF,
};
use inar_equiv::fmt::format_sig;
use inar_equiv::processes::{
    apply_reporting, default_burn_in, simulate_inar1, simulate_inar_inf, simulate_individual_level,
    Inar1Spec,
};
use inar_equiv::sampling::RngStream;
use inar_equiv::spec_file::{Latent, ModelSpec, OUTPUT_DIGITS};
use inar_equiv::Error;

#[derive(Parser)]
#[command(name = "inar", version, about = "Underreported INAR process toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the observed series of a model and print summary statistics.
    Simulate {
        spec: PathBuf,
        #[arg(long)]
        t: usize,
        /// Discarded initial steps (default: 0 for inar1, scaled by persistence otherwise).
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// CSV output `t,count`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transform to an equivalent parameterisation: `inf`, `canonical` or `q=VALUE`.
    Transform {
        spec: PathBuf,
        #[arg(long)]
        to: String,
    },
    /// Print the geometric lag weights above a cut-off.
    Expand {
        spec: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LAG_CUTOFF)]
        cutoff: f64,
    },
    /// Tabulate all equivalent parameterisations over the admissible q range.
    Curve {
        spec: PathBuf,
        #[arg(long, default_value_t = 68)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo equivalence test of two models.
    Check {
        spec_1: PathBuf,
        spec_2: PathBuf,
        #[arg(long, default_value_t = 200_000)]
        t: usize,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Individual-level simulation and checks of its decomposition.
    Appendix {
        spec: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        t: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// CSV `t,x,x_tilde,u_total,v_total`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV `t,i,kind,count`; defaults to `<out stem>_sparse.csv` next to `--out`.
        #[arg(long)]
        sparse_out: Option<PathBuf>,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::OutOfRange { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            if let Error::OutOfRange { lower, upper, .. } = err {
                eprintln!(
                    "admissible interval: [{}, {}]",
                    format_sig(lower, OUTPUT_DIGITS),
                    format_sig(upper, OUTPUT_DIGITS)
                );
            }
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(command: Command) -> Result<u8, Error> {
    match command {
        Command::Simulate {
            spec,
            t,
            burn_in,
            seed,
            out,
        } => simulate(&spec, t, burn_in, seed, out.as_deref()),
        Command::Transform { spec, to } => transform(&spec, &to),
        Command::Expand { spec, cutoff } => expand(&spec, cutoff),
        Command::Curve { spec, grid, out } => curve(&spec, grid, out.as_deref()),
        Command::Check {
            spec_1,
            spec_2,
            t,
            reps,
            seed,
        } => check(&spec_1, &spec_2, t, reps, seed),
        Command::Appendix {
            spec,
            t,
            seed,
            out,
            sparse_out,
        } => appendix(&spec, t, seed, out.as_deref(), sparse_out.as_deref()),
    }
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn print_json(value: &impl serde::Serialize) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serialisable")
    );
}

fn simulate(
    path: &Path,
    t: usize,
    burn_in: Option<usize>,
    seed: u64,
    out: Option<&Path>,
) -> Result<u8, Error> {
    let spec = ModelSpec::load(path)?;
    let mut latent_rng = RngStream::new(seed, 0);
    let mut report_rng = RngStream::new(seed, 1);
    let latent = match spec.latent {
        Latent::Inar1(s) => simulate_inar1(&s, t, &mut latent_rng, burn_in.unwrap_or(0))?,
        Latent::GeomInf(s) => {
            let burn = burn_in.unwrap_or_else(|| default_burn_in(s.persistence()));
            simulate_inar_inf(&s, t, &mut latent_rng, burn)?
        }
    };
    let observed = apply_reporting(&latent, &spec.reporting, &mut report_rng)?;
    if let Some(out) = out {
        observed.write_csv(create(out)?)?;
    }

    let values = observed.values();
    let summary = match moments_of(values, 1) {
        Ok(m) => json!({
            "n": m.n,
            "mean": m.mean,
            "variance": m.variance,
            "acf_1": m.acf.first(),
            "se_mean": m.se_mean,
        }),
        Err(_) => {
            let mean = values.iter().sum::<u64>() as f64 / values.len() as f64;
            json!({ "n": values.len(), "mean": mean, "variance": null, "acf_1": null, "se_mean": null })
        }
    };
    print_json(&summary);
    Ok(0)
}

fn transform(path: &Path, to: &str) -> Result<u8, Error> {
    let spec = ModelSpec::load(path)?;
    let model = spec.underreported()?;
    let result = match to {
        "inf" => match spec.latent {
            Latent::Inar1(s) => {
                let inf = transform_a(&s, spec.reporting.q)?;
                ModelSpec::from_model(&inar_equiv::equivalence::UnderreportedModel::new(inf, 1.0)?)
            }
            Latent::GeomInf(_) => ModelSpec::from_model(&transform_c(&model, 1.0)?),
        },
        "canonical" => ModelSpec::from_canonical(&canonicalize(&model)?),
        other => {
            let value = other
                .strip_prefix("q=")
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| {
                    Error::SpecFile(format!(
                        "--to must be inf, canonical or q=VALUE, got {other}"
                    ))
                })?;
            ModelSpec::from_model(&transform_c(&model, value)?)
        }
    };
    println!("{}", result.to_json());
    Ok(0)
}

fn expand(path: &Path, cutoff: f64) -> Result<u8, Error> {
    let spec = ModelSpec::load(path)?;
    let lags = expand_lags(&spec.latent.as_geom(), cutoff)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "i,alpha_i")?;
    for (i, w) in lags {
        writeln!(out, "{i},{}", format_sig(w, OUTPUT_DIGITS))?;
    }
    Ok(0)
}

fn curve(path: &Path, grid: usize, out: Option<&Path>) -> Result<u8, Error> {
    let spec = ModelSpec::load(path)?;
    let rows = figure1_curve(&spec.underreported()?, grid)?;
    match out {
        Some(p) => write_curve_csv(&rows, create(p)?)?,
        None => write_curve_csv(&rows, io::stdout().lock())?,
    }
    Ok(0)
}

fn check(path_1: &Path, path_2: &Path, t: usize, reps: usize, seed: u64) -> Result<u8, Error> {
    let m1 = ModelSpec::load(path_1)?.underreported()?;
    let m2 = ModelSpec::load(path_2)?.underreported()?;
    let report = equivalence_mc_test(&m1, &m2, t, reps, &RngStream::new(seed, 0))?;
    print_json(&report);
    Ok(if report.passed() { 0 } else { 1 })
}

fn sparse_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trace".into());
    out.with_file_name(format!("{stem}_sparse.csv"))
}

fn appendix(
    path: &Path,
    t: usize,
    seed: u64,
    out: Option<&Path>,
    sparse_out: Option<&Path>,
) -> Result<u8, Error> {
    let spec = ModelSpec::load(path)?;
    let inar1: Inar1Spec = match spec.latent {
        Latent::Inar1(s) => s,
        Latent::GeomInf(_) => {
            return Err(Error::Unsupported(
                "individual-level simulation needs an inar1 latent process".into(),
            ))
        }
    };
    let trace =
        simulate_individual_level(&inar1, &spec.reporting, t, &mut RngStream::new(seed, 0))?;
    if let Some(out) = out {
        trace.write_csv(create(out)?)?;
    }
    let sparse = sparse_out
        .map(Path::to_path_buf)
        .or_else(|| out.map(sparse_path));
    if let Some(p) = sparse {
        trace.write_sparse_csv(create(&p)?)?;
    }
    let report = appendix_checks(&trace, &inar1, spec.reporting.q)?;
    print_json(&report);
    Ok(if report.pass { 0 } else { 1 })
}
