//! `fourier-metric` command line.
//!
//! Exit codes: 0 success, 1 input or usage error, 2 divergence verdict.
//! Output is CSV with a header row on stdout; diagnostics go to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::counterexample::{phi0_smoothness_probe, verify_lipschitz, PhiDeltaFamily};
use crate::measure::{ComplexMeasure, MomentSpec};
use crate::metric::{dm, fmt17, DmOptions, MetricEstimate};
use crate::multiindex::MultiIndex;
use crate::specfile::{load_spec, MeasureSpec};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_DIVERGENT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fourier-metric", version, about = "Fourier-based distances between complex measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// d_m between two measure specs.
    Dist {
        spec_a: PathBuf,
        spec_b: PathBuf,
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Moment table up to the given order.
    Moments {
        spec: PathBuf,
        #[arg(long)]
        order: u32,
    },
    /// d_m(μ_δ₁, μ_δ₂) against the bound |δ₁ − δ₂|.
    Lipschitz {
        /// phi_delta spec without `delta`.
        moments: PathBuf,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        delta1: f64,
        #[arg(long)]
        delta2: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Pairwise d_m(μ_j, μ_k) against |1/j − 1/k|.
    Cauchy {
        /// phi_delta spec without `delta`.
        moments: PathBuf,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        j: Vec<u32>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Two-branch difference quotients of the δ = 0 profile.
    SmoothnessProbe {
        #[arg(long)]
        m: u32,
        #[arg(long, default_value_t = 20)]
        n_max: u32,
    },
}

enum Failure {
    Input(String),
    Divergent(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Divergent { beta, exponent, .. } => Failure::Divergent(format!(
                "divergent beta={} exponent={}",
                beta.map_or_else(|| "unknown".to_string(), |b| b.to_string()),
                fmt17(exponent)
            )),
            other => Failure::Input(other.to_string()),
        }
    }
}

type CmdResult = Result<String, Failure>;

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            } else {
                let _ = err.write_all(text.as_bytes());
                EXIT_INPUT
            };
        }
    };
    let result = match cli.command {
        Command::Dist { spec_a, spec_b, m, tol } => cmd_dist(&spec_a, &spec_b, m, tol),
        Command::Moments { spec, order } => cmd_moments(&spec, order),
        Command::Lipschitz {
            moments,
            m,
            d,
            delta1,
            delta2,
            tol,
        } => cmd_lipschitz(&moments, m, d, delta1, delta2, tol),
        Command::Cauchy { moments, m, d, j, tol } => cmd_cauchy(&moments, m, d, &j, tol),
        Command::SmoothnessProbe { m, n_max } => cmd_smoothness_probe(m, n_max),
    };
    match result {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            EXIT_OK
        }
        Err(Failure::Divergent(line)) => {
            let _ = writeln!(out, "{line}");
            EXIT_DIVERGENT
        }
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}

fn load(path: &Path) -> Result<MeasureSpec, Failure> {
    load_spec(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn options(tol: f64) -> Result<DmOptions, Failure> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Failure::Input(format!("--tol must be positive, got {tol}")));
    }
    Ok(DmOptions::with_tol(tol))
}

fn csv_beta(beta: &MultiIndex) -> String {
    let s = beta.to_string();
    if beta.dim() > 1 {
        format!("\"{s}\"")
    } else {
        s
    }
}

fn cmd_dist(a: &Path, b: &Path, m: u32, tol: f64) -> CmdResult {
    let opts = options(tol)?;
    let (sa, sb) = (load(a)?, load(b)?);
    if sa.dim() != sb.dim() {
        return Err(Failure::Input(format!(
            "dim: {} has dimension {}, {} has dimension {}",
            a.display(),
            sa.dim(),
            b.display(),
            sb.dim()
        )));
    }
    let mu = sa.into_measure()?;
    let nu = sb.into_measure()?;
    let est = dm(&mu, &nu, m, &opts)?;
    Ok(format!("{}\n{}\n", MetricEstimate::csv_header(mu.dim()), est.csv_row()))
}

fn cmd_moments(path: &Path, order: u32) -> CmdResult {
    let table = match load(path)? {
        MeasureSpec::PhiDelta { moments, .. } => {
            if order > moments.order() {
                return Err(Error::MomentOrderExceeded {
                    requested: order,
                    declared: moments.order(),
                }
                .into());
            }
            moments.truncate(order)?
        }
        other => {
            let mu: ComplexMeasure = other.into_measure()?;
            mu.moments(order)?
        }
    };
    let mut s = String::from("beta,re,im\n");
    for (beta, v) in table.iter() {
        s.push_str(&format!("{},{},{}\n", csv_beta(&beta), fmt17(v.re), fmt17(v.im)));
    }
    Ok(s)
}

/// Loads a moment-spec file and checks the optional `--m`/`--d` flags
/// against it.
fn load_moments(path: &Path, m: Option<u32>, d: Option<usize>) -> Result<MomentSpec, Failure> {
    let moments = match load(path)? {
        MeasureSpec::PhiDelta { moments, delta: None } => moments,
        MeasureSpec::PhiDelta { delta: Some(_), .. } => {
            return Err(Failure::Input(format!(
                "{}: delta: not allowed in a moment-spec file, it is supplied by flag",
                path.display()
            )))
        }
        _ => {
            return Err(Failure::Input(format!(
                "{}: type: expected `phi_delta`",
                path.display()
            )))
        }
    };
    if let Some(m) = m.filter(|&m| m != moments.order()) {
        return Err(Failure::Input(format!("--m {m} disagrees with m = {} in the file", moments.order())));
    }
    if let Some(d) = d.filter(|&d| d != moments.dim()) {
        return Err(Failure::Input(format!("--d {d} disagrees with dim = {} in the file", moments.dim())));
    }
    Ok(moments)
}

fn cmd_lipschitz(path: &Path, m: Option<u32>, d: Option<usize>, delta1: f64, delta2: f64, tol: f64) -> CmdResult {
    let opts = options(tol)?;
    for (flag, v) in [("--delta1", delta1), ("--delta2", delta2)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Failure::Input(format!("{flag} must be positive, got {v}")));
        }
    }
    let moments = load_moments(path, m, d)?;
    let r = verify_lipschitz(&moments, delta1, delta2, &opts)?;
    Ok(format!(
        "estimate,bound,pass\n{},{},{}\n",
        fmt17(r.estimate),
        fmt17(r.bound),
        r.pass
    ))
}

fn cmd_cauchy(path: &Path, m: Option<u32>, d: Option<usize>, js: &[u32], tol: f64) -> CmdResult {
    let opts = options(tol)?;
    if let Some(bad) = js.iter().find(|&&j| j == 0) {
        return Err(Failure::Input(format!("--j entries must be ≥ 1, got {bad}")));
    }
    let moments = load_moments(path, m, d)?;
    let measures = js
        .iter()
        .map(|&j| PhiDeltaFamily::new(moments.clone(), 1.0 / j as f64)?.make_measure())
        .collect::<crate::Result<Vec<_>>>()?;
    let mut s = String::from("j,k,dm,bound,pass\n");
    for a in 0..js.len() {
        for b in a + 1..js.len() {
            let est = dm(&measures[a], &measures[b], moments.order(), &opts)?;
            let bound = (1.0 / js[a] as f64 - 1.0 / js[b] as f64).abs();
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                js[a],
                js[b],
                fmt17(est.value),
                fmt17(bound),
                est.value <= bound + opts.tol
            ));
        }
    }
    Ok(s)
}

fn cmd_smoothness_probe(m: u32, n_max: u32) -> CmdResult {
    let trace = phi0_smoothness_probe(m, n_max)?;
    let mut s = String::from("n,h,quotient,branch\n");
    for row in &trace.rows {
        s.push_str(&format!(
            "{},{},{},{}\n",
            row.n,
            fmt17(row.h),
            fmt17(row.quotient),
            row.branch.label()
        ));
    }
    s.push_str(&format!(
        "# limit_a={},limit_b={},gap={}\n",
        fmt17(trace.limit_a),
        fmt17(trace.limit_b),
        fmt17(trace.gap())
    ));
    Ok(s)
}
