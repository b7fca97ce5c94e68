use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "varqfi",
    version,
    about = "Variational bounds on quantum Fisher information for noisy optical phase estimation",
    args_override_self = true
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Write CSV to this file instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write a gnuplot script for the CSV (requires --out)
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,
    /// Relative tolerance for adaptive quadrature
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_rel: f64,
    /// Reserved; no computation is randomised
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for row evaluation (default: all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// File of `key=value` lines applied before command-line flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Loss at finite temperature: closed-form bound against the exact Gaussian QFI
    Fig1(Fig1Args),
    /// Loss plus phase diffusion: upper bound, quadrature-measurement lower bound, oracle
    Fig2(Fig2Args),
    /// Waveform tracking: MSE bound against photon flux
    Fig3(Fig3Args),
    /// Evaluate one closed-form bound
    Bound(BoundArgs),
    /// Brute-force QFI of a squeezed vacuum after loss and diffusion
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct Fig1Args {
    #[arg(long, default_value_t = 0.8)]
    pub eta: f64,
    /// Bath occupations, comma separated
    #[arg(long = "nt", value_delimiter = ',', default_values_t = [10.0, 100.0])]
    pub n_thermal: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub n_min: f64,
    #[arg(long, default_value_t = 100.0)]
    pub n_max: f64,
    #[arg(long, default_value_t = 50)]
    pub n_points: usize,
}

#[derive(Debug, Args)]
pub struct Fig2Args {
    #[arg(long, default_value_t = 0.95)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.05)]
    pub r_min: f64,
    #[arg(long, default_value_t = 5.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 50)]
    pub r_points: usize,
    /// Add the Fock-space oracle column
    #[arg(long)]
    pub oracle: bool,
    /// Largest squeezing for which the oracle is evaluated
    #[arg(long, default_value_t = 0.8)]
    pub oracle_max_r: f64,
}

#[derive(Debug, Args)]
pub struct Fig3Args {
    /// Transmissions, comma separated
    #[arg(long, value_delimiter = ',', default_values_t = [0.95, 1.0])]
    pub eta: Vec<f64>,
    #[arg(long, default_value_t = 1e2)]
    pub flux_min: f64,
    #[arg(long, default_value_t = 1e8)]
    pub flux_max: f64,
    #[arg(long, default_value_t = 25)]
    pub flux_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundName {
    Eq15,
    Eq16,
    Eq17,
    Eq21,
    Eq22,
    Eq25,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    pub name: BoundName,
    /// Parameters as key=value: mean_n, var_n, r, eta, nT, lambda
    pub params: Vec<String>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Parameters as key=value: r, eta, nT, lambda
    pub params: Vec<String>,
}

const SUBCOMMANDS: [&str; 5] = ["fig1", "fig2", "fig3", "bound", "oracle"];

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    let mut found = None;
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            found = it.next().map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            found = Some(PathBuf::from(p));
        }
    }
    found
}

/// Reads `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key=value", i + 1))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// Inserts config entries right after the subcommand so explicit flags, which come
/// later, take precedence. `bound` and `oracle` receive them as positional
/// `key=value` pairs, the figure commands as `--key=value` flags.
pub fn with_config(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let entries = parse_config(&text)?;
    let Some(pos) = args
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
    else {
        return Ok(args);
    };
    let positional = matches!(args[pos].to_str(), Some("bound" | "oracle"));
    let injected = entries.into_iter().map(|(k, v)| {
        if positional {
            OsString::from(format!("{k}={v}"))
        } else {
            OsString::from(format!("--{}={v}", k.replace('_', "-")))
        }
    });
    let mut out = args[..=pos].to_vec();
    // the bound name is the first positional and must stay first
    let mut rest = args[pos + 1..].iter().cloned().peekable();
    if args[pos] == "bound" {
        if let Some(name) = rest.next_if(|a| !a.to_string_lossy().starts_with('-')) {
            out.push(name);
        }
    }
    out.extend(injected);
    out.extend(rest);
    Ok(out)
}
