//! Command-line grammar.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Integer counts, also accepted in scientific notation (`2e5`).
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !(v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= 9_007_199_254_740_992.0) {
        return Err(format!("'{s}' is not a non-negative integer"));
    }
    Ok(v as u64)
}

/// A comma-separated list of numbers.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct NumberList(pub Vec<f64>);

fn parse_list(s: &str) -> Result<NumberList, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("'{t}' is not a number")))
        .collect::<Result<_, _>>()
        .map(NumberList)
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    match parse_list(s)?.0.as_slice() {
        &[a, b] if a < b => Ok((a, b)),
        _ => Err(format!("'{s}' is not a range 'lo,hi' with lo < hi")),
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "stdmap-lab",
    version,
    about = "Numerical laboratory for the large-parameter standard map",
    args_override_self = true
)]
pub struct Cli {
    /// Worker threads; defaults to $STDMAP_LAB_THREADS or the machine's parallelism.
    /// `--threads 1` makes every output reproducible byte for byte.
    #[arg(long, global = true, value_parser = parse_count)]
    pub threads: Option<u64>,

    /// Key-value file of flag defaults (`M = 2e5`); flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<String>,

    /// Directory receiving the outputs and `manifest.json`.
    #[arg(long, global = true, default_value = ".", value_name = "DIR")]
    pub out: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Critical strips S_eta: endpoints, measures and the cone check.
    Strips(StripsArgs),
    /// Decompose the pushforwards of a horizontal fully crossing pair.
    Pushforward(PushforwardArgs),
    /// Central limit experiment for Birkhoff sums.
    Clt(CltArgs),
    /// Correlation between psi and phi after n steps.
    Corr(CorrArgs),
    /// Diffusion of the slow variable of the slow-fast map.
    Diffusion(DiffusionArgs),
    /// Dump a raw trajectory, or check the slow-fast conjugacy.
    Simulate(SimulateArgs),
    /// Re-run a manifest and compare output digests.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Strips(_) => "strips",
            Command::Pushforward(_) => "pushforward",
            Command::Clt(_) => "clt",
            Command::Corr(_) => "corr",
            Command::Diffusion(_) => "diffusion",
            Command::Simulate(_) => "simulate",
            Command::Replay(_) => "replay",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Command::Strips(a) => Some(a.seed),
            Command::Pushforward(a) => Some(a.seed),
            Command::Clt(a) => Some(a.seed),
            Command::Corr(a) => Some(a.seed),
            Command::Diffusion(a) => Some(a.seed),
            Command::Simulate(a) => Some(a.seed),
            Command::Replay(_) => None,
        }
    }
}

pub const SUBCOMMANDS: [&str; 7] = ["strips", "pushforward", "clt", "corr", "diffusion", "simulate", "replay"];

#[derive(Args, Debug, Serialize)]
pub struct StripsArgs {
    /// Comma-separated values of L.
    #[arg(long = "L", value_parser = parse_list, default_value = "1e3,1e4,1e5,1e6")]
    pub l: NumberList,
    /// Comma-separated exponents eta.
    #[arg(long, value_parser = parse_list, default_value = "0.25,0.5")]
    pub eta: NumberList,
    /// Smallest L accepted.
    #[arg(long = "L-min", default_value_t = stdmap_core::geometry::DEFAULT_L_MIN)]
    pub l_min: f64,
    /// Random triples (L, p, v) for the cone invariance check; 0 skips it.
    #[arg(long, value_parser = parse_count, default_value = "0")]
    pub cone_samples: u64,
    /// Range `lo,hi` of L for the cone check.
    #[arg(long, value_parser = parse_range, default_value = "1e3,1e6")]
    pub cone_l_range: (f64, f64),
    /// Aperture of the incoming cone.
    #[arg(long, default_value_t = 0.1)]
    pub cone_xi: f64,
    /// Strip exponent for the cone check.
    #[arg(long, default_value_t = 0.25)]
    pub cone_eta: f64,
    #[arg(long, value_parser = parse_count, default_value = "0")]
    pub seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Args, Debug, Serialize)]
pub struct PushforwardArgs {
    #[arg(long = "L")]
    pub l: f64,
    /// Number of steps.
    #[arg(long, value_parser = parse_count, default_value = "1")]
    pub n: u64,
    /// Height of the horizontal seed curve.
    #[arg(long, default_value_t = 0.0)]
    pub y0: f64,
    /// Length threshold between standard and substandard pieces.
    #[arg(long, default_value_t = stdmap_core::pairs::A0_DEFAULT)]
    pub a0: f64,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub mode: ModeArg,
    /// Lineages in sampled mode.
    #[arg(long, value_parser = parse_count, default_value = "256")]
    pub samples: u64,
    #[arg(long, value_parser = parse_count, default_value = "0")]
    pub seed: u64,
    /// Largest number of curves alive in exhaustive mode.
    #[arg(long, value_parser = parse_count, default_value = "1e7")]
    pub cap: u64,
    /// Also write the curve inventory as JSON.
    #[arg(long)]
    pub inventory: bool,
    /// Also integrate this observable against the n-step pushforward of the seed.
    #[arg(long)]
    pub phi: Option<String>,
    /// Node budget for that integral.
    #[arg(long, value_parser = parse_count, default_value = "5e7")]
    pub node_cap: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct CltArgs {
    #[arg(long = "L")]
    pub l: f64,
    /// Iterates per sample; defaults to floor(L^(1/5)).
    #[arg(long = "N", value_parser = parse_count)]
    pub n: Option<u64>,
    /// Number of samples.
    #[arg(long = "M", value_parser = parse_count, default_value = "1e5")]
    pub m: u64,
    #[arg(long, value_parser = parse_count, default_value = "0")]
    pub seed: u64,
    /// sin, cos, fourier:k, const:c or file:PATH.
    #[arg(long, default_value = "sin")]
    pub phi: String,
    /// Also write the raw samples as CSV.
    #[arg(long)]
    pub samples: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Mc,
    Ygrid,
}

#[derive(Args, Debug, Serialize)]
pub struct CorrArgs {
    #[arg(long = "L")]
    pub l: f64,
    /// Lag.
    #[arg(long, value_parser = parse_count, default_value = "1")]
    pub n: u64,
    #[arg(long, value_enum, default_value = "mc")]
    pub method: MethodArg,
    /// Monte Carlo points, or horizontal strata for the y-grid method.
    #[arg(long = "M", value_parser = parse_count, default_value = "1e6")]
    pub m: u64,
    /// Vertical grid size of the y-grid method.
    #[arg(long = "K", value_parser = parse_count, default_value = "64")]
    pub k: u64,
    #[arg(long, value_parser = parse_count, default_value = "0")]
    pub seed: u64,
    #[arg(long, default_value = "sin")]
    pub phi: String,
    #[arg(long, default_value = "sin")]
    pub psi: String,
}

#[derive(Args, Debug, Serialize)]
pub struct DiffusionArgs {
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub alpha: f64,
    /// Lower end of the initial slow-variable interval.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub a: f64,
    /// Upper end of the initial slow-variable interval.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub b: f64,
    /// Iterates; defaults to floor(epsilon^-2).
    #[arg(long = "N", value_parser = parse_count)]
    pub n: Option<u64>,
    #[arg(long = "M", value_parser = parse_count, default_value = "1e5")]
    pub m: u64,
    #[arg(long, value_parser = parse_count, default_value = "0")]
    pub seed: u64,
    #[arg(long, default_value = "sin")]
    pub phi: String,
    #[arg(long)]
    pub samples: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum MapArg {
    Standard,
    Hat,
    Slowfast,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "standard")]
    pub map: MapArg,
    #[arg(long = "L")]
    pub l: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub x: f64,
    /// Initial y for the torus maps.
    #[arg(long, default_value_t = 0.2)]
    pub y: f64,
    /// Initial z for the slow-fast map.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub z: f64,
    #[arg(long, value_parser = parse_count, default_value = "100")]
    pub steps: u64,
    /// Compare G with its conjugate on this many random points instead of
    /// writing a trajectory.
    #[arg(long, value_parser = parse_count)]
    pub check_conjugacy: Option<u64>,
    #[arg(long, value_parser = parse_count, default_value = "0")]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    #[arg(long)]
    pub manifest: String,
}
