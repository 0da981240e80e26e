use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use relbound::theta::Coefficient;

#[derive(Debug, Parser)]
#[command(name = "relbound", version, about = "Reliability bounds for classical and classical-quantum channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fidelity, Bhattacharyya and Chernoff distances for every input pair.
    Divergence(JobArgs),
    /// Sphere-packing, random-coding and expurgated exponents over --R.
    Exponent(JobArgs),
    /// Information radii R_ρ with their certificates over --rho.
    Radius(JobArgs),
    /// ϑ(ρ) of a channel, or the Lovász number of an edge-list graph.
    Theta(JobArgs),
    /// Umbrella bound over --R.
    Umbrella(JobArgs),
    /// Sphere-packing umbrella bound over --R.
    Spumbrella(JobArgs),
    /// Chernoff, Hoeffding and threshold bounds for one pair of inputs.
    Hypotest(JobArgs),
    /// Summary of rates and zero-rate quantities as JSON.
    Report(JobArgs),
    /// Merge curve CSVs on a shared rate grid and report the smallest bound.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct JobArgs {
    /// Channel JSON or graph edge list.
    #[arg(long)]
    pub input: PathBuf,
    /// Output file; curve commands also write a JSON report next to it.
    #[arg(long)]
    pub out: PathBuf,
    /// Rate grid in nats, `a:b:steps` or a comma list.
    #[arg(long = "R", value_name = "GRID", value_parser = parse_grid)]
    pub rates: Option<Grid>,
    /// ρ grid, `a:b:steps` or a comma list.
    #[arg(long, value_name = "GRID", value_parser = parse_grid)]
    pub rho: Option<Grid>,
    /// s values in [0, 1], `a:b:steps` or a comma list.
    #[arg(long, value_name = "GRID", value_parser = parse_grid)]
    pub s: Option<Grid>,
    #[arg(long)]
    pub seed: u64,
    /// Tolerance for re-evaluating reported values at their optimizers.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Umbrella multiplier of ρϑ(ρ).
    #[arg(long, value_enum, default_value = "auto")]
    pub coefficient: CoefficientArg,
    /// Random projector representations sampled by `theta` on a graph.
    #[arg(long, default_value_t = 0)]
    pub trials: usize,
    /// Inputs compared by `hypotest`.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0usize, 1])]
    pub pair: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Curve CSV files; repeat the flag for each file.
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Keep only these bound names; all curves when absent.
    #[arg(long, value_delimiter = ',')]
    pub bounds: Vec<String>,
    /// Values within this distance of the minimum count as a tie.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CoefficientArg {
    Auto,
    General,
    Reversible,
}

impl From<CoefficientArg> for Coefficient {
    fn from(c: CoefficientArg) -> Self {
        match c {
            CoefficientArg::Auto => Coefficient::Auto,
            CoefficientArg::General => Coefficient::General,
            CoefficientArg::Reversible => Coefficient::Reversible,
        }
    }
}

/// Nonempty, finite, strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid(pub Vec<f64>);

pub fn parse_grid(text: &str) -> Result<Grid, String> {
    let values = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [a, b, steps] = parts.as_slice() else {
            return Err(format!("expected a:b:steps, found {text:?}"));
        };
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("not a number: {s:?}"));
        let (a, b) = (num(a)?, num(b)?);
        let steps: usize = steps.trim().parse().map_err(|_| format!("not a step count: {steps:?}"))?;
        match steps {
            0 => Vec::new(),
            1 if a == b => vec![a],
            1 => return Err("a single step needs a = b".into()),
            n => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
        }
    } else {
        text.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<f64>().map_err(|_| format!("not a number: {s:?}")))
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err("grid is empty".into());
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err("grid values must be finite".into());
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err("grid must be strictly increasing".into());
    }
    Ok(Grid(values))
}
