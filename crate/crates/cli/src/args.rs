//! Command-line surface. Every argument struct also derives `Serialize` so the
//! parsed parameters can be echoed verbatim in the output envelope.

use clap::{Args, Parser, Subcommand, ValueEnum};
use longrun::{Family, IntervalMethod};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "longrun",
    version,
    about = "Longest success run in Bernoulli trials: exact law, MGF asymptotics, large deviations, interval estimation"
)]
pub struct Cli {
    /// Print only the result payload, without the envelope.
    #[arg(long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Law of L(n): the whole pmf/CDF, or one threshold k with product-form bounds.
    Dist(DistArgs),
    /// ln E exp(λ L(n)), its normalisation and large-n limit.
    Mgf(MgfArgs),
    /// Closed-form rate function, with the numeric Legendre transform alongside.
    Rate(RateArgs),
    /// Closed-form scaled cumulant, optionally with a finite-n value.
    Cumulant(CumulantArgs),
    /// Numeric Legendre transform of the cumulant against the closed-form rate.
    Legendre(RateArgs),
    /// Finite-n large-deviation ratio and its limit.
    Ldp(LdpArgs),
    /// Power functional t x^α: closed-form coefficient, numeric maximum, finite-n trajectory.
    Varadhan(VaradhanArgs),
    /// A confidence interval for p.
    Ci(CiArgs),
    /// Recompute the published comparison tables.
    Tables(TablesArgs),
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Simulate(SimulateCommand),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dist(_) => "dist",
            Command::Mgf(_) => "mgf",
            Command::Rate(_) => "rate",
            Command::Cumulant(_) => "cumulant",
            Command::Legendre(_) => "legendre",
            Command::Ldp(_) => "ldp",
            Command::Varadhan(_) => "varadhan",
            Command::Ci(_) => "ci",
            Command::Tables(_) => "tables",
            Command::Simulate(SimulateCommand::Coverage(_)) => "simulate coverage",
            Command::Simulate(SimulateCommand::Ratio(_)) => "simulate ratio",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    /// Coverage and width of interval methods over seeded replications.
    Coverage(CoverageArgs),
    /// Distribution of L(n)/log_{1/p} n over seeded replications.
    Ratio(RatioArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    Near,
    Away,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Near => Family::Near,
            FamilyArg::Away => Family::Away,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MgfMethod {
    /// From the materialised law.
    Exact,
    /// From the first-failure recursion over prefix laws.
    Recursion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    NearUpper,
    NearLower,
    Away,
    Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Lr,
    Wilson,
    Cp,
    Normal,
}

impl From<MethodArg> for IntervalMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Lr => IntervalMethod::LongestRun,
            MethodArg::Wilson => IntervalMethod::Wilson,
            MethodArg::Cp => IntervalMethod::ClopperPearson,
            MethodArg::Normal => IntervalMethod::Normal,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct DistArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = finite)]
    pub p: f64,
    /// Threshold for a single P(L(n) < k) query.
    #[arg(long)]
    pub k: Option<usize>,
    /// Output format for the whole law (ignored with --k).
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
pub struct MgfArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = finite)]
    pub p: f64,
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = MgfMethod::Exact)]
    pub method: MgfMethod,
    #[arg(long, value_enum, default_value_t = FamilyArg::Near)]
    pub speed: FamilyArg,
}

#[derive(Debug, Args, Serialize)]
pub struct RateArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long, value_parser = finite)]
    pub p: f64,
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub x: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct CumulantArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    #[arg(long, value_parser = finite)]
    pub p: f64,
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub lambda: f64,
    /// Also report the normalised log-MGF at this n.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct LdpArgs {
    #[arg(long, value_enum)]
    pub regime: Regime,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = finite)]
    pub p: f64,
    /// Deviation for near-upper, near-lower and away.
    #[arg(long, value_parser = finite, allow_negative_numbers = true, required_unless_present = "a")]
    pub x: Option<f64>,
    /// Interval regime: lower end, in units of log_{1/p} n.
    #[arg(long, value_parser = finite, allow_negative_numbers = true, requires = "b")]
    pub a: Option<f64>,
    /// Interval regime: upper end; `inf` is accepted.
    #[arg(long, value_parser = upper_end, requires = "a")]
    #[serde(serialize_with = "crate::output::optional_ext")]
    pub b: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct VaradhanArgs {
    #[arg(long, value_parser = finite)]
    pub t: f64,
    #[arg(long, value_parser = finite)]
    pub alpha: f64,
    #[arg(long, value_parser = finite)]
    pub p: f64,
    /// Comma-separated n values for the finite-n trajectory.
    #[arg(long, value_delimiter = ',')]
    pub n_ladder: Vec<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct CiArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = finite)]
    pub alpha: f64,
    /// Number of successes (wilson, cp, normal).
    #[arg(long, conflicts_with_all = ["l_obs", "p_hat"], required_unless_present = "l_obs")]
    pub k: Option<usize>,
    /// Observed longest run (lr).
    #[arg(long, requires = "p_hat")]
    pub l_obs: Option<usize>,
    /// Estimated success probability (lr).
    #[arg(long, value_parser = finite, requires = "l_obs")]
    pub p_hat: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct TablesArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub which: u8,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Append longest-run rows computed at this observed run.
    #[arg(long)]
    pub l_obs: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct CoverageArgs {
    #[arg(long, value_parser = finite)]
    pub p: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = finite)]
    pub alpha: f64,
    #[arg(long)]
    pub reps: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_values_t = [MethodArg::Lr, MethodArg::Wilson, MethodArg::Cp, MethodArg::Normal]
    )]
    pub methods: Vec<MethodArg>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
pub struct RatioArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = finite)]
    pub p: f64,
    #[arg(long)]
    pub reps: usize,
    #[arg(long)]
    pub seed: u64,
}

fn finite(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err("expected a finite number".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn upper_end(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() || v == f64::INFINITY => Ok(v),
        Ok(_) => Err("expected a finite number or inf".into()),
        Err(e) => Err(e.to_string()),
    }
}
