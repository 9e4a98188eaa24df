//! Seeded simulation of `L(n)`: coverage of the interval methods and the
//! empirical ratio `L(n)/ℓ(n)`.
//!
//! Replication `r` draws from ChaCha8 seeded with the master seed on stream
//! `r`, so every replication is a pure function of `(master_seed, r)`.
//! Replications run on rayon; results are collected in replication order and
//! reduced sequentially, which keeps reports bit-identical for any thread
//! count.

use std::collections::BTreeMap;
use std::io::Write;

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{nominal_value, RunScanner};
use crate::error::{Error, Result};
use crate::inference::{binomial_interval, longest_run_interval, IntervalMethod, RunObservation};
use crate::model::BernoulliModel;
use crate::numeric::CompensatedSum;
use crate::output::write_csv;

/// Recorded in every report so runs can be audited.
pub const GENERATOR: &str =
    "ChaCha8 (rand_chacha 0.9), seed_from_u64(master_seed), stream = replication";

/// The random stream of replication `r`.
pub fn replication_rng(master_seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replication);
    rng
}

/// `n` Bernoulli(p) draws; returns the longest success run and the number of
/// successes.
pub fn sample_longest_run<R: Rng + ?Sized>(
    n: usize,
    model: &BernoulliModel,
    rng: &mut R,
) -> (usize, usize) {
    let coin = Bernoulli::new(model.p()).expect("model guarantees 0 < p < 1");
    let mut scan = RunScanner::default();
    let mut successes = 0;
    for _ in 0..n {
        let hit = coin.sample(rng);
        successes += hit as usize;
        scan.push(hit);
    }
    (scan.longest(), successes)
}

/// `L(n)` for replications `0..replications`.
pub fn simulate_longest_runs(
    n: usize,
    model: &BernoulliModel,
    replications: usize,
    master_seed: u64,
) -> Vec<usize> {
    (0..replications as u64)
        .into_par_iter()
        .map(|r| sample_longest_run(n, model, &mut replication_rng(master_seed, r)).0)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub p: f64,
    pub n: usize,
    pub alpha: f64,
    pub replications: usize,
    pub master_seed: u64,
    pub methods: Vec<IntervalMethod>,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<BernoulliModel> {
        let model = BernoulliModel::new(self.p)?;
        if self.n == 0 {
            return Err(Error::invalid("n must be >= 1"));
        }
        if self.replications == 0 {
            return Err(Error::invalid("replications must be >= 1"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("at least one interval method is required"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.methods.contains(&IntervalMethod::LongestRun)
            && !(self.n as f64 > -(self.alpha / 2.0).ln())
        {
            return Err(Error::invalid(format!(
                "the longest-run interval needs n > -ln(alpha/2); n = {}",
                self.n
            )));
        }
        Ok(model)
    }
}

/// Per-method coverage. `coverage = covered_count / evaluated`; replications
/// where the method was inapplicable are counted in `skipped` instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodCoverage {
    pub method: IntervalMethod,
    pub evaluated: usize,
    pub covered_count: usize,
    pub skipped: usize,
    /// `None` when every replication was skipped.
    pub coverage: Option<f64>,
    pub mean_width: Option<f64>,
    /// Sample standard deviation of the width.
    pub width_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub config: SimulationConfig,
    pub generator: String,
    pub per_method: Vec<MethodCoverage>,
    /// Replications skipped per method.
    pub skipped: BTreeMap<IntervalMethod, usize>,
}

/// Outcome of one method on one replication: the width and whether `p` was
/// covered, or `None` if the method does not apply to the draw.
type Outcome = Option<(f64, bool)>;

fn evaluate(method: IntervalMethod, l_obs: usize, k: usize, config: &SimulationConfig) -> Outcome {
    let ci = match method {
        IntervalMethod::LongestRun => {
            let p_hat = k as f64 / config.n as f64;
            RunObservation::new(config.n, l_obs, p_hat)
                .and_then(|obs| longest_run_interval(&obs, config.alpha))
        }
        m => binomial_interval(m, k, config.n, config.alpha),
    };
    ci.ok().map(|ci| (ci.width(), ci.contains(config.p)))
}

pub fn coverage_experiment(config: &SimulationConfig) -> Result<CoverageReport> {
    let model = config.validate()?;
    let outcomes: Vec<Vec<Outcome>> = (0..config.replications as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replication_rng(config.master_seed, r);
            let (l_obs, k) = sample_longest_run(config.n, &model, &mut rng);
            config
                .methods
                .iter()
                .map(|&m| evaluate(m, l_obs, k, config))
                .collect()
        })
        .collect();

    let mut per_method = Vec::with_capacity(config.methods.len());
    let mut skipped = BTreeMap::new();
    for (i, &method) in config.methods.iter().enumerate() {
        let hits: Vec<(f64, bool)> = outcomes.iter().filter_map(|o| o[i]).collect();
        let evaluated = hits.len();
        let covered_count = hits.iter().filter(|h| h.1).count();
        let (mean_width, width_std) = mean_and_std(hits.iter().map(|h| h.0), evaluated);
        let skip = config.replications - evaluated;
        skipped.insert(method, skip);
        per_method.push(MethodCoverage {
            method,
            evaluated,
            covered_count,
            skipped: skip,
            coverage: (evaluated > 0).then(|| covered_count as f64 / evaluated as f64),
            mean_width,
            width_std,
        });
    }
    Ok(CoverageReport {
        config: config.clone(),
        generator: GENERATOR.to_string(),
        per_method,
        skipped,
    })
}

fn mean_and_std<I: Iterator<Item = f64> + Clone>(
    xs: I,
    count: usize,
) -> (Option<f64>, Option<f64>) {
    if count == 0 {
        return (None, None);
    }
    let mean = xs.clone().collect::<CompensatedSum>().value() / count as f64;
    if count == 1 {
        return (Some(mean), Some(0.0));
    }
    let ss = xs
        .map(|x| (x - mean) * (x - mean))
        .collect::<CompensatedSum>()
        .value();
    (Some(mean), Some((ss / (count - 1) as f64).sqrt()))
}

#[derive(Debug, Serialize)]
struct CoverageCsvRow<'a> {
    method: IntervalMethod,
    p: f64,
    n: usize,
    alpha: f64,
    replications: usize,
    master_seed: u64,
    evaluated: usize,
    covered_count: usize,
    skipped: usize,
    coverage: Option<f64>,
    mean_width: Option<f64>,
    width_std: Option<f64>,
    generator: &'a str,
}

impl CoverageReport {
    /// One CSV row per method.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows: Vec<CoverageCsvRow> = self
            .per_method
            .iter()
            .map(|m| CoverageCsvRow {
                method: m.method,
                p: self.config.p,
                n: self.config.n,
                alpha: self.config.alpha,
                replications: self.config.replications,
                master_seed: self.config.master_seed,
                evaluated: m.evaluated,
                covered_count: m.covered_count,
                skipped: m.skipped,
                coverage: m.coverage,
                mean_width: m.mean_width,
                width_std: m.width_std,
                generator: &self.generator,
            })
            .collect();
        write_csv(&rows, out)
    }

    pub fn method(&self, method: IntervalMethod) -> Option<&MethodCoverage> {
        self.per_method.iter().find(|m| m.method == method)
    }
}

/// Summary of `L(n)/ℓ(n)` over replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub n: usize,
    pub p: f64,
    pub replications: usize,
    pub master_seed: u64,
    pub generator: String,
    pub nominal_value: f64,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single replication.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

pub fn empirical_normalized_ratio(
    n: usize,
    model: &BernoulliModel,
    replications: usize,
    master_seed: u64,
) -> Result<RatioSummary> {
    if n < 2 {
        return Err(Error::invalid("the normalised ratio needs n >= 2"));
    }
    if replications == 0 {
        return Err(Error::invalid("replications must be >= 1"));
    }
    let ell = nominal_value(n, model)?;
    let ratios: Vec<f64> = simulate_longest_runs(n, model, replications, master_seed)
        .into_iter()
        .map(|l| l as f64 / ell)
        .collect();
    let (mean, std) = mean_and_std(ratios.iter().copied(), replications);
    Ok(RatioSummary {
        n,
        p: model.p(),
        replications,
        master_seed,
        generator: GENERATOR.to_string(),
        nominal_value: ell,
        mean: mean.unwrap_or(f64::NAN),
        std: std.unwrap_or(f64::NAN),
        min: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        max: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}
