//! One function per subcommand: compute the payload, then hand it to the
//! envelope writer.

use std::io::Write;

use longrun::inference::{
    binomial_interval, estimate_run_length, longest_run_interval, lr_demonstration,
    reproduce_table, TableRow,
};
use longrun::ldp::{
    cumulant, finite_n_away, finite_n_interval_near, finite_n_lower_near, finite_n_upper_near,
    interval_limit, legendre_numeric, rate, FiniteNOptions, LegendreOptions,
};
use longrun::mgf::{log_mgf, log_mgf_recursive_with_limits, normalized_from_distribution};
use longrun::montecarlo::{coverage_experiment, empirical_normalized_ratio, RatioSummary};
use longrun::varadhan::{
    coefficient_from_limit, finite_n_functional_with_limits, functional_limit, power_coefficient,
    power_threshold, power_time_scale, VaradhanOptions,
};
use longrun::{
    distribution_with_limits, log_split_with_limits, moment, nominal_value, tail_bounds,
    BernoulliModel, ConfidenceInterval, CoverageReport, CumulantSpec, ExtReal, Family,
    IntervalMethod, Limits, MgfRegime, RateFunctionSpec, RegimeTag, RunObservation,
    SimulationConfig,
};
use serde::Serialize;

use crate::args::*;
use crate::output::{emit, write_rows, Envelope, Failure, Outcome, VERSION};

pub struct Context<'a> {
    pub out: &'a mut dyn Write,
    pub quiet: bool,
    pub limits: Limits,
}

impl Context<'_> {
    fn send<P: Serialize, R: Serialize>(
        &mut self,
        command: &str,
        params: &P,
        result: &R,
    ) -> Outcome {
        self.send_seeded(command, params, result, None)
    }

    fn send_seeded<P: Serialize, R: Serialize>(
        &mut self,
        command: &str,
        params: &P,
        result: &R,
        seed: Option<(u64, &str)>,
    ) -> Outcome {
        let envelope = Envelope {
            command,
            params,
            result,
            version: VERSION,
            seed: seed.map(|s| s.0),
            generator: seed.map(|s| s.1),
        };
        emit(self.out, self.quiet, &envelope)
    }
}

pub fn run(command: &Command, ctx: &mut Context<'_>) -> Outcome {
    let name = command.name();
    match command {
        Command::Dist(a) => dist(name, a, ctx),
        Command::Mgf(a) => mgf(name, a, ctx),
        Command::Rate(a) | Command::Legendre(a) => rate_cmd(name, a, ctx),
        Command::Cumulant(a) => cumulant_cmd(name, a, ctx),
        Command::Ldp(a) => ldp(name, a, ctx),
        Command::Varadhan(a) => varadhan(name, a, ctx),
        Command::Ci(a) => ci(name, a, ctx),
        Command::Tables(a) => tables(name, a, ctx),
        Command::Simulate(SimulateCommand::Coverage(a)) => coverage(name, a, ctx),
        Command::Simulate(SimulateCommand::Ratio(a)) => ratio(name, a, ctx),
    }
}

/// `|a - b|` on the extended line; equal infinities are 0 apart.
fn gap(a: ExtReal, b: ExtReal) -> ExtReal {
    match (a, b) {
        (ExtReal::Finite(x), ExtReal::Finite(y)) => ExtReal::Finite((x - y).abs()),
        (x, y) if x == y => ExtReal::Finite(0.0),
        _ => ExtReal::PosInfinity,
    }
}

fn neg(a: ExtReal) -> ExtReal {
    match a {
        ExtReal::Finite(x) => ExtReal::Finite(-x),
        ExtReal::PosInfinity => ExtReal::NegInfinity,
        ExtReal::NegInfinity => ExtReal::PosInfinity,
    }
}

fn speed_scale(n: usize, model: &BernoulliModel, speed: Family) -> longrun::Result<f64> {
    match speed {
        Family::Near => nominal_value(n, model),
        Family::Away => Ok(n as f64),
    }
}

// ---- dist ----

#[derive(Serialize)]
struct Bounds {
    lower: f64,
    upper: f64,
    log_lower: f64,
    log_upper: f64,
    log_tail_lower: f64,
    log_tail_upper: f64,
}

#[derive(Serialize)]
struct DistQuery {
    n: usize,
    k: usize,
    prob_below: f64,
    prob_at_least: f64,
    log_prob_below: ExtReal,
    log_prob_at_least: ExtReal,
    pmf: f64,
    /// Absent when `k` is outside `1..=n`.
    bounds: Option<Bounds>,
}

#[derive(Serialize)]
struct DistRow {
    k: usize,
    pmf: f64,
    cdf_below: f64,
    log_pmf: ExtReal,
    log_cdf_below: ExtReal,
    log_tail: ExtReal,
}

#[derive(Serialize)]
struct DistLaw {
    n: usize,
    nominal_value: Option<f64>,
    mean: f64,
    variance: f64,
    rows: Vec<DistRow>,
}

fn ext(x: f64) -> ExtReal {
    ExtReal::from_f64(x)
}

fn dist(name: &str, a: &DistArgs, ctx: &mut Context<'_>) -> Outcome {
    let model = BernoulliModel::new(a.p)?;
    if let Some(k) = a.k {
        if a.n == 0 || k == 0 {
            return Err(Failure::usage("dist needs --n >= 1 and --k >= 1"));
        }
        let (below, at_least) = log_split_with_limits(a.n, k, &model, &ctx.limits)?;
        let (next_below, _) = log_split_with_limits(a.n, k + 1, &model, &ctx.limits)?;
        let pmf = (next_below.exp() - below.exp()).max(0.0);
        let bounds = if k <= a.n {
            let b = tail_bounds(a.n, k, &model)?;
            Some(Bounds {
                lower: b.log_lower.exp(),
                upper: b.log_upper.exp(),
                log_lower: b.log_lower,
                log_upper: b.log_upper,
                log_tail_lower: b.log_tail_lower,
                log_tail_upper: b.log_tail_upper,
            })
        } else {
            None
        };
        let result = DistQuery {
            n: a.n,
            k,
            prob_below: below.exp(),
            prob_at_least: at_least.exp(),
            log_prob_below: ext(below),
            log_prob_at_least: ext(at_least),
            pmf,
            bounds,
        };
        return ctx.send(name, a, &result);
    }
    let law = distribution_with_limits(a.n, &model, &ctx.limits)?;
    let rows: Vec<DistRow> = (0..=a.n)
        .map(|k| DistRow {
            k,
            pmf: law.pmf(k),
            cdf_below: law.cdf_below(k),
            log_pmf: ext(law.log_pmf()[k]),
            log_cdf_below: ext(law.log_cdf()[k]),
            log_tail: ext(law.log_tail()[k]),
        })
        .collect();
    if a.format == Format::Csv {
        return write_rows(ctx.out, &rows);
    }
    let mean = moment(&law, 1)?;
    let result = DistLaw {
        n: a.n,
        nominal_value: if a.n >= 2 {
            Some(nominal_value(a.n, &model)?)
        } else {
            None
        },
        mean,
        variance: (moment(&law, 2)? - mean * mean).max(0.0),
        rows,
    };
    ctx.send(name, a, &result)
}

// ---- mgf ----

#[derive(Serialize)]
struct MgfResult {
    regime: RegimeTag,
    log_mgf: f64,
    scale: f64,
    normalized: f64,
    limit: ExtReal,
    gap: ExtReal,
}

fn mgf(name: &str, a: &MgfArgs, ctx: &mut Context<'_>) -> Outcome {
    let model = BernoulliModel::new(a.p)?;
    let speed = Family::from(a.speed);
    if a.n < 2 {
        return Err(Failure::usage("mgf needs --n >= 2"));
    }
    let (log_mgf_value, normalized) = match a.method {
        MgfMethod::Exact => {
            let law = distribution_with_limits(a.n, &model, &ctx.limits)?;
            (
                log_mgf(&law, a.lambda),
                normalized_from_distribution(&law, a.lambda, speed)?,
            )
        }
        MgfMethod::Recursion => {
            let v = log_mgf_recursive_with_limits(a.n, &model, a.lambda, &ctx.limits)?;
            (v, v / speed_scale(a.n, &model, speed)?)
        }
    };
    let regime = MgfRegime::classify(a.lambda, &model);
    let limit = regime.limit(speed);
    let result = MgfResult {
        regime: regime.tag,
        log_mgf: log_mgf_value,
        scale: speed_scale(a.n, &model, speed)?,
        normalized,
        limit,
        gap: gap(ExtReal::Finite(normalized), limit),
    };
    ctx.send(name, a, &result)
}

// ---- rate / legendre / cumulant ----

#[derive(Serialize)]
struct RateResult {
    closed_form: ExtReal,
    numeric: ExtReal,
    gap: ExtReal,
    effective_domain: [ExtReal; 2],
}

fn rate_cmd(name: &str, a: &RateArgs, ctx: &mut Context<'_>) -> Outcome {
    let model = BernoulliModel::new(a.p)?;
    let family = Family::from(a.family);
    let spec = RateFunctionSpec::new(family, model);
    let closed = rate(&spec, a.x);
    let numeric = legendre_numeric(
        &CumulantSpec::new(family, model),
        a.x,
        &LegendreOptions::default(),
    )?;
    let (lo, hi) = spec.effective_domain();
    let result = RateResult {
        closed_form: closed,
        numeric,
        gap: gap(closed, numeric),
        effective_domain: [ext(lo), ext(hi)],
    };
    ctx.send(name, a, &result)
}

#[derive(Serialize)]
struct FiniteCumulant {
    n: usize,
    normalized: f64,
    gap: ExtReal,
}

#[derive(Serialize)]
struct CumulantResult {
    regime: RegimeTag,
    closed_form: ExtReal,
    finite_n: Option<FiniteCumulant>,
}

fn cumulant_cmd(name: &str, a: &CumulantArgs, ctx: &mut Context<'_>) -> Outcome {
    let model = BernoulliModel::new(a.p)?;
    let family = Family::from(a.family);
    let closed = cumulant(&CumulantSpec::new(family, model), a.lambda);
    let finite_n = match a.n {
        Some(n) => {
            if n < 2 {
                return Err(Failure::usage("cumulant needs --n >= 2"));
            }
            let law = distribution_with_limits(n, &model, &ctx.limits)?;
            let normalized = normalized_from_distribution(&law, a.lambda, family)?;
            Some(FiniteCumulant {
                n,
                normalized,
                gap: gap(ExtReal::Finite(normalized), closed),
            })
        }
        None => None,
    };
    let result = CumulantResult {
        regime: MgfRegime::classify(a.lambda, &model).tag,
        closed_form: closed,
        finite_n,
    };
    ctx.send(name, a, &result)
}

// ---- ldp ----

#[derive(Serialize)]
struct LdpResult {
    nominal_value: f64,
    ratio: ExtReal,
    limit: ExtReal,
    gap: ExtReal,
}

fn ldp(name: &str, a: &LdpArgs, ctx: &mut Context<'_>) -> Outcome {
    let model = BernoulliModel::new(a.p)?;
    let opts = FiniteNOptions::default();
    let need_x = || a.x.ok_or_else(|| Failure::usage("this regime needs --x"));
    if a.regime != Regime::Interval && (a.a.is_some() || a.b.is_some()) {
        return Err(Failure::usage("--a/--b apply to the interval regime only"));
    }
    let near = RateFunctionSpec::new(Family::Near, model);
    let (ratio, limit) = match a.regime {
        Regime::NearUpper => {
            let x = need_x()?;
            (
                finite_n_upper_near(a.n, x, &model, &opts)?,
                neg(rate(&near, 1.0 + x)),
            )
        }
        Regime::NearLower => {
            let x = need_x()?;
            let v = finite_n_lower_near(a.n, x, &model)?;
            (ExtReal::Finite(v), ExtReal::Finite(x * model.lambda_p()))
        }
        Regime::Away => {
            let x = need_x()?;
            let away = RateFunctionSpec::new(Family::Away, model);
            (
                ExtReal::Finite(finite_n_away(a.n, x, &model)?),
                neg(rate(&away, x)),
            )
        }
        Regime::Interval => {
            if a.x.is_some() {
                return Err(Failure::usage(
                    "the interval regime takes --a and --b, not --x",
                ));
            }
            let (lo, hi) = match (a.a, a.b) {
                (Some(lo), Some(hi)) => (lo, hi),
                _ => return Err(Failure::usage("the interval regime needs --a and --b")),
            };
            (
                finite_n_interval_near(a.n, lo, hi, &model, &opts)?,
                interval_limit(Family::Near, lo, hi, &model),
            )
        }
    };
    let result = LdpResult {
        nominal_value: nominal_value(a.n, &model)?,
        ratio,
        limit,
        gap: gap(ratio, limit),
    };
    ctx.send(name, a, &result)
}

// ---- varadhan ----

#[derive(Serialize)]
struct TrajectoryPoint {
    n: usize,
    coefficient: f64,
    gap: f64,
}

#[derive(Serialize)]
struct VaradhanResult {
    threshold: f64,
    branch: &'static str,
    closed_form: f64,
    time_scale: f64,
    numeric_limit: f64,
    numeric_coefficient: f64,
    gap: f64,
    trajectory: Vec<TrajectoryPoint>,
}

fn varadhan(name: &str, a: &VaradhanArgs, ctx: &mut Context<'_>) -> Outcome {
    let model = BernoulliModel::new(a.p)?;
    let closed = power_coefficient(a.t, a.alpha, &model)?;
    let threshold = power_threshold(a.alpha, &model)?;
    let time_scale = power_time_scale(a.t, a.alpha, &model);
    let f = longrun::FunctionalSpec::power(time_scale, a.alpha)?;
    let limit = functional_limit(&f, Family::Near, &model, &VaradhanOptions::default())?;
    let numeric = coefficient_from_limit(limit, &model);
    let mut trajectory = Vec::with_capacity(a.n_ladder.len());
    for &n in &a.n_ladder {
        let v = finite_n_functional_with_limits(n, &f, Family::Near, &model, &ctx.limits)?;
        let coefficient = coefficient_from_limit(v, &model);
        trajectory.push(TrajectoryPoint {
            n,
            coefficient,
            gap: (coefficient - closed).abs(),
        });
    }
    let result = VaradhanResult {
        threshold,
        branch: if a.t <= threshold { "low" } else { "high" },
        closed_form: closed,
        time_scale,
        numeric_limit: limit,
        numeric_coefficient: numeric,
        gap: (numeric - closed).abs(),
        trajectory,
    };
    ctx.send(name, a, &result)
}

// ---- ci ----

#[derive(Serialize)]
struct CiResult {
    #[serde(flatten)]
    interval: ConfidenceInterval,
    lower_4dp: f64,
    upper_4dp: f64,
    width: f64,
    /// Bias-corrected run estimate; longest-run method only.
    l_hat: Option<f64>,
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn ci(name: &str, a: &CiArgs, ctx: &mut Context<'_>) -> Outcome {
    let method = IntervalMethod::from(a.method);
    let (interval, l_hat) = match (method, a.k, a.l_obs, a.p_hat) {
        (IntervalMethod::LongestRun, None, Some(l_obs), Some(p_hat)) => {
            let obs = RunObservation::new(a.n, l_obs, p_hat)?;
            (
                longest_run_interval(&obs, a.alpha)?,
                Some(estimate_run_length(&obs)?),
            )
        }
        (IntervalMethod::LongestRun, ..) => {
            return Err(Failure::usage("--method lr needs --l-obs and --p-hat"))
        }
        (m, Some(k), None, None) => (binomial_interval(m, k, a.n, a.alpha)?, None),
        _ => return Err(Failure::usage("binomial methods need --k")),
    };
    let result = CiResult {
        interval,
        lower_4dp: round4(interval.lower),
        upper_4dp: round4(interval.upper),
        width: interval.width(),
        l_hat,
    };
    ctx.send(name, a, &result)
}

// ---- tables ----

#[derive(Serialize)]
struct TablesResult {
    which: u8,
    rows: Vec<TableRow>,
}

fn tables(name: &str, a: &TablesArgs, ctx: &mut Context<'_>) -> Outcome {
    let mut rows = reproduce_table(a.which)?;
    if let Some(l_obs) = a.l_obs {
        rows.extend(lr_demonstration(a.which, l_obs)?);
    }
    if a.format == Format::Csv {
        return write_rows(ctx.out, &rows);
    }
    ctx.send(
        name,
        a,
        &TablesResult {
            which: a.which,
            rows,
        },
    )
}

// ---- simulate ----

fn coverage(name: &str, a: &CoverageArgs, ctx: &mut Context<'_>) -> Outcome {
    let config = SimulationConfig {
        p: a.p,
        n: a.n,
        alpha: a.alpha,
        replications: a.reps,
        master_seed: a.seed,
        methods: a.methods.iter().map(|&m| IntervalMethod::from(m)).collect(),
    };
    let report: CoverageReport = coverage_experiment(&config)?;
    if a.format == Format::Csv {
        report.write_csv(&mut *ctx.out)?;
        return Ok(());
    }
    let generator = report.generator.clone();
    ctx.send_seeded(name, a, &report, Some((a.seed, &generator)))
}

fn ratio(name: &str, a: &RatioArgs, ctx: &mut Context<'_>) -> Outcome {
    let model = BernoulliModel::new(a.p)?;
    let summary: RatioSummary = empirical_normalized_ratio(a.n, &model, a.reps, a.seed)?;
    let generator = summary.generator.clone();
    ctx.send_seeded(name, a, &summary, Some((a.seed, &generator)))
}
