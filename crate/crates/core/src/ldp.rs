//! Large deviations of `L(n)` at the two speeds.
//!
//! Near the nominal value, `L(n) / log_{1/p} n` obeys an LDP at speed
//! `log_{1/p} n` with rate `(x - 1) ln(1/p)` on `[1, ∞)`. Away from it,
//! `L(n) / n` obeys an LDP at speed `n` with rate `x ln(1/p)` on `[0, 1]`.
//! Both rates are Fenchel–Legendre transforms of piecewise-affine cumulants;
//! [`legendre_numeric`] recomputes them by direct maximisation as a check on
//! the closed forms.
//!
//! The `finite_n_*` functions evaluate the corresponding normalised
//! log-probabilities exactly at a given `n`. Real thresholds are turned into
//! run lengths with a ceiling for lower limits and a floor for upper limits.

use serde::{Deserialize, Serialize};

use crate::config::{Limits, INTEGER_SNAP, REGIME_TOLERANCE};
use crate::dist::{nominal_value, split_at};
use crate::error::{Error, Result};
use crate::model::BernoulliModel;
use crate::numeric::{grid_golden_max, log_sub_exp, ExtReal};

/// Which of the two large-deviation scales: `log_{1/p} n` or `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Near,
    Away,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "near" => Ok(Family::Near),
            "away" => Ok(Family::Away),
            other => Err(Error::invalid(format!("unknown family '{other}'"))),
        }
    }
}

/// Scaled cumulant `Λ` (near) or `Λ̃` (away).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantSpec {
    pub family: Family,
    pub model: BernoulliModel,
}

/// Rate function `Λ*` (near) or `Λ̃*` (away).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFunctionSpec {
    pub family: Family,
    pub model: BernoulliModel,
}

impl CumulantSpec {
    pub fn new(family: Family, model: BernoulliModel) -> Self {
        Self { family, model }
    }

    pub fn rate(&self) -> RateFunctionSpec {
        RateFunctionSpec {
            family: self.family,
            model: self.model,
        }
    }
}

impl RateFunctionSpec {
    pub fn new(family: Family, model: BernoulliModel) -> Self {
        Self { family, model }
    }

    /// Closed interval on which the rate is finite.
    pub fn effective_domain(&self) -> (f64, f64) {
        match self.family {
            Family::Near => (1.0, f64::INFINITY),
            Family::Away => (0.0, 1.0),
        }
    }
}

pub fn rate(spec: &RateFunctionSpec, x: f64) -> ExtReal {
    let lp = spec.model.lambda_p();
    match spec.family {
        Family::Near if x >= 1.0 => ExtReal::Finite((x - 1.0) * lp),
        Family::Away if (0.0..=1.0).contains(&x) => ExtReal::Finite(x * lp),
        _ => ExtReal::PosInfinity,
    }
}

/// The cumulant at `lambda`. `lambda` within [`REGIME_TOLERANCE`] of
/// `ln(1/p)` counts as the critical point.
pub fn cumulant(spec: &CumulantSpec, lambda: f64) -> ExtReal {
    let lp = spec.model.lambda_p();
    let critical = (lambda - lp).abs() <= REGIME_TOLERANCE;
    match spec.family {
        Family::Near if critical => ExtReal::Finite(2.0 * lambda),
        Family::Near if lambda < lp => ExtReal::Finite(lambda),
        Family::Near => ExtReal::PosInfinity,
        Family::Away if critical || lambda >= lp => ExtReal::Finite(lambda - lp),
        Family::Away => ExtReal::Finite(0.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreOptions {
    /// Agreement expected with the closed form; also the growth threshold
    /// used to declare divergence.
    pub tolerance: f64,
    pub grid: usize,
    pub lambda_tolerance: f64,
    /// Half-width of the initial search window around `ln(1/p)`, in units of
    /// `ln(1/p)`.
    pub initial_span: f64,
    pub max_doublings: usize,
    /// Report a divergent supremum as `+∞` rather than as an error.
    pub allow_infinite: bool,
}

impl Default for LegendreOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            grid: 64,
            lambda_tolerance: 1e-13,
            initial_span: 8.0,
            max_doublings: 6,
            allow_infinite: true,
        }
    }
}

/// One affine piece of a cumulant, with its continuous extension used at
/// open endpoints.
struct Piece {
    lo: f64,
    hi: f64,
    slope: f64,
    intercept: f64,
}

fn pieces(spec: &CumulantSpec) -> (Vec<Piece>, Vec<(f64, f64)>) {
    let lp = spec.model.lambda_p();
    match spec.family {
        // λ on (-∞, λ_p), isolated value 2λ_p at λ_p, +∞ beyond
        Family::Near => (
            vec![Piece {
                lo: f64::NEG_INFINITY,
                hi: lp,
                slope: 1.0,
                intercept: 0.0,
            }],
            vec![(lp, 2.0 * lp)],
        ),
        Family::Away => (
            vec![
                Piece {
                    lo: f64::NEG_INFINITY,
                    hi: lp,
                    slope: 0.0,
                    intercept: 0.0,
                },
                Piece {
                    lo: lp,
                    hi: f64::INFINITY,
                    slope: 1.0,
                    intercept: -lp,
                },
            ],
            vec![],
        ),
    }
}

/// `sup_λ [λx - Λ(λ)]` by grid search and golden-section refinement over each
/// affine piece of the cumulant, plus its isolated points.
pub fn legendre_numeric(spec: &CumulantSpec, x: f64, opts: &LegendreOptions) -> Result<ExtReal> {
    let lp = spec.model.lambda_p();
    let (pieces, isolated) = pieces(spec);
    let mut best = f64::NEG_INFINITY;

    for piece in &pieces {
        let objective = |lambda: f64| lambda * x - (piece.slope * lambda + piece.intercept);
        let mut span = opts.initial_span * lp;
        let window = |span: f64| {
            let lo = if piece.lo.is_finite() {
                piece.lo
            } else {
                lp - span
            };
            let hi = if piece.hi.is_finite() {
                piece.hi
            } else {
                lp + span
            };
            (lo, hi)
        };
        let (lo, hi) = window(span);
        let (_, mut value) = grid_golden_max(objective, lo, hi, opts.grid, opts.lambda_tolerance);

        // an unbounded piece is searched on growing windows until the maximum
        // stops increasing
        if !piece.lo.is_finite() || !piece.hi.is_finite() {
            let mut growth = 0;
            for _ in 0..opts.max_doublings {
                span *= 2.0;
                let (lo, hi) = window(span);
                let (_, wider) =
                    grid_golden_max(objective, lo, hi, opts.grid, opts.lambda_tolerance);
                if wider > value + opts.tolerance * value.abs().max(1.0) {
                    growth += 1;
                } else {
                    growth = 0;
                }
                value = value.max(wider);
                if growth == 0 {
                    break;
                }
            }
            if growth >= 3.min(opts.max_doublings) && growth > 0 {
                return if opts.allow_infinite {
                    Ok(ExtReal::PosInfinity)
                } else {
                    Err(Error::domain(format!(
                        "Legendre transform diverges at x = {x}"
                    )))
                };
            }
        }
        best = best.max(value);
    }
    for &(lambda, value) in &isolated {
        best = best.max(lambda * x - value);
    }
    Ok(ExtReal::Finite(best))
}

/// How the `finite_n_*` functions report a probability of zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiniteNOptions {
    /// Return `-∞` instead of a domain error.
    pub allow_infinite: bool,
}

impl Default for FiniteNOptions {
    fn default() -> Self {
        Self {
            allow_infinite: true,
        }
    }
}

fn ceil_snap(v: f64) -> f64 {
    (v - INTEGER_SNAP).ceil()
}

fn floor_snap(v: f64) -> f64 {
    (v + INTEGER_SNAP).floor()
}

fn neg_infinity(opts: &FiniteNOptions, what: &str) -> Result<ExtReal> {
    if opts.allow_infinite {
        Ok(ExtReal::NegInfinity)
    } else {
        Err(Error::domain(format!("{what} has probability zero")))
    }
}

fn check_cap(n: usize) -> Result<()> {
    let cap = Limits::default().single_k_cap;
    if n > cap {
        return Err(Error::Resource {
            what: "n",
            requested: n,
            cap,
        });
    }
    Ok(())
}

fn speed_near(n: usize, model: &BernoulliModel) -> Result<f64> {
    check_cap(n)?;
    if n < 2 {
        return Err(Error::invalid("near-speed ratios need n >= 2"));
    }
    nominal_value(n, model)
}

/// `(1/ℓ(n)) ln P(L(n) >= ⌈(1+x) ℓ(n)⌉)`; tends to `-x ln(1/p)`.
pub fn finite_n_upper_near(
    n: usize,
    x: f64,
    model: &BernoulliModel,
    opts: &FiniteNOptions,
) -> Result<ExtReal> {
    if !(x > 0.0) {
        return Err(Error::invalid(format!("x must be positive, got {x}")));
    }
    let ell = speed_near(n, model)?;
    let k = ceil_snap((1.0 + x) * ell);
    if k > n as f64 {
        return neg_infinity(opts, "L(n) above n");
    }
    Ok(ExtReal::Finite(
        split_at(n, k as usize, model).at_or_above / ell,
    ))
}

/// `(1/ℓ(n)) ln[-ln P(L(n) <= ⌊(1-x) ℓ(n)⌋)]`; tends to `x ln(1/p)`.
pub fn finite_n_lower_near(n: usize, x: f64, model: &BernoulliModel) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::invalid(format!("x must lie in (0, 1), got {x}")));
    }
    let ell = speed_near(n, model)?;
    let j = floor_snap((1.0 - x) * ell).max(0.0) as usize;
    let log_prob = split_at(n, j + 1, model).below;
    if !(log_prob < 0.0) {
        return Err(Error::domain(format!(
            "P(L({n}) <= {j}) is 1, so its double logarithm is undefined"
        )));
    }
    Ok((-log_prob).ln() / ell)
}

/// `(1/n) ln P(L(n) >= ⌈n x⌉)`; tends to `-x ln(1/p)`.
pub fn finite_n_away(n: usize, x: f64, model: &BernoulliModel) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    check_cap(n)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("x must lie in [0, 1], got {x}")));
    }
    let k = ceil_snap(n as f64 * x).max(0.0) as usize;
    Ok(split_at(n, k, model).at_or_above / n as f64)
}

/// `(1/ℓ(n)) ln P(a <= L(n)/ℓ(n) <= b)`. `b` may be `+∞`.
pub fn finite_n_interval_near(
    n: usize,
    a: f64,
    b: f64,
    model: &BernoulliModel,
    opts: &FiniteNOptions,
) -> Result<ExtReal> {
    if a.is_nan() || b.is_nan() || a > b {
        return Err(Error::invalid(format!("need a <= b, got [{a}, {b}]")));
    }
    let ell = speed_near(n, model)?;
    let lo = ceil_snap(a * ell).max(0.0);
    let hi = floor_snap(b * ell).min(n as f64);
    if lo > hi {
        return neg_infinity(opts, "the interval event");
    }
    let (lo, hi) = (lo as usize, hi as usize);
    let lower = split_at(n, lo, model);
    let upper = split_at(n, hi + 1, model);
    let log_prob = if lower.at_or_above > 0.5f64.ln() {
        log_sub_exp(upper.below, lower.below.min(upper.below))
    } else {
        log_sub_exp(lower.at_or_above, upper.at_or_above.min(lower.at_or_above))
    };
    if log_prob == f64::NEG_INFINITY {
        return neg_infinity(opts, "the interval event");
    }
    Ok(ExtReal::Finite(log_prob / ell))
}

/// `-inf_{x ∈ [a, b]} rate(family, x)`, the large-`n` limit of the
/// interval ratio at the family's speed.
pub fn interval_limit(family: Family, a: f64, b: f64, model: &BernoulliModel) -> ExtReal {
    let spec = RateFunctionSpec::new(family, *model);
    let (dom_lo, dom_hi) = spec.effective_domain();
    let lo = a.max(dom_lo);
    let hi = b.min(dom_hi);
    if lo > hi {
        return ExtReal::NegInfinity;
    }
    match rate(&spec, lo) {
        ExtReal::Finite(v) => ExtReal::Finite(-v),
        _ => ExtReal::NegInfinity,
    }
}

/// Bounds on `ln P(L(n) >= k)` implied by the product-form bounds on
/// `P(L(n) < k)`; `(lower, upper)`.
pub fn tail_sandwich(n: usize, k: usize, model: &BernoulliModel) -> Result<(f64, f64)> {
    Ok(crate::dist::tail_bounds(n, k, model)?.complement())
}
