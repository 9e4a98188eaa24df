//! Exponential functionals of `L(n)`.
//!
//! For admissible `f`, `(1/s) ln E exp{s f(L(n)/s)}` tends to
//! `max_x [f(x) - I(x)]`, where `s` is the speed and `I` the rate of the
//! chosen family. Admissibility is enforced structurally: only bounded
//! functionals with a declared bound and the power family `t x^α` are
//! accepted.
//!
//! For the power family at the near speed the limit has a closed form. Stated
//! per unit of `ln n` for `t (ln n)^{1-α} L(n)^α`, the coefficient is
//! `t / ln^α(1/p)` up to the threshold `t* = ln^α(1/p) / α` and
//! `(t / ln^α(1/p))^{1/(1-α)} C_α + 1` beyond it, with
//! `C_α = α^{α/(1-α)} - α^{1/(1-α)}`. The same exponent equals
//! `ℓ(n) t' (L/ℓ)^α` with `t' = t ln^{1-α}(1/p)`, so the coefficient is the
//! max for `t' x^α` divided by `ln(1/p)`; see [`power_time_scale`] and
//! [`coefficient_from_limit`].

use std::fmt;
use std::sync::Arc;

use crate::config::Limits;
use crate::dist::{distribution_with_limits, nominal_value, RunLengthDistribution};
use crate::error::{Error, Result};
use crate::ldp::{Family, RateFunctionSpec};
use crate::model::BernoulliModel;
use crate::numeric::{grid_golden_max, log_sum_exp};

type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An admissible functional `f`.
#[derive(Clone)]
pub enum FunctionalSpec {
    /// `t x^α` with `t > 0`, `0 < α < 1`.
    Power { t: f64, alpha: f64 },
    /// Any continuous `f` with `|f| <= bound`.
    Bounded {
        f: Evaluator,
        bound: f64,
        label: String,
    },
}

impl fmt::Debug for FunctionalSpec {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionalSpec::Power { t, alpha } => fmt
                .debug_struct("Power")
                .field("t", t)
                .field("alpha", alpha)
                .finish(),
            FunctionalSpec::Bounded { bound, label, .. } => fmt
                .debug_struct("Bounded")
                .field("label", label)
                .field("bound", bound)
                .finish(),
        }
    }
}

impl FunctionalSpec {
    pub fn power(t: f64, alpha: f64) -> Result<Self> {
        check_power(t, alpha)?;
        Ok(FunctionalSpec::Power { t, alpha })
    }

    pub fn bounded<F>(label: impl Into<String>, bound: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(Error::invalid(format!(
                "bound must be finite and nonnegative, got {bound}"
            )));
        }
        Ok(FunctionalSpec::Bounded {
            f: Arc::new(f),
            bound,
            label: label.into(),
        })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::bounded(format!("constant {c}"), c.abs(), move |_| c)
    }

    /// `f(x)`; a bounded functional that breaks its bound is an error.
    pub fn eval(&self, x: f64) -> Result<f64> {
        match self {
            FunctionalSpec::Power { t, alpha } => Ok(t * x.max(0.0).powf(*alpha)),
            FunctionalSpec::Bounded { f, bound, label } => {
                let v = f(x);
                if v.is_nan() || v.abs() > *bound {
                    return Err(Error::domain(format!(
                        "functional '{label}' gives {v} at x = {x}, outside its bound {bound}"
                    )));
                }
                Ok(v)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaradhanOptions {
    pub grid: usize,
    /// Relative tolerance on the maximiser.
    pub x_tol: f64,
    /// Initial right end of the near-family search interval.
    pub x_max: f64,
    pub max_doublings: usize,
}

impl Default for VaradhanOptions {
    fn default() -> Self {
        Self {
            grid: 256,
            x_tol: 1e-12,
            x_max: 10.0,
            max_doublings: 40,
        }
    }
}

/// `max_x [f(x) - I(x)]` over the effective domain of the family's rate.
pub fn functional_limit(
    f: &FunctionalSpec,
    family: Family,
    model: &BernoulliModel,
    opts: &VaradhanOptions,
) -> Result<f64> {
    let spec = RateFunctionSpec::new(family, *model);
    let lp = model.lambda_p();
    let rate = |x: f64| match family {
        Family::Near => (x - 1.0) * lp,
        Family::Away => x * lp,
    };
    // evaluation errors are parked here so the optimiser can stay infallible
    let failure = std::cell::RefCell::new(None);
    let objective = |x: f64| match f.eval(x) {
        Ok(v) => v - rate(x),
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };

    let (lo, mut hi) = spec.effective_domain();
    if family == Family::Near {
        hi = opts.x_max;
        let mut doublings = 0;
        while !tail_decreasing(&objective, lo, hi, opts.grid) {
            if let Some(e) = failure.borrow_mut().take() {
                return Err(e);
            }
            if doublings == opts.max_doublings {
                return Err(Error::Divergence(format!(
                    "objective still increasing at x = {hi}; {f:?} is not admissible"
                )));
            }
            hi *= 2.0;
            doublings += 1;
        }
    }
    let x_tol = opts.x_tol * hi.abs().max(1.0);
    let (_, value) = grid_golden_max(objective, lo, hi, opts.grid, x_tol);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(value)
}

/// True when the objective falls over the last three grid points.
fn tail_decreasing<F: Fn(f64) -> f64>(g: &F, lo: f64, hi: f64, grid: usize) -> bool {
    let step = (hi - lo) / grid.max(3) as f64;
    let v: Vec<f64> = (0..3).map(|i| g(hi - step * (2 - i) as f64)).collect();
    v[0] > v[1] && v[1] > v[2]
}

fn check_power(t: f64, alpha: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("t must be positive, got {t}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

/// `t* = ln^α(1/p) / α`, where the maximiser leaves `x = 1`.
pub fn power_threshold(alpha: f64, model: &BernoulliModel) -> Result<f64> {
    check_power(1.0, alpha)?;
    Ok(model.lambda_p().powf(alpha) / alpha)
}

/// Coefficient of `ln n` for `t <= t*`: `t / ln^α(1/p)`.
pub fn power_branch_low(t: f64, alpha: f64, model: &BernoulliModel) -> f64 {
    t / model.lambda_p().powf(alpha)
}

/// Coefficient of `ln n` for `t > t*`.
pub fn power_branch_high(t: f64, alpha: f64, model: &BernoulliModel) -> f64 {
    let s = t / model.lambda_p().powf(alpha);
    let e = 1.0 / (1.0 - alpha);
    let c = alpha.powf(alpha * e) - alpha.powf(e);
    s.powf(e) * c + 1.0
}

/// `lim (1/ln n) ln E exp{t (ln n)^{1-α} L(n)^α}`.
pub fn power_coefficient(t: f64, alpha: f64, model: &BernoulliModel) -> Result<f64> {
    check_power(t, alpha)?;
    if t <= power_threshold(alpha, model)? {
        Ok(power_branch_low(t, alpha, model))
    } else {
        Ok(power_branch_high(t, alpha, model))
    }
}

/// `t' = t ln^{1-α}(1/p)`: the multiplier that rewrites the exponent as
/// `ℓ(n) t' (L/ℓ)^α`.
pub fn power_time_scale(t: f64, alpha: f64, model: &BernoulliModel) -> f64 {
    t * model.lambda_p().powf(1.0 - alpha)
}

/// Converts a near-speed limit to a coefficient of `ln n`.
pub fn coefficient_from_limit(limit: f64, model: &BernoulliModel) -> f64 {
    limit / model.lambda_p()
}

/// Exact `(1/s) ln E exp{s f(L(n)/s)}` with `s = ℓ(n)` (near) or `n` (away).
pub fn finite_n_functional(
    n: usize,
    f: &FunctionalSpec,
    family: Family,
    model: &BernoulliModel,
) -> Result<f64> {
    finite_n_functional_with_limits(n, f, family, model, &Limits::default())
}

pub fn finite_n_functional_with_limits(
    n: usize,
    f: &FunctionalSpec,
    family: Family,
    model: &BernoulliModel,
    limits: &Limits,
) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("finite-n functional needs n >= 2"));
    }
    let dist = distribution_with_limits(n, model, limits)?;
    functional_from_distribution(&dist, f, family)
}

/// As [`finite_n_functional`], reusing an already materialised law.
pub fn functional_from_distribution(
    dist: &RunLengthDistribution,
    f: &FunctionalSpec,
    family: Family,
) -> Result<f64> {
    let n = dist.n();
    if n < 2 {
        return Err(Error::invalid("finite-n functional needs n >= 2"));
    }
    let s = match family {
        Family::Near => nominal_value(n, dist.model())?,
        Family::Away => n as f64,
    };
    let terms = dist
        .log_pmf()
        .iter()
        .enumerate()
        .map(|(k, &lp)| Ok(lp + s * f.eval(k as f64 / s)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(log_sum_exp(&terms) / s)
}
