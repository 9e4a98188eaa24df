//! Moment generating function of `L(n)`.
//!
//! [`log_mgf`] sums `e^{λk} P(L(n) = k)` over a materialised law.
//! [`log_mgf_recursive`] is an independent route: it conditions on the first
//! failure,
//!
//! ```text
//! E e^{λL(n)} = q Σ_{j<n} p^j E e^{λ max(L(n-j-1), j)} + p^n e^{λn},
//! ```
//!
//! and builds the laws of the shorter prefixes with its own all-positive
//! ratio recursion, so the two routes share no arithmetic beyond `exp`/`ln`.

use serde::{Deserialize, Serialize};

use crate::config::{Limits, REGIME_TOLERANCE};
use crate::dist::{distribution_with_limits, nominal_value, RunLengthDistribution};
use crate::error::{Error, Result};
use crate::ldp::{cumulant, CumulantSpec, Family};
use crate::model::BernoulliModel;
use crate::numeric::{ln_one_minus_exp, log_sub_exp, log_sum_exp, ExtReal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeTag {
    Subcritical,
    Critical,
    Supercritical,
}

/// `λ` together with the side of `ln(1/p)` it falls on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MgfRegime {
    pub tag: RegimeTag,
    pub lambda: f64,
    pub model: BernoulliModel,
}

impl MgfRegime {
    /// Classify `lambda` using a band of width [`REGIME_TOLERANCE`] around
    /// `ln(1/p)` for the critical case.
    pub fn classify(lambda: f64, model: &BernoulliModel) -> Self {
        let gap = lambda - model.lambda_p();
        let tag = if gap.abs() <= REGIME_TOLERANCE {
            RegimeTag::Critical
        } else if gap < 0.0 {
            RegimeTag::Subcritical
        } else {
            RegimeTag::Supercritical
        };
        Self {
            tag,
            lambda,
            model: *model,
        }
    }

    /// Use `tag` regardless of where `lambda` falls.
    pub fn forced(tag: RegimeTag, lambda: f64, model: &BernoulliModel) -> Self {
        Self {
            tag,
            lambda,
            model: *model,
        }
    }

    /// The limit of the normalised log-MGF at the given speed in this regime.
    pub fn limit(&self, speed: Family) -> ExtReal {
        let lambda = self.lambda;
        let lp = self.model.lambda_p();
        match (speed, self.tag) {
            (Family::Near, RegimeTag::Subcritical) => ExtReal::Finite(lambda),
            (Family::Near, RegimeTag::Critical) => ExtReal::Finite(2.0 * lambda),
            (Family::Near, RegimeTag::Supercritical) => ExtReal::PosInfinity,
            (Family::Away, RegimeTag::Subcritical) => ExtReal::Finite(0.0),
            (Family::Away, _) => ExtReal::Finite(lambda - lp),
        }
    }
}

/// `ln E e^{λ L(n)}` over a materialised law; finite for every real `λ`.
pub fn log_mgf(dist: &RunLengthDistribution, lambda: f64) -> f64 {
    let terms: Vec<f64> = dist
        .log_pmf()
        .iter()
        .enumerate()
        .map(|(k, &lp)| lambda * k as f64 + lp)
        .collect();
    log_sum_exp(&terms)
}

/// First-failure recursion evaluation of `ln E e^{λ L(n)}`, under the default
/// cap of 2000 trials.
pub fn log_mgf_recursive(n: usize, model: &BernoulliModel, lambda: f64) -> Result<f64> {
    log_mgf_recursive_with_limits(n, model, lambda, &Limits::default())
}

pub fn log_mgf_recursive_with_limits(
    n: usize,
    model: &BernoulliModel,
    lambda: f64,
    limits: &Limits,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("recursion needs n >= 1"));
    }
    if n > limits.recursion_cap {
        return Err(Error::Resource {
            what: "n",
            requested: n,
            cap: limits.recursion_cap,
        });
    }
    let prefixes = PrefixLaws::build(n - 1, model);
    let (ln_p, ln_q) = (model.ln_p(), model.ln_q());

    let mut outer = Vec::with_capacity(n + 1);
    for j in 0..n {
        let m = n - j - 1;
        outer.push(ln_q + j as f64 * ln_p + prefixes.log_mgf_of_max(m, j, lambda));
    }
    outer.push(n as f64 * ln_p + lambda * n as f64);
    Ok(log_sum_exp(&outer))
}

/// Laws of `L(0), …, L(max_m)` from the first-failure recursion
/// `a_m = q Σ_{j<k} p^j a_{m-j-1}` for `a_m = P(L(m) < k)`, carried as ratios
/// `a_m / a_{m-1}` so every step adds nonnegative terms.
struct PrefixLaws {
    /// `log_pmf[m][k] = ln P(L(m) = k)` for `k = 0..=m`.
    log_pmf: Vec<Vec<f64>>,
}

impl PrefixLaws {
    fn build(max_m: usize, model: &BernoulliModel) -> Self {
        let (p, q) = (model.p(), model.q());
        // below[m][k] = ln P(L(m) < k) for k = 0..=m+1
        let mut below: Vec<Vec<f64>> = (0..=max_m)
            .map(|m| {
                let mut row = vec![0.0; m + 2];
                row[0] = f64::NEG_INFINITY;
                row
            })
            .collect();
        let mut powers = Vec::with_capacity(max_m + 1);
        let mut pj = 1.0;
        for _ in 0..=max_m {
            powers.push(pj);
            pj *= p;
        }

        let mut ratio = vec![1.0f64; max_m + 1];
        for k in 1..=max_m {
            ratio.iter_mut().for_each(|r| *r = 1.0);
            let mut log_a = 0.0f64;
            let pk = (k as f64 * model.ln_p()).exp();
            for m in k..=max_m {
                // r_m = q Σ_{j<k} p^j a_{m-j-1} / a_{m-1}
                let mut back = 1.0;
                let mut sum = 0.0;
                for (j, pw) in powers.iter().enumerate().take(k) {
                    if j > 0 {
                        back *= ratio[m - j];
                    }
                    sum += pw / back;
                }
                let r = q * sum;
                // 1 - r_m is p^k at m = k and q p^k a_{m-k-1} / a_{m-1} after
                let deficit = if m == k {
                    pk
                } else {
                    back *= ratio[m - k];
                    q * pk / back
                };
                log_a += if deficit < 0.5 {
                    (-deficit).ln_1p()
                } else {
                    r.ln()
                };
                ratio[m] = r;
                below[m][k] = log_a;
            }
        }

        let half = 0.5f64.ln();
        let log_pmf = below
            .iter()
            .enumerate()
            .map(|(m, row)| {
                (0..=m)
                    .map(|k| {
                        let (lo, hi) = (row[k], row[k + 1]);
                        if hi <= half {
                            log_sub_exp(hi, lo.min(hi))
                        } else {
                            let t_lo = ln_one_minus_exp(lo.min(0.0));
                            let t_hi = ln_one_minus_exp(hi.min(0.0));
                            log_sub_exp(t_lo, t_hi.min(t_lo))
                        }
                    })
                    .collect()
            })
            .collect();
        Self { log_pmf }
    }

    /// `ln E e^{λ max(L(m), j)}`.
    fn log_mgf_of_max(&self, m: usize, j: usize, lambda: f64) -> f64 {
        let pmf = &self.log_pmf[m];
        let mut terms = Vec::with_capacity(m + 2);
        // mass on L(m) <= j is lifted to j
        let capped = log_sum_exp(&pmf[..=j.min(m)]);
        terms.push(lambda * j as f64 + capped);
        if j < m {
            terms.extend(
                pmf.iter()
                    .enumerate()
                    .skip(j + 1)
                    .map(|(k, &lp)| lambda * k as f64 + lp),
            );
        }
        log_sum_exp(&terms)
    }
}

/// `ln E e^{λ L(n)}` divided by the speed: `log_{1/p} n` (near) or `n` (away).
pub fn normalized_log_mgf(
    n: usize,
    model: &BernoulliModel,
    lambda: f64,
    speed: Family,
) -> Result<f64> {
    normalized_log_mgf_with_limits(n, model, lambda, speed, &Limits::default())
}

pub fn normalized_log_mgf_with_limits(
    n: usize,
    model: &BernoulliModel,
    lambda: f64,
    speed: Family,
    limits: &Limits,
) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("normalised log-MGF needs n >= 2"));
    }
    let dist = distribution_with_limits(n, model, limits)?;
    normalized_from_distribution(&dist, lambda, speed)
}

/// As [`normalized_log_mgf`], reusing an already materialised law.
pub fn normalized_from_distribution(
    dist: &RunLengthDistribution,
    lambda: f64,
    speed: Family,
) -> Result<f64> {
    let n = dist.n();
    if n < 2 {
        return Err(Error::invalid("normalised log-MGF needs n >= 2"));
    }
    let scale = match speed {
        Family::Near => nominal_value(n, dist.model())?,
        Family::Away => n as f64,
    };
    Ok(log_mgf(dist, lambda) / scale)
}

/// Large-`n` limit of [`normalized_log_mgf`]: the near-speed cumulant
/// (`λ`, `2λ`, `+∞`) or the away-speed cumulant (`0`, `λ - ln(1/p)`).
pub fn asymptotic_limit(lambda: f64, model: &BernoulliModel, speed: Family) -> ExtReal {
    cumulant(
        &CumulantSpec {
            family: speed,
            model: *model,
        },
        lambda,
    )
}
