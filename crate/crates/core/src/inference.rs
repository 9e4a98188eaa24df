//! Confidence intervals for `p`.
//!
//! The longest-run interval inverts the extreme-value behaviour of `L(n)`:
//! with the bias-corrected run length `L̂`,
//!
//! ```text
//! ( exp{-(ln n - ln(α/2)) / L̂},  exp{-(ln n - ln(-ln(α/2))) / L̂} ).
//! ```
//!
//! The binomial intervals (Wilson score without continuity correction,
//! Clopper–Pearson, normal approximation) use the success count only.

use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::EULER_GAMMA;
use crate::error::{Error, Result};
use crate::output::write_csv;
use crate::special::{beta_quantile, std_normal_quantile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMethod {
    LongestRun,
    Wilson,
    ClopperPearson,
    Normal,
}

impl IntervalMethod {
    pub const ALL: [IntervalMethod; 4] = [
        IntervalMethod::LongestRun,
        IntervalMethod::Wilson,
        IntervalMethod::ClopperPearson,
        IntervalMethod::Normal,
    ];

    /// Short label used on the command line and in the tables.
    pub fn short_name(self) -> &'static str {
        match self {
            IntervalMethod::LongestRun => "lr",
            IntervalMethod::Wilson => "wilson",
            IntervalMethod::ClopperPearson => "cp",
            IntervalMethod::Normal => "normal",
        }
    }
}

impl FromStr for IntervalMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lr" | "longest_run" => Ok(IntervalMethod::LongestRun),
            "wilson" | "ws" => Ok(IntervalMethod::Wilson),
            "cp" | "clopper_pearson" => Ok(IntervalMethod::ClopperPearson),
            "normal" | "n" => Ok(IntervalMethod::Normal),
            other => Err(Error::invalid(format!("unknown interval method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub method: IntervalMethod,
    /// `1 - α`.
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ConfidenceInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lower <= p && p <= self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunObservation {
    pub n: usize,
    pub l_obs: usize,
    pub p_hat: f64,
}

impl RunObservation {
    pub fn new(n: usize, l_obs: usize, p_hat: f64) -> Result<Self> {
        let obs = Self { n, l_obs, p_hat };
        obs.validate()?;
        Ok(obs)
    }

    fn validate(&self) -> Result<()> {
        if self.l_obs > self.n {
            return Err(Error::invalid(format!(
                "observed run {} exceeds n = {}",
                self.l_obs, self.n
            )));
        }
        if !(self.p_hat > 0.0 && self.p_hat < 1.0) {
            return Err(Error::invalid(format!(
                "p_hat must lie strictly inside (0, 1), got {}",
                self.p_hat
            )));
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

fn check_counts(k: usize, n: usize) -> Result<()> {
    if n == 0 || k > n {
        return Err(Error::invalid(format!(
            "need 0 <= k <= n and n >= 1, got k = {k}, n = {n}"
        )));
    }
    Ok(())
}

/// `L̂ = l_obs - [log_{1/p̂}(1-p̂) + γ/ln(1/p̂) - 1/2]`, left unrounded.
pub fn estimate_run_length(obs: &RunObservation) -> Result<f64> {
    obs.validate()?;
    let lp = -obs.p_hat.ln();
    let correction = (-obs.p_hat).ln_1p() / lp + EULER_GAMMA / lp - 0.5;
    Ok(obs.l_obs as f64 - correction)
}

/// The longest-run interval for a given `L̂`.
pub fn lr_interval(n: usize, l_hat: f64, alpha: f64) -> Result<ConfidenceInterval> {
    check_alpha(alpha)?;
    if !(l_hat > 0.0 && l_hat.is_finite()) {
        return Err(Error::invalid(format!(
            "L-hat must be positive, got {l_hat}"
        )));
    }
    let half = alpha / 2.0;
    let ln_n = (n as f64).ln();
    let neg_ln_half = -half.ln();
    if !(n as f64 > neg_ln_half) {
        return Err(Error::invalid(format!(
            "n = {n} must exceed -ln(alpha/2) = {neg_ln_half}"
        )));
    }
    Ok(ConfidenceInterval {
        method: IntervalMethod::LongestRun,
        level: 1.0 - alpha,
        lower: (-(ln_n - half.ln()) / l_hat).exp(),
        upper: (-(ln_n - neg_ln_half.ln()) / l_hat).exp(),
    })
}

/// [`estimate_run_length`] followed by [`lr_interval`].
pub fn longest_run_interval(obs: &RunObservation, alpha: f64) -> Result<ConfidenceInterval> {
    lr_interval(obs.n, estimate_run_length(obs)?, alpha)
}

fn z_value(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    std_normal_quantile(1.0 - alpha / 2.0)
}

/// Wilson score interval, no continuity correction.
pub fn wilson_interval(k: usize, n: usize, alpha: f64) -> Result<ConfidenceInterval> {
    check_counts(k, n)?;
    let z = z_value(alpha)?;
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    Ok(ConfidenceInterval {
        method: IntervalMethod::Wilson,
        level: 1.0 - alpha,
        lower: (centre - half).max(0.0),
        upper: (centre + half).min(1.0),
    })
}

pub fn clopper_pearson_interval(k: usize, n: usize, alpha: f64) -> Result<ConfidenceInterval> {
    check_counts(k, n)?;
    check_alpha(alpha)?;
    let (kf, nf) = (k as f64, n as f64);
    let lower = if k == 0 {
        0.0
    } else {
        beta_quantile(kf, nf - kf + 1.0, alpha / 2.0)?
    };
    let upper = if k == n {
        1.0
    } else {
        beta_quantile(kf + 1.0, nf - kf, 1.0 - alpha / 2.0)?
    };
    Ok(ConfidenceInterval {
        method: IntervalMethod::ClopperPearson,
        level: 1.0 - alpha,
        lower,
        upper,
    })
}

/// `p̂ ± z sqrt(p̂(1-p̂)/n)`, clipped to `[0, 1]`.
pub fn normal_interval(k: usize, n: usize, alpha: f64) -> Result<ConfidenceInterval> {
    check_counts(k, n)?;
    if k == 0 || k == n {
        return Err(Error::invalid(format!(
            "normal approximation has zero variance at k = {k}, n = {n}"
        )));
    }
    let z = z_value(alpha)?;
    let p = k as f64 / n as f64;
    let half = z * (p * (1.0 - p) / n as f64).sqrt();
    Ok(ConfidenceInterval {
        method: IntervalMethod::Normal,
        level: 1.0 - alpha,
        lower: (p - half).max(0.0),
        upper: (p + half).min(1.0),
    })
}

/// Any of the three binomial intervals from a success count.
pub fn binomial_interval(
    method: IntervalMethod,
    k: usize,
    n: usize,
    alpha: f64,
) -> Result<ConfidenceInterval> {
    match method {
        IntervalMethod::Wilson => wilson_interval(k, n, alpha),
        IntervalMethod::ClopperPearson => clopper_pearson_interval(k, n, alpha),
        IntervalMethod::Normal => normal_interval(k, n, alpha),
        IntervalMethod::LongestRun => Err(Error::invalid(
            "the longest-run interval needs an observed run, not a success count",
        )),
    }
}

/// One reproduced cell of the published comparison tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub table_id: u8,
    pub block_p: f64,
    pub p_hat: f64,
    pub n: usize,
    pub alpha: f64,
    pub method: IntervalMethod,
    pub lower: f64,
    pub upper: f64,
    pub lower_4dp: f64,
    pub upper_4dp: f64,
}

struct Block {
    p: f64,
    n: usize,
    alpha: f64,
    p_hats: [f64; 5],
}

fn blocks(which: u8) -> Result<(&'static [Block], &'static [IntervalMethod])> {
    const TABLE_1: [Block; 2] = [
        Block {
            p: 0.95,
            n: 200,
            alpha: 0.05,
            p_hats: [0.9650, 0.9450, 0.9600, 0.9500, 0.9700],
        },
        Block {
            p: 0.98,
            n: 200,
            alpha: 0.05,
            p_hats: [0.9800, 0.9850, 0.9700, 0.9800, 0.9750],
        },
    ];
    const TABLE_2: [Block; 1] = [Block {
        p: 0.995,
        n: 1000,
        alpha: 0.05,
        p_hats: [0.9950, 0.9940, 0.9950, 0.9960, 0.9960],
    }];
    match which {
        1 => Ok((
            &TABLE_1,
            &[IntervalMethod::Wilson, IntervalMethod::ClopperPearson],
        )),
        2 => Ok((
            &TABLE_2,
            &[
                IntervalMethod::Normal,
                IntervalMethod::Wilson,
                IntervalMethod::ClopperPearson,
            ],
        )),
        other => Err(Error::invalid(format!(
            "there are tables 1 and 2, not {other}"
        ))),
    }
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn row(table_id: u8, block: &Block, p_hat: f64, ci: ConfidenceInterval) -> TableRow {
    TableRow {
        table_id,
        block_p: block.p,
        p_hat,
        n: block.n,
        alpha: block.alpha,
        method: ci.method,
        lower: ci.lower,
        upper: ci.upper,
        lower_4dp: round4(ci.lower),
        upper_4dp: round4(ci.upper),
    }
}

/// Recomputes the binomial-interval cells of table 1 (WS, CP) or table 2
/// (N, WS, CP) from their `(p̂, n, α)`, with `k = round(p̂ n)`.
pub fn reproduce_table(which: u8) -> Result<Vec<TableRow>> {
    let (blocks, methods) = blocks(which)?;
    let mut rows = Vec::new();
    for block in blocks {
        for &p_hat in &block.p_hats {
            let k = (p_hat * block.n as f64).round() as usize;
            for &method in methods {
                let ci = binomial_interval(method, k, block.n, block.alpha)?;
                rows.push(row(which, block, p_hat, ci));
            }
        }
    }
    Ok(rows)
}

/// Longest-run rows for each cell of a table at a caller-chosen observed run,
/// since the runs behind the published LR cells are not available.
pub fn lr_demonstration(which: u8, l_obs: usize) -> Result<Vec<TableRow>> {
    let (blocks, _) = blocks(which)?;
    let mut rows = Vec::new();
    for block in blocks {
        for &p_hat in &block.p_hats {
            let obs = RunObservation::new(block.n, l_obs, p_hat)?;
            let ci = longest_run_interval(&obs, block.alpha)?;
            rows.push(row(which, block, p_hat, ci));
        }
    }
    Ok(rows)
}

/// CSV with the columns of [`TableRow`].
pub fn write_table_csv<W: Write>(rows: &[TableRow], out: W) -> Result<()> {
    write_csv(rows, out)
}
