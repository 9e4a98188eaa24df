//! The exact law of the longest success run `L(n)`.
//!
//! Every probability is carried in log domain as the pair
//! `(ln P(L(n) < k), ln P(L(n) >= k))`. Keeping both sides lets the far upper
//! tail (probabilities like `p^n`) and the deep lower tail (like `q^n`) keep
//! full relative precision, which the moment generating function and the
//! large-deviation ratios depend on.
//!
//! `P(L(n) < k)` is evaluated by one of three exact methods chosen per `k`:
//!
//! * the first-failure recursions for `P(L(n) < k)` and `P(L(n) >= k)`,
//!   which only add nonnegative terms, when `k` is at most about `2p/q`;
//! * the recurrence `a_m = a_{m-1} - q p^k a_{m-k-1}`, carried as per-step
//!   ratios, for larger `k`. It is only used where its true root dominates the
//!   spurious root `p`, which is what makes it stable;
//! * the inclusion–exclusion series for `P(L(n) >= k)` once `n q p^k` is small,
//!   where a handful of terms reach machine precision.

use serde::{Deserialize, Serialize};

use crate::config::Limits;
use crate::error::{Error, Result};
use crate::model::BernoulliModel;
use crate::numeric::{ln_one_minus_exp, log_sub_exp, CompensatedSum};

/// Above this value of `n q p^k` the inclusion–exclusion series is not used.
const SERIES_THRESHOLD: f64 = 0.05;

/// Rescale the recurrence state once the newest entry drops below this.
const RESCALE_BELOW: f64 = 1e-150;

/// `log_base(1/p) n`, the almost-sure growth scale of `L(n)`.
pub fn nominal_value(n: usize, model: &BernoulliModel) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("nominal value needs n >= 1"));
    }
    Ok((n as f64).ln() / model.lambda_p())
}

/// Length of the longest block of consecutive `true` values.
pub fn longest_run<I>(bits: I) -> usize
where
    I: IntoIterator<Item = bool>,
{
    let mut scanner = RunScanner::default();
    for b in bits {
        scanner.push(b);
    }
    scanner.longest()
}

/// Streaming longest-run scanner.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunScanner {
    current: usize,
    longest: usize,
}

impl RunScanner {
    #[inline]
    pub fn push(&mut self, success: bool) {
        if success {
            self.current += 1;
            if self.current > self.longest {
                self.longest = self.current;
            }
        } else {
            self.current = 0;
        }
    }

    #[inline]
    pub fn longest(&self) -> usize {
        self.longest
    }
}

/// `(ln P(L(n) < k), ln P(L(n) >= k))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LogSplit {
    pub below: f64,
    pub at_or_above: f64,
}

impl LogSplit {
    fn from_below(below: f64) -> Self {
        Self {
            below,
            at_or_above: ln_one_minus_exp(below.min(0.0)),
        }
    }

    fn from_above(at_or_above: f64) -> Self {
        Self {
            below: ln_one_minus_exp(at_or_above.min(0.0)),
            at_or_above,
        }
    }
}

fn small_k_limit(model: &BernoulliModel) -> usize {
    let bound = 2.0 * model.p() / model.q() + 2.0;
    if bound >= usize::MAX as f64 {
        usize::MAX
    } else {
        bound.ceil() as usize
    }
}

/// Exact split of the law of `L(n)` at `k`. No cap checks.
pub(crate) fn split_at(n: usize, k: usize, model: &BernoulliModel) -> LogSplit {
    if k == 0 {
        return LogSplit {
            below: f64::NEG_INFINITY,
            at_or_above: 0.0,
        };
    }
    if k > n {
        return LogSplit {
            below: 0.0,
            at_or_above: f64::NEG_INFINITY,
        };
    }
    let log_expansion = (n as f64).ln() + model.ln_q() + k as f64 * model.ln_p();
    if log_expansion <= SERIES_THRESHOLD.ln() {
        series_split(n, k, model)
    } else if k <= small_k_limit(model) {
        chain_split(n, k, model)
    } else {
        ratio_split(n, k, model)
    }
}

/// First-failure recursions, for `m >= k`,
///
/// ```text
/// P(L(m) <  k) = q Σ_{j<k} p^j P(L(m-j-1) <  k)
/// P(L(m) >= k) = p^k + q Σ_{j<k} p^j P(L(m-j-1) >= k)
/// ```
///
/// Both add nonnegative terms only, so neither has the spurious root of the
/// subtractive recurrence. The windowed sums are kept in a [`DecayWindow`],
/// which makes each step amortised O(1).
fn chain_split(n: usize, k: usize, model: &BernoulliModel) -> LogSplit {
    let (q, pk) = (model.q(), (k as f64 * model.ln_p()).exp());
    let mut below = DecayWindow::new(model.p(), k, 1.0);
    let mut above = DecayWindow::new(model.p(), k, 0.0);
    let mut log_scale = 0.0f64;
    for _ in k..=n {
        let a = q * below.sum();
        let b = pk + q * above.sum();
        below.shift(a);
        above.shift(b);
        if a < RESCALE_BELOW {
            below.scale(1.0 / a);
            log_scale += a.ln();
        }
    }
    LogSplit {
        below: below.newest().ln() + log_scale,
        at_or_above: above.newest().ln(),
    }
}

/// Sliding window `x_{m-k}, …, x_{m-1}` exposing `Σ_j p^j x_{m-1-j}`,
/// maintained with two stacks so that no step subtracts.
struct DecayWindow {
    /// `powers[j] = p^j` for `j = 0..=k`.
    powers: Vec<f64>,
    /// Oldest elements, oldest last; each entry carries the decayed sum of
    /// itself and every newer entry in this stack.
    front: Vec<(f64, f64)>,
    /// Newest elements, newest last.
    back: Vec<f64>,
    back_sum: f64,
    newest: f64,
}

impl DecayWindow {
    fn new(p: f64, k: usize, fill: f64) -> Self {
        let mut powers = Vec::with_capacity(k + 1);
        let mut pj = 1.0;
        for _ in 0..=k {
            powers.push(pj);
            pj *= p;
        }
        let mut w = Self {
            powers,
            front: Vec::with_capacity(k),
            back: Vec::with_capacity(k),
            back_sum: 0.0,
            newest: fill,
        };
        for _ in 0..k {
            w.push(fill);
        }
        w
    }

    fn push(&mut self, x: f64) {
        self.back.push(x);
        self.back_sum = self.back_sum * self.powers[1] + x;
        self.newest = x;
    }

    fn pop_oldest(&mut self) {
        if self.front.is_empty() {
            // move `back` over, oldest ending on top
            let mut acc = 0.0;
            for (age, &x) in self.back.iter().rev().enumerate() {
                acc += self.powers[age] * x;
                self.front.push((x, acc));
            }
            self.back.clear();
            self.back_sum = 0.0;
        }
        self.front.pop();
    }

    /// Append the newest value and drop the oldest.
    fn shift(&mut self, x: f64) {
        self.pop_oldest();
        self.push(x);
    }

    fn sum(&self) -> f64 {
        let front = self.front.last().map_or(0.0, |&(_, s)| s);
        front * self.powers[self.back.len()] + self.back_sum
    }

    fn newest(&self) -> f64 {
        self.newest
    }

    fn scale(&mut self, c: f64) {
        for (x, s) in self.front.iter_mut() {
            *x *= c;
            *s *= c;
        }
        for x in self.back.iter_mut() {
            *x *= c;
        }
        self.back_sum *= c;
        self.newest *= c;
    }
}

/// `a_m = a_{m-1} - q p^k a_{m-k-1}` with `a_m = 1` for `m < k` and
/// `a_k = 1 - p^k`, accumulated as `ln a_n = Σ ln(a_m / a_{m-1})`.
fn ratio_split(n: usize, k: usize, model: &BernoulliModel) -> LogSplit {
    let pk = (k as f64 * model.ln_p()).exp();
    let qpk = model.q() * pk;
    // ring[i % (k + 1)] holds a scaled copy of a_i
    let width = k + 1;
    let mut ring = vec![1.0f64; width];
    ring[k % width] = 1.0 - pk;
    let mut log_a = CompensatedSum::new();
    log_a.add((-pk).ln_1p());

    for m in (k + 1)..=n {
        let prev = ring[(m - 1) % width];
        let lagged = ring[(m - k - 1) % width];
        let deficit = qpk * lagged / prev;
        log_a.add((-deficit).ln_1p());
        let next = prev * (1.0 - deficit);
        ring[m % width] = next;
        if next < RESCALE_BELOW {
            let inv = 1.0 / next;
            for v in ring.iter_mut() {
                *v *= inv;
            }
        }
    }
    LogSplit::from_below(log_a.value())
}

/// `P(L(n) >= k) = Σ_j (-1)^{j+1} (p + (n - jk + 1) q / j) C(n - jk, j - 1) p^{jk} q^{j-1}`.
fn series_split(n: usize, k: usize, model: &BernoulliModel) -> LogSplit {
    let (p, q) = (model.p(), model.q());
    let (ln_p, ln_q) = (model.ln_p(), model.ln_q());
    let log_term = |j: usize| -> f64 {
        let free = n - j * k;
        let lead = (p + (free + 1) as f64 * q / j as f64).ln();
        let mut ln_binom = 0.0;
        for i in 0..(j - 1) {
            ln_binom += ((free - i) as f64).ln() - ((i + 1) as f64).ln();
        }
        lead + ln_binom + (j * k) as f64 * ln_p + (j - 1) as f64 * ln_q
    };

    let first = log_term(1);
    let mut correction = CompensatedSum::new();
    let mut j = 2;
    while j * k <= n && n - j * k + 1 >= j {
        let rel = (log_term(j) - first).exp();
        if j % 2 == 0 {
            correction.add(-rel);
        } else {
            correction.add(rel);
        }
        if rel < 1e-20 {
            break;
        }
        j += 1;
    }
    LogSplit::from_above(first + correction.value().ln_1p())
}

fn check_single(n: usize, k: usize, limits: &Limits) -> Result<()> {
    if n == 0 || k == 0 {
        return Err(Error::invalid(format!(
            "need n >= 1 and k >= 1, got n = {n}, k = {k}"
        )));
    }
    if n > limits.single_k_cap {
        return Err(Error::Resource {
            what: "n",
            requested: n,
            cap: limits.single_k_cap,
        });
    }
    Ok(())
}

/// `ln P(L(n) < k)`, exact up to rounding.
pub fn log_prob_no_run(n: usize, k: usize, model: &BernoulliModel) -> Result<f64> {
    check_single(n, k, &Limits::default())?;
    Ok(split_at(n, k, model).below)
}

/// `ln P(L(n) >= k)`, with full relative precision in the far tail.
pub fn log_prob_run_at_least(n: usize, k: usize, model: &BernoulliModel) -> Result<f64> {
    check_single(n, k, &Limits::default())?;
    Ok(split_at(n, k, model).at_or_above)
}

/// `(ln P(L(n) < k), ln P(L(n) >= k))` under explicit [`Limits`].
pub fn log_split_with_limits(
    n: usize,
    k: usize,
    model: &BernoulliModel,
    limits: &Limits,
) -> Result<(f64, f64)> {
    check_single(n, k, limits)?;
    let s = split_at(n, k, model);
    Ok((s.below, s.at_or_above))
}

/// Product-form bounds on `ln P(L(n) < k)`:
/// `(n-k+1) ln(1 - p^k) <= ln P(L(n) < k) <= (n-k+1) ln(1 - q p^k)`,
/// and the matching bounds on `ln P(L(n) >= k)`, evaluated without
/// underflow when `p^k` is tiny.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBounds {
    pub log_lower: f64,
    pub log_upper: f64,
    pub log_tail_lower: f64,
    pub log_tail_upper: f64,
}

impl TailBounds {
    /// The bounds on `ln P(L(n) >= k)`, as `(lower, upper)`.
    pub fn complement(&self) -> (f64, f64) {
        (self.log_tail_lower, self.log_tail_upper)
    }
}

/// `ln(1 - (1 - x)^m)` for `x = e^{log_x}` in `(0, 1]`.
fn log_one_minus_power(m: f64, log_x: f64) -> f64 {
    let x = log_x.exp();
    let u = m * (-x).ln_1p();
    if u < -1e-3 {
        return ln_one_minus_exp(u);
    }
    // -u = m (x + x²/2 + ...) is small: work with ln(-u) directly
    let ln_neg_ln = if x > 1e-200 {
        (-(-x).ln_1p()).ln()
    } else {
        log_x
    };
    let ln_neg_u = m.ln() + ln_neg_ln;
    let ratio = if u == 0.0 { 1.0 } else { u.exp_m1() / u };
    ln_neg_u + ratio.ln()
}

pub fn tail_bounds(n: usize, k: usize, model: &BernoulliModel) -> Result<TailBounds> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "tail bounds need 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    let factors = (n - k + 1) as f64;
    let log_pk = k as f64 * model.ln_p();
    let pk = log_pk.exp();
    Ok(TailBounds {
        log_lower: factors * (-pk).ln_1p(),
        log_upper: factors * (-model.q() * pk).ln_1p(),
        log_tail_lower: log_one_minus_power(factors, model.ln_q() + log_pk),
        log_tail_upper: log_one_minus_power(factors, log_pk),
    })
}

/// The full law of `L(n)` for one `(n, p)`, in log domain. Immutable.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLengthDistribution {
    n: usize,
    model: BernoulliModel,
    log_cdf: Vec<f64>,
    log_tail: Vec<f64>,
    log_pmf: Vec<f64>,
}

/// Materialise the law of `L(n)` under the default [`Limits`].
pub fn distribution(n: usize, model: &BernoulliModel) -> Result<RunLengthDistribution> {
    distribution_with_limits(n, model, &Limits::default())
}

pub fn distribution_with_limits(
    n: usize,
    model: &BernoulliModel,
    limits: &Limits,
) -> Result<RunLengthDistribution> {
    if n == 0 {
        return Err(Error::invalid("distribution needs n >= 1"));
    }
    if n > limits.distribution_cap {
        return Err(Error::Resource {
            what: "n",
            requested: n,
            cap: limits.distribution_cap,
        });
    }
    let mut log_cdf = Vec::with_capacity(n + 2);
    let mut log_tail = Vec::with_capacity(n + 2);
    for k in 0..=n + 1 {
        let s = split_at(n, k, model);
        log_cdf.push(s.below);
        log_tail.push(s.at_or_above);
    }
    Ok(RunLengthDistribution::from_splits(
        n, *model, log_cdf, log_tail,
    ))
}

impl RunLengthDistribution {
    pub(crate) fn from_splits(
        n: usize,
        model: BernoulliModel,
        mut log_cdf: Vec<f64>,
        log_tail: Vec<f64>,
    ) -> Self {
        // independent evaluations per k can disagree in the last bit
        for k in 1..log_cdf.len() {
            if log_cdf[k] < log_cdf[k - 1] {
                log_cdf[k] = log_cdf[k - 1];
            }
        }
        let half = 0.5f64.ln();
        let log_pmf = (0..=n)
            .map(|k| {
                if log_cdf[k + 1] <= half {
                    log_sub_exp(log_cdf[k + 1], log_cdf[k].min(log_cdf[k + 1]))
                } else {
                    log_sub_exp(log_tail[k], log_tail[k + 1].min(log_tail[k]))
                }
            })
            .collect();
        Self {
            n,
            model,
            log_cdf,
            log_tail,
            log_pmf,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn model(&self) -> &BernoulliModel {
        &self.model
    }

    /// Entry `k` is `ln P(L(n) < k)` for `k = 0..=n+1`.
    pub fn log_cdf(&self) -> &[f64] {
        &self.log_cdf
    }

    /// Entry `k` is `ln P(L(n) >= k)` for `k = 0..=n+1`.
    pub fn log_tail(&self) -> &[f64] {
        &self.log_tail
    }

    /// Entry `k` is `ln P(L(n) = k)` for `k = 0..=n`.
    pub fn log_pmf(&self) -> &[f64] {
        &self.log_pmf
    }

    pub fn pmf(&self, k: usize) -> f64 {
        self.log_pmf.get(k).map_or(0.0, |v| v.exp())
    }

    /// `P(L(n) < k)`.
    pub fn cdf_below(&self, k: usize) -> f64 {
        self.log_cdf.get(k).map_or(1.0, |v| v.exp())
    }

    /// `ln P(L(n) >= k)`; `-∞` beyond `n`.
    pub fn log_at_least(&self, k: usize) -> f64 {
        self.log_tail.get(k).copied().unwrap_or(f64::NEG_INFINITY)
    }

    /// `ln P(lo <= L(n) <= hi)`; `-∞` for an empty range.
    pub fn log_range(&self, lo: usize, hi: usize) -> f64 {
        if lo > hi || lo > self.n {
            return f64::NEG_INFINITY;
        }
        let hi = hi.min(self.n);
        let upper = self.log_at_least(lo);
        let beyond = self.log_at_least(hi + 1);
        if upper > 0.5f64.ln() {
            // measure through the lower side to avoid cancelling two near-1 values
            log_sub_exp(
                self.log_cdf[hi + 1],
                self.log_cdf[lo].min(self.log_cdf[hi + 1]),
            )
        } else {
            log_sub_exp(upper, beyond.min(upper))
        }
    }
}

/// `E L(n)^order`, accumulated with compensated summation.
pub fn moment(dist: &RunLengthDistribution, order: u32) -> Result<f64> {
    if order == 0 {
        return Err(Error::invalid("moment order must be >= 1"));
    }
    let acc: CompensatedSum = dist
        .log_pmf
        .iter()
        .enumerate()
        .map(|(k, lp)| (k as f64).powi(order as i32) * lp.exp())
        .collect();
    Ok(acc.value())
}

/// Asymptotic mean `log_{1/p} n + log_{1/p}(1-p) + γ/ln(1/p) - 1/2`, with the
/// vanishing fluctuation term dropped.
pub fn mean_asymptotic(n: usize, model: &BernoulliModel) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("asymptotic mean needs n >= 2"));
    }
    let lp = model.lambda_p();
    Ok(((n as f64).ln() + model.ln_q() + crate::config::EULER_GAMMA) / lp - 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(p: f64) -> BernoulliModel {
        BernoulliModel::new(p).unwrap()
    }

    /// Weighted enumeration of all 2^n outcomes.
    fn enumerate_pmf(n: usize, p: f64) -> Vec<f64> {
        let mut pmf = vec![0.0; n + 1];
        for mask in 0u32..(1 << n) {
            let bits = (0..n).map(|i| mask >> i & 1 == 1);
            let ones = mask.count_ones() as i32;
            let w = p.powi(ones) * (1.0 - p).powi(n as i32 - ones);
            pmf[longest_run(bits)] += w;
        }
        pmf
    }

    #[test]
    fn nominal_value_examples() {
        assert!((nominal_value(1024, &model(0.5)).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(nominal_value(1, &model(0.3)).unwrap(), 0.0);
        // ln 200 / ln(1/0.95), evaluated with mpmath at 30 digits
        let v = nominal_value(200, &model(0.95)).unwrap();
        assert!((v - 103.294_542_294_674_65).abs() < 1e-10, "{v}");
        assert!(nominal_value(0, &model(0.5)).is_err());
    }

    #[test]
    fn scanner_examples() {
        assert_eq!(longest_run(std::iter::empty()), 0);
        let bits = [1, 1, 0, 1, 1, 1, 0].map(|b| b == 1);
        assert_eq!(longest_run(bits), 3);
        assert_eq!(longest_run(std::iter::repeat_n(true, 17)), 17);
        assert_eq!(longest_run(std::iter::repeat_n(false, 17)), 0);
    }

    #[test]
    fn log_prob_no_run_examples() {
        for p in [0.1, 0.5, 0.95] {
            for n in [1, 7, 300] {
                let v = log_prob_no_run(n, 1, &model(p)).unwrap();
                let expected = n as f64 * (1.0 - p).ln();
                assert!((v - expected).abs() < 1e-12 * expected.abs().max(1.0));
            }
        }
        let v = log_prob_no_run(3, 2, &model(0.5)).unwrap();
        assert!((v - (5.0f64 / 8.0).ln()).abs() < 1e-15);
        assert_eq!(log_prob_no_run(3, 4, &model(0.5)).unwrap(), 0.0);
        assert!(log_prob_no_run(0, 1, &model(0.5)).is_err());
        assert!(log_prob_no_run(3, 0, &model(0.5)).is_err());
    }

    #[test]
    fn distribution_examples() {
        let d = distribution(3, &model(0.5)).unwrap();
        for (k, want) in [0.125, 0.5, 0.25, 0.125].iter().enumerate() {
            assert!((d.pmf(k) - want).abs() < 1e-15, "k = {k}");
        }
        let d = distribution(1, &model(0.3)).unwrap();
        assert!((d.pmf(0) - 0.7).abs() < 1e-15);
        assert!((d.pmf(1) - 0.3).abs() < 1e-15);
        assert_eq!(d.log_cdf()[0], f64::NEG_INFINITY);
        assert_eq!(d.log_cdf()[2], 0.0);
    }

    #[test]
    fn distribution_matches_enumeration_at_n16() {
        let want = enumerate_pmf(16, 0.8);
        let d = distribution(16, &model(0.8)).unwrap();
        for (k, w) in want.iter().enumerate() {
            assert!((d.pmf(k) - w).abs() < 1e-13, "k = {k}");
        }
    }

    #[test]
    fn regimes_agree_at_their_boundaries() {
        // the same (n, k) evaluated by every method that can handle it
        for &(n, k, p) in &[
            (200, 12, 0.5),
            (60, 30, 0.9),
            (500, 40, 0.95),
            (1000, 9, 0.3),
        ] {
            let m = model(p);
            let a = chain_split(n, k, &m);
            let b = series_split(n, k, &m);
            let c = ratio_split(n, k, &m);
            let scale = a.below.abs().max(1e-300);
            assert!(
                (a.below - c.below).abs() <= 1e-12 * scale.max(1.0),
                "{n} {k} {p}"
            );
            // the series is only accurate when n q p^k is small
            if (n as f64) * m.q() * p.powi(k as i32) < 0.2 {
                let rel = ((a.at_or_above - b.at_or_above) / a.at_or_above).abs();
                assert!(rel < 1e-12, "{n} {k} {p}: {a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn far_tail_keeps_relative_precision() {
        // P(L(n) >= n) = p^n exactly, far below the f64 resolution of 1 - P(L < n)
        let m = model(0.5);
        let n = 2000;
        let v = log_prob_run_at_least(n, n, &m).unwrap();
        assert!((v - n as f64 * 0.5f64.ln()).abs() < 1e-9);
        // disjointness for 2k + 1 > n: P(L >= k) = p^k (1 + (n - k) q)
        let k = 1200;
        let v = log_prob_run_at_least(n, k, &m).unwrap();
        let want = k as f64 * 0.5f64.ln() + (1.0 + (n - k) as f64 * 0.5).ln();
        assert!((v - want).abs() < 1e-9);
    }

    #[test]
    fn deep_lower_tail_does_not_underflow() {
        let m = model(0.95);
        let v = log_prob_no_run(1_000_000, 3, &m).unwrap();
        assert!(v.is_finite() && v < -1e5);
        let b = tail_bounds(1_000_000, 3, &m).unwrap();
        assert!(b.log_lower <= v && v <= b.log_upper);
    }

    #[test]
    fn tail_bounds_examples() {
        let b = tail_bounds(3, 2, &model(0.5)).unwrap();
        assert!((b.log_lower - 0.5625f64.ln()).abs() < 1e-15);
        assert!((b.log_upper - 0.765625f64.ln()).abs() < 1e-15);
        let m = model(0.3);
        let b = tail_bounds(9, 1, &m).unwrap();
        assert!((b.log_lower - log_prob_no_run(9, 1, &m).unwrap()).abs() < 1e-14);
        let b = tail_bounds(6, 6, &m).unwrap();
        assert!((b.log_lower - (1.0 - 0.3f64.powi(6)).ln()).abs() < 1e-15);
        assert!((b.log_upper - (1.0 - 0.7 * 0.3f64.powi(6)).ln()).abs() < 1e-15);
        assert!(tail_bounds(3, 4, &m).is_err());
        assert!(tail_bounds(3, 0, &m).is_err());
    }

    #[test]
    fn moment_examples() {
        let m = model(0.37);
        let d = distribution(1, &m).unwrap();
        assert!((moment(&d, 1).unwrap() - 0.37).abs() < 1e-15);
        let d = distribution(3, &model(0.5)).unwrap();
        assert!((moment(&d, 1).unwrap() - 11.0 / 8.0).abs() < 1e-15);
        assert!((moment(&d, 2).unwrap() - (4.0 + 8.0 + 9.0) / 8.0).abs() < 1e-14);
        assert!(moment(&d, 0).is_err());
    }

    #[test]
    fn mean_asymptotic_examples() {
        let g = crate::config::EULER_GAMMA;
        let ln2 = std::f64::consts::LN_2;
        let v = mean_asymptotic(1024, &model(0.5)).unwrap();
        assert!((v - (10.0 - 1.0 + g / ln2 - 0.5)).abs() < 1e-12);
        let v = mean_asymptotic(2, &model(0.5)).unwrap();
        assert!((v - (g / ln2 - 0.5)).abs() < 1e-12);
        assert!(mean_asymptotic(1, &model(0.5)).is_err());
    }

    #[test]
    fn caps_are_enforced() {
        let m = model(0.5);
        let tight = Limits {
            distribution_cap: 10,
            ..Limits::default()
        };
        assert!(matches!(
            distribution_with_limits(11, &m, &tight),
            Err(Error::Resource { .. })
        ));
        assert!(matches!(
            log_prob_no_run(1_000_001, 5, &m),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn log_range_consistency() {
        let d = distribution(40, &model(0.6)).unwrap();
        let direct: f64 = (3..=9).map(|k| d.pmf(k)).sum();
        assert!((d.log_range(3, 9).exp() - direct).abs() < 1e-14);
        assert_eq!(d.log_range(9, 3), f64::NEG_INFINITY);
        assert!(d.log_range(0, usize::MAX).abs() < 1e-14);
    }

    #[test]
    fn decay_window_matches_direct_sum() {
        let (p, k) = (0.7, 5);
        let mut w = DecayWindow::new(p, k, 1.0);
        let mut hist = vec![1.0f64; k];
        for i in 0..40 {
            let x = ((i * 37 % 11) as f64 + 0.5) / 7.0;
            w.shift(x);
            hist.push(x);
            let direct: f64 = (0..k)
                .map(|j| p.powi(j as i32) * hist[hist.len() - 1 - j])
                .sum();
            assert!((w.sum() - direct).abs() < 1e-14 * direct, "step {i}");
        }
        w.scale(4.0);
        let direct: f64 = (0..k)
            .map(|j| p.powi(j as i32) * hist[hist.len() - 1 - j])
            .sum();
        assert!((w.sum() - 4.0 * direct).abs() < 1e-13 * direct);
    }

    #[test]
    fn tail_side_bounds_survive_underflow() {
        // p^k is far below the smallest double
        let m = model(0.3);
        let (n, k) = (3000, 1500);
        let (lo, hi) = tail_bounds(n, k, &m).unwrap().complement();
        let factors = ((n - k + 1) as f64).ln();
        let ln_pk = k as f64 * m.ln_p();
        assert!((lo - (factors + m.ln_q() + ln_pk)).abs() < 1e-12);
        assert!((hi - (factors + ln_pk)).abs() < 1e-12);
        let exact = log_prob_run_at_least(n, k, &m).unwrap();
        assert!(lo <= exact && exact <= hi);
        // moderate case against the direct formula
        let b = tail_bounds(50, 4, &model(0.5)).unwrap();
        let (lo, hi) = b.complement();
        assert!((lo - (-b.log_upper.exp_m1()).ln()).abs() < 1e-14);
        assert!((hi - (-b.log_lower.exp_m1()).ln()).abs() < 1e-14);
    }
}
