//! Log-domain arithmetic, compensated summation, an extended-real type and a
//! small bracketed maximiser.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// A real number or one of the two infinities.
///
/// Rate functions and cumulants are `+∞` off their effective domains and
/// log-probabilities of empty events are `-∞`; this keeps those cases out of
/// the ordinary `f64` range instead of encoding them as sentinels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInfinity,
    Finite(f64),
    PosInfinity,
}

impl ExtReal {
    /// Maps `±inf` floats to the matching infinity. Panics on NaN.
    pub fn from_f64(x: f64) -> Self {
        assert!(!x.is_nan(), "NaN has no extended-real value");
        if x == f64::INFINITY {
            ExtReal::PosInfinity
        } else if x == f64::NEG_INFINITY {
            ExtReal::NegInfinity
        } else {
            ExtReal::Finite(x)
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInfinity => f64::NEG_INFINITY,
            ExtReal::Finite(x) => x,
            ExtReal::PosInfinity => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::from_f64(x)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInfinity => f.write_str("-inf"),
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInfinity => f.write_str("+inf"),
        }
    }
}

// JSON has no infinities: finite values serialise as numbers, the two
// infinities as the strings "+inf" and "-inf".
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => s.serialize_f64(*x),
            ExtReal::PosInfinity => s.serialize_str("+inf"),
            ExtReal::NegInfinity => s.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct ExtVisitor;

        impl Visitor<'_> for ExtVisitor {
            type Value = ExtReal;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a finite number or one of \"+inf\", \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
                Ok(ExtReal::Finite(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
                match v {
                    "+inf" | "inf" => Ok(ExtReal::PosInfinity),
                    "-inf" => Ok(ExtReal::NegInfinity),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }

        d.deserialize_any(ExtVisitor)
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// `ln Σ exp(x_i)` with a max shift and compensated accumulation.
///
/// Returns `-∞` for an empty input or when every term is `-∞`.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let acc: CompensatedSum = terms.iter().map(|&t| (t - max).exp()).collect();
    max + acc.value().ln()
}

/// `ln(e^a + e^b)`.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1 - e^x)` for `x ≤ 0`, accurate at both ends of the range.
#[inline]
pub fn ln_one_minus_exp(x: f64) -> f64 {
    debug_assert!(x <= 0.0, "ln(1 - e^x) needs x <= 0, got {x}");
    if x == 0.0 {
        f64::NEG_INFINITY
    } else if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `ln(e^a - e^b)` for `a ≥ b`; `-∞` when they are equal.
#[inline]
pub fn log_sub_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    debug_assert!(a >= b, "log_sub_exp needs a >= b, got {a} < {b}");
    if a <= b {
        return f64::NEG_INFINITY;
    }
    a + ln_one_minus_exp(b - a)
}

const INV_GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmax, max)`; both endpoints are also compared so a monotone
/// objective reports its boundary value exactly.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, x_tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_GOLDEN * (b - a);
    let mut d = a + INV_GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= x_tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_GOLDEN * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    [(lo, f(lo)), (hi, f(hi)), (mid, f(mid)), (c, fc), (d, fd)]
        .into_iter()
        .filter(|(_, v)| !v.is_nan())
        .fold((mid, f64::NEG_INFINITY), |best, cand| {
            if cand.1 > best.1 {
                cand
            } else {
                best
            }
        })
}

/// Maximise `f` on `[lo, hi]`: scan a uniform grid of `grid` intervals, then
/// refine by golden section on the two cells around the best grid point.
pub fn grid_golden_max<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    grid: usize,
    x_tol: f64,
) -> (f64, f64) {
    let grid = grid.max(2);
    let step = (hi - lo) / grid as f64;
    let mut best_i = 0;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..=grid {
        let x = if i == grid { hi } else { lo + step * i as f64 };
        let v = f(x);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let a = if best_i == 0 {
        lo
    } else {
        lo + step * (best_i - 1) as f64
    };
    let b = if best_i + 1 >= grid {
        hi
    } else {
        lo + step * (best_i + 1) as f64
    };
    golden_section_max(f, a, b, x_tol)
}
