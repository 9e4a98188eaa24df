use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A Bernoulli trial with success probability `p`.
///
/// Carries `q = 1 - p` and `lambda_p = ln(1/p)`, the constant that separates
/// the regimes of the moment generating function of `L(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct BernoulliModel {
    p: f64,
    q: f64,
    lambda_p: f64,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    p: f64,
}

impl TryFrom<RawModel> for BernoulliModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        BernoulliModel::new(raw.p)
    }
}

impl From<BernoulliModel> for RawModel {
    fn from(m: BernoulliModel) -> Self {
        RawModel { p: m.p }
    }
}

impl BernoulliModel {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid(format!(
                "success probability must lie in (0, 1), got {p}"
            )));
        }
        Ok(Self {
            p,
            q: 1.0 - p,
            lambda_p: -p.ln(),
        })
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    /// `ln(1/p)`.
    #[inline]
    pub fn lambda_p(&self) -> f64 {
        self.lambda_p
    }

    /// `ln p`, i.e. `-lambda_p`.
    #[inline]
    pub fn ln_p(&self) -> f64 {
        -self.lambda_p
    }

    /// `ln q`, computed without forming `1 - p` a second time.
    #[inline]
    pub fn ln_q(&self) -> f64 {
        (-self.p).ln_1p()
    }
}
