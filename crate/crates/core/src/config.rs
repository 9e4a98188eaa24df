//! Numeric constants and resource caps shared by every module.

use std::env;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Half-width of the band around `ln(1/p)` classified as the critical regime.
pub const REGIME_TOLERANCE: f64 = 1e-12;

/// Slack used when a real threshold such as `(1+x)·ℓ(n)` is rounded to an
/// integer run length. A value within this distance of an integer is treated
/// as that integer.
pub const INTEGER_SNAP: f64 = 1e-9;

/// Environment variable overriding [`Limits::distribution_cap`].
pub const DISTRIBUTION_CAP_ENV: &str = "LONGRUN_DISTRIBUTION_CAP";
/// Environment variable overriding [`Limits::single_k_cap`].
pub const SINGLE_K_CAP_ENV: &str = "LONGRUN_SINGLE_K_CAP";
/// Environment variable overriding [`Limits::recursion_cap`].
pub const RECURSION_CAP_ENV: &str = "LONGRUN_RECURSION_CAP";

/// Upper bounds on `n` for the exact engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest `n` for a single `P(L(n) < k)` query.
    pub single_k_cap: usize,
    /// Largest `n` for materialising the whole law of `L(n)`.
    pub distribution_cap: usize,
    /// Largest `n` for the recursion-based MGF evaluator (cubic cost).
    pub recursion_cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            single_k_cap: 1_000_000,
            distribution_cap: 100_000,
            recursion_cap: 2_000,
        }
    }
}

impl Limits {
    /// Defaults, with any cap overridden by its environment variable when that
    /// variable parses as a positive integer.
    pub fn from_env() -> Self {
        fn read(key: &str, fallback: usize) -> usize {
            env::var(key)
                .ok()
                .and_then(|v| v.trim().parse::<usize>().ok())
                .filter(|&v| v > 0)
                .unwrap_or(fallback)
        }
        let d = Self::default();
        Self {
            single_k_cap: read(SINGLE_K_CAP_ENV, d.single_k_cap),
            distribution_cap: read(DISTRIBUTION_CAP_ENV, d.distribution_cap),
            recursion_cap: read(RECURSION_CAP_ENV, d.recursion_cap),
        }
    }
}
