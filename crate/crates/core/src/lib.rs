//! Exact and asymptotic computations for the longest success run `L(n)` in
//! `n` independent Bernoulli(`p`) trials.
//!
//! The crate is organised bottom-up:
//!
//! * [`dist`]: the exact law of `L(n)` in log domain, its product-form
//!   sandwich bounds and its moments.
//! * [`mgf`]: the moment generating function of `L(n)`, evaluated two
//!   independent ways, and its three-regime logarithmic asymptotics.
//! * [`ldp`]: closed-form cumulants and rate functions of the two large
//!   deviation principles, a numeric Fenchel–Legendre transform, and exact
//!   finite-`n` large-deviation ratios.
//! * [`varadhan`]: limits of exponential functionals and the closed form for
//!   the power family.
//! * [`inference`]: interval estimates for `p` (longest-run, Wilson,
//!   Clopper–Pearson, normal approximation) and the reference tables.
//! * [`montecarlo`]: seeded, schedule-independent simulation.
//!
//! ```
//! use longrun::{distribution, BernoulliModel};
//!
//! let model = BernoulliModel::new(0.5).unwrap();
//! let dist = distribution(3, &model).unwrap();
//! assert!((dist.pmf(1) - 0.5).abs() < 1e-15);
//! ```

// Negated comparisons such as `!(x > 0.0)` are deliberate: they reject NaN
// together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dist;
pub mod error;
pub mod inference;
pub mod ldp;
pub mod mgf;
pub mod model;
pub mod montecarlo;
pub mod numeric;
mod output;
pub mod special;
pub mod varadhan;

pub use config::{Limits, EULER_GAMMA};
pub use dist::{
    distribution, distribution_with_limits, log_prob_no_run, log_split_with_limits, longest_run,
    mean_asymptotic, moment, nominal_value, tail_bounds, RunLengthDistribution, TailBounds,
};
pub use error::{Error, Result};
pub use inference::{ConfidenceInterval, IntervalMethod, RunObservation};
pub use ldp::{CumulantSpec, Family, RateFunctionSpec};
pub use mgf::{MgfRegime, RegimeTag};
pub use model::BernoulliModel;
pub use montecarlo::{CoverageReport, SimulationConfig};
pub use numeric::ExtReal;
pub use varadhan::FunctionalSpec;
