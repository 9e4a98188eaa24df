//! Special functions behind the binomial intervals: `erf`/`erfc`, the
//! standard normal law and its quantile, `ln Γ`, the regularised incomplete
//! beta function and its inverse.

// Coefficient tables and reference values keep all their printed digits.
#![allow(clippy::excessive_precision)]

use std::f64::consts::{FRAC_2_SQRT_PI, PI, SQRT_2};

use crate::error::{Error, Result};

const MAX_ITER: usize = 10_000;

/// Boundary between the power series and the continued fraction.
const ERF_SWITCH: f64 = 1.0;

pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.abs() < ERF_SWITCH {
        erf_series(x)
    } else {
        x.signum() * (1.0 - erfc_cf(x.abs()))
    }
}

pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < -ERF_SWITCH {
        2.0 - erfc_cf(-x)
    } else if x < ERF_SWITCH {
        1.0 - erf_series(x)
    } else {
        erfc_cf(x)
    }
}

/// `erf(x) = 2/√π e^{-x²} Σ 2^n x^{2n+1} / (1·3···(2n+1))`; all terms share
/// the sign of `x`, so there is no cancellation.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for n in 1..200 {
        term *= 2.0 * x2 / (2 * n + 1) as f64;
        sum += term;
        if term.abs() <= sum.abs() * 1e-17 {
            break;
        }
    }
    FRAC_2_SQRT_PI * (-x2).exp() * sum
}

/// Continued fraction `erfc(x) = e^{-x²}/√π · 1/(x + (1/2)/(x + 1/(x + ...)))`
/// for `x > 0`, by the modified Lentz method.
fn erfc_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..MAX_ITER {
        let a = n as f64 / 2.0;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (f * PI.sqrt())
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Inverse standard normal CDF: a rational initial guess refined by Halley
/// steps on `erfc`.
pub fn std_normal_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid(format!(
            "quantile level must lie in (0, 1), got {q}"
        )));
    }
    if q > 0.5 {
        return Ok(-lower_quantile(1.0 - q));
    }
    Ok(lower_quantile(q))
}

/// `q <= 0.5`, so `x <= 0` and `Φ(x) = erfc(-x/√2)/2` keeps relative accuracy.
fn lower_quantile(q: f64) -> f64 {
    if q == 0.5 {
        return 0.0;
    }
    let mut x = rational_guess(q);
    for _ in 0..4 {
        let e = normal_cdf(x) - q;
        let u = e / normal_pdf(x);
        let step = u / (1.0 + 0.5 * x * u);
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

fn rational_guess(q: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    if q < 0.02425 {
        let r = (-2.0 * q.ln()).sqrt();
        (((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5])
            / ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0)
    } else {
        let r = q - 0.5;
        let s = r * r;
        (((((A[0] * s + A[1]) * s + A[2]) * s + A[3]) * s + A[4]) * s + A[5]) * r
            / (((((B[0] * s + B[1]) * s + B[2]) * s + B[3]) * s + B[4]) * s + 1.0)
    }
}

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

fn check_shape(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::invalid(format!(
            "beta shapes must be positive, got a = {a}, b = {b}"
        )));
    }
    Ok(())
}

/// `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    check_shape(a, b)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("x must lie in [0, 1], got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        return Ok(1.0 - incomplete_beta_cf(b, a, 1.0 - x)?);
    }
    incomplete_beta_cf(a, b, x)
}

fn incomplete_beta_cf(a: f64, b: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let front = (a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b)).exp() / a;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            return Ok(front * h);
        }
    }
    Err(Error::NonConvergence {
        routine: "incomplete beta continued fraction",
        iterations: MAX_ITER,
    })
}

/// Solves `I_x(a, b) = q` by Newton steps kept inside a shrinking bracket.
pub fn beta_quantile(a: f64, b: f64, q: f64) -> Result<f64> {
    check_shape(a, b)?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid(format!(
            "quantile level must lie in (0, 1), got {q}"
        )));
    }
    let ln_b = ln_beta(a, b);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut x = a / (a + b);
    for _ in 0..MAX_ITER {
        let f = regularized_incomplete_beta(a, b, x)? - q;
        if f == 0.0 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let density = ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_b).exp();
        let newton = x - f / density;
        let next = if density > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-15 * x.max(1e-300) || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NonConvergence {
        routine: "beta quantile",
        iterations: MAX_ITER,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{Beta, ContinuousCDF, Normal};

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn erf_against_statrs() {
        // statrs itself is only good to about 1e-11 here; the tight check is
        // the high-precision table below
        for i in -600..=600 {
            let x = i as f64 / 100.0;
            assert!(
                (erf(x) - statrs::function::erf::erf(x)).abs() < 1e-10,
                "erf {x}"
            );
        }
    }

    #[test]
    fn erfc_against_high_precision() {
        // 30-digit reference values
        let table = [
            (-3.0, 1.9999779095030014146),
            (-1.0, 1.8427007929497148693),
            (-0.3, 1.3286267594591274162),
            (0.0, 1.0),
            (0.5, 4.7950012218695346232e-1),
            (1.0, 1.5729920705028513066e-1),
            (1.2, 8.9686021770364631634e-2),
            (1.6, 2.3651616655355984478e-2),
            (1.99, 4.8885868003830029527e-3),
            (2.0, 4.6777349810472658379e-3),
            (2.5, 4.0695201744495893956e-4),
            (2.71, 1.2683792662830024832e-4),
            (3.0, 2.2090496998585441373e-5),
            (4.0, 1.5417257900280018852e-8),
            (5.0, 1.5374597944280348502e-12),
            (6.0, 2.1519736712498913117e-17),
            (8.0, 1.122429717298292708e-29),
            (10.0, 2.088487583762544757e-45),
            (20.0, 5.3958656116079009289e-176),
        ];
        for (x, want) in table {
            assert!(
                close(erfc(x), want, 1e-14),
                "erfc {x}: {} vs {want}",
                erfc(x)
            );
        }
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
        let z = std_normal_quantile(0.975).unwrap();
        assert!((z - 1.959_963_984_540_054).abs() < 1e-12);
        assert!(std_normal_quantile(0.0).is_err());
        assert!(std_normal_quantile(1.0).is_err());
    }

    #[test]
    fn quantile_against_statrs() {
        let n = Normal::new(0.0, 1.0).unwrap();
        for &q in &[
            1e-12,
            1e-8,
            1e-4,
            0.01,
            0.02425,
            0.1,
            0.3,
            0.6,
            0.9,
            0.995,
            1.0 - 1e-9,
        ] {
            let z = std_normal_quantile(q).unwrap();
            assert!((z - n.inverse_cdf(q)).abs() < 1e-10, "{q}");
            assert!(close(normal_cdf(z), q, 1e-12), "{q}");
        }
        for i in 1..1000 {
            let q = i as f64 / 1024.0;
            assert_eq!(
                std_normal_quantile(q).unwrap(),
                -std_normal_quantile(1.0 - q).unwrap()
            );
        }
    }

    #[test]
    fn ln_gamma_against_statrs() {
        for &x in &[0.1, 0.5, 1.0, 1.5, 2.0, 7.3, 30.0, 201.0, 1001.0, 1e5] {
            let want = statrs::function::gamma::ln_gamma(x);
            assert!(
                (ln_gamma(x) - want).abs() < 1e-12 * want.abs().max(1.0),
                "{x}"
            );
        }
    }

    #[test]
    fn incomplete_beta_identities() {
        assert_eq!(regularized_incomplete_beta(2.0, 3.0, 0.0).unwrap(), 0.0);
        assert_eq!(regularized_incomplete_beta(2.0, 3.0, 1.0).unwrap(), 1.0);
        for &b in &[0.5, 1.0, 4.0, 50.0] {
            for &x in &[0.01f64, 0.3, 0.7, 0.99] {
                let want = 1.0 - (1.0 - x).powf(b);
                let got = regularized_incomplete_beta(1.0, b, x).unwrap();
                assert!(close(got, want, 1e-12), "{b} {x}");
            }
        }
        assert!(regularized_incomplete_beta(0.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn incomplete_beta_against_statrs() {
        for &(a, b) in &[
            (0.5, 0.5),
            (2.0, 5.0),
            (193.0, 8.0),
            (8.0, 193.0),
            (996.0, 5.0),
        ] {
            for i in 1..20 {
                let x = i as f64 / 20.0;
                let want = statrs::function::beta::beta_reg(a, b, x);
                let got = regularized_incomplete_beta(a, b, x).unwrap();
                assert!((got - want).abs() < 1e-12, "{a} {b} {x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn beta_quantile_round_trip() {
        for &(a, b) in &[
            (0.5, 0.5),
            (1.0, 1.0),
            (2.0, 5.0),
            (193.0, 8.0),
            (5.0, 996.0),
        ] {
            for &x in &[0.001, 0.05, 0.4, 0.9, 0.999] {
                let q = regularized_incomplete_beta(a, b, x).unwrap();
                if q <= 1e-300 || q >= 1.0 {
                    continue;
                }
                let back = beta_quantile(a, b, q).unwrap();
                let again = regularized_incomplete_beta(a, b, back).unwrap();
                assert!(close(again, q, 1e-10), "{a} {b} {x}");
            }
            let dist = Beta::new(a, b).unwrap();
            for &q in &[0.025, 0.5, 0.975] {
                let got = beta_quantile(a, b, q).unwrap();
                assert!((got - dist.inverse_cdf(q)).abs() < 1e-9, "{a} {b} {q}");
            }
        }
    }
}
