//! Special functions for integer-shape Gamma/Erlang laws.
//!
//! Everything here assumes an integer shape parameter. That restriction is
//! what makes the incomplete gamma function a finite Erlang sum, and the
//! closed-form outage expressions are built on top of it.

use std::fmt;

use thiserror::Error;

/// Largest `n` for which `Γ(n) = (n-1)!` is finite in `f64`.
pub const MAX_GAMMA_ARG: u32 = 171;

/// Above this argument `e^{-x}` underflows, so the Erlang sum is accumulated
/// in the log domain.
const LOG_DOMAIN_THRESHOLD: f64 = 700.0;

/// Pre-clamp excursion outside `[0, 1]` tolerated as rounding noise.
const CLAMP_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecFunError {
    #[error("shape parameter must be a positive integer, got {0}")]
    InvalidShape(String),
    #[error("gamma({0}) overflows f64 (largest representable argument is {MAX_GAMMA_ARG})")]
    GammaOverflow(u32),
    #[error("gamma is undefined at non-positive integer {0}")]
    GammaPole(u32),
    #[error("binomial coefficient C({p}, {q}) requires q <= p")]
    BinomialDomain { p: u64, q: u64 },
    #[error("binomial coefficient C({p}, {q}) overflows u64")]
    BinomialOverflow { p: u64, q: u64 },
}

/// Nakagami / Gamma shape parameter, restricted to positive integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShapeParam(u32);

impl ShapeParam {
    pub fn new(m: u32) -> Result<Self, SpecFunError> {
        if m == 0 {
            return Err(SpecFunError::InvalidShape(m.to_string()));
        }
        Ok(Self(m))
    }

    /// Accepts a real-valued shape only if it is a positive integer.
    pub fn from_real(m: f64) -> Result<Self, SpecFunError> {
        if !m.is_finite() || m < 1.0 || m.fract() != 0.0 || m > u32::MAX as f64 {
            return Err(SpecFunError::InvalidShape(m.to_string()));
        }
        Ok(Self(m as u32))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

impl fmt::Display for ShapeParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `Γ(n) = (n-1)!` for positive integers, exact while the factorial fits in
/// the 53-bit mantissa and correctly rounded products beyond that.
pub fn gamma_fn(n: u32) -> Result<f64, SpecFunError> {
    if n == 0 {
        return Err(SpecFunError::GammaPole(n));
    }
    if n > MAX_GAMMA_ARG {
        return Err(SpecFunError::GammaOverflow(n));
    }
    Ok((1..n).fold(1.0_f64, |acc, k| acc * k as f64))
}

/// `ln Γ(n)` for positive integers. Direct log-sum for moderate `n`,
/// Stirling series with four correction terms above that.
pub fn ln_gamma_fn(n: u32) -> Result<f64, SpecFunError> {
    if n == 0 {
        return Err(SpecFunError::GammaPole(n));
    }
    if n <= MAX_GAMMA_ARG {
        return Ok(gamma_fn(n)?.ln());
    }
    Ok(ln_factorial(n as u64 - 1))
}

/// `ln k!` without overflow.
pub(crate) fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        return 0.0;
    }
    if k < MAX_GAMMA_ARG as u64 {
        return (2..=k).fold(1.0_f64, |acc, j| acc * j as f64).ln();
    }
    // ln Γ(z) with z = k + 1
    let z = (k + 1) as f64;
    let z2 = z * z;
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * z)
        - 1.0 / (360.0 * z * z2)
        + 1.0 / (1260.0 * z2 * z2 * z)
        - 1.0 / (1680.0 * z2 * z2 * z2 * z)
}

/// Rising factorial `(a)_n = a (a+1) ... (a+n-1) = Γ(a+n)/Γ(a)`.
pub fn rising_factorial(a: u32, n: u32) -> f64 {
    (0..n).fold(1.0_f64, |acc, k| acc * (a as f64 + k as f64))
}

/// Exact binomial coefficient.
pub fn binom(p: u64, q: u64) -> Result<u64, SpecFunError> {
    if q > p {
        return Err(SpecFunError::BinomialDomain { p, q });
    }
    let q = q.min(p - q);
    let mut acc: u128 = 1;
    for i in 0..q {
        // acc * (p - i) is divisible by (i + 1) at every step
        acc = acc * (p - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return Err(SpecFunError::BinomialOverflow { p, q });
        }
    }
    Ok(acc as u64)
}

/// Regularized lower incomplete gamma `γ(m, x)/Γ(m)` for integer `m`.
///
/// Uses the Erlang identity. Below `x = m` the complement form
/// `e^{-x} Σ_{p≥m} x^p/p!` is summed directly so that tiny probabilities keep
/// full relative precision; above it, `1 - e^{-x} Σ_{p<m} x^p/p!`.
pub fn lower_inc_gamma_reg(m: ShapeParam, x: f64) -> f64 {
    debug_assert!(x >= 0.0 || x.is_nan(), "negative argument {x}");
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    if x < m.as_f64() {
        clamp_probability(erlang_upper_series(m.get(), x))
    } else {
        clamp_probability(1.0 - erlang_head_sum(m.get(), x))
    }
}

/// `e^{-x} Σ_{p=0}^{m-1} x^p/p!`, the Erlang survival function. Satisfies
/// `erlang_tail_sum(m, x) + lower_inc_gamma_reg(m, x) = 1`.
pub fn erlang_tail_sum(m: ShapeParam, x: f64) -> f64 {
    debug_assert!(x >= 0.0 || x.is_nan(), "negative argument {x}");
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x < m.as_f64() {
        clamp_probability(1.0 - erlang_upper_series(m.get(), x))
    } else {
        clamp_probability(erlang_head_sum(m.get(), x))
    }
}

/// Poisson upper tail `Pr(N ≥ k)` for `N ~ Poisson(mean)`; equals
/// `lower_inc_gamma_reg(k, mean)` for `k ≥ 1` and 1 for `k = 0`.
pub(crate) fn poisson_upper_tail(k: u32, mean: f64) -> f64 {
    match ShapeParam::new(k) {
        Ok(shape) => lower_inc_gamma_reg(shape, mean),
        Err(_) => 1.0,
    }
}

/// `e^{-x} Σ_{p<m} x^p/p!` by forward accumulation, or streaming
/// log-sum-exp when `e^{-x}` would underflow.
fn erlang_head_sum(m: u32, x: f64) -> f64 {
    if x > LOG_DOMAIN_THRESHOLD {
        let ln_x = x.ln();
        let mut max = f64::NEG_INFINITY;
        let mut scaled = 0.0_f64;
        let mut ln_term = -x;
        for p in 0..m {
            if p > 0 {
                ln_term += ln_x - (p as f64).ln();
            }
            if ln_term > max {
                scaled = scaled * (max - ln_term).exp() + 1.0;
                max = ln_term;
            } else {
                scaled += (ln_term - max).exp();
            }
        }
        return (max + scaled.ln()).exp();
    }
    let mut term = 1.0_f64;
    let mut sum = NeumaierSum::default();
    for p in 0..m {
        if p > 0 {
            term *= x / p as f64;
        }
        sum.add(term);
    }
    sum.value() * (-x).exp()
}

/// `e^{-x} Σ_{p≥m} x^p/p!` for `x < m`, where the ratio of consecutive terms
/// stays below one.
fn erlang_upper_series(m: u32, x: f64) -> f64 {
    let ln_first = -x + m as f64 * x.ln() - ln_factorial(m as u64);
    let mut term = ln_first.exp();
    if term == 0.0 {
        return 0.0;
    }
    let mut sum = NeumaierSum::default();
    let mut p = m as f64;
    loop {
        sum.add(term);
        p += 1.0;
        term *= x / p;
        if term <= sum.value() * 1e-17 {
            break;
        }
    }
    sum.value()
}

/// Clamp a computed probability into `[0, 1]`.
#[inline]
pub fn clamp_probability(p: f64) -> f64 {
    debug_assert!(
        !(p < -CLAMP_SLACK || p > 1.0 + CLAMP_SLACK),
        "probability excursion {p} outside [0,1]"
    );
    p.clamp(0.0, 1.0)
}

/// Neumaier's variant of Kahan compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
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

impl std::iter::Sum<f64> for NeumaierSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn shape(m: u32) -> ShapeParam {
        ShapeParam::new(m).unwrap()
    }

    #[test]
    fn gamma_small_values() {
        assert_eq!(gamma_fn(1).unwrap(), 1.0);
        assert_eq!(gamma_fn(5).unwrap(), 24.0);
        assert_eq!(gamma_fn(20).unwrap(), 121_645_100_408_832_000.0);
    }

    #[test]
    fn gamma_range_errors() {
        assert!(gamma_fn(171).unwrap().is_finite());
        assert_eq!(gamma_fn(172), Err(SpecFunError::GammaOverflow(172)));
        assert_eq!(gamma_fn(0), Err(SpecFunError::GammaPole(0)));
    }

    #[test]
    fn ln_gamma_matches_across_branch() {
        // 171! straddles the direct/Stirling switch
        let direct: f64 = (1..171u32).map(|k| (k as f64).ln()).sum();
        assert_relative_eq!(ln_gamma_fn(171).unwrap(), direct, max_relative = 1e-13);
        let direct: f64 = (1..400u32).map(|k| (k as f64).ln()).sum();
        assert_relative_eq!(ln_gamma_fn(400).unwrap(), direct, max_relative = 1e-13);
    }

    #[test]
    fn shape_rejects_non_integers() {
        assert!(ShapeParam::from_real(2.5).is_err());
        assert!(ShapeParam::from_real(0.0).is_err());
        assert!(ShapeParam::from_real(f64::NAN).is_err());
        assert_eq!(ShapeParam::from_real(3.0).unwrap().get(), 3);
        assert!(ShapeParam::new(0).is_err());
    }

    #[test]
    fn lower_gamma_known_values() {
        assert_eq!(lower_inc_gamma_reg(shape(1), 0.0), 0.0);
        for &x in &[0.0, 1e-8, 0.3, 1.0, 5.0, 40.0] {
            assert_relative_eq!(
                lower_inc_gamma_reg(shape(1), x),
                -(-x as f64).exp_m1(),
                max_relative = 1e-14
            );
        }
        // frozen from 40-digit quadrature of ∫₀^2.5 t² e^{-t} dt / 2
        assert_relative_eq!(
            lower_inc_gamma_reg(shape(3), 2.5),
            0.456_186_884_116_670_5,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            lower_inc_gamma_reg(shape(4), 4.0),
            0.566_529_879_633_291_1,
            max_relative = 1e-14
        );
    }

    #[test]
    fn erlang_tail_known_values() {
        assert_eq!(erlang_tail_sum(shape(2), 0.0), 1.0);
        assert_relative_eq!(erlang_tail_sum(shape(1), 2f64.ln()), 0.5, max_relative = 1e-15);
        assert_relative_eq!(
            erlang_tail_sum(shape(4), 3.7),
            0.494_153_244_150_418_4,
            max_relative = 1e-14
        );
    }

    #[test]
    fn small_argument_keeps_relative_precision() {
        // mpmath: P(4, 1e-3) and P(4, 1e-4)
        assert_relative_eq!(
            lower_inc_gamma_reg(shape(4), 1e-3),
            4.163_334_721_825_484e-14,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            lower_inc_gamma_reg(shape(4), 1e-4),
            4.166_333_347_221_825e-18,
            max_relative = 1e-12
        );
    }

    #[test]
    fn log_domain_branch_is_continuous() {
        for m in [1u32, 3, 50, 400] {
            let below = erlang_tail_sum(shape(m), 699.999_999);
            let above = erlang_tail_sum(shape(m), 700.000_001);
            if below > 0.0 {
                assert_relative_eq!(below, above, max_relative = 1e-6);
            }
        }
        // e^{-800} 800^{399}/399! is far from underflow in the log domain
        let t = erlang_tail_sum(shape(400), 800.0);
        assert!(t > 0.0 && t < 1e-20, "{t}");
        assert_eq!(lower_inc_gamma_reg(shape(3), 1e6), 1.0);
    }

    #[test]
    fn binomial_values_and_errors() {
        assert_eq!(binom(0, 0).unwrap(), 1);
        assert_eq!(binom(5, 2).unwrap(), 10);
        assert_eq!(binom(12, 6).unwrap(), 924);
        assert_eq!(binom(66, 33).unwrap(), 7_219_428_434_016_265_740);
        assert_eq!(binom(2, 3), Err(SpecFunError::BinomialDomain { p: 2, q: 3 }));
        assert!(matches!(binom(200, 100), Err(SpecFunError::BinomialOverflow { .. })));
    }

    #[test]
    fn rising_factorial_is_gamma_ratio() {
        for a in 1..8u32 {
            for n in 0..8u32 {
                let ratio = gamma_fn(a + n).unwrap() / gamma_fn(a).unwrap();
                assert_relative_eq!(rising_factorial(a, n), ratio, max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn neumaier_recovers_lost_bits() {
        let s: NeumaierSum = [1.0, 1e100, 1.0, -1e100].into_iter().sum();
        assert_eq!(s.value(), 2.0);
    }

    proptest! {
        #[test]
        fn erlang_identity(m in 1u32..60, x in 0.0f64..200.0) {
            let s = lower_inc_gamma_reg(shape(m), x) + erlang_tail_sum(shape(m), x);
            prop_assert!((s - 1.0).abs() <= 1e-12, "m={m} x={x} sum={s}");
        }

        #[test]
        fn lower_gamma_monotone(m in 1u32..30, x in 0.0f64..80.0, dx in 0.0f64..5.0) {
            let a = lower_inc_gamma_reg(shape(m), x);
            let b = lower_inc_gamma_reg(shape(m), x + dx);
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(b >= a, "m={m} x={x} dx={dx}: {a} > {b}");
        }

        #[test]
        fn small_argument_asymptote(m in 1u32..12, exponent in 3.0f64..10.0) {
            let x = 10f64.powf(-exponent);
            let approx = x.powi(m as i32) / (m as f64 * gamma_fn(m).unwrap());
            let exact = lower_inc_gamma_reg(shape(m), x);
            prop_assert!((exact - approx).abs() <= 1e-2 * approx * m as f64,
                "m={m} x={x}: {exact} vs {approx}");
        }

        #[test]
        fn binomial_symmetry(p in 0u64..60, q_frac in 0.0f64..=1.0) {
            let q = ((p as f64) * q_frac).floor() as u64;
            prop_assert_eq!(binom(p, q).unwrap(), binom(p, p - q).unwrap());
        }
    }
}
