//! Closed-form outage probabilities, throughput, and their high-SNR limits.
//!
//! Every stage outage has the same shape: `Pr(X < T·(B·Y + A))` with
//! `X ~ Gamma(m_x)` normalised into `T`, and `Y ~ Gamma(m_y, rate c)`. For
//! integer `m_x` the Erlang expansion of `F_X` plus a binomial expansion of
//! `(B·Y + A)^p` turns the expectation over `Y` into the finite double sum
//!
//! ```text
//! 1 − Σ_{p<m_x} Σ_{q≤p} C(p,q) (TB)^q (TA)^{p−q} e^{−TA} c^{m_y} Γ(m_y+q)
//!                        / (Γ(m_y) p! (c + TB)^{m_y+q})
//! ```
//!
//! implemented by [`gamma_mixture_outage`].

mod asymptotic;

pub use asymptotic::{
    asymptotic_report, asymptotic_user1, asymptotic_user2, AsymCoefficientSet, AsymptoticUser2,
};

use serde::{Deserialize, Serialize};

use crate::specfun::{
    binom, clamp_probability, ln_factorial, poisson_upper_tail, rising_factorial, NeumaierSum,
};
use crate::system::{OperatingPoint, SystemConfig};

/// How a set of probabilities was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Asymptotic,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Asymptotic => "asymptotic",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "closed_form" => Ok(Method::ClosedForm),
            "asymptotic" => Ok(Method::Asymptotic),
            "monte_carlo" => Ok(Method::MonteCarlo),
            other => Err(format!("unknown method `{other}` (expected closed_form, asymptotic or monte_carlo)")),
        }
    }
}

/// A reported quantity: one decoding stage or one user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Stage21,
    Stage11,
    Stage22,
    User1,
    User2,
}

impl Target {
    pub const ALL: [Target; 5] = [Target::Stage21, Target::Stage11, Target::Stage22, Target::User1, Target::User2];

    pub fn as_str(self) -> &'static str {
        match self {
            Target::Stage21 => "stage_21",
            Target::Stage11 => "stage_11",
            Target::Stage22 => "stage_22",
            Target::User1 => "user1",
            Target::User2 => "user2",
        }
    }
}

impl std::str::FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Target::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown target `{s}`"))
    }
}

/// A stage outage together with the infeasible-split flag.
///
/// `infeasible` is set when the stage SINR is bounded strictly below its
/// threshold (the power split cannot support the stream rate), in which case
/// the probability is exactly 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageOutage {
    pub probability: f64,
    pub infeasible: bool,
}

impl StageOutage {
    fn feasible(p: f64) -> Self {
        Self { probability: p, infeasible: false }
    }

    fn certain_outage() -> Self {
        Self { probability: 1.0, infeasible: true }
    }
}

/// Coefficients of the three stage closed forms.
///
/// `t_21` and `t_22` are `None` when their threshold-gap denominator
/// (`α₂,₁ − γ₂,₁α₂,₂` resp. `α₂,₂ − γ₂,₂α₂,₁Ξ₂`) is not positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSet {
    pub t_21: Option<f64>,
    pub t_22: Option<f64>,
    pub a_21: f64,
    pub a_1: f64,
    pub a_22: f64,
    pub b_21: f64,
    pub b_11: f64,
    pub c_1: f64,
    pub d_1: f64,
    pub d_2: f64,
    pub g_1: f64,
}

impl CoefficientSet {
    pub fn new(point: &OperatingPoint) -> Self {
        let OperatingPoint { cfg, stats1: s1, stats2: s2, th } = point;
        let m1 = cfg.m1().as_f64();
        let m2 = cfg.m2().as_f64();
        let residual = cfg.residual_u2_fraction();

        let gap_21 = cfg.alpha_21 - th.th_21 * cfg.alpha_22;
        let gap_22 = cfg.alpha_22 - th.th_22 * cfg.alpha_21 * cfg.sic_residual_2;
        let t_21 = (gap_21 > 0.0).then(|| m2 * th.th_21 / (s2.est_var * s2.snr * gap_21));
        let t_22 = (gap_22 > 0.0).then(|| m2 * th.th_22 / (s2.est_var * s2.snr * gap_22));

        Self {
            t_21,
            t_22,
            a_21: s1.snr * s1.err_var + s2.snr * s2.err_var + 1.0,
            a_1: s1.snr * s1.err_var + s2.snr * s2.err_var * residual + 1.0,
            a_22: s1.snr * s1.err_var * cfg.sic_residual_1 + s2.snr * s2.err_var * residual + 1.0,
            b_21: s1.snr,
            b_11: s1.snr * cfg.sic_residual_1,
            c_1: m1 / s1.est_var,
            d_1: s2.snr * residual,
            d_2: m2 / s2.est_var,
            g_1: m1 * th.th_1 / (s1.est_var * s1.snr),
        }
    }
}

/// `Pr(X < T(B·Y + A))` in the normalisation where `F_X(z) = P(m_x, z)`
/// absorbs `m_x/Ω̂_x` into `T`, and `Y ~ Gamma(m_y, rate)` with
/// `rate = m_y/Ω̂_y`.
///
/// The literal double sum gives the success mass. When the outage is small
/// it is instead summed from positive terms: with `u = TB/(rate+TB)` the
/// inner sum is a Poisson(`TA`) ⊛ negative-binomial(`m_y`, `u`) law, so the
/// outage is `Σ_{j<m_x} NB(j)·Pr(Poisson ≥ m_x−j) + Pr(NB ≥ m_x)`.
pub fn gamma_mixture_outage(m_x: u32, m_y: u32, rate: f64, t: f64, a: f64, b: f64) -> f64 {
    debug_assert!(m_x >= 1 && m_y >= 1);
    debug_assert!(t >= 0.0 && a >= 0.0 && b >= 0.0 && rate >= 0.0);
    if t == 0.0 || (a == 0.0 && b == 0.0) {
        return 0.0;
    }
    if !t.is_finite() {
        return 1.0;
    }
    let ta = t * a;
    let tb = t * b;
    let (u, w) = if rate.is_infinite() { (0.0, 1.0) } else { (tb / (rate + tb), rate / (rate + tb)) };

    let success = literal_success_mass(m_x, m_y, ta, u, w);
    if success >= 0.5 {
        clamp_probability(positive_outage_mass(m_x, m_y, ta, u, w))
    } else {
        clamp_probability(1.0 - success)
    }
}

/// `Σ_{p<m_x} Σ_{q≤p} C(p,q) (TA)^{p−q} e^{−TA}/p! · (m_y)_q w^{m_y} u^q`.
fn literal_success_mass(m_x: u32, m_y: u32, ta: f64, u: f64, w: f64) -> f64 {
    let w_pow = w.powi(m_y as i32);
    let ln_ta = ta.ln();
    let mut sum = NeumaierSum::default();
    for p in 0..m_x {
        let ln_p_fact = ln_factorial(p as u64);
        for q in 0..=p {
            let k = p - q;
            // (TA)^k e^{-TA} / p!, with 0^0 = 1
            let poisson_part = if ta == 0.0 {
                if k == 0 { (-ln_p_fact).exp() } else { 0.0 }
            } else {
                (k as f64 * ln_ta - ta - ln_p_fact).exp()
            };
            if poisson_part == 0.0 {
                continue;
            }
            let c = binom_f64(p, q);
            sum.add(c * poisson_part * rising_factorial(m_y, q) * w_pow * u.powi(q as i32));
        }
    }
    sum.value()
}

fn positive_outage_mass(m_x: u32, m_y: u32, ta: f64, u: f64, w: f64) -> f64 {
    let mut sum = NeumaierSum::default();
    // NB(j) = (m_y)_j / j! · w^{m_y} u^j
    let mut nb = w.powi(m_y as i32);
    for j in 0..m_x {
        if j > 0 {
            nb *= u * (m_y + j - 1) as f64 / j as f64;
        }
        sum.add(nb * poisson_upper_tail(m_x - j, ta));
    }
    // Pr(NB(m_y, u) ≥ m_x) = Pr(Binomial(m_x + m_y − 1, u) ≥ m_x)
    let n = m_x + m_y - 1;
    for j in m_x..=n {
        sum.add(binom_f64(n, j) * u.powi(j as i32) * w.powi((n - j) as i32));
    }
    sum.value()
}

fn binom_f64(n: u32, k: u32) -> f64 {
    match binom(n as u64, k as u64) {
        Ok(v) => v as f64,
        Err(_) => (ln_factorial(n as u64) - ln_factorial(k as u64) - ln_factorial((n - k) as u64)).exp(),
    }
}

/// Outage of the first SIC stage (`s₂,₁`).
pub fn outage_stage_21(point: &OperatingPoint) -> StageOutage {
    let k = CoefficientSet::new(point);
    match k.t_21 {
        None => StageOutage::certain_outage(),
        Some(t) => StageOutage::feasible(gamma_mixture_outage(
            point.cfg.m2().get(),
            point.cfg.m1().get(),
            k.c_1,
            t,
            k.a_21,
            k.b_21,
        )),
    }
}

/// Outage of U₁'s stream (`s₁`) at the second SIC stage, unconditionally.
pub fn outage_stage_11(point: &OperatingPoint) -> StageOutage {
    let k = CoefficientSet::new(point);
    StageOutage::feasible(gamma_mixture_outage(
        point.cfg.m1().get(),
        point.cfg.m2().get(),
        k.d_2,
        k.g_1,
        k.a_1,
        k.d_1,
    ))
}

/// Outage of U₂'s second stream (`s₂,₂`) at the last SIC stage.
pub fn outage_stage_22(point: &OperatingPoint) -> StageOutage {
    let k = CoefficientSet::new(point);
    match k.t_22 {
        None => StageOutage::certain_outage(),
        Some(t) => StageOutage::feasible(gamma_mixture_outage(
            point.cfg.m2().get(),
            point.cfg.m1().get(),
            k.c_1,
            t,
            k.a_22,
            k.b_11,
        )),
    }
}

/// `P₁ = P₂,₁ + (1 − P₂,₁) P₁₁`.
#[inline]
pub fn compose_user1(p_21: f64, p_11: f64) -> f64 {
    p_21 + (1.0 - p_21) * p_11
}

/// `P₂ = P₁ + (1 − P₁) P₂,₂`, identical to
/// `P₂,₁ + (1−P₂,₁)P₁₁ + (1−P₂,₁)(1−P₁₁)P₂,₂`.
#[inline]
pub fn compose_user2(p_21: f64, p_11: f64, p_22: f64) -> f64 {
    let p1 = compose_user1(p_21, p_11);
    p1 + (1.0 - p1) * p_22
}

/// Per-stage and per-user outage from one evaluation method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageReport {
    pub p_stage_21: f64,
    pub p_stage_11: f64,
    pub p_stage_22: f64,
    pub p_user1: f64,
    pub p_user2: f64,
    pub method: Method,
    pub infeasible_21: bool,
    pub infeasible_22: bool,
}

impl OutageReport {
    /// Builds a report whose user outages follow the decoding-chain
    /// composition of the stage outages.
    pub fn compose(p_21: StageOutage, p_11: StageOutage, p_22: StageOutage, method: Method) -> Self {
        let (a, b, c) = (p_21.probability, p_11.probability, p_22.probability);
        Self {
            p_stage_21: a,
            p_stage_11: b,
            p_stage_22: c,
            p_user1: clamp_probability(compose_user1(a, b)),
            p_user2: clamp_probability(compose_user2(a, b, c)),
            method,
            infeasible_21: p_21.infeasible,
            infeasible_22: p_22.infeasible,
        }
    }

    pub fn infeasible(&self) -> bool {
        self.infeasible_21 || self.infeasible_22
    }

    pub fn get(&self, target: Target) -> f64 {
        match target {
            Target::Stage21 => self.p_stage_21,
            Target::Stage11 => self.p_stage_11,
            Target::Stage22 => self.p_stage_22,
            Target::User1 => self.p_user1,
            Target::User2 => self.p_user2,
        }
    }

    /// Whether an infeasible split forces this quantity to 1.
    pub fn target_infeasible(&self, target: Target) -> bool {
        match target {
            Target::Stage21 | Target::User1 => self.infeasible_21,
            Target::Stage11 => false,
            Target::Stage22 => self.infeasible_22,
            Target::User2 => self.infeasible(),
        }
    }
}

/// Closed-form report at one operating point.
pub fn closed_form_report(point: &OperatingPoint) -> OutageReport {
    OutageReport::compose(
        outage_stage_21(point),
        outage_stage_11(point),
        outage_stage_22(point),
        Method::ClosedForm,
    )
}

pub fn outage_user1(point: &OperatingPoint) -> f64 {
    compose_user1(outage_stage_21(point).probability, outage_stage_11(point).probability)
}

pub fn outage_user2(point: &OperatingPoint) -> f64 {
    compose_user2(
        outage_stage_21(point).probability,
        outage_stage_11(point).probability,
        outage_stage_22(point).probability,
    )
}

/// Per-user throughput in bit/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Throughput {
    pub user1: f64,
    pub user2: f64,
}

/// `T₁ = (1 − P₁) R₁`, `T₂ = (1 − P₂)(R₂,₁ + R₂,₂) = (1 − P₂) R₂`.
pub fn throughput(cfg: &SystemConfig, report: &OutageReport) -> Throughput {
    let r_21 = cfg.rate_split * cfg.rate_2;
    let r_22 = (1.0 - cfg.rate_split) * cfg.rate_2;
    Throughput { user1: (1.0 - report.p_user1) * cfg.rate_1, user2: (1.0 - report.p_user2) * (r_21 + r_22) }
}
