//! High-SNR limits with ρ₁ = ρ₂ → ∞.
//!
//! The `A` terms of the closed forms drop out and the ρ's cancel, leaving
//! SNR-independent floors. The one exception is U₂'s last stream when U₁ is
//! cancelled perfectly (Ξ₁ = 0): nothing residual remains, the outage keeps
//! decaying like `ρ₂^{−m₂}` and the returned value is the small-argument
//! approximation at the given `snr2` rather than a floor.

use crate::analytic::{gamma_mixture_outage, Method, OutageReport, StageOutage};
use crate::specfun::{ln_gamma_fn, ShapeParam};
use crate::system::{thresholds, OperatingPoint, SystemConfig, Thresholds};

/// Coefficients of the asymptotic forms. `None` marks an infeasible split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymCoefficientSet {
    pub tt_21: Option<f64>,
    pub gg_1: f64,
    /// Floor coefficient of the last stage; only meaningful for Ξ₁ > 0.
    pub tt_22: Option<f64>,
    /// SNR-dependent coefficient used when Ξ₁ = 0.
    pub tf_22: Option<f64>,
}

impl AsymCoefficientSet {
    pub fn new(cfg: &SystemConfig, th: &Thresholds, est_vars: (f64, f64), snr2: f64) -> Self {
        let (est1, est2) = est_vars;
        let m1 = cfg.m1().as_f64();
        let m2 = cfg.m2().as_f64();
        let gap_21 = cfg.alpha_21 - th.th_21 * cfg.alpha_22;
        let gap_22 = cfg.alpha_22 - th.th_22 * cfg.sic_residual_2 * cfg.alpha_21;
        Self {
            tt_21: (gap_21 > 0.0).then(|| m2 * th.th_21 / (est2 * gap_21)),
            gg_1: m1 * th.th_1 * cfg.residual_u2_fraction() / est1,
            tt_22: (gap_22 > 0.0).then(|| m2 * th.th_22 * cfg.sic_residual_1 / (est2 * gap_22)),
            tf_22: (gap_22 > 0.0).then(|| m2 * th.th_22 / (est2 * snr2 * gap_22)),
        }
    }
}

fn floor_stages(cfg: &SystemConfig, k: &AsymCoefficientSet, est_vars: (f64, f64)) -> (StageOutage, StageOutage) {
    let (m1, m2) = (cfg.m1().get(), cfg.m2().get());
    let c_1 = m1 as f64 / est_vars.0;
    let d_2 = m2 as f64 / est_vars.1;
    let p_21 = match k.tt_21 {
        None => StageOutage { probability: 1.0, infeasible: true },
        Some(t) => StageOutage { probability: gamma_mixture_outage(m2, m1, c_1, t, 0.0, 1.0), infeasible: false },
    };
    let p_11 = StageOutage { probability: gamma_mixture_outage(m1, m2, d_2, k.gg_1, 0.0, 1.0), infeasible: false };
    (p_21, p_11)
}

/// U₁'s outage floor `𝒫₂,₁ + (1 − 𝒫₂,₁) 𝒫₁₁`.
pub fn asymptotic_user1(cfg: &SystemConfig, est_vars: (f64, f64)) -> StageOutage {
    let th = thresholds(cfg);
    let k = AsymCoefficientSet::new(cfg, &th, est_vars, f64::INFINITY);
    let (p_21, p_11) = floor_stages(cfg, &k, est_vars);
    StageOutage {
        probability: super::compose_user1(p_21.probability, p_11.probability),
        infeasible: p_21.infeasible,
    }
}

/// Asymptotic U₂ outage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticUser2 {
    pub probability: f64,
    /// Last-stage term on its own.
    pub p_stage_22: f64,
    pub infeasible: bool,
    /// `true` when the value is an SNR-independent floor (Ξ₁ > 0).
    pub is_floor: bool,
}

fn stage_22_limit(cfg: &SystemConfig, k: &AsymCoefficientSet, est_vars: (f64, f64)) -> (f64, bool) {
    let m1 = cfg.m1().get();
    let m2 = cfg.m2();
    if cfg.sic_residual_1 > 0.0 {
        match k.tt_22 {
            None => (1.0, true),
            Some(t) => (gamma_mixture_outage(m2.get(), m1, m1 as f64 / est_vars.0, t, 0.0, 1.0), false),
        }
    } else {
        match k.tf_22 {
            None => (1.0, true),
            Some(t) => (small_argument_cdf(m2, t), false),
        }
    }
}

/// `z^m / (m Γ(m))`, the leading term of `γ(m, z)/Γ(m)` as `z → 0`.
fn small_argument_cdf(m: ShapeParam, z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let mf = m.as_f64();
    let ln_gamma = ln_gamma_fn(m.get()).expect("positive shape");
    (mf * z.ln() - mf.ln() - ln_gamma).exp().min(1.0)
}

pub fn asymptotic_user2(cfg: &SystemConfig, est_vars: (f64, f64), snr2: f64) -> AsymptoticUser2 {
    let th = thresholds(cfg);
    let k = AsymCoefficientSet::new(cfg, &th, est_vars, snr2);
    let (p_21, p_11) = floor_stages(cfg, &k, est_vars);
    let (p_22, infeasible_22) = stage_22_limit(cfg, &k, est_vars);
    AsymptoticUser2 {
        probability: super::compose_user2(p_21.probability, p_11.probability, p_22),
        p_stage_22: p_22,
        infeasible: p_21.infeasible || infeasible_22,
        is_floor: cfg.sic_residual_1 > 0.0,
    }
}

/// Asymptotic report at an operating point, using its estimated-channel
/// variances and U₂'s SNR.
pub fn asymptotic_report(point: &OperatingPoint) -> OutageReport {
    let cfg = &point.cfg;
    let est_vars = (point.stats1.est_var, point.stats2.est_var);
    let k = AsymCoefficientSet::new(cfg, &point.th, est_vars, point.stats2.snr);
    let (p_21, p_11) = floor_stages(cfg, &k, est_vars);
    let (p_22, infeasible_22) = stage_22_limit(cfg, &k, est_vars);
    OutageReport::compose(
        p_21,
        p_11,
        StageOutage { probability: p_22, infeasible: infeasible_22 },
        Method::Asymptotic,
    )
}
