//! Two-user uplink RSMA system model: configuration, rate thresholds, the
//! three SIC-stage SINRs, the decoding chain and the NOMA baseline.
//!
//! U₂ splits its message into streams `s₂,₁` and `s₂,₂` with power fractions
//! α₂,₁ and α₂,₂; the receiver decodes `s₂,₁ → s₁ → s₂,₂` and stops at the
//! first failure. Channel estimation error enters every SINR through its
//! variance only.

use thiserror::Error;

use crate::channel::{
    derive_link_stats, dbm_to_watts, CsirQuality, LinkStatistics, PropagationEnv, UserRadio,
};
use crate::specfun::ShapeParam;

const ALPHA_SUM_TOL: f64 = 1e-12;

/// A configuration field that failed validation.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid `{field}`: {constraint} (got {value})")]
pub struct ConfigError {
    pub field: String,
    pub constraint: String,
    pub value: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, constraint: impl Into<String>, value: impl ToString) -> Self {
        Self { field: field.into(), constraint: constraint.into(), value: value.to_string() }
    }
}

/// Full parameter set of one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub user1: UserRadio,
    pub user2: UserRadio,
    pub env: PropagationEnv,
    /// α₂,₁: power fraction of U₂'s first stream.
    pub alpha_21: f64,
    /// α₂,₂: power fraction of U₂'s second stream.
    pub alpha_22: f64,
    /// Ξ₁: residual fraction of U₁'s cancelled signal.
    pub sic_residual_1: f64,
    /// Ξ₂: residual fraction of U₂'s cancelled first stream.
    pub sic_residual_2: f64,
    /// R₁ in bit/s/Hz.
    pub rate_1: f64,
    /// R₂ in bit/s/Hz.
    pub rate_2: f64,
    /// φ: share of R₂ carried by the first stream.
    pub rate_split: f64,
}

impl Default for SystemConfig {
    /// Simulation defaults: m₁=4, m₂=3, σ² = −100 dBm, R₁=0.7, R₂=0.95,
    /// φ=0.15, α=(0.27, 0.73), d₁=75 m, d₂=70 m, τ=3.8, ϕ=1 m; 10 dBm per
    /// user, perfect CSIR and perfect SIC.
    fn default() -> Self {
        let m1 = ShapeParam::new(4).expect("nonzero");
        let m2 = ShapeParam::new(3).expect("nonzero");
        Self {
            user1: UserRadio::from_dbm(10.0, 75.0, m1),
            user2: UserRadio::from_dbm(10.0, 70.0, m2),
            env: PropagationEnv {
                noise_power: dbm_to_watts(-100.0),
                pathloss_ref_m: 1.0,
                pathloss_exponent: 3.8,
                csir_quality: CsirQuality::Perfect,
            },
            alpha_21: 0.27,
            alpha_22: 0.73,
            sic_residual_1: 0.0,
            sic_residual_2: 0.0,
            rate_1: 0.7,
            rate_2: 0.95,
            rate_split: 0.15,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::new(field, "must be finite and > 0", v))
            }
        }
        fn unit_interval(field: &str, v: f64, closed_top: bool) -> Result<(), ConfigError> {
            let ok = v >= 0.0 && if closed_top { v <= 1.0 } else { v < 1.0 };
            if ok {
                Ok(())
            } else {
                let c = if closed_top { "must lie in [0, 1]" } else { "must lie in [0, 1)" };
                Err(ConfigError::new(field, c, v))
            }
        }

        positive("p1", self.user1.transmit_power)?;
        positive("p2", self.user2.transmit_power)?;
        positive("d1_m", self.user1.distance_m)?;
        positive("d2_m", self.user2.distance_m)?;
        positive("noise", self.env.noise_power)?;
        positive("pathloss_ref_m", self.env.pathloss_ref_m)?;
        positive("pathloss_exponent", self.env.pathloss_exponent)?;
        if let CsirQuality::Estimated(delta) = self.env.csir_quality {
            if !(delta.is_finite() && delta >= 0.0) {
                return Err(ConfigError::new("delta", "must be >= 0 or \"perfect\"", delta));
            }
        }
        unit_interval("alpha21", self.alpha_21, true)?;
        unit_interval("alpha22", self.alpha_22, true)?;
        if (self.alpha_21 + self.alpha_22 - 1.0).abs() > ALPHA_SUM_TOL {
            return Err(ConfigError::new(
                "alpha21+alpha22",
                "power fractions must sum to 1",
                self.alpha_21 + self.alpha_22,
            ));
        }
        unit_interval("xi1", self.sic_residual_1, false)?;
        unit_interval("xi2", self.sic_residual_2, false)?;
        positive("r1", self.rate_1)?;
        positive("r2", self.rate_2)?;
        unit_interval("phi", self.rate_split, true)?;
        Ok(())
    }

    /// Sets both transmit powers to the same level.
    pub fn with_tx_power_dbm(mut self, dbm: f64) -> Self {
        self.user1.transmit_power = dbm_to_watts(dbm);
        self.user2.transmit_power = dbm_to_watts(dbm);
        self
    }

    pub fn with_csir(mut self, csir: CsirQuality) -> Self {
        self.env.csir_quality = csir;
        self
    }

    pub fn with_sic_residuals(mut self, xi1: f64, xi2: f64) -> Self {
        self.sic_residual_1 = xi1;
        self.sic_residual_2 = xi2;
        self
    }

    pub fn with_rates(mut self, r1: f64, r2: f64) -> Self {
        self.rate_1 = r1;
        self.rate_2 = r2;
        self
    }

    pub fn with_rate_split(mut self, phi: f64) -> Self {
        self.rate_split = phi;
        self
    }

    /// Perfect CSIR and perfect SIC for both users.
    pub fn ideal_receiver(self) -> Self {
        self.with_csir(CsirQuality::Perfect).with_sic_residuals(0.0, 0.0)
    }

    /// Perfect CSIR with U₁'s stream cancelled perfectly; only Ξ₂ remains.
    pub fn perfect_csir_imperfect_first_stream(self, xi2: f64) -> Self {
        self.with_csir(CsirQuality::Perfect).with_sic_residuals(0.0, xi2)
    }

    pub fn m1(&self) -> ShapeParam {
        self.user1.nakagami_m
    }

    pub fn m2(&self) -> ShapeParam {
        self.user2.nakagami_m
    }

    /// `α₂,₂ + α₂,₁ Ξ₂`, the U₂ power fraction still interfering after the
    /// first stream is cancelled.
    #[inline]
    pub fn residual_u2_fraction(&self) -> f64 {
        self.alpha_22 + self.alpha_21 * self.sic_residual_2
    }

    pub fn link_stats(&self) -> (LinkStatistics, LinkStatistics) {
        (derive_link_stats(&self.user1, &self.env), derive_link_stats(&self.user2, &self.env))
    }
}

/// SINR thresholds implied by the target rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub th_1: f64,
    pub th_21: f64,
    pub th_22: f64,
}

pub fn thresholds(cfg: &SystemConfig) -> Thresholds {
    Thresholds {
        th_1: cfg.rate_1.exp2() - 1.0,
        th_21: (cfg.rate_split * cfg.rate_2).exp2() - 1.0,
        th_22: ((1.0 - cfg.rate_split) * cfg.rate_2).exp2() - 1.0,
    }
}

/// SINR of `s₂,₁`, decoded first with everything else as interference.
pub fn sinr_stage_21(x1: f64, x2: f64, s1: &LinkStatistics, s2: &LinkStatistics, cfg: &SystemConfig) -> f64 {
    let signal = x2 * s2.snr * cfg.alpha_21;
    let interference = x2 * cfg.alpha_22 * s2.snr + x1 * s1.snr + s1.snr * s1.err_var + s2.snr * s2.err_var + 1.0;
    signal / interference
}

/// SINR of `s₁` after `s₂,₁` has been cancelled (with residual Ξ₂).
pub fn sinr_stage_1(x1: f64, x2: f64, s1: &LinkStatistics, s2: &LinkStatistics, cfg: &SystemConfig) -> f64 {
    let signal = x1 * s1.snr;
    let interference = (x2 + s2.err_var) * s2.snr * cfg.residual_u2_fraction() + s1.snr * s1.err_var + 1.0;
    signal / interference
}

/// SINR of `s₂,₂` after both `s₂,₁` and `s₁` have been cancelled.
pub fn sinr_stage_22(x1: f64, x2: f64, s1: &LinkStatistics, s2: &LinkStatistics, cfg: &SystemConfig) -> f64 {
    let d1 = s2.snr * cfg.residual_u2_fraction();
    let signal = x2 * s2.snr * cfg.alpha_22;
    let interference = x2 * s2.snr * cfg.alpha_21 * cfg.sic_residual_2
        + s2.err_var * d1
        + (x1 + s1.err_var) * s1.snr * cfg.sic_residual_1
        + 1.0;
    signal / interference
}

/// Estimated channel powers `(|ĥ₁|², |ĥ₂|²)` seen by one decoding stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPair {
    pub x1: f64,
    pub x2: f64,
}

/// Channel powers for each of the three SIC stages. Identical entries model
/// a single block-fading realisation; distinct entries model stages that see
/// independent fades.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageDraws {
    pub stage_21: ChannelPair,
    pub stage_1: ChannelPair,
    pub stage_22: ChannelPair,
}

impl StageDraws {
    pub fn shared(pair: ChannelPair) -> Self {
        Self { stage_21: pair, stage_1: pair, stage_22: pair }
    }
}

/// Result of running the SIC chain on one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOutcome {
    pub sinr_21: f64,
    pub sinr_1: f64,
    pub sinr_22: f64,
    pub stage1_ok: bool,
    pub stage2_ok: bool,
    pub stage3_ok: bool,
}

impl SampleOutcome {
    pub fn user1_outage(&self) -> bool {
        !self.stage2_ok
    }

    pub fn user2_outage(&self) -> bool {
        !self.stage3_ok
    }

    /// Unconditional per-stage failures `(γ₂,₁ < th, γ₁ < th, γ₂,₂ < th)`,
    /// ignoring chain truncation.
    pub fn stage_failures(&self, th: &Thresholds) -> [bool; 3] {
        [self.sinr_21 < th.th_21, self.sinr_1 < th.th_1, self.sinr_22 < th.th_22]
    }
}

/// Frozen per-operating-point quantities: configuration, link statistics and
/// thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub cfg: SystemConfig,
    pub stats1: LinkStatistics,
    pub stats2: LinkStatistics,
    pub th: Thresholds,
}

impl OperatingPoint {
    pub fn new(cfg: SystemConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let (stats1, stats2) = cfg.link_stats();
        Ok(Self { cfg, stats1, stats2, th: thresholds(&cfg) })
    }

    pub fn sinr_stage_21(&self, p: ChannelPair) -> f64 {
        sinr_stage_21(p.x1, p.x2, &self.stats1, &self.stats2, &self.cfg)
    }

    pub fn sinr_stage_1(&self, p: ChannelPair) -> f64 {
        sinr_stage_1(p.x1, p.x2, &self.stats1, &self.stats2, &self.cfg)
    }

    pub fn sinr_stage_22(&self, p: ChannelPair) -> f64 {
        sinr_stage_22(p.x1, p.x2, &self.stats1, &self.stats2, &self.cfg)
    }

    pub fn decode_chain(&self, draws: &StageDraws) -> SampleOutcome {
        let sinr_21 = self.sinr_stage_21(draws.stage_21);
        let sinr_1 = self.sinr_stage_1(draws.stage_1);
        let sinr_22 = self.sinr_stage_22(draws.stage_22);
        let stage1_ok = sinr_21 >= self.th.th_21;
        let stage2_ok = stage1_ok && sinr_1 >= self.th.th_1;
        let stage3_ok = stage2_ok && sinr_22 >= self.th.th_22;
        SampleOutcome { sinr_21, sinr_1, sinr_22, stage1_ok, stage2_ok, stage3_ok }
    }

    pub fn noma(&self, draws: &NomaDraws) -> NomaOutcome {
        let sinr_u2 = noma_sinr_u2(draws.stage_u2, &self.stats1, &self.stats2);
        let sinr_u1 = noma_sinr_u1(draws.stage_u1, &self.stats1, &self.stats2, &self.cfg);
        let u2_ok = sinr_u2 >= self.cfg.rate_2.exp2() - 1.0;
        let u1_ok = u2_ok && sinr_u1 >= self.th.th_1;
        NomaOutcome { sinr_u2, sinr_u1, u2_ok, u1_ok }
    }
}

/// Runs the SIC chain with one channel realisation shared by all stages.
pub fn decode_chain(
    x1: f64,
    x2: f64,
    stats: (&LinkStatistics, &LinkStatistics),
    cfg: &SystemConfig,
    th: &Thresholds,
) -> SampleOutcome {
    let point = OperatingPoint { cfg: *cfg, stats1: *stats.0, stats2: *stats.1, th: *th };
    point.decode_chain(&StageDraws::shared(ChannelPair { x1, x2 }))
}

/// NOMA baseline SINRs `(U₂ first, then U₁)` with no message splitting.
pub fn noma_sinrs(x1: f64, x2: f64, s1: &LinkStatistics, s2: &LinkStatistics, cfg: &SystemConfig) -> (f64, f64) {
    let pair = ChannelPair { x1, x2 };
    (noma_sinr_u2(pair, s1, s2), noma_sinr_u1(pair, s1, s2, cfg))
}

fn noma_sinr_u2(p: ChannelPair, s1: &LinkStatistics, s2: &LinkStatistics) -> f64 {
    p.x2 * s2.snr / (p.x1 * s1.snr + s1.snr * s1.err_var + s2.snr * s2.err_var + 1.0)
}

fn noma_sinr_u1(p: ChannelPair, s1: &LinkStatistics, s2: &LinkStatistics, cfg: &SystemConfig) -> f64 {
    p.x1 * s1.snr / ((p.x2 + s2.err_var) * s2.snr * cfg.sic_residual_2 + s1.snr * s1.err_var + 1.0)
}

/// Channel powers for the two NOMA decoding stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NomaDraws {
    pub stage_u2: ChannelPair,
    pub stage_u1: ChannelPair,
}

impl NomaDraws {
    pub fn shared(pair: ChannelPair) -> Self {
        Self { stage_u2: pair, stage_u1: pair }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NomaOutcome {
    pub sinr_u2: f64,
    pub sinr_u1: f64,
    pub u2_ok: bool,
    pub u1_ok: bool,
}
