//! Per-link statistics and channel power sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::specfun::ShapeParam;

/// Converts a power in dBm to watts.
#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[inline]
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Transmitter side of one uplink user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserRadio {
    /// Linear transmit power in watts.
    pub transmit_power: f64,
    pub distance_m: f64,
    pub nakagami_m: ShapeParam,
}

impl UserRadio {
    pub fn from_dbm(power_dbm: f64, distance_m: f64, nakagami_m: ShapeParam) -> Self {
        Self { transmit_power: dbm_to_watts(power_dbm), distance_m, nakagami_m }
    }

    pub fn power_dbm(&self) -> f64 {
        watts_to_dbm(self.transmit_power)
    }
}

/// Receiver-side channel estimation quality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CsirQuality {
    /// Error variance is exactly zero.
    Perfect,
    /// Quality parameter δ ≥ 0 of the MMSE-style error model.
    Estimated(f64),
}

impl CsirQuality {
    pub fn is_perfect(self) -> bool {
        matches!(self, CsirQuality::Perfect)
    }
}

impl std::fmt::Display for CsirQuality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CsirQuality::Perfect => f.write_str("perfect"),
            CsirQuality::Estimated(d) => write!(f, "{d}"),
        }
    }
}

/// Shared propagation environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationEnv {
    /// Noise power σ² in watts.
    pub noise_power: f64,
    /// Reference distance ϕ of the path-loss law `ϕ / d^τ`.
    pub pathloss_ref_m: f64,
    /// Path-loss exponent τ.
    pub pathloss_exponent: f64,
    pub csir_quality: CsirQuality,
}

/// Derived second-order statistics of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkStatistics {
    /// ρ = P/σ².
    pub snr: f64,
    /// Ω, variance of the true channel.
    pub total_var: f64,
    /// Ω_{h_e}, variance of the estimation error.
    pub err_var: f64,
    /// Ω̂ = Ω − Ω_{h_e}, mean power of the estimated channel.
    pub est_var: f64,
}

pub fn derive_link_stats(user: &UserRadio, env: &PropagationEnv) -> LinkStatistics {
    let snr = user.transmit_power / env.noise_power;
    let total_var = env.pathloss_ref_m / user.distance_m.powf(env.pathloss_exponent);
    let err_var = match env.csir_quality {
        CsirQuality::Perfect => 0.0,
        CsirQuality::Estimated(delta) => total_var / (1.0 + delta * snr * total_var),
    };
    LinkStatistics { snr, total_var, err_var, est_var: (total_var - err_var).max(0.0) }
}

/// One draw of `|ĥ|²` ~ Gamma(shape m, mean Ω̂), as the sum of `m`
/// exponentials of mean `Ω̂/m`.
///
/// Always consumes the same amount of randomness for a given `m`, including
/// when `est_var == 0` (the draw is then exactly zero). This keeps streams
/// aligned across operating points.
pub fn sample_channel_power<R: Rng + ?Sized>(stats: &LinkStatistics, m: ShapeParam, rng: &mut R) -> f64 {
    let unit = sample_unit_gamma(m, rng);
    unit * stats.est_var / m.as_f64()
}

/// Sum of `m` unit exponentials, i.e. Gamma(m, scale 1).
#[inline]
pub fn sample_unit_gamma<R: Rng + ?Sized>(m: ShapeParam, rng: &mut R) -> f64 {
    (0..m.get()).map(|_| -> f64 { Exp1.sample(rng) }).sum()
}

/// Reference sampler through the generic Marsaglia–Tsang Gamma generator.
/// Only used to cross-check [`sample_channel_power`].
pub fn sample_channel_power_generic<R: Rng + ?Sized>(
    stats: &LinkStatistics,
    m: ShapeParam,
    rng: &mut R,
) -> f64 {
    if stats.est_var <= 0.0 {
        return 0.0;
    }
    let gamma = Gamma::new(m.as_f64(), stats.est_var / m.as_f64()).expect("positive shape and scale");
    gamma.sample(rng)
}

/// Deterministic substream `stream` of the root `seed`. Streams are
/// independent ChaCha8 sequences, so any partition of work onto threads sees
/// the same numbers.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
