//! Built-in sweeps `fig1` … `fig5`.
//!
//! | preset | axis | series | fixed settings |
//! |---|---|---|---|
//! | fig1 | power 0–40 dBm | δ ∈ {0.2, 0.5, 0.9} | Ξ = 0 |
//! | fig2 | power 0–60 dBm | Ξ ∈ {(0, 0.1), (0.1, 0)} | perfect CSIR |
//! | fig3 | power 0–40 dBm | Ξ ∈ {(0, 0), (0.05, 0.05)} | δ = 0.5 |
//! | fig4 | φ 0.05–0.95 | — | 10 dBm, δ = 0.5, Ξ = 0 |
//! | fig5 | power 0–40 dBm | δ ∈ {0.2, 0.9} | R = (0.75, 0.85), Ξ = 0, RSMA and NOMA |
//!
//! Everything not listed comes from the base configuration.

use super::{axis_range, Axis, SweepError, SweepSpec};
use crate::analytic::Method;
use crate::channel::CsirQuality;
use crate::montecarlo::Scheme;
use crate::system::SystemConfig;

pub const PRESET_NAMES: [&str; 5] = ["fig1", "fig2", "fig3", "fig4", "fig5"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub spec: SweepSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub series: Vec<Series>,
}

fn power_axis(to: f64) -> Vec<super::AxisValue> {
    axis_range(0.0, to, 2.0).expect("static range").into_iter().map(super::AxisValue::Scalar).collect()
}

/// Builds preset `name` on top of `base`; `seed`/`samples` feed the Monte
/// Carlo rows.
pub fn preset(name: &str, base: &SystemConfig, seed: u64, samples: u64) -> Result<Preset, SweepError> {
    let cf_mc = [Method::ClosedForm, Method::MonteCarlo];
    let mk = |label: String, axis: Axis, values, cfg: SystemConfig, methods: &[Method], schemes: &[Scheme]| Series {
        label,
        spec: SweepSpec { mc_seed: seed, mc_samples: samples, ..SweepSpec::new(axis, values, cfg) }
            .with_methods(methods)
            .with_schemes(schemes),
    };
    let rsma = [Scheme::Rsma];
    let (name, series) = match name {
        "fig1" => (
            "fig1",
            [0.2, 0.5, 0.9]
                .map(|d| {
                    let cfg = base.with_csir(CsirQuality::Estimated(d)).with_sic_residuals(0.0, 0.0);
                    mk(format!("delta{d}"), Axis::TxPowerDbm, power_axis(40.0), cfg, &cf_mc, &rsma)
                })
                .to_vec(),
        ),
        "fig2" => (
            "fig2",
            [(0.0, 0.1), (0.1, 0.0)]
                .map(|(a, b)| {
                    let cfg = base.with_csir(CsirQuality::Perfect).with_sic_residuals(a, b);
                    let methods = [Method::ClosedForm, Method::Asymptotic, Method::MonteCarlo];
                    mk(format!("xi{a}-{b}"), Axis::TxPowerDbm, power_axis(60.0), cfg, &methods, &rsma)
                })
                .to_vec(),
        ),
        "fig3" => (
            "fig3",
            [0.0, 0.05]
                .map(|xi| {
                    let cfg = base.with_csir(CsirQuality::Estimated(0.5)).with_sic_residuals(xi, xi);
                    mk(format!("xi{xi}"), Axis::TxPowerDbm, power_axis(40.0), cfg, &cf_mc, &rsma)
                })
                .to_vec(),
        ),
        "fig4" => {
            let cfg = base.with_tx_power_dbm(10.0).with_csir(CsirQuality::Estimated(0.5)).with_sic_residuals(0.0, 0.0);
            let values = axis_range(0.05, 0.95, 0.05)?.into_iter().map(super::AxisValue::Scalar).collect();
            ("fig4", vec![mk("phi".into(), Axis::RateSplit, values, cfg, &cf_mc, &rsma)])
        }
        "fig5" => (
            "fig5",
            [0.2, 0.9]
                .map(|d| {
                    let cfg = base
                        .with_rates(0.75, 0.85)
                        .with_csir(CsirQuality::Estimated(d))
                        .with_sic_residuals(0.0, 0.0);
                    mk(format!("delta{d}"), Axis::TxPowerDbm, power_axis(40.0), cfg, &cf_mc, &[Scheme::Rsma, Scheme::Noma])
                })
                .to_vec(),
        ),
        other => {
            return Err(SweepError::Spec(format!("unknown preset `{other}` (expected one of {})", PRESET_NAMES.join(", "))))
        }
    };
    for s in &series {
        s.spec.validate()?;
    }
    Ok(Preset { name, series })
}
