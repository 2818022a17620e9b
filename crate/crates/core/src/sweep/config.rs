//! Flat TOML configuration files.
//!
//! Every key is optional; missing keys take the library defaults. Unknown
//! keys are rejected.
//!
//! ```toml
//! m1 = 4
//! m2 = 3
//! noise_dbm = -100.0
//! p_dbm = 10.0          # both users; p1_dbm / p2_dbm override
//! d1_m = 75.0
//! d2_m = 70.0
//! pathloss_ref_m = 1.0
//! pathloss_exponent = 3.8
//! delta = "perfect"     # or a number >= 0
//! xi1 = 0.0
//! xi2 = 0.0
//! alpha21 = 0.27
//! alpha22 = 0.73
//! r1 = 0.7
//! r2 = 0.95
//! phi = 0.15
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{dbm_to_watts, CsirQuality};
use crate::specfun::ShapeParam;
use crate::sweep::SweepError;
use crate::system::{ConfigError, SystemConfig};

/// δ as written in a file: a number or `"perfect"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaSetting {
    Value(f64),
    Named(String),
}

impl DeltaSetting {
    pub fn to_quality(&self) -> Result<CsirQuality, ConfigError> {
        match self {
            DeltaSetting::Value(d) => Ok(CsirQuality::Estimated(*d)),
            DeltaSetting::Named(s) if s.eq_ignore_ascii_case("perfect") => Ok(CsirQuality::Perfect),
            DeltaSetting::Named(s) => Err(ConfigError::new("delta", "must be a number >= 0 or \"perfect\"", s)),
        }
    }
}

impl From<CsirQuality> for DeltaSetting {
    fn from(q: CsirQuality) -> Self {
        match q {
            CsirQuality::Perfect => DeltaSetting::Named("perfect".into()),
            CsirQuality::Estimated(d) => DeltaSetting::Value(d),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub noise_dbm: Option<f64>,
    pub p_dbm: Option<f64>,
    pub p1_dbm: Option<f64>,
    pub p2_dbm: Option<f64>,
    pub d1_m: Option<f64>,
    pub d2_m: Option<f64>,
    pub pathloss_ref_m: Option<f64>,
    pub pathloss_exponent: Option<f64>,
    pub delta: Option<DeltaSetting>,
    pub xi1: Option<f64>,
    pub xi2: Option<f64>,
    pub alpha21: Option<f64>,
    pub alpha22: Option<f64>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub phi: Option<f64>,
}

fn shape(field: &str, m: f64) -> Result<ShapeParam, ConfigError> {
    ShapeParam::from_real(m).map_err(|_| {
        ConfigError::new(field, "must be a positive integer (the closed forms need an integer Nakagami shape)", m)
    })
}

impl ConfigFile {
    /// Applies the present keys on top of `base` and validates the result.
    pub fn apply(&self, base: &SystemConfig) -> Result<SystemConfig, ConfigError> {
        let mut cfg = *base;
        if let Some(m) = self.m1 {
            cfg.user1.nakagami_m = shape("m1", m)?;
        }
        if let Some(m) = self.m2 {
            cfg.user2.nakagami_m = shape("m2", m)?;
        }
        if let Some(n) = self.noise_dbm {
            cfg.env.noise_power = dbm_to_watts(n);
        }
        if let Some(p) = self.p_dbm {
            cfg = cfg.with_tx_power_dbm(p);
        }
        if let Some(p) = self.p1_dbm {
            cfg.user1.transmit_power = dbm_to_watts(p);
        }
        if let Some(p) = self.p2_dbm {
            cfg.user2.transmit_power = dbm_to_watts(p);
        }
        macro_rules! set {
            ($key:ident => $($dst:tt)+) => {
                if let Some(v) = self.$key {
                    cfg.$($dst)+ = v;
                }
            };
        }
        set!(d1_m => user1.distance_m);
        set!(d2_m => user2.distance_m);
        set!(pathloss_ref_m => env.pathloss_ref_m);
        set!(pathloss_exponent => env.pathloss_exponent);
        set!(xi1 => sic_residual_1);
        set!(xi2 => sic_residual_2);
        set!(alpha21 => alpha_21);
        set!(alpha22 => alpha_22);
        set!(r1 => rate_1);
        set!(r2 => rate_2);
        set!(phi => rate_split);
        if let Some(d) = &self.delta {
            cfg.env.csir_quality = d.to_quality()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn parse_config(text: &str) -> Result<SystemConfig, SweepError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| SweepError::Parse(e.to_string()))?;
    Ok(file.apply(&SystemConfig::default())?)
}

pub fn load_config(path: &Path) -> Result<SystemConfig, SweepError> {
    let text = std::fs::read_to_string(path).map_err(|source| SweepError::Io { path: path.to_path_buf(), source })?;
    parse_config(&text).map_err(|e| e.with_path(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(parse_config("").unwrap(), SystemConfig::default());
    }

    #[test]
    fn keys_override() {
        let cfg = parse_config("m1 = 2\ndelta = 0.5\np_dbm = 20\np2_dbm = 30\nxi2 = 0.1\n").unwrap();
        assert_eq!(cfg.m1().get(), 2);
        assert_eq!(cfg.env.csir_quality, CsirQuality::Estimated(0.5));
        assert_eq!(cfg.user1.transmit_power, dbm_to_watts(20.0));
        assert_eq!(cfg.user2.transmit_power, dbm_to_watts(30.0));
        assert_eq!(cfg.sic_residual_2, 0.1);
        assert_eq!(parse_config("delta = \"perfect\"").unwrap().env.csir_quality, CsirQuality::Perfect);
    }

    #[test]
    fn alpha_sum_rejected() {
        let err = parse_config("alpha21 = 0.3\nalpha22 = 0.8").unwrap_err();
        let SweepError::Config(e) = err else { panic!("{err}") };
        assert_eq!(e.field, "alpha21+alpha22");
        assert!(e.constraint.contains("sum to 1"));
    }

    #[test]
    fn non_integer_shape_rejected() {
        let SweepError::Config(e) = parse_config("m2 = 2.5").unwrap_err() else { panic!() };
        assert_eq!(e.field, "m2");
        assert!(e.constraint.contains("integer"));
        assert_eq!(e.value, "2.5");
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(parse_config("alpha_21 = 0.27"), Err(SweepError::Parse(_))));
        assert!(matches!(parse_config("delta = \"bad\""), Err(SweepError::Config(_))));
    }
}
