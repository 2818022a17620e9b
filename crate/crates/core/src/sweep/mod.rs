//! Parameter sweeps over one axis, evaluated with any mix of methods and
//! schemes, plus configuration files, presets and CSV/JSON output.

mod config;
mod emit;
mod preset;

pub use config::{load_config, parse_config, ConfigFile, DeltaSetting};
pub use emit::{emit, load_result, read_csv, read_json, series_path, write_csv, write_json, OutputFormat, CSV_COLUMNS};
pub use preset::{preset, Preset, Series, PRESET_NAMES};

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{asymptotic_report, closed_form_report, throughput, Method, OutageReport, Target};
use crate::channel::CsirQuality;
use crate::montecarlo::{
    estimate_outage_with, McEstimate, McOptions, Scheme, StageCoupling, DEFAULT_SEED, DEFAULT_SWEEP_SAMPLES,
};
use crate::system::{ConfigError, OperatingPoint, SystemConfig};

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("i/o error on {}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{}: parse error: {msg}", path.display())]
    ParseAt { path: PathBuf, msg: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid sweep: {0}")]
    Spec(String),
}

impl SweepError {
    pub(crate) fn with_path(self, path: &Path) -> Self {
        match self {
            SweepError::Parse(msg) => SweepError::ParseAt { path: path.to_path_buf(), msg },
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    TxPowerDbm,
    Delta,
    XiPair,
    RateSplit,
    /// Distance of U₂ in metres; U₁ stays put.
    Distance,
}

impl Axis {
    pub const ALL: [Axis; 5] = [Axis::TxPowerDbm, Axis::Delta, Axis::XiPair, Axis::RateSplit, Axis::Distance];

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::TxPowerDbm => "tx_power_dbm",
            Axis::Delta => "delta",
            Axis::XiPair => "xi_pair",
            Axis::RateSplit => "rate_split",
            Axis::Distance => "distance",
        }
    }

    /// Axis value from a plain number. Not defined for `xi_pair`.
    pub fn scalar(self, x: f64) -> Result<AxisValue, SweepError> {
        match self {
            Axis::Delta => Ok(AxisValue::Delta(CsirQuality::Estimated(x))),
            Axis::XiPair => Err(SweepError::Spec(format!("xi_pair values are pairs `xi1:xi2`, got {x}"))),
            _ => Ok(AxisValue::Scalar(x)),
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Axis::ALL.into_iter().find(|a| a.as_str() == s).ok_or_else(|| {
            SweepError::Spec(format!(
                "unknown axis `{s}` (expected tx_power_dbm, delta, xi_pair, rate_split or distance)"
            ))
        })
    }
}

/// One position along a sweep axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisValue {
    Scalar(f64),
    Delta(CsirQuality),
    XiPair(f64, f64),
}

impl AxisValue {
    /// Parses the textual form written by [`fmt::Display`] for `axis`.
    pub fn parse(axis: Axis, s: &str) -> Result<Self, SweepError> {
        let num = |t: &str| -> Result<f64, SweepError> {
            t.trim().parse::<f64>().map_err(|_| SweepError::Parse(format!("bad {} value `{s}`", axis.as_str())))
        };
        match axis {
            Axis::Delta if s.trim().eq_ignore_ascii_case("perfect") => Ok(AxisValue::Delta(CsirQuality::Perfect)),
            Axis::XiPair => {
                let (a, b) = s
                    .split_once(':')
                    .ok_or_else(|| SweepError::Parse(format!("bad xi_pair value `{s}` (expected xi1:xi2)")))?;
                Ok(AxisValue::XiPair(num(a)?, num(b)?))
            }
            _ => axis.scalar(num(s)?),
        }
    }

    /// Ordering key; `None` for pairs, which have no natural order.
    fn order_key(&self) -> Option<f64> {
        match *self {
            AxisValue::Scalar(x) => Some(x),
            AxisValue::Delta(CsirQuality::Perfect) => Some(f64::INFINITY),
            AxisValue::Delta(CsirQuality::Estimated(d)) => Some(d),
            AxisValue::XiPair(..) => None,
        }
    }

    fn matches(&self, axis: Axis) -> bool {
        matches!(
            (axis, self),
            (Axis::Delta, AxisValue::Delta(_))
                | (Axis::XiPair, AxisValue::XiPair(..))
                | (Axis::TxPowerDbm | Axis::RateSplit | Axis::Distance, AxisValue::Scalar(_))
        )
    }
}

impl fmt::Display for AxisValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisValue::Scalar(x) => write!(f, "{x}"),
            AxisValue::Delta(q) => write!(f, "{q}"),
            AxisValue::XiPair(a, b) => write!(f, "{a}:{b}"),
        }
    }
}

/// Evenly spaced values `from, from+step, …` up to `to` inclusive.
pub fn axis_range(from: f64, to: f64, step: f64) -> Result<Vec<f64>, SweepError> {
    if !(from.is_finite() && to.is_finite() && step.is_finite()) || step <= 0.0 || to < from {
        return Err(SweepError::Spec(format!("bad range from={from} to={to} step={step}")));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize + 1;
    // round away accumulated binary noise so 0.1+0.05·k prints as written
    Ok((0..n).map(|i| ((from + i as f64 * step) * 1e9).round() / 1e9).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Outage,
    Throughput,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Outage => "outage",
            Metric::Throughput => "throughput",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "outage" => Ok(Metric::Outage),
            "throughput" => Ok(Metric::Throughput),
            _ => Err(format!("unknown metric `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<AxisValue>,
    pub methods: Vec<Method>,
    pub schemes: Vec<Scheme>,
    pub base: SystemConfig,
    pub mc_seed: u64,
    pub mc_samples: u64,
    pub coupling: StageCoupling,
}

impl SweepSpec {
    pub fn new(axis: Axis, values: Vec<AxisValue>, base: SystemConfig) -> Self {
        Self {
            axis,
            values,
            methods: vec![Method::ClosedForm],
            schemes: vec![Scheme::Rsma],
            base,
            mc_seed: DEFAULT_SEED,
            mc_samples: DEFAULT_SWEEP_SAMPLES,
            coupling: StageCoupling::default(),
        }
    }

    pub fn with_methods(mut self, methods: &[Method]) -> Self {
        self.methods = methods.to_vec();
        self
    }

    pub fn with_schemes(mut self, schemes: &[Scheme]) -> Self {
        self.schemes = schemes.to_vec();
        self
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.values.is_empty() {
            return Err(SweepError::Spec("no axis values".into()));
        }
        if self.methods.is_empty() {
            return Err(SweepError::Spec("at least one method is required".into()));
        }
        if self.schemes.is_empty() {
            return Err(SweepError::Spec("at least one scheme is required".into()));
        }
        if self.mc_samples == 0 && self.methods.contains(&Method::MonteCarlo) {
            return Err(SweepError::Spec("monte_carlo needs samples >= 1".into()));
        }
        if let Some(v) = self.values.iter().find(|v| !v.matches(self.axis)) {
            return Err(SweepError::Spec(format!("value `{v}` does not belong to axis {}", self.axis.as_str())));
        }
        let keys: Option<Vec<f64>> = self.values.iter().map(AxisValue::order_key).collect();
        match keys {
            Some(k) => {
                let up = k.windows(2).all(|w| w[0] < w[1]);
                let down = k.windows(2).all(|w| w[0] > w[1]);
                if !(up || down) {
                    return Err(SweepError::Spec("axis values must be strictly monotone".into()));
                }
            }
            None => {
                for (i, a) in self.values.iter().enumerate() {
                    if self.values[..i].contains(a) {
                        return Err(SweepError::Spec(format!("duplicate axis value `{a}`")));
                    }
                }
            }
        }
        self.base.validate()?;
        Ok(())
    }

    /// Configuration at one axis value.
    pub fn config_at(&self, value: &AxisValue) -> SystemConfig {
        let cfg = self.base;
        match (self.axis, *value) {
            (Axis::TxPowerDbm, AxisValue::Scalar(p)) => cfg.with_tx_power_dbm(p),
            (Axis::Delta, AxisValue::Delta(q)) => cfg.with_csir(q),
            (Axis::XiPair, AxisValue::XiPair(a, b)) => cfg.with_sic_residuals(a, b),
            (Axis::RateSplit, AxisValue::Scalar(phi)) => cfg.with_rate_split(phi),
            (Axis::Distance, AxisValue::Scalar(d)) => {
                let mut c = cfg;
                c.user2.distance_m = d;
                c
            }
            (axis, v) => panic!("axis value {v} does not belong to axis {}", axis.as_str()),
        }
    }
}

/// One output row: a single number for (point, scheme, method, metric,
/// target).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub axis: Axis,
    pub axis_value: AxisValue,
    pub scheme: Scheme,
    pub method: Method,
    pub metric: Metric,
    pub target: Target,
    pub value: f64,
    /// Present for Monte Carlo rows only.
    pub std_err: Option<f64>,
    pub infeasible: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn select(
        &self,
        scheme: Scheme,
        method: Method,
        metric: Metric,
        target: Target,
    ) -> impl Iterator<Item = &SweepRow> + '_ {
        self.rows
            .iter()
            .filter(move |r| r.scheme == scheme && r.method == method && r.metric == metric && r.target == target)
    }

    /// `(axis value, value)` series for one curve.
    pub fn series(&self, scheme: Scheme, method: Method, metric: Metric, target: Target) -> Vec<(AxisValue, f64)> {
        self.select(scheme, method, metric, target).map(|r| (r.axis_value, r.value)).collect()
    }
}

struct PointCtx<'a> {
    spec: &'a SweepSpec,
    value: AxisValue,
    point: OperatingPoint,
}

impl PointCtx<'_> {
    fn row(&self, scheme: Scheme, method: Method, metric: Metric, target: Target) -> SweepRow {
        SweepRow {
            axis: self.spec.axis,
            axis_value: self.value,
            scheme,
            method,
            metric,
            target,
            value: 0.0,
            std_err: None,
            infeasible: false,
        }
    }

    fn report_rows(&self, report: &OutageReport, out: &mut Vec<SweepRow>) {
        for target in Target::ALL {
            out.push(SweepRow {
                value: report.get(target),
                infeasible: report.target_infeasible(target),
                ..self.row(Scheme::Rsma, report.method, Metric::Outage, target)
            });
        }
        let tp = throughput(&self.point.cfg, report);
        for (target, v) in [(Target::User1, tp.user1), (Target::User2, tp.user2)] {
            out.push(SweepRow {
                value: v,
                infeasible: report.target_infeasible(target),
                ..self.row(Scheme::Rsma, report.method, Metric::Throughput, target)
            });
        }
    }

    fn mc_rows(&self, scheme: Scheme, flags: &OutageReport, out: &mut Vec<SweepRow>) -> Result<(), SweepError> {
        let opts = McOptions::new(self.spec.mc_seed, self.spec.mc_samples).with_coupling(self.spec.coupling);
        let run = estimate_outage_with(&self.point.cfg, scheme, &opts)?;
        let infeasible = |t: Target| scheme == Scheme::Rsma && flags.target_infeasible(t);
        for target in Target::ALL {
            if let Some(McEstimate { p_hat, std_err, .. }) = run.estimate(target) {
                out.push(SweepRow {
                    value: p_hat,
                    std_err: Some(std_err),
                    infeasible: infeasible(target),
                    ..self.row(scheme, Method::MonteCarlo, Metric::Outage, target)
                });
            }
        }
        for (target, tp) in [(Target::User1, run.throughput1), (Target::User2, run.throughput2)] {
            out.push(SweepRow {
                value: tp.value,
                std_err: Some(tp.std_err),
                infeasible: infeasible(target),
                ..self.row(scheme, Method::MonteCarlo, Metric::Throughput, target)
            });
        }
        Ok(())
    }

    fn rows(&self) -> Result<Vec<SweepRow>, SweepError> {
        let mut out = Vec::new();
        let closed = closed_form_report(&self.point);
        for &scheme in &self.spec.schemes {
            for &method in &self.spec.methods {
                match (scheme, method) {
                    (Scheme::Rsma, Method::ClosedForm) => self.report_rows(&closed, &mut out),
                    (Scheme::Rsma, Method::Asymptotic) => self.report_rows(&asymptotic_report(&self.point), &mut out),
                    (_, Method::MonteCarlo) => self.mc_rows(scheme, &closed, &mut out)?,
                    // no analytic NOMA model
                    (Scheme::Noma, _) => {}
                }
            }
        }
        Ok(out)
    }
}

/// Evaluates every (value × scheme × method) combination. Points run in
/// parallel; rows come back in spec order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    spec.validate()?;
    if spec.schemes.contains(&Scheme::Noma) && spec.methods.iter().any(|&m| m != Method::MonteCarlo) {
        log::warn!("NOMA is simulated only; its closed_form/asymptotic rows are skipped");
    }
    let per_point = spec
        .values
        .par_iter()
        .map(|&value| {
            let point = OperatingPoint::new(spec.config_at(&value))?;
            PointCtx { spec, value, point }.rows()
        })
        .collect::<Result<Vec<_>, SweepError>>()?;
    Ok(SweepResult { rows: per_point.into_iter().flatten().collect() })
}

/// Raw axis value in a spec file: a number or a string such as
/// `"perfect"` or `"0:0.1"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawValue {
    Num(f64),
    Text(String),
}

impl RawValue {
    pub fn to_axis_value(&self, axis: Axis) -> Result<AxisValue, SweepError> {
        match self {
            RawValue::Num(x) => axis.scalar(*x),
            RawValue::Text(s) => AxisValue::parse(axis, s),
        }
    }
}

/// TOML sweep description accepted by `--spec`. Either `values` or
/// `from`/`to`/`step` must be present; `[config]` takes the same keys as a
/// configuration file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub axis: Axis,
    pub values: Option<Vec<RawValue>>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub step: Option<f64>,
    pub methods: Option<Vec<Method>>,
    pub schemes: Option<Vec<Scheme>>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub coupling: Option<StageCoupling>,
    pub config: Option<ConfigFile>,
}

impl SpecFile {
    pub fn into_spec(self, base: &SystemConfig) -> Result<SweepSpec, SweepError> {
        let axis = self.axis;
        let values = match (&self.values, self.from, self.to, self.step) {
            (Some(v), None, None, None) => v.iter().map(|r| r.to_axis_value(axis)).collect::<Result<_, _>>()?,
            (None, Some(a), Some(b), Some(s)) => {
                axis_range(a, b, s)?.into_iter().map(|x| axis.scalar(x)).collect::<Result<_, _>>()?
            }
            _ => return Err(SweepError::Spec("give either `values` or all of `from`, `to`, `step`".into())),
        };
        let base = match &self.config {
            Some(c) => c.apply(base)?,
            None => *base,
        };
        let mut spec = SweepSpec::new(axis, values, base);
        if let Some(m) = self.methods {
            spec.methods = m;
        }
        if let Some(s) = self.schemes {
            spec.schemes = s;
        }
        if let Some(s) = self.seed {
            spec.mc_seed = s;
        }
        if let Some(n) = self.samples {
            spec.mc_samples = n;
        }
        if let Some(c) = self.coupling {
            spec.coupling = c;
        }
        spec.validate()?;
        Ok(spec)
    }
}

pub fn load_spec(path: &Path, base: &SystemConfig) -> Result<SweepSpec, SweepError> {
    let text = std::fs::read_to_string(path).map_err(|source| SweepError::Io { path: path.to_path_buf(), source })?;
    let file: SpecFile = toml::from_str(&text).map_err(|e| SweepError::ParseAt { path: path.to_path_buf(), msg: e.to_string() })?;
    file.into_spec(base)
}
