//! Monte Carlo oracle for the outage analysis.
//!
//! Samples `|ĥ₁|²`, `|ĥ₂|²` from their Gamma laws, runs the SIC chain (or the
//! NOMA baseline) and counts failures. Work is split into fixed-size chunks,
//! chunk `i` drawing from substream `i` of the seed, and counts are reduced
//! by integer addition. Results are therefore bit-identical for any thread
//! count, and the same sample index sees the same random numbers at every
//! operating point (common random numbers).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{closed_form_report, Target};
use crate::channel::{sample_channel_power, substream, CsirQuality};
use crate::system::{ChannelPair, ConfigError, NomaDraws, OperatingPoint, StageDraws, SystemConfig};

/// Samples per random substream.
pub const CHUNK_SAMPLES: u64 = 8192;
pub const DEFAULT_VALIDATION_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_SWEEP_SAMPLES: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 0x5EED_2024;

/// Absolute slack below which closed form and simulation are considered in
/// agreement regardless of the z-score.
pub const ABS_SLACK: f64 = 5e-4;
pub const Z_PASS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum Scheme {
    #[serde(rename = "RSMA")]
    Rsma,
    #[serde(rename = "NOMA")]
    Noma,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Rsma => "RSMA",
            Scheme::Noma => "NOMA",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "RSMA" => Ok(Scheme::Rsma),
            "NOMA" => Ok(Scheme::Noma),
            _ => Err(format!("unknown scheme `{s}` (expected RSMA or NOMA)")),
        }
    }
}

/// How channel realisations are shared between the decoding stages of one
/// sample.
///
/// `Independent` gives each stage its own fade. The per-user closed forms
/// multiply stage success probabilities as if the stages were independent,
/// so this is the mode they describe. `Shared` reuses one realisation across
/// the chain; the stage events are then correlated and the user outage
/// departs from the product form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageCoupling {
    #[default]
    Independent,
    Shared,
}

impl std::str::FromStr for StageCoupling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "independent" => Ok(StageCoupling::Independent),
            "shared" => Ok(StageCoupling::Shared),
            _ => Err(format!("unknown coupling `{s}` (expected independent or shared)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McOptions {
    pub seed: u64,
    pub n_samples: u64,
    pub coupling: StageCoupling,
    /// Worker count; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl McOptions {
    pub fn new(seed: u64, n_samples: u64) -> Self {
        Self { seed, n_samples, coupling: StageCoupling::default(), threads: None }
    }

    pub fn with_coupling(mut self, coupling: StageCoupling) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }
}

/// Empirical probability with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub p_hat: f64,
    pub n_samples: u64,
    pub std_err: f64,
}

impl McEstimate {
    /// Binomial standard error; at 0 or 1 the rule-of-three bound `3/n` is
    /// reported instead of a vacuous zero.
    pub fn from_count(failures: u64, n_samples: u64) -> Self {
        assert!(n_samples > 0);
        let p_hat = failures as f64 / n_samples as f64;
        let std_err = if failures == 0 || failures == n_samples {
            3.0 / n_samples as f64
        } else {
            (p_hat * (1.0 - p_hat) / n_samples as f64).sqrt()
        };
        Self { p_hat, n_samples, std_err }
    }
}

/// Raw failure counters for RSMA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RsmaCounts {
    pub n: u64,
    /// Unconditional failures of each stage on its own draw.
    pub fail_21: u64,
    pub fail_11: u64,
    pub fail_22: u64,
    /// Chain failures (decoding stops at the first failed stage).
    pub fail_user1: u64,
    pub fail_user2: u64,
    /// Samples reaching the last stage, and those failing there.
    pub reach_22: u64,
    pub fail_22_after_pass: u64,
}

impl std::ops::Add for RsmaCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            n: self.n + o.n,
            fail_21: self.fail_21 + o.fail_21,
            fail_11: self.fail_11 + o.fail_11,
            fail_22: self.fail_22 + o.fail_22,
            fail_user1: self.fail_user1 + o.fail_user1,
            fail_user2: self.fail_user2 + o.fail_user2,
            reach_22: self.reach_22 + o.reach_22,
            fail_22_after_pass: self.fail_22_after_pass + o.fail_22_after_pass,
        }
    }
}

/// Raw failure counters for NOMA (U₂ decoded first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NomaCounts {
    pub n: u64,
    pub fail_u2_stage: u64,
    pub fail_u1_stage: u64,
    pub fail_user1: u64,
    pub fail_user2: u64,
}

impl std::ops::Add for NomaCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            n: self.n + o.n,
            fail_u2_stage: self.fail_u2_stage + o.fail_u2_stage,
            fail_u1_stage: self.fail_u1_stage + o.fail_u1_stage,
            fail_user1: self.fail_user1 + o.fail_user1,
            fail_user2: self.fail_user2 + o.fail_user2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McCounts {
    Rsma(RsmaCounts),
    Noma(NomaCounts),
}

/// Throughput estimate `(1 − p̂) R` with standard error `R · se(p̂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputEstimate {
    pub value: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McRun {
    pub seed: u64,
    pub n_samples: u64,
    pub scheme: Scheme,
    pub coupling: StageCoupling,
    pub counts: McCounts,
    /// Per-stage estimates; `None` for NOMA.
    pub stage_21: Option<McEstimate>,
    pub stage_11: Option<McEstimate>,
    pub stage_22: Option<McEstimate>,
    pub user1: McEstimate,
    pub user2: McEstimate,
    pub throughput1: ThroughputEstimate,
    pub throughput2: ThroughputEstimate,
}

impl McRun {
    pub fn estimate(&self, target: Target) -> Option<McEstimate> {
        match target {
            Target::Stage21 => self.stage_21,
            Target::Stage11 => self.stage_11,
            Target::Stage22 => self.stage_22,
            Target::User1 => Some(self.user1),
            Target::User2 => Some(self.user2),
        }
    }
}

/// Monte Carlo outage estimate with the default (independent) stage coupling.
pub fn estimate_outage(cfg: &SystemConfig, scheme: Scheme, seed: u64, n_samples: u64) -> Result<McRun, ConfigError> {
    estimate_outage_with(cfg, scheme, &McOptions::new(seed, n_samples))
}

pub fn estimate_outage_with(cfg: &SystemConfig, scheme: Scheme, opts: &McOptions) -> Result<McRun, ConfigError> {
    if opts.n_samples == 0 {
        return Err(ConfigError::new("samples", "must be >= 1", 0));
    }
    let point = OperatingPoint::new(*cfg)?;
    let counts = match opts.threads {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build()
                .expect("thread pool");
            pool.install(|| count_all(&point, scheme, opts))
        }
        None => count_all(&point, scheme, opts),
    };
    Ok(assemble(&point.cfg, scheme, opts, counts))
}

fn chunk_bounds(n_samples: u64) -> impl ParallelIterator<Item = (u64, u64)> {
    let n_chunks = n_samples.div_ceil(CHUNK_SAMPLES);
    (0..n_chunks).into_par_iter().map(move |i| {
        let start = i * CHUNK_SAMPLES;
        (i, (n_samples - start).min(CHUNK_SAMPLES))
    })
}

fn count_all(point: &OperatingPoint, scheme: Scheme, opts: &McOptions) -> McCounts {
    match scheme {
        Scheme::Rsma => McCounts::Rsma(
            chunk_bounds(opts.n_samples)
                .map(|(i, len)| rsma_chunk(point, opts, i, len))
                .reduce(RsmaCounts::default, |a, b| a + b),
        ),
        Scheme::Noma => McCounts::Noma(
            chunk_bounds(opts.n_samples)
                .map(|(i, len)| noma_chunk(point, opts, i, len))
                .reduce(NomaCounts::default, |a, b| a + b),
        ),
    }
}

#[inline]
fn draw_pair<R: rand::Rng>(point: &OperatingPoint, rng: &mut R) -> ChannelPair {
    ChannelPair {
        x1: sample_channel_power(&point.stats1, point.cfg.m1(), rng),
        x2: sample_channel_power(&point.stats2, point.cfg.m2(), rng),
    }
}

fn rsma_chunk(point: &OperatingPoint, opts: &McOptions, chunk: u64, len: u64) -> RsmaCounts {
    let mut rng = substream(opts.seed, chunk);
    let mut c = RsmaCounts { n: len, ..Default::default() };
    for _ in 0..len {
        let draws = match opts.coupling {
            StageCoupling::Shared => StageDraws::shared(draw_pair(point, &mut rng)),
            StageCoupling::Independent => StageDraws {
                stage_21: draw_pair(point, &mut rng),
                stage_1: draw_pair(point, &mut rng),
                stage_22: draw_pair(point, &mut rng),
            },
        };
        let out = point.decode_chain(&draws);
        let [f21, f11, f22] = out.stage_failures(&point.th);
        c.fail_21 += f21 as u64;
        c.fail_11 += f11 as u64;
        c.fail_22 += f22 as u64;
        c.fail_user1 += out.user1_outage() as u64;
        c.fail_user2 += out.user2_outage() as u64;
        if out.stage2_ok {
            c.reach_22 += 1;
            c.fail_22_after_pass += !out.stage3_ok as u64;
        }
    }
    c
}

fn noma_chunk(point: &OperatingPoint, opts: &McOptions, chunk: u64, len: u64) -> NomaCounts {
    let mut rng = substream(opts.seed, chunk);
    let mut c = NomaCounts { n: len, ..Default::default() };
    let th_u2 = point.cfg.rate_2.exp2() - 1.0;
    for _ in 0..len {
        let draws = match opts.coupling {
            StageCoupling::Shared => NomaDraws::shared(draw_pair(point, &mut rng)),
            StageCoupling::Independent => NomaDraws {
                stage_u2: draw_pair(point, &mut rng),
                stage_u1: draw_pair(point, &mut rng),
            },
        };
        let out = point.noma(&draws);
        c.fail_u2_stage += (out.sinr_u2 < th_u2) as u64;
        c.fail_u1_stage += (out.sinr_u1 < point.th.th_1) as u64;
        c.fail_user2 += !out.u2_ok as u64;
        c.fail_user1 += !out.u1_ok as u64;
    }
    c
}

fn throughput_estimate(est: &McEstimate, rate: f64) -> ThroughputEstimate {
    ThroughputEstimate { value: (1.0 - est.p_hat) * rate, std_err: est.std_err * rate }
}

fn assemble(cfg: &SystemConfig, scheme: Scheme, opts: &McOptions, counts: McCounts) -> McRun {
    let n = opts.n_samples;
    let (stage_21, stage_11, stage_22, user1, user2) = match counts {
        McCounts::Rsma(c) => (
            Some(McEstimate::from_count(c.fail_21, n)),
            Some(McEstimate::from_count(c.fail_11, n)),
            Some(McEstimate::from_count(c.fail_22, n)),
            McEstimate::from_count(c.fail_user1, n),
            McEstimate::from_count(c.fail_user2, n),
        ),
        McCounts::Noma(c) => {
            (None, None, None, McEstimate::from_count(c.fail_user1, n), McEstimate::from_count(c.fail_user2, n))
        }
    };
    McRun {
        seed: opts.seed,
        n_samples: n,
        scheme,
        coupling: opts.coupling,
        counts,
        stage_21,
        stage_11,
        stage_22,
        user1,
        user2,
        throughput1: throughput_estimate(&user1, cfg.rate_1),
        throughput2: throughput_estimate(&user2, cfg.rate_2),
    }
}

/// One operating point of a validation grid: equal transmit powers, CSIR
/// quality and SIC residuals applied on top of a base configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub tx_power_dbm: f64,
    pub csir: CsirQuality,
    pub xi1: f64,
    pub xi2: f64,
}

impl GridPoint {
    pub fn apply(&self, base: &SystemConfig) -> SystemConfig {
        base.with_tx_power_dbm(self.tx_power_dbm)
            .with_csir(self.csir)
            .with_sic_residuals(self.xi1, self.xi2)
    }

    pub fn label(&self) -> String {
        format!("P={}dBm delta={} xi=({},{})", self.tx_power_dbm, self.csir, self.xi1, self.xi2)
    }
}

/// 60 points: P ∈ {0,…,40} dBm × δ ∈ {0.2, 0.9, perfect} × four (Ξ₁, Ξ₂)
/// pairs.
pub fn default_grid() -> Vec<GridPoint> {
    let mut grid = Vec::with_capacity(60);
    for p in [0.0, 10.0, 20.0, 30.0, 40.0] {
        for csir in [CsirQuality::Estimated(0.2), CsirQuality::Estimated(0.9), CsirQuality::Perfect] {
            for (xi1, xi2) in [(0.0, 0.0), (0.0, 0.1), (0.1, 0.0), (0.05, 0.05)] {
                grid.push(GridPoint { tx_power_dbm: p, csir, xi1, xi2 });
            }
        }
    }
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub point: GridPoint,
    pub target: Target,
    pub closed_form: f64,
    pub monte_carlo: f64,
    pub std_err: f64,
    pub z: f64,
    pub pass: bool,
    pub infeasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationTable {
    pub seed: u64,
    pub n_samples: u64,
    pub coupling: StageCoupling,
    pub rows: Vec<ValidationRow>,
}

impl ValidationTable {
    pub fn pass_count(&self) -> usize {
        self.rows.iter().filter(|r| r.pass).count()
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Fraction of rows with `|z| ≤ k` or within the absolute slack.
    pub fn fraction_within(&self, k: f64) -> f64 {
        if self.rows.is_empty() {
            return 1.0;
        }
        let ok = self
            .rows
            .iter()
            .filter(|r| r.z.abs() <= k || (r.monte_carlo - r.closed_form).abs() <= ABS_SLACK)
            .count();
        ok as f64 / self.rows.len() as f64
    }

    pub fn worst(&self) -> Option<&ValidationRow> {
        self.rows.iter().max_by(|a, b| a.z.abs().total_cmp(&b.z.abs()))
    }
}

/// Compares closed-form stage and user outages with simulation at every grid
/// point. Failures are recorded in the table, never raised.
pub fn validate_against_closed_form(
    base: &SystemConfig,
    grid: &[GridPoint],
    opts: &McOptions,
) -> Result<ValidationTable, ConfigError> {
    let per_point: Vec<Vec<ValidationRow>> = grid
        .iter()
        .map(|gp| {
            let cfg = gp.apply(base);
            let point = OperatingPoint::new(cfg)?;
            let cf = closed_form_report(&point);
            let mc = estimate_outage_with(&cfg, Scheme::Rsma, opts)?;
            Ok(Target::ALL
                .iter()
                .map(|&target| {
                    let est = mc.estimate(target).expect("RSMA reports every target");
                    let closed = cf.get(target);
                    let diff = est.p_hat - closed;
                    ValidationRow {
                        point: *gp,
                        target,
                        closed_form: closed,
                        monte_carlo: est.p_hat,
                        std_err: est.std_err,
                        z: diff / est.std_err,
                        pass: diff.abs() <= (Z_PASS * est.std_err).max(ABS_SLACK),
                        infeasible: cf.target_infeasible(target),
                    }
                })
                .collect())
        })
        .collect::<Result<_, ConfigError>>()?;
    Ok(ValidationTable {
        seed: opts.seed,
        n_samples: opts.n_samples,
        coupling: opts.coupling,
        rows: per_point.into_iter().flatten().collect(),
    })
}
