//! Helpers shared by the integration tests.
#![allow(dead_code)]

use quadrature::double_exponential;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use rsma::analytic::{outage_stage_21, outage_stage_22};
use rsma::channel::{dbm_to_watts, CsirQuality};
use rsma::specfun::ShapeParam;
use rsma::{OperatingPoint, SystemConfig};

pub struct Law {
    pub m: f64,
    pub mean: f64,
}

impl Law {
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            gamma_lr(self.m, self.m * x / self.mean)
        }
    }

    pub fn ln_pdf(&self, y: f64) -> f64 {
        let rate = self.m / self.mean;
        self.m * rate.ln() + (self.m - 1.0) * y.ln() - rate * y - ln_gamma(self.m)
    }
}

/// `Pr(X < slope·Y + icpt)` by quadrature over `Y`, mapped onto (0, 1) via
/// `y = s·t/(1−t)` with `s` the mean of `Y`.
pub fn integrate_outage(x: &Law, y: &Law, slope: f64, icpt: f64) -> f64 {
    if slope == 0.0 {
        return x.cdf(icpt);
    }
    let s = y.mean;
    let g = |t: f64| {
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        let yy = s * t / (1.0 - t);
        let jac = s / ((1.0 - t) * (1.0 - t));
        (y.ln_pdf(yy)).exp() * x.cdf(slope * yy + icpt) * jac
    };
    // absolute target scaled to the size of the answer
    let scale = x.cdf(slope * y.mean + icpt).max(1e-300);
    let mut total = 0.0;
    // split at the mode region to help the tanh-sinh rule
    let cuts = [0.0, 0.25, 0.5, 0.75, 0.9, 1.0];
    for w in cuts.windows(2) {
        total += double_exponential::integrate(g, w[0], w[1], scale * 1e-12).integral;
    }
    total
}

pub fn stage_integrals(p: &OperatingPoint) -> [f64; 3] {
    let c = &p.cfg;
    let (s1, s2) = (p.stats1, p.stats2);
    let (r1, r2) = (s1.snr, s2.snr);
    let u1 = Law { m: c.m1().as_f64(), mean: s1.est_var };
    let u2 = Law { m: c.m2().as_f64(), mean: s2.est_var };
    let th = p.th;
    let d = c.alpha_22 + c.alpha_21 * c.sic_residual_2;

    // x2 ρ2 (α21 − th α22) < th (ρ1 x1 + ρ1Ω1e + ρ2Ω2e + 1)
    let gap21 = r2 * (c.alpha_21 - th.th_21 * c.alpha_22);
    let k21 = r1 * s1.err_var + r2 * s2.err_var + 1.0;
    let p21 = integrate_outage(&u2, &u1, th.th_21 * r1 / gap21, th.th_21 * k21 / gap21);

    // x1 ρ1 < th ((x2 + Ω2e) ρ2 d + ρ1Ω1e + 1)
    let k1 = s2.err_var * r2 * d + r1 * s1.err_var + 1.0;
    let p11 = integrate_outage(&u1, &u2, th.th_1 * r2 * d / r1, th.th_1 * k1 / r1);

    // x2 ρ2 (α22 − th α21 Ξ2) < th (ρ1 Ξ1 x1 + Ω2e ρ2 d + Ω1e ρ1 Ξ1 + 1)
    let gap22 = r2 * (c.alpha_22 - th.th_22 * c.alpha_21 * c.sic_residual_2);
    let k22 = s2.err_var * r2 * d + s1.err_var * r1 * c.sic_residual_1 + 1.0;
    let p22 = integrate_outage(&u2, &u1, th.th_22 * r1 * c.sic_residual_1 / gap22, th.th_22 * k22 / gap22);
    [p21, p11, p22]
}

/// A random valid configuration; the split may be infeasible.
pub fn random_config(rng: &mut ChaCha8Rng) -> SystemConfig {
    let mut cfg = SystemConfig::default()
        .with_csir(if rng.random_bool(0.25) {
            CsirQuality::Perfect
        } else {
            CsirQuality::Estimated(rng.random_range(0.05..2.0))
        })
        .with_sic_residuals(rng.random_range(0.0..0.2), rng.random_range(0.0..0.2))
        .with_rates(rng.random_range(0.2..1.2), rng.random_range(0.3..1.2))
        .with_rate_split(rng.random_range(0.05..0.6));
    cfg.user1.transmit_power = dbm_to_watts(rng.random_range(-10.0..40.0));
    cfg.user2.transmit_power = dbm_to_watts(rng.random_range(-10.0..40.0));
    cfg.user1.nakagami_m = ShapeParam::new(rng.random_range(1..=6)).unwrap();
    cfg.user2.nakagami_m = ShapeParam::new(rng.random_range(1..=6)).unwrap();
    cfg.user1.distance_m = rng.random_range(30.0..120.0);
    cfg.user2.distance_m = rng.random_range(30.0..120.0);
    cfg.alpha_21 = rng.random_range(0.1..0.6);
    cfg.alpha_22 = 1.0 - cfg.alpha_21;
    cfg
}

pub fn random_feasible(rng: &mut ChaCha8Rng) -> OperatingPoint {
    loop {
        let p = OperatingPoint::new(random_config(rng)).unwrap();
        if !outage_stage_21(&p).infeasible && !outage_stage_22(&p).infeasible {
            return p;
        }
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
