//! Stage outages against direct numerical integration.
//!
//! Each stage event is rewritten from its SINR as `X < bound(Y)` with `X`, `Y`
//! the two independent channel powers, and integrated as
//! `∫ f_Y(y) F_X(bound(y)) dy` with tanh-sinh quadrature. The Gamma CDF and
//! density come from statrs; nothing is shared with the closed forms.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_feasible, rel, stage_integrals};
use rsma::analytic::{outage_stage_11, outage_stage_21, outage_stage_22};
use rsma::channel::CsirQuality;
use rsma::{OperatingPoint, SystemConfig};

#[test]
fn stage_outages_match_quadrature_on_random_configs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let p = random_feasible(&mut rng);
        let quad = stage_integrals(&p);
        let closed = [outage_stage_21(&p).probability, outage_stage_11(&p).probability, outage_stage_22(&p).probability];
        for (k, (q, c)) in quad.iter().zip(closed).enumerate() {
            let r = rel(*q, c);
            worst = worst.max(r);
            assert!(r <= 1e-6, "config {i}, stage {k}: quadrature {q:e} vs closed form {c:e} (rel {r:e})");
        }
    }
    eprintln!("worst relative deviation {worst:e}");
}

#[test]
fn table_defaults_match_quadrature() {
    for csir in [CsirQuality::Perfect, CsirQuality::Estimated(0.2)] {
        for (xi1, xi2) in [(0.0, 0.0), (0.1, 0.05)] {
            let p = OperatingPoint::new(SystemConfig::default().with_csir(csir).with_sic_residuals(xi1, xi2)).unwrap();
            let quad = stage_integrals(&p);
            let closed = [outage_stage_21(&p).probability, outage_stage_11(&p).probability, outage_stage_22(&p).probability];
            for (q, c) in quad.iter().zip(closed) {
                assert!(rel(*q, c) <= 1e-6, "{q:e} vs {c:e}");
            }
        }
    }
}
