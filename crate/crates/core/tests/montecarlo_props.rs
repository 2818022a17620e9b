//! Simulation engine properties: determinism, agreement with the closed
//! forms, stage coupling and common random numbers.

use rsma::analytic::{closed_form_report, Target};
use rsma::channel::CsirQuality;
use rsma::montecarlo::{
    default_grid, estimate_outage, estimate_outage_with, validate_against_closed_form, GridPoint, McCounts,
    McOptions, Scheme, StageCoupling,
};
use rsma::{OperatingPoint, SystemConfig};

fn noisy_config() -> SystemConfig {
    SystemConfig::default().with_csir(CsirQuality::Estimated(0.2)).with_sic_residuals(0.1, 0.05).with_tx_power_dbm(5.0)
}

#[test]
fn bit_identical_across_worker_counts() {
    for scheme in [Scheme::Rsma, Scheme::Noma] {
        for coupling in [StageCoupling::Independent, StageCoupling::Shared] {
            let runs: Vec<_> = [1, 2, 8]
                .into_iter()
                .map(|w| {
                    let opts = McOptions::new(77, 100_003).with_coupling(coupling).with_threads(w);
                    estimate_outage_with(&noisy_config(), scheme, &opts).unwrap()
                })
                .collect();
            for r in &runs[1..] {
                assert_eq!(r.counts, runs[0].counts);
                assert_eq!(r.user1.p_hat.to_bits(), runs[0].user1.p_hat.to_bits());
                assert_eq!(r.user2.p_hat.to_bits(), runs[0].user2.p_hat.to_bits());
            }
        }
    }
}

#[test]
fn different_seeds_differ() {
    let a = estimate_outage(&noisy_config(), Scheme::Rsma, 1, 50_000).unwrap();
    let b = estimate_outage(&noisy_config(), Scheme::Rsma, 2, 50_000).unwrap();
    assert_ne!(a.counts, b.counts);
}

#[test]
fn stage_estimates_match_closed_form_at_20_dbm() {
    let cfg = SystemConfig::default().with_csir(CsirQuality::Estimated(0.9)).with_tx_power_dbm(20.0);
    let cf = closed_form_report(&OperatingPoint::new(cfg).unwrap());
    for coupling in [StageCoupling::Independent, StageCoupling::Shared] {
        let run = estimate_outage_with(&cfg, Scheme::Rsma, &McOptions::new(5, 1_000_000).with_coupling(coupling)).unwrap();
        for t in [Target::Stage21, Target::Stage11, Target::Stage22] {
            let e = run.estimate(t).unwrap();
            assert!((e.p_hat - cf.get(t)).abs() <= 3.0 * e.std_err, "{coupling:?} {t:?}: {} vs {}", e.p_hat, cf.get(t));
        }
    }
}

#[test]
fn shared_draws_raise_user_outage_above_product_form() {
    // The first two stages fail on opposite tails of the same channel pair,
    // so under a shared realisation their failures are negatively correlated
    // and the chain outage exceeds the independent-stage composition.
    let cfg = SystemConfig::default();
    let cf = closed_form_report(&OperatingPoint::new(cfg).unwrap());
    let shared = estimate_outage_with(&cfg, Scheme::Rsma, &McOptions::new(9, 400_000).with_coupling(StageCoupling::Shared)).unwrap();
    let indep = estimate_outage(&cfg, Scheme::Rsma, 9, 400_000).unwrap();
    assert!(shared.user1.p_hat > cf.p_user1 + 5.0 * shared.user1.std_err);
    assert!((indep.user1.p_hat - cf.p_user1).abs() < 4.0 * indep.user1.std_err);
    // P(A ∪ B) ≥ max marginal holds either way
    assert!(shared.user1.p_hat >= shared.stage_21.unwrap().p_hat.max(shared.stage_11.unwrap().p_hat));
}

#[test]
fn chain_counters_are_exact() {
    let run = estimate_outage(&noisy_config(), Scheme::Rsma, 3, 200_000).unwrap();
    let McCounts::Rsma(c) = run.counts else { unreachable!() };
    assert_eq!(c.fail_user2 - c.fail_user1, c.fail_22_after_pass);
    // P2 − P1 = (1 − P1) · P̂(22 | reached)
    let lhs = run.user2.p_hat - run.user1.p_hat;
    let rhs = (1.0 - run.user1.p_hat) * (c.fail_22_after_pass as f64 / c.reach_22 as f64);
    assert!((lhs - rhs).abs() < 1e-12);
}

#[test]
fn first_stage_outage_nonincreasing_in_delta() {
    let mut prev = f64::INFINITY;
    for delta in [0.2, 0.5, 0.9] {
        let cfg = SystemConfig::default().with_csir(CsirQuality::Estimated(delta)).with_tx_power_dbm(0.0);
        let p = estimate_outage(&cfg, Scheme::Rsma, 31, 1_000_000).unwrap().stage_21.unwrap().p_hat;
        assert!(p <= prev, "delta={delta}: {p} > {prev}");
        prev = p;
    }
}

#[test]
fn validation_tables_are_reproducible() {
    let grid = &default_grid()[..4];
    let opts = McOptions::new(4, 20_000);
    let a = validate_against_closed_form(&SystemConfig::default(), grid, &opts).unwrap();
    let b = validate_against_closed_form(&SystemConfig::default(), grid, &opts).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.rows.len(), 4 * 5);
}

#[test]
fn validation_spot_points_pass() {
    let points = [
        GridPoint { tx_power_dbm: 10.0, csir: CsirQuality::Perfect, xi1: 0.0, xi2: 0.0 },
        GridPoint { tx_power_dbm: 10.0, csir: CsirQuality::Estimated(0.2), xi1: 0.1, xi2: 0.1 },
    ];
    let t = validate_against_closed_form(&SystemConfig::default(), &points, &McOptions::new(12, 1_000_000)).unwrap();
    for r in &t.rows {
        assert!(r.pass, "{} {:?}: cf {} mc {} z {}", r.point.label(), r.target, r.closed_form, r.monte_carlo, r.z);
    }
}
