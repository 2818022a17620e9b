//! Kolmogorov–Smirnov checks of the channel-power sampler at α = 0.01.

use rand_distr::{Distribution, Gamma};
use statrs::distribution::{ContinuousCDF, Gamma as GammaLaw};

use rsma::channel::{sample_channel_power, substream, LinkStatistics};
use rsma::specfun::ShapeParam;

const N: usize = 100_000;
/// c(α) for α = 0.01.
const C_ALPHA: f64 = 1.628;

fn stats(est_var: f64) -> LinkStatistics {
    LinkStatistics { snr: 1.0, total_var: est_var, err_var: 0.0, est_var }
}

fn draws(m: u32, est_var: f64, seed: u64) -> Vec<f64> {
    let mut rng = substream(seed, 0);
    let m = ShapeParam::new(m).unwrap();
    let mut v: Vec<f64> = (0..N).map(|_| sample_channel_power(&stats(est_var), m, &mut rng)).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn two_sample_d(a: &[f64], b: &[f64]) -> f64 {
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

fn one_sample_d(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

#[test]
fn sum_of_exponentials_matches_generic_gamma_sampler() {
    let crit = C_ALPHA * (2.0 / N as f64).sqrt();
    for (m, omega) in [(1, 1.0), (3, 9.74e-8), (4, 2.5), (6, 0.3)] {
        let ours = draws(m, omega, 100 + m as u64);
        let mut rng = substream(200 + m as u64, 0);
        let g = Gamma::new(m as f64, omega / m as f64).unwrap();
        let mut theirs: Vec<f64> = (0..N).map(|_| g.sample(&mut rng)).collect();
        theirs.sort_by(f64::total_cmp);
        let d = two_sample_d(&ours, &theirs);
        assert!(d < crit, "m={m}: D={d} >= {crit}");
    }
}

#[test]
fn sampler_matches_gamma_cdf() {
    let crit = C_ALPHA / (N as f64).sqrt();
    for (m, omega) in [(1, 1.0), (2, 0.5), (3, 9.74e-8), (4, 8.0e-8)] {
        let law = GammaLaw::new(m as f64, m as f64 / omega).unwrap();
        let d = one_sample_d(&draws(m, omega, 7 * m as u64), |x| law.cdf(x));
        assert!(d < crit, "m={m}: D={d} >= {crit}");
    }
}

#[test]
fn ks_statistic_detects_wrong_shape() {
    // m = 3 draws tested against an m = 4 law of equal mean must be rejected
    let law = GammaLaw::new(4.0, 4.0).unwrap();
    let d = one_sample_d(&draws(3, 1.0, 5), |x| law.cdf(x));
    assert!(d > C_ALPHA / (N as f64).sqrt());
}
