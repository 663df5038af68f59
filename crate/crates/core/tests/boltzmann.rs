use percmap::asp::AspSamplerConfig;
use percmap::boltzmann::{
    bayes_event_check, chain_step_mass, crossing_prob_direct, crossing_prob_reweighted, jump_rate_asymptotics_check,
    scaled_reweighted_limit, w_distribution, BoltzmannChainState, PolygonConfig, RateKind,
};
use percmap::combinatorics::EnumerationTable;
use percmap::estimate::EstimateWithCI;
use num_traits::One;
use rand::{Rng, SeedableRng};

fn cfg(a: u64, b: u64, c: u64, d: u64) -> PolygonConfig {
    PolygonConfig::new(a, b, c, d).unwrap()
}

fn direct(p: &PolygonConfig, n: u64, seed: u64) -> EstimateWithCI {
    let d = crossing_prob_direct(p, n, seed).unwrap();
    assert_eq!(d.undetermined, 0);
    d.estimate
}

fn reweighted(p: &PolygonConfig, n: u64, seed: u64) -> EstimateWithCI {
    let w = crossing_prob_reweighted(p, n, seed).unwrap();
    assert!(w.value >= 0.0 && w.value <= w.weight_max && w.weight_max.is_finite());
    w.as_estimate()
}

fn sum_z(x: &EstimateWithCI, y: &EstimateWithCI, target: f64) -> f64 {
    (x.value + y.value - target).abs() / x.stderr.hypot(y.stderr)
}

#[test]
fn bayes_identity_holds_exactly() {
    for m in 2..=100 {
        let c = bayes_event_check(m).unwrap();
        assert!(c.equal && c.lhs == c.rhs, "m = {m}");
    }
}

#[test]
fn direct_and_reweighted_estimators_agree() {
    let configs = [(2, 2, 2, 2), (3, 1, 3, 1), (1, 3, 1, 3), (1, 2, 4, 5), (5, 3, 2, 1)];
    for (i, &(a, b, c, d)) in configs.iter().enumerate() {
        let p = cfg(a, b, c, d);
        let x = direct(&p, 200_000, 10 + i as u64);
        let y = reweighted(&p, 100_000, 20 + i as u64);
        assert!(x.z_score_against(&y) < 3.0, "{p:?}: direct {x:?} reweighted {y:?}");
    }
}

#[test]
fn color_swap_gives_the_complement() {
    let x = direct(&cfg(5, 1, 5, 1), 100_000, 30);
    let y = direct(&cfg(1, 5, 1, 5), 100_000, 31);
    assert!(sum_z(&x, &y, 1.0) < 3.0, "{x:?} {y:?}");
    let x = reweighted(&cfg(3, 1, 3, 1), 50_000, 32);
    let y = reweighted(&cfg(1, 3, 1, 3), 50_000, 33);
    assert!(sum_z(&x, &y, 1.0) < 3.0, "{x:?} {y:?}");
}

#[test]
fn reflection_symmetry() {
    let x = reweighted(&cfg(1, 2, 3, 2), 50_000, 34);
    let y = reweighted(&cfg(3, 2, 1, 2), 50_000, 35);
    assert!(x.z_score_against(&y) < 3.0, "{x:?} {y:?}");
    let x = direct(&cfg(1, 2, 4, 3), 100_000, 36);
    let y = direct(&cfg(4, 2, 1, 3), 100_000, 37);
    assert!(x.z_score_against(&y) < 3.0, "{x:?} {y:?}");
}

#[test]
fn wider_white_segments_cross_less() {
    // Both estimators put (2,10,2,10) near 0.134.
    let wide = direct(&cfg(2, 10, 2, 10), 50_000, 38);
    let mid = direct(&cfg(2, 4, 2, 4), 50_000, 45);
    let even = direct(&cfg(2, 2, 2, 2), 50_000, 46);
    assert!(wide.value < mid.value && mid.value < even.value, "{wide:?} {mid:?} {even:?}");
    assert!(wide.value < 0.2, "{wide:?}");
}

#[test]
fn chain_mass_is_one_at_random_states() {
    let table = EnumerationTable::new(128);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(39);
    for _ in 0..100 {
        let s = BoltzmannChainState::new(rng.random_range(1..=30), rng.random_range(1..=30), rng.random_range(1..=30))
            .unwrap();
        assert!(chain_step_mass(&s, &table).unwrap().total().is_one(), "{s:?}");
    }
}

/// Two-sample chi-square over histogram bins.
fn chi2(x: &[u64], y: &[u64]) -> f64 {
    let (n1, n2) = (x.iter().sum::<u64>() as f64, y.iter().sum::<u64>() as f64);
    let (k1, k2) = ((n2 / n1).sqrt(), (n1 / n2).sqrt());
    x.iter()
        .zip(y)
        .filter(|(a, b)| **a + **b > 0)
        .map(|(&a, &b)| (k1 * a as f64 - k2 * b as f64).powi(2) / (a + b) as f64)
        .sum()
}

#[test]
fn w_distribution_matches_reference() {
    // 10^6 chain runs from (3,3,5), seed 4242.
    let reference = [291_209, 146_193, 125_460, 145_660, 291_478];
    let h = w_distribution(3, 3, 5, 200_000, 40).unwrap();
    assert_eq!(h.undetermined, 0);
    // 4 degrees of freedom, 99% quantile 13.28.
    let s = chi2(&reference, &h.counts);
    assert!(s < 13.28, "chi2 = {s}, {:?}", h.counts);
}

#[test]
fn w_distribution_symmetries() {
    let h = w_distribution(2, 2, 6, 100_000, 41).unwrap();
    let n = h.completed() as f64;
    for k in 0..3 {
        let (x, y) = (h.counts[k] as f64, h.counts[5 - k] as f64);
        let sd = ((x + y) - (x - y).powi(2) / n).sqrt();
        assert!((x - y).abs() < 3.0 * sd, "{:?}", h.counts);
    }
    let x = w_distribution(4, 1, 5, 100_000, 42).unwrap();
    let mut y = w_distribution(1, 4, 5, 100_000, 43).unwrap().counts;
    y.reverse();
    // 4 degrees of freedom, 99% quantile 13.28.
    let s = chi2(&x.counts, &y);
    assert!(s < 13.28, "chi2 = {s}: {:?} vs {y:?}", x.counts);
}

#[test]
fn jump_rates_approach_their_limits() {
    let r = jump_rate_asymptotics_check(1.0, 1.0, 1.0, &[0.5], &[0.5], &[100, 1_000, 10_000]).unwrap();
    assert!(r.pass, "{r:?}");
    for kind in [RateKind::Jump, RateKind::Termination] {
        let errs: Vec<f64> = r.rows.iter().filter(|x| x.kind == kind).map(|x| (x.ratio - 1.0).abs()).collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{kind:?}: {errs:?}");
        assert!(errs[2] < 0.02);
    }
    assert!((r.gamma_prime_estimate / r.gamma_prime - 1.0).abs() < 0.005);
}

#[test]
fn reweighted_formula_scales_to_the_continuum() {
    let r = scaled_reweighted_limit([1.0; 4], &[10, 30, 100], 5_000, &AspSamplerConfig::walk(64), 44).unwrap();
    assert!(r.trend_ok, "{r:?}");
    let last = r.points.last().unwrap();
    assert!(last.deviation < 0.05, "{r:?}");
}
