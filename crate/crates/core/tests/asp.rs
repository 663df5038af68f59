use percmap::asp::{
    ks_critical_99, ks_statistic, mixed_tally, overshoot_cdf_closed, verify_mixed_identity, verify_race_identity,
    verify_ratio_law, verify_symmetry, verify_walk_scaling, AdaptedRates, AspMethod, AspSampler, AspSamplerConfig,
};
use percmap::estimate::{run_tasks, EstimateWithCI};
use percmap::walk::StepDistribution;

fn draws(a: f64, config: AspSamplerConfig, n: u64, seed: u64) -> Vec<(Option<f64>, f64)> {
    let d = StepDistribution::default();
    let s = AspSampler::new(a, config).unwrap();
    run_tasks(n, seed, |rng, k| {
        (0..k)
            .map(|_| {
                let h = s.sample(&d, rng).done().unwrap();
                (h.hit_time, h.overshoot)
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

#[test]
fn walk_embedding_overshoot_law() {
    let xs = draws(1.0, AspSamplerConfig::walk(64), 100_000, 1);
    let frac = |b: f64| xs.iter().filter(|(_, o)| *o > b).count() as f64 / xs.len() as f64;
    assert!((frac(1.0) - 0.5).abs() < 0.01, "{}", frac(1.0));
    assert!((frac(1.0 / 3.0) - 2.0 / 3.0).abs() < 0.015, "{}", frac(1.0 / 3.0));
    assert!(xs.iter().all(|(t, o)| t.unwrap() > 0.0 && *o >= 0.0));
}

#[test]
fn overshoot_law_is_scale_invariant() {
    let n = 20_000;
    let one: Vec<f64> = draws(1.0, AspSamplerConfig::exact_landing(10_000), n, 2).into_iter().map(|x| x.1).collect();
    let two: Vec<f64> = draws(2.0, AspSamplerConfig::exact_landing(10_000), n, 3).into_iter().map(|x| x.1 / 2.0).collect();
    let d = ks_statistic(&one, &two);
    assert!(d < ks_critical_99(one.len(), two.len()), "D = {d}");
}

#[test]
fn hitting_time_is_scale_covariant() {
    let n = 10_000;
    let one: Vec<f64> = draws(1.0, AspSamplerConfig::walk(64), n, 4).into_iter().map(|x| x.0.unwrap()).collect();
    let two: Vec<f64> =
        draws(2.0, AspSamplerConfig::walk(64), n, 5).into_iter().map(|x| x.0.unwrap() / 2f64.powf(1.5)).collect();
    let d = ks_statistic(&one, &two);
    assert!(d < ks_critical_99(one.len(), two.len()), "D = {d}");
}

#[test]
fn symmetry_identity() {
    let cfg = AspSamplerConfig::exact_landing(10_000);
    for (a, b) in [(1.0, 1.0), (3.0, 1.0)] {
        let (reports, ok) = verify_symmetry(a, b, 100_000, &cfg, 6, 0.015).unwrap();
        assert!(ok, "{reports:?}");
    }
    let (r, _) = verify_symmetry(1.0, 4.0, 100_000, &cfg, 7, 0.015).unwrap();
    let z = (r[0].estimate - r[1].estimate).abs() / r[0].stderr.hypot(r[1].stderr);
    assert!(z < 3.0, "{r:?}");
    assert!((r[0].closed_form - (0.6f64).acos() / std::f64::consts::PI).abs() < 1e-15);
}

#[test]
fn symmetry_with_euler_scheme() {
    let cfg = AspSamplerConfig { method: AspMethod::StableEuler { step: 1e-3 }, ..Default::default() };
    let (r, ok) = verify_symmetry(3.0, 1.0, 10_000, &cfg, 8, 0.02).unwrap();
    assert!(ok, "{r:?}");
}

#[test]
fn ratio_law() {
    let r = verify_ratio_law(&[0.5, 1.0, 2.0, 8.0], 40_000, &AspSamplerConfig::walk(64), 9, 0.015).unwrap();
    for rep in &r {
        assert!(rep.pass, "{rep:?}");
    }
    assert!((r[1].estimate - 0.5).abs() < 0.01);
    // P(R > 1/2) + P(R > 2) = 1 for a ratio of i.i.d. variables.
    let s = r[0].estimate + r[2].estimate;
    assert!((s - 1.0).abs() < 3.0 * r[0].stderr.hypot(r[2].stderr), "{s}");
}

#[test]
fn race_identity() {
    let cfg = AspSamplerConfig::walk(64);
    for (a, b, tol) in [(1.0, 1.0, 0.01), (3.0, 1.0, 0.015), (1.0, 3.0, 0.015)] {
        let r = verify_race_identity(a, b, 40_000, &cfg, 10, tol).unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn mixed_identity_under_time_changes() {
    let cfg = AspSamplerConfig::walk(64);
    let r = verify_mixed_identity(1.0, 1.0, &AdaptedRates::equal(), 20_000, &cfg, 11, 0.01).unwrap();
    assert!(r.pass, "{r:?}");
    let r = verify_mixed_identity(1.0, 3.0, &AdaptedRates::equal(), 20_000, &cfg, 12, 0.015).unwrap();
    assert!(r.pass, "{r:?}");
    let r = verify_mixed_identity(1.0, 3.0, &AdaptedRates::time_and_gap(), 20_000, &cfg, 13, 0.02).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn mixed_decomposition_has_equal_rates() {
    let t = mixed_tally(1.0, 3.0, &AdaptedRates::equal(), 30_000, &AspSamplerConfig::walk(64), 14).unwrap();
    let n = t.completed();
    let x = EstimateWithCI::proportion(t.first_hits_sum_negative, n, 14);
    let y = EstimateWithCI::proportion(t.second_hits_sum_negative, n, 14);
    // The two cells are negatively correlated multinomial counts; the
    // variance of the difference is (p + q - (p - q)^2) / n.
    let sd = ((x.value + y.value - (x.value - y.value).powi(2)) / n as f64).sqrt();
    assert!((x.value - y.value).abs() < 3.0 * sd, "{t:?}");
}

#[test]
fn walk_scaling_exact() {
    let lambdas = [10, 30, 100, 300];
    let r = verify_walk_scaling(1.0, 1.0, &lambdas, None, 0, 0.02).unwrap();
    assert!(r.pass, "{r:?}");
    let r = verify_walk_scaling(1.0, 3.0, &lambdas, None, 0, 0.05).unwrap();
    assert!(r.pass && r.trend_ok, "{r:?}");
    let devs: Vec<f64> = r.points.iter().map(|p| (p.estimate - p.closed_form).abs()).collect();
    assert!(devs[3] < devs[0] / 10.0, "{devs:?}");
    // lambda = 1 is a finite-size baseline.
    let base = verify_walk_scaling(1.0, 3.0, &[1], None, 0, 1.0).unwrap();
    assert!(base.points[0].estimate > 0.0 && base.points[0].estimate < 1.0);
}

#[test]
fn walk_scaling_sampled() {
    let r = verify_walk_scaling(1.0, 3.0, &[10, 30, 100], Some(50_000), 15, 0.02).unwrap();
    assert!(r.pass, "{r:?}");
    let exact = overshoot_cdf_closed(1.0, 3.0).unwrap();
    assert!(r.points.iter().all(|p| (p.estimate - exact).abs() < 0.02));
}

#[test]
fn verifiers_are_reproducible() {
    let cfg = AspSamplerConfig::walk(32);
    let a = verify_race_identity(2.0, 1.0, 5_000, &cfg, 16, 0.05).unwrap();
    let b = verify_race_identity(2.0, 1.0, 5_000, &cfg, 16, 0.05).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
