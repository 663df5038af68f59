use percmap::estimate::{count_successes, run_tasks, EstimateWithCI};
use percmap::peeling::{
    run_mixed_growth, run_three_segment, CrossingResult, PeelConfig, ThreeSegmentVariant, TwoSegmentMode,
    TwoSegmentSimulator,
};
use percmap::walk::{crossing_probability, overshoot_pmf, FirstPassageSolver, StepDistribution};

fn two_segment(a: u64, b: u64, mode: TwoSegmentMode, runs: u64, seed: u64) -> EstimateWithCI {
    let d = StepDistribution::default();
    let sim = TwoSegmentSimulator::new(a, b, mode, PeelConfig::default()).unwrap();
    let black = count_successes(runs, seed, |rng| sim.run(&d, rng).unwrap().result == CrossingResult::BlackCrossing);
    EstimateWithCI::proportion(black, runs, seed)
}

fn three_segment(a: u64, b: u64, c: u64, v: ThreeSegmentVariant, runs: u64, seed: u64) -> EstimateWithCI {
    let d = StepDistribution::default();
    let cfg = PeelConfig::default();
    let black = count_successes(runs, seed, |rng| {
        run_three_segment(a, b, c, v, &cfg, &d, rng).unwrap().result == CrossingResult::BlackCrossing
    });
    EstimateWithCI::proportion(black, runs, seed)
}

fn mixed(a: u64, b: u64, ratio: f64, runs: u64, seed: u64) -> EstimateWithCI {
    let d = StepDistribution::default();
    let cfg = PeelConfig::default();
    let black = count_successes(runs, seed, |rng| {
        run_mixed_growth(a, b, ratio, &cfg, &d, rng).unwrap().result == CrossingResult::BlackCrossing
    });
    EstimateWithCI::proportion(black, runs, seed)
}

#[test]
fn equal_segments_cross_with_probability_half() {
    let e = two_segment(3, 3, TwoSegmentMode::Primary, 100_000, 1);
    assert!(e.z_score(0.5) < 3.0, "{e:?}");
}

#[test]
fn two_segment_frequency_matches_exact_law() {
    let q = crossing_probability(2, 5).unwrap();
    let (lo, hi) = FirstPassageSolver::new(5000).unwrap().crossing_bounds(2, 5).unwrap();
    assert!(lo <= q && q <= hi);
    let e = two_segment(2, 5, TwoSegmentMode::Primary, 1_000_000, 2);
    assert!(e.z_score(q) < 3.0, "{e:?} vs {q}");
}

#[test]
fn swapped_segments_give_the_complement() {
    let q = crossing_probability(2, 5).unwrap();
    let e = two_segment(5, 2, TwoSegmentMode::Primary, 200_000, 3);
    assert!(e.z_score(1.0 - q) < 3.0, "{e:?} vs {}", 1.0 - q);
}

#[test]
fn dual_exploration_gives_the_same_crossing_law() {
    for (a, b) in [(2, 5), (4, 1)] {
        let q = crossing_probability(a, b).unwrap();
        let e = two_segment(a, b, TwoSegmentMode::Dual, 200_000, 4);
        assert!(e.z_score(q) < 3.0, "({a},{b}) {e:?} vs {q}");
    }
}

#[test]
fn overshoot_histogram_matches_the_walk() {
    let d = StepDistribution::default();
    let a = 3;
    let bins = 30usize;
    let sim = TwoSegmentSimulator::new(a, 1, TwoSegmentMode::Primary, PeelConfig::default()).unwrap();
    let runs = 1_000_000u64;
    let parts = run_tasks(runs, 5, |rng, n| {
        let mut h = vec![0u64; bins + 1];
        for _ in 0..n {
            let o = sim.run(&d, rng).unwrap();
            assert_ne!(o.result, CrossingResult::Undetermined);
            h[(o.terminal_overshoot as usize).min(bins)] += 1;
        }
        h
    });
    let mut counts = vec![0u64; bins + 1];
    for p in parts {
        for (c, x) in counts.iter_mut().zip(p) {
            *c += x;
        }
    }
    let mut probs: Vec<f64> = (0..bins as u64).map(|j| overshoot_pmf(a, j).unwrap()).collect();
    probs.push(1.0 - probs.iter().sum::<f64>());
    let chi2: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&c, &p)| {
            let e = p * runs as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    // 30 degrees of freedom, 99% quantile 50.89.
    assert!(chi2 < 50.89, "chi2 = {chi2}");
}

#[test]
fn runs_are_determined_for_segments_up_to_one_hundred() {
    let d = StepDistribution::default();
    for (a, b) in [(1, 100), (100, 1), (100, 100), (37, 64)] {
        for mode in [TwoSegmentMode::Primary, TwoSegmentMode::Dual] {
            let sim = TwoSegmentSimulator::new(a, b, mode, PeelConfig::default()).unwrap();
            let undetermined = count_successes(5_000, 6, |rng| {
                sim.run(&d, rng).unwrap().result == CrossingResult::Undetermined
            });
            assert_eq!(undetermined, 0);
        }
    }
}

#[test]
fn three_segment_variants_agree() {
    let l = three_segment(4, 2, 4, ThreeSegmentVariant::LeftCorner, 100_000, 7);
    let r = three_segment(4, 2, 4, ThreeSegmentVariant::RightCorner, 100_000, 8);
    assert!(l.z_score_against(&r) < 3.0, "{l:?} vs {r:?}");
}

#[test]
fn three_segment_matches_race_oracle() {
    // 10^6 fair races from (3,3), black iff the second walk dies first with
    // overshoot below 3: 0.31341 +- 0.00046.
    let oracle = EstimateWithCI { value: 0.31341, stderr: 0.00046, samples: 1_000_000, seed: 333 };
    let e = three_segment(3, 3, 3, ThreeSegmentVariant::LeftCorner, 100_000, 9);
    assert!(e.z_score_against(&oracle) < 3.0, "{e:?}");
}

#[test]
fn wide_white_gap_rarely_crosses() {
    let e = three_segment(2, 200, 2, ThreeSegmentVariant::LeftCorner, 2_000, 10);
    assert!(e.value < 0.05, "{e:?}");
}

#[test]
fn three_segment_reflection_symmetry() {
    let triples = [(1, 1, 20), (3, 7, 2), (12, 4, 9), (5, 5, 1), (20, 3, 6), (2, 15, 11), (8, 1, 3), (6, 9, 17), (1, 2, 3), (14, 14, 5)];
    for (i, &(a, b, c)) in triples.iter().enumerate() {
        let x = three_segment(a, b, c, ThreeSegmentVariant::LeftCorner, 5_000, 100 + i as u64);
        let y = three_segment(c, b, a, ThreeSegmentVariant::LeftCorner, 5_000, 200 + i as u64);
        assert!(x.z_score_against(&y) < 3.0, "({a},{b},{c}) {x:?} vs {y:?}");
    }
}

#[test]
fn mixed_growth_keeps_the_crossing_law() {
    let q = crossing_probability(3, 5).unwrap();
    for (ratio, seed) in [(1.0, 11), (4.0, 12)] {
        let e = mixed(3, 5, ratio, 20_000, seed);
        assert!(e.z_score(q) < 3.0, "ratio {ratio}: {e:?} vs {q}");
    }
    let e = mixed(4, 4, 2.5, 20_000, 13);
    assert!(e.z_score(0.5) < 3.0, "{e:?}");
}

#[test]
fn mixed_growth_rejects_bad_rates() {
    let d = StepDistribution::default();
    let mut rng = percmap::rng::seeded(0);
    for r in [0.0, -1.0, f64::NAN, f64::INFINITY] {
        assert!(run_mixed_growth(1, 1, r, &PeelConfig::default(), &d, &mut rng).is_err());
    }
}
