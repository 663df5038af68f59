//! The acceptance suite: fourteen checks of exact identities, simulator
//! agreement and limit laws, each reported as a JSON record.
//!
//! Reports hold no timings or host details, so a fixed seed gives
//! byte-identical output for any number of worker threads.

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::asp::{
    verify_mixed_identity, verify_race_identity, verify_ratio_law, verify_symmetry, verify_walk_scaling, AdaptedRates,
    AspSamplerConfig,
};
use crate::boltzmann::{
    bayes_event_check, chain_step_mass, crossing_prob_direct, crossing_prob_reweighted, jump_rate_asymptotics_check,
    BoltzmannChainState, PolygonConfig,
};
use crate::combinatorics::{ratio, tail_mass, EnumerationTable};
use crate::error::{Error, Result};
use crate::estimate::{count_successes, EstimateWithCI};
use crate::peeling::{
    run_mixed_growth, run_three_segment, CrossingResult, PeelConfig, ThreeSegmentVariant, TwoSegmentMode,
    TwoSegmentSimulator,
};
use crate::rng::seeded;
use crate::walk::{crossing_probability, FirstPassageSolver, StepDistribution};

/// Sample sizes of the Monte Carlo criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Full,
    /// Ten times fewer samples.
    Quick,
    /// A hundred times fewer; only meant for reproducibility checks.
    Smoke,
}

impl Profile {
    fn n(self, full: u64) -> u64 {
        match self {
            Profile::Full => full,
            Profile::Quick => full / 10,
            Profile::Smoke => (full / 100).max(500),
        }
    }
}

pub const CRITERIA: [&str; 14] = [
    "exact normalization",
    "exact Bayes identity",
    "complement identity",
    "simulator-solver agreement",
    "scaling to the arccos law",
    "symmetry identity",
    "ratio law",
    "race identity",
    "mixed-growth invariance",
    "three-segment symmetry",
    "Boltzmann estimator agreement",
    "chain conservation",
    "jump-rate asymptotics",
    "reproducibility",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    pub details: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub profile: Profile,
    pub seed: u64,
    pub criteria: Vec<CriterionReport>,
    pub pass: bool,
}

/// Runs criterion `id` (1-based). Errors inside a criterion become a failed
/// report carrying the message.
pub fn run_criterion(id: usize, profile: Profile, seed: u64) -> CriterionReport {
    let name = CRITERIA.get(id.wrapping_sub(1)).copied().unwrap_or("unknown").to_string();
    let s = seed.wrapping_add(1000 * id as u64);
    let outcome = match id {
        1 => normalization(),
        2 => bayes(),
        3 => complement(),
        4 => simulator_solver(profile, s),
        5 => scaling(),
        6 => symmetry(profile, s),
        7 => ratio_law(profile, s),
        8 => race(profile, s),
        9 => mixed(profile, s),
        10 => three_segment(profile, s),
        11 => boltzmann(profile, s),
        12 => chain(s),
        13 => rates(),
        14 => reproducibility(seed),
        _ => Err(Error::Domain(format!("no criterion {id}"))),
    };
    match outcome {
        Ok((pass, details)) => CriterionReport { id, name, pass, details },
        Err(e) => CriterionReport { id, name, pass: false, details: json!({ "error": e.to_string() }) },
    }
}

/// Criteria 1 to 13 only.
pub fn run_core(profile: Profile, seed: u64) -> Vec<CriterionReport> {
    (1..=13).map(|id| run_criterion(id, profile, seed)).collect()
}

pub fn verify_all(profile: Profile, seed: u64) -> AcceptanceReport {
    let criteria: Vec<CriterionReport> = (1..=14).map(|id| run_criterion(id, profile, seed)).collect();
    let pass = criteria.iter().all(|c| c.pass);
    AcceptanceReport { profile, seed, criteria, pass }
}

type Check = Result<(bool, Value)>;

fn est_json(e: &EstimateWithCI) -> Value {
    json!({ "value": e.value, "stderr": e.stderr, "samples": e.samples })
}

fn normalization() -> Check {
    let table = EnumerationTable::new(1000);
    let mut rows = Vec::new();
    let mut ok = true;
    for k in [0u64, 10, 1000] {
        let mut head = crate::combinatorics::ExactRational::zero();
        for j in 1..=k {
            head += table.p(j)?;
        }
        let total = ratio(2, 3) + ratio(2, 1) * (head + tail_mass(k));
        let exact = total.is_one();
        ok &= exact;
        rows.push(json!({ "K": k, "sum_is_one": exact }));
    }
    Ok((ok, json!({ "cases": rows })))
}

fn bayes() -> Check {
    let mut failures = Vec::new();
    for m in 2..=100 {
        if !bayes_event_check(m)?.equal {
            failures.push(m);
        }
    }
    Ok((failures.is_empty(), json!({ "m_range": [2, 100], "failures": failures })))
}

fn complement() -> Check {
    let solver = FirstPassageSolver::new(5000)?;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for a in 1..=10u64 {
        for b in 1..=10u64 {
            let sum = solver.prob_at_least(a, b)? + solver.prob_at_least(b, a)?;
            let bound = solver.escape(a)? + solver.escape(b)?;
            let dev = (sum - 1.0).abs();
            worst = worst.max(dev / bound);
            if dev > 2.0 * bound {
                failures.push([a, b]);
            }
        }
    }
    Ok((failures.is_empty(), json!({ "truncation": 5000, "worst_deviation_over_bound": worst, "failures": failures })))
}

fn simulator_solver(profile: Profile, seed: u64) -> Check {
    let dist = StepDistribution::default();
    let runs = profile.n(1_000_000);
    let mut rows = Vec::new();
    let mut ok = true;
    for (i, (a, b)) in [(2u64, 5u64), (5, 2), (3, 3), (7, 1)].into_iter().enumerate() {
        let sim = TwoSegmentSimulator::new(a, b, TwoSegmentMode::Primary, PeelConfig::default())?;
        let s = seed + i as u64;
        let black = count_successes(runs, s, |rng| {
            sim.run(&dist, rng).map(|o| o.result == CrossingResult::BlackCrossing).unwrap_or(false)
        });
        let e = EstimateWithCI::proportion(black, runs, s);
        let q = crossing_probability(a, b)?;
        let z = e.z_score(q);
        ok &= z < 3.0;
        rows.push(json!({ "a": a, "b": b, "estimate": est_json(&e), "exact": q, "z": z }));
    }
    Ok((ok, json!({ "cases": rows })))
}

fn scaling() -> Check {
    let lambdas = [10, 30, 100, 300];
    let even = verify_walk_scaling(1.0, 1.0, &lambdas, None, 0, 0.02)?;
    let wide = verify_walk_scaling(1.0, 3.0, &lambdas, None, 0, 0.05)?;
    let row = |r: &crate::asp::ScalingReport| {
        let points: Vec<Value> = r
            .points
            .iter()
            .map(|p| json!({ "lambda": p.parameters["lambda"], "value": p.estimate, "limit": p.closed_form }))
            .collect();
        json!({ "points": points, "trend_ok": r.trend_ok, "pass": r.pass })
    };
    Ok((even.pass && wide.pass, json!({ "q_l_l": row(&even), "q_l_3l": row(&wide) })))
}

fn symmetry(profile: Profile, seed: u64) -> Check {
    let cfg = AspSamplerConfig::exact_landing(10_000);
    let (reports, ok) = verify_symmetry(3.0, 1.0, profile.n(100_000), &cfg, seed, 0.015)?;
    let sides: Vec<Value> = reports
        .iter()
        .map(|r| json!({ "side": r.identity, "estimate": r.estimate, "stderr": r.stderr, "closed_form": r.closed_form }))
        .collect();
    Ok((ok, json!({ "a": 3, "b": 1, "lambda": 10_000, "sides": sides })))
}

fn ratio_law(profile: Profile, seed: u64) -> Check {
    let reports = verify_ratio_law(&[1.0, 2.0, 8.0], profile.n(100_000), &AspSamplerConfig::walk(64), seed, 0.015)?;
    let rows: Vec<Value> = reports
        .iter()
        .map(|r| json!({ "t": r.parameters["t"], "estimate": r.estimate, "stderr": r.stderr, "closed_form": r.closed_form }))
        .collect();
    Ok((reports.iter().all(|r| r.pass), json!({ "lambda": 64, "cases": rows })))
}

fn race(profile: Profile, seed: u64) -> Check {
    let r = verify_race_identity(3.0, 1.0, profile.n(100_000), &AspSamplerConfig::walk(64), seed, 0.015)?;
    Ok((r.pass, json!({ "a": 3, "b": 1, "estimate": r.estimate, "stderr": r.stderr, "closed_form": r.closed_form })))
}

fn mixed(profile: Profile, seed: u64) -> Check {
    let dist = StepDistribution::default();
    let cfg = PeelConfig::default();
    let (a, b) = (3u64, 5u64);
    let sim = TwoSegmentSimulator::new(a, b, TwoSegmentMode::Primary, cfg)?;
    let n_two = profile.n(100_000);
    let two = count_successes(n_two, seed, |rng| {
        sim.run(&dist, rng).map(|o| o.result == CrossingResult::BlackCrossing).unwrap_or(false)
    });
    let two = EstimateWithCI::proportion(two, n_two, seed);
    let mut ok = true;
    let mut discrete = Vec::new();
    for (i, ratio) in [1.0, 4.0].into_iter().enumerate() {
        let s = seed + 1 + i as u64;
        let n = profile.n(20_000);
        let black = count_successes(n, s, |rng| {
            run_mixed_growth(a, b, ratio, &cfg, &dist, rng).map(|o| o.result == CrossingResult::BlackCrossing).unwrap_or(false)
        });
        let e = EstimateWithCI::proportion(black, n, s);
        let z = e.z_score_against(&two);
        ok &= z < 3.0;
        discrete.push(json!({ "rate_ratio": ratio, "estimate": est_json(&e), "z": z }));
    }
    let mut continuum = Vec::new();
    for (i, (name, rates)) in [("equal", AdaptedRates::equal()), ("time-and-gap", AdaptedRates::time_and_gap())]
        .into_iter()
        .enumerate()
    {
        let r = verify_mixed_identity(1.0, 3.0, &rates, profile.n(20_000), &AspSamplerConfig::walk(64), seed + 10 + i as u64, 0.02)?;
        ok &= r.pass;
        continuum.push(json!({ "preset": name, "estimate": r.estimate, "stderr": r.stderr, "closed_form": r.closed_form }));
    }
    Ok((
        ok,
        json!({ "a": a, "b": b, "two_segment": est_json(&two), "discrete": discrete, "continuum_at_1_3": continuum }),
    ))
}

fn three_segment(profile: Profile, seed: u64) -> Check {
    let dist = StepDistribution::default();
    let cfg = PeelConfig::default();
    let runs = profile.n(100_000);
    let mut ok = true;
    let mut rows = Vec::new();
    for (i, (a, b, c)) in [(4u64, 2u64, 4u64), (3, 3, 3)].into_iter().enumerate() {
        let est = |v: ThreeSegmentVariant, s: u64| {
            let black = count_successes(runs, s, |rng| {
                run_three_segment(a, b, c, v, &cfg, &dist, rng)
                    .map(|o| o.result == CrossingResult::BlackCrossing)
                    .unwrap_or(false)
            });
            EstimateWithCI::proportion(black, runs, s)
        };
        let l = est(ThreeSegmentVariant::LeftCorner, seed + 2 * i as u64);
        let r = est(ThreeSegmentVariant::RightCorner, seed + 2 * i as u64 + 1);
        let z = l.z_score_against(&r);
        ok &= z < 3.0;
        rows.push(json!({ "a": a, "b": b, "c": c, "left": est_json(&l), "right": est_json(&r), "z": z }));
    }
    Ok((ok, json!({ "cases": rows })))
}

fn boltzmann(profile: Profile, seed: u64) -> Check {
    let mut ok = true;
    let mut rows = Vec::new();
    for (i, (a, b, c, d)) in [(2, 2, 2, 2), (3, 1, 3, 1), (1, 3, 1, 3), (2, 4, 2, 4)].into_iter().enumerate() {
        let cfg = PolygonConfig::new(a, b, c, d)?;
        let s = seed + 2 * i as u64;
        let direct = crossing_prob_direct(&cfg, profile.n(1_000_000), s)?;
        let rew = crossing_prob_reweighted(&cfg, profile.n(400_000), s + 1)?;
        let z = direct.estimate.z_score_against(&rew.as_estimate());
        ok &= z < 3.0;
        rows.push(json!({
            "config": [a, b, c, d],
            "direct": est_json(&direct.estimate),
            "reweighted": est_json(&rew.as_estimate()),
            "weight_max": rew.weight_max,
            "z": z,
        }));
    }
    Ok((ok, json!({ "cases": rows })))
}

fn chain(seed: u64) -> Check {
    let table = EnumerationTable::new(128);
    let mut rng = seeded(seed);
    let mut failures = Vec::new();
    for _ in 0..100 {
        let s = BoltzmannChainState::new(rng.random_range(1..=30), rng.random_range(1..=30), rng.random_range(1..=30))?;
        if !chain_step_mass(&s, &table)?.total().is_one() {
            failures.push([s.a, s.b, s.c]);
        }
    }
    Ok((failures.is_empty(), json!({ "states": 100, "failures": failures })))
}

fn rates() -> Check {
    let r = jump_rate_asymptotics_check(1.0, 1.0, 1.0, &[0.5], &[0.5], &[100, 1_000, 10_000])?;
    let rows: Vec<Value> = r
        .rows
        .iter()
        .map(|x| json!({ "kind": x.kind, "lambda": x.lambda, "ratio": x.ratio }))
        .collect();
    Ok((r.pass, json!({ "rows": rows, "gamma_prime_estimate": r.gamma_prime_estimate, "gamma_prime": r.gamma_prime })))
}

/// Criteria 1 to 13 at the smoke profile, repeated and on pools of 1, 4
/// and 16 threads; the serialized reports must match byte for byte.
fn reproducibility(seed: u64) -> Check {
    let render = |threads: usize| -> Result<String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Consistency(e.to_string()))?;
        Ok(serde_json::to_string(&pool.install(|| run_core(Profile::Smoke, seed))).expect("serializable"))
    };
    let reference = render(1)?;
    let runs = [("repeat-1", render(1)?), ("workers-4", render(4)?), ("workers-16", render(16)?)];
    let mut ok = true;
    let mut rows = Vec::new();
    for (name, out) in &runs {
        let same = *out == reference;
        ok &= same;
        rows.push(json!({ "run": name, "identical": same }));
    }
    Ok((ok, json!({ "profile": Profile::Smoke, "bytes": reference.len(), "runs": rows })))
}
