//! The spectrally negative 3/2-stable ("Airy") process: closed-form laws,
//! first-passage samplers and Monte Carlo verifiers of the continuum
//! identities.
//!
//! The main sampler embeds the process in the boundary walk: started at
//! `ceil(lambda a)` with spacing `1/lambda`, one non-lazy move at spacing
//! `delta` taking mean time `2 delta^{3/2}`. To keep the cost per sample
//! bounded while the process wanders over many scales, the lattice adapts to
//! the current height. Each walk lives in a band `[top/8, top)`: on hitting
//! `top` (exactly, since upward moves are `+1`) the spacing doubles, and on
//! falling below `top/8` it halves until the position is at least `top/4`.
//! Both changes keep the position exact, so the relative resolution never
//! drops below `lambda / 2` lattice points per unit of height.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::estimate::{count_successes, run_tasks, EstimateWithCI};
use crate::rng::SimRng;
use crate::walk::{crossing_probability, LandingSampler, Outcome, StepDistribution, Walker};

/// `P_a(|Y_{T_-}| > b) = arccos((b - a)/(a + b)) / pi`.
pub fn overshoot_cdf_closed(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("starts must be positive and finite, got ({a}, {b})")));
    }
    Ok(((b - a) / (a + b)).clamp(-1.0, 1.0).acos() / PI)
}

/// `P(tau / tau' > t) = arccos((t^{2/3} - 1)/(t^{2/3} + 1)) / pi` for i.i.d.
/// hitting times from 1. Equals `overshoot_cdf_closed(b, a)` at
/// `t = (a/b)^{3/2}`.
pub fn ratio_law_closed(t: f64) -> Result<f64> {
    if !(t > 0.0) || t.is_nan() {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    let s = t.powf(2.0 / 3.0);
    Ok(((s - 1.0) / (s + 1.0)).clamp(-1.0, 1.0).acos() / PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AspMethod {
    /// Band-adaptive walk embedding; gives hitting time and overshoot.
    WalkEmbedding,
    /// Overshoot only, drawn from the exact landing law of the walk started
    /// at `ceil(lambda a)`.
    ExactLanding,
    /// Euler scheme with stable increments and steps `h = step y^{3/2}`.
    /// The time scale differs from the walk embedding by a constant factor.
    StableEuler { step: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AspSamplerConfig {
    pub lattice_scale: u64,
    /// Maximum number of walk moves (or Euler steps) per sample.
    pub budget: u64,
    pub method: AspMethod,
}

impl Default for AspSamplerConfig {
    fn default() -> Self {
        AspSamplerConfig { lattice_scale: 64, budget: 1_000_000_000, method: AspMethod::WalkEmbedding }
    }
}

impl AspSamplerConfig {
    pub fn walk(lattice_scale: u64) -> Self {
        AspSamplerConfig { lattice_scale, ..Default::default() }
    }

    pub fn exact_landing(lattice_scale: u64) -> Self {
        AspSamplerConfig { lattice_scale, method: AspMethod::ExactLanding, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.lattice_scale < 1 {
            return Err(Error::Domain("lattice_scale must be >= 1".into()));
        }
        if let AspMethod::StableEuler { step } = self.method {
            if !(step > 0.0 && step < 1.0) {
                return Err(Error::Domain(format!("Euler step factor must be in (0,1), got {step}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuumFirstPassage {
    /// `None` for [`AspMethod::ExactLanding`].
    pub hit_time: Option<f64>,
    pub overshoot: f64,
}

/// Walk on a lattice of spacing `delta` with band `[top/8, top)`.
#[derive(Debug, Clone, Copy)]
struct BandWalk {
    x: u64,
    delta: f64,
    top: u64,
}

impl BandWalk {
    /// Starts at `ceil(lambda start)` on spacing `1/lambda`; starts above the
    /// band are rounded up onto the coarser lattice.
    fn new(start: f64, lambda: u64) -> Self {
        let top = (4 * lambda).next_power_of_two();
        let mut x = ((start * lambda as f64).ceil() as u64).max(1);
        let mut delta = 1.0 / lambda as f64;
        while x >= top {
            x = x.div_ceil(2);
            delta *= 2.0;
        }
        let mut w = BandWalk { x, delta, top };
        if w.x < w.top / 8 {
            w.refine();
        }
        w
    }

    #[inline]
    fn value(&self) -> f64 {
        self.x as f64 * self.delta
    }

    /// Mean time of one non-lazy move.
    #[inline]
    fn move_time(&self) -> f64 {
        2.0 * self.delta * self.delta.sqrt()
    }

    fn coarsen(&mut self) {
        self.x = self.top / 2;
        self.delta *= 2.0;
    }

    fn refine(&mut self) {
        while self.x < self.top / 4 {
            self.x *= 2;
            self.delta *= 0.5;
        }
    }

    /// One non-lazy move. Returns the overshoot if the walk enters `Z^-`.
    #[inline]
    fn step<R: Rng + ?Sized>(&mut self, dist: &StepDistribution, rng: &mut R) -> Option<f64> {
        if rng.random::<f64>() < 2.0 / 3.0 {
            self.x += 1;
            if self.x == self.top {
                self.coarsen();
            }
            None
        } else {
            let k = dist.sample_jump(rng);
            if k >= self.x {
                return Some((k - self.x) as f64 * self.delta);
            }
            self.x -= k;
            if self.x < self.top / 8 {
                self.refine();
            }
            None
        }
    }
}

fn gamma_time<R: Rng + ?Sized>(moves: u64, move_time: f64, rng: &mut R) -> f64 {
    if moves == 0 {
        return 0.0;
    }
    move_time * Gamma::new(moves as f64, 1.0).expect("positive shape").sample(rng)
}

/// Chambers-Mallows-Stuck draw of a zero-mean stable variable of index 3/2
/// with only negative jumps.
fn stable_increment<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    const ALPHA: f64 = 1.5;
    const B: f64 = PI / 6.0;
    let s = 2f64.powf(1.0 / 3.0);
    let v = (rng.random::<f64>() - 0.5) * PI;
    let w: f64 = Exp1.sample(rng);
    let v = v.clamp(-FRAC_PI_2 + 1e-12, FRAC_PI_2 - 1e-12);
    s * (ALPHA * (v + B)).sin() / v.cos().powf(1.0 / ALPHA)
        * ((v - ALPHA * (v + B)).cos() / w).powf((1.0 - ALPHA) / ALPHA)
}

/// First-passage sampler for a fixed start, with per-start tables built once.
pub struct AspSampler {
    start: f64,
    config: AspSamplerConfig,
    landing: Option<LandingSampler>,
}

impl AspSampler {
    pub fn new(start: f64, config: AspSamplerConfig) -> Result<Self> {
        if !(start > 0.0 && start.is_finite()) {
            return Err(Error::Domain(format!("start must be positive, got {start}")));
        }
        config.validate()?;
        let landing = match config.method {
            AspMethod::ExactLanding => {
                Some(LandingSampler::new(((start * config.lattice_scale as f64).ceil() as u64).max(1))?)
            }
            _ => None,
        };
        Ok(AspSampler { start, config, landing })
    }

    pub fn sample<R: Rng + ?Sized>(&self, dist: &StepDistribution, rng: &mut R) -> Outcome<ContinuumFirstPassage> {
        match self.config.method {
            AspMethod::WalkEmbedding => self.walk_embedding(dist, rng),
            AspMethod::ExactLanding => {
                let (_, j) = self.landing.as_ref().expect("built in new").sample(dist, rng);
                Outcome::Done(ContinuumFirstPassage {
                    hit_time: None,
                    overshoot: j as f64 / self.config.lattice_scale as f64,
                })
            }
            AspMethod::StableEuler { step } => self.euler(step, rng),
        }
    }

    fn walk_embedding<R: Rng + ?Sized>(&self, dist: &StepDistribution, rng: &mut R) -> Outcome<ContinuumFirstPassage> {
        let mut w = BandWalk::new(self.start, self.config.lattice_scale);
        let mut time = 0.0;
        let mut band_moves = 0u64;
        let mut total = 0u64;
        while total < self.config.budget {
            let run = dist.sample_up_run(rng);
            let room = w.top - w.x;
            if run >= room {
                band_moves += room;
                total += room;
                time += gamma_time(band_moves, w.move_time(), rng);
                band_moves = 0;
                w.coarsen();
                continue;
            }
            w.x += run;
            band_moves += run + 1;
            total += run + 1;
            let k = dist.sample_jump(rng);
            if k >= w.x {
                time += gamma_time(band_moves, w.move_time(), rng);
                return Outcome::Done(ContinuumFirstPassage {
                    hit_time: Some(time),
                    overshoot: (k - w.x) as f64 * w.delta,
                });
            }
            w.x -= k;
            if w.x < w.top / 8 {
                time += gamma_time(band_moves, w.move_time(), rng);
                band_moves = 0;
                w.refine();
            }
        }
        Outcome::Exhausted { moves: total }
    }

    fn euler<R: Rng + ?Sized>(&self, step: f64, rng: &mut R) -> Outcome<ContinuumFirstPassage> {
        let mut y = self.start;
        let mut t = 0.0;
        for _ in 0..self.config.budget {
            let h = step * y * y.sqrt();
            t += h;
            y += h.powf(2.0 / 3.0) * stable_increment(rng);
            if y <= 0.0 {
                return Outcome::Done(ContinuumFirstPassage { hit_time: Some(t), overshoot: -y });
            }
        }
        Outcome::Exhausted { moves: self.config.budget }
    }
}

/// One-off convenience around [`AspSampler`].
pub fn sample_first_passage<R: Rng + ?Sized>(
    a: f64,
    config: &AspSamplerConfig,
    dist: &StepDistribution,
    rng: &mut R,
) -> Result<Outcome<ContinuumFirstPassage>> {
    Ok(AspSampler::new(a, *config)?.sample(dist, rng))
}

/// Time-change rates `r_i = base_i + time_i t + gap_i |Y - Y'|` for the two
/// processes. Affine in the common clock and driven by the current gap, so
/// adapted to the pair's filtration; positive whenever `base > 0` and the
/// other coefficients are nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptedRates {
    pub base: [f64; 2],
    pub time: [f64; 2],
    pub gap: [f64; 2],
}

impl AdaptedRates {
    pub fn constant(r1: f64, r2: f64) -> Self {
        AdaptedRates { base: [r1, r2], time: [0.0; 2], gap: [0.0; 2] }
    }

    /// Equal unit rates.
    pub fn equal() -> Self {
        Self::constant(1.0, 1.0)
    }

    /// First process at rate `1 + t`, second at `1/2 + |Y - Y'|`.
    pub fn time_and_gap() -> Self {
        AdaptedRates { base: [1.0, 0.5], time: [1.0, 0.0], gap: [0.0, 1.0] }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.base.iter().all(|&r| r > 0.0 && r.is_finite())
            && self.time.iter().chain(&self.gap).all(|&r| r >= 0.0 && r.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Contract(format!("rates must stay positive: {self:?}")))
        }
    }

    fn at(&self, i: usize, t: f64, gap: f64) -> f64 {
        self.base[i] + self.time[i] * t + self.gap[i] * gap
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RatePreset {
    /// Constant equal rates.
    Equal,
    /// [`AdaptedRates::time_and_gap`].
    TimeAndGap,
}

impl RatePreset {
    pub fn rates(self) -> AdaptedRates {
        match self {
            RatePreset::Equal => AdaptedRates::equal(),
            RatePreset::TimeAndGap => AdaptedRates::time_and_gap(),
        }
    }
}

/// State of a pair at the first entry of either process into `R^-`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairHit {
    pub first: Walker,
    pub overshoot: f64,
    /// Value of the surviving process at that moment.
    pub survivor: f64,
    pub time: f64,
}

/// Runs two independent time-changed processes from `a` and `b` with the
/// walk embedding until one of them enters `R^-`. Events are generated by
/// the embedded jump chain; between events the total rate is affine in time
/// and the waiting time is solved exactly.
pub fn run_pair<R: Rng + ?Sized>(
    a: f64,
    b: f64,
    rates: &AdaptedRates,
    config: &AspSamplerConfig,
    dist: &StepDistribution,
    rng: &mut R,
) -> Result<Outcome<PairHit>> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!("starts must be positive, got ({a}, {b})")));
    }
    config.validate()?;
    rates.validate()?;
    if config.method != AspMethod::WalkEmbedding {
        return Err(Error::Contract("pair simulation needs the walk embedding".into()));
    }
    let mut w = [BandWalk::new(a, config.lattice_scale), BandWalk::new(b, config.lattice_scale)];
    let mut t = 0.0;
    for _ in 0..config.budget {
        let gap = (w[0].value() - w[1].value()).abs();
        let c = [1.0 / w[0].move_time(), 1.0 / w[1].move_time()];
        // Total event rate at time t + s is p + q s.
        let q = rates.time[0] * c[0] + rates.time[1] * c[1];
        let p = rates.at(0, t, gap) * c[0] + rates.at(1, t, gap) * c[1];
        let e: f64 = Exp1.sample(rng);
        let s = if q == 0.0 { e / p } else { 2.0 * e / (p + (p * p + 2.0 * q * e).sqrt()) };
        t += s;
        let r0 = rates.at(0, t, gap) * c[0];
        let r1 = rates.at(1, t, gap) * c[1];
        let i = if rng.random::<f64>() * (r0 + r1) < r0 { 0 } else { 1 };
        if let Some(overshoot) = w[i].step(dist, rng) {
            return Ok(Outcome::Done(PairHit {
                first: if i == 0 { Walker::First } else { Walker::Second },
                overshoot,
                survivor: w[1 - i].value(),
                time: t,
            }));
        }
    }
    Ok(Outcome::Exhausted { moves: config.budget })
}

/// Verifier output, one closed-form comparison per report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifierReport {
    pub identity: String,
    pub parameters: BTreeMap<String, Value>,
    pub estimate: f64,
    pub stderr: f64,
    pub closed_form: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl VerifierReport {
    fn new(identity: &str, parameters: BTreeMap<String, Value>, est: EstimateWithCI, closed_form: f64, tolerance: f64) -> Self {
        VerifierReport {
            identity: identity.into(),
            parameters,
            estimate: est.value,
            stderr: est.stderr,
            closed_form,
            tolerance,
            pass: (est.value - closed_form).abs() <= tolerance,
        }
    }
}

fn params(entries: &[(&str, Value)], config: &AspSamplerConfig, samples: u64, seed: u64) -> BTreeMap<String, Value> {
    let mut m: BTreeMap<String, Value> = entries.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    m.insert("lattice_scale".into(), json!(config.lattice_scale));
    m.insert("method".into(), serde_json::to_value(config.method).expect("serializable"));
    m.insert("samples".into(), json!(samples));
    m.insert("seed".into(), json!(seed));
    m
}

/// Estimates `P(draw)` where `draw` fails on budget exhaustion; exhausted
/// samples count as failures of the event and are reported as an error if
/// they are not negligible.
fn estimate_event<F>(samples: u64, seed: u64, trial: F) -> Result<EstimateWithCI>
where
    F: Fn(&mut SimRng) -> Option<bool> + Sync,
{
    let parts = run_tasks(samples, seed, |rng, n| {
        let mut hits = 0u64;
        let mut exhausted = 0u64;
        for _ in 0..n {
            match trial(rng) {
                Some(true) => hits += 1,
                Some(false) => {}
                None => exhausted += 1,
            }
        }
        (hits, exhausted)
    });
    let (hits, exhausted) = parts.iter().fold((0, 0), |(h, e), &(a, b)| (h + a, e + b));
    if exhausted * 1000 > samples {
        return Err(Error::Consistency(format!("{exhausted} of {samples} samples exhausted the budget")));
    }
    Ok(EstimateWithCI::proportion(hits, samples - exhausted, seed))
}

/// Both sides of `P_a(|Y_{T_-}| > b) = P_b(|Y_{T_-}| < a)`, sampled
/// independently. Each report passes iff its side is within `tolerance` of
/// the closed form; the pair is consistent iff both pass and the sides agree
/// within `tolerance`.
pub fn verify_symmetry(
    a: f64,
    b: f64,
    samples: u64,
    config: &AspSamplerConfig,
    seed: u64,
    tolerance: f64,
) -> Result<(Vec<VerifierReport>, bool)> {
    let closed = overshoot_cdf_closed(a, b)?;
    let dist = StepDistribution::default();
    let lhs_sampler = AspSampler::new(a, *config)?;
    let rhs_sampler = AspSampler::new(b, *config)?;
    let lhs = estimate_event(samples, seed, |rng| lhs_sampler.sample(&dist, rng).done().map(|h| h.overshoot > b))?;
    let rhs = estimate_event(samples, seed.wrapping_add(1), |rng| {
        rhs_sampler.sample(&dist, rng).done().map(|h| h.overshoot < a)
    })?;
    let p = params(&[("a", json!(a)), ("b", json!(b))], config, samples, seed);
    let reports = vec![
        VerifierReport::new("symmetry-lhs", p.clone(), lhs, closed, tolerance),
        VerifierReport::new("symmetry-rhs", p, rhs, closed, tolerance),
    ];
    let ok = reports.iter().all(|r| r.pass) && (lhs.value - rhs.value).abs() <= tolerance;
    Ok((reports, ok))
}

/// i.i.d. hitting times from 1, in pairs.
pub fn sample_time_pairs(samples: u64, config: &AspSamplerConfig, seed: u64) -> Result<Vec<(f64, f64)>> {
    let dist = StepDistribution::default();
    let sampler = AspSampler::new(1.0, *config)?;
    if config.method == AspMethod::ExactLanding {
        return Err(Error::Contract("hitting times need the walk embedding or the Euler scheme".into()));
    }
    let parts = run_tasks(samples, seed, |rng, n| {
        let mut out = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let t1 = sampler.sample(&dist, rng).done().and_then(|h| h.hit_time);
            let t2 = sampler.sample(&dist, rng).done().and_then(|h| h.hit_time);
            if let (Some(x), Some(y)) = (t1, t2) {
                out.push((x, y));
            }
        }
        out
    });
    let pairs: Vec<(f64, f64)> = parts.into_iter().flatten().collect();
    if (samples - pairs.len() as u64) * 1000 > samples {
        return Err(Error::Consistency("too many samples exhausted the budget".into()));
    }
    Ok(pairs)
}

/// Empirical `P(tau/tau' > t)` against the closed form, one report per `t`.
pub fn verify_ratio_law(
    t_values: &[f64],
    samples: u64,
    config: &AspSamplerConfig,
    seed: u64,
    tolerance: f64,
) -> Result<Vec<VerifierReport>> {
    let pairs = sample_time_pairs(samples, config, seed)?;
    t_values
        .iter()
        .map(|&t| {
            let closed = ratio_law_closed(t)?;
            let hits = pairs.iter().filter(|(x, y)| x / y > t).count() as u64;
            let est = EstimateWithCI::proportion(hits, pairs.len() as u64, seed);
            Ok(VerifierReport::new("ratio-law", params(&[("t", json!(t))], config, samples, seed), est, closed, tolerance))
        })
        .collect()
}

/// `P_{a,b}(T_- > T'_-)` for independent processes against
/// `overshoot_cdf_closed(a, b)`.
pub fn verify_race_identity(
    a: f64,
    b: f64,
    samples: u64,
    config: &AspSamplerConfig,
    seed: u64,
    tolerance: f64,
) -> Result<VerifierReport> {
    let closed = overshoot_cdf_closed(a, b)?;
    if config.method == AspMethod::ExactLanding {
        return Err(Error::Contract("hitting times need the walk embedding or the Euler scheme".into()));
    }
    let dist = StepDistribution::default();
    let first = AspSampler::new(a, *config)?;
    let second = AspSampler::new(b, *config)?;
    let est = estimate_event(samples, seed, |rng| {
        let t = first.sample(&dist, rng).done()?.hit_time?;
        let t2 = second.sample(&dist, rng).done()?.hit_time?;
        Some(t > t2)
    })?;
    Ok(VerifierReport::new("race", params(&[("a", json!(a)), ("b", json!(b))], config, samples, seed), est, closed, tolerance))
}

/// Counts of the four `(first to hit, sign of Y + Y')` cells at the first
/// hitting time of the pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixedTally {
    pub first_hits_sum_negative: u64,
    pub first_hits_sum_positive: u64,
    pub second_hits_sum_negative: u64,
    pub second_hits_sum_positive: u64,
    pub exhausted: u64,
}

impl MixedTally {
    pub fn completed(&self) -> u64 {
        self.first_hits_sum_negative + self.first_hits_sum_positive + self.second_hits_sum_negative + self.second_hits_sum_positive
    }

    /// Runs ending in a crossing: the first process hits with `Y + Y' < 0`
    /// or the second hits with `Y + Y' > 0`. Ties count as the discrete
    /// rule does (crossing iff the overshoot of the first is at least the
    /// survivor, and the overshoot of the second is below it).
    pub fn crossings(&self) -> u64 {
        self.first_hits_sum_negative + self.second_hits_sum_positive
    }
}

pub fn mixed_tally(
    a: f64,
    b: f64,
    rates: &AdaptedRates,
    samples: u64,
    config: &AspSamplerConfig,
    seed: u64,
) -> Result<MixedTally> {
    let dist = StepDistribution::default();
    // Surface argument errors before fanning out.
    run_pair(a, b, rates, &AspSamplerConfig { budget: 0, ..*config }, &dist, &mut crate::rng::seeded(0))?;
    let parts = run_tasks(samples, seed, |rng, n| {
        let mut t = MixedTally::default();
        for _ in 0..n {
            match run_pair(a, b, rates, config, &dist, rng).expect("validated").done() {
                None => t.exhausted += 1,
                Some(h) => match (h.first, h.overshoot >= h.survivor) {
                    (Walker::First, true) => t.first_hits_sum_negative += 1,
                    (Walker::First, false) => t.first_hits_sum_positive += 1,
                    (Walker::Second, true) => t.second_hits_sum_negative += 1,
                    (Walker::Second, false) => t.second_hits_sum_positive += 1,
                },
            }
        }
        t
    });
    let mut total = MixedTally::default();
    for p in parts {
        total.first_hits_sum_negative += p.first_hits_sum_negative;
        total.first_hits_sum_positive += p.first_hits_sum_positive;
        total.second_hits_sum_negative += p.second_hits_sum_negative;
        total.second_hits_sum_positive += p.second_hits_sum_positive;
        total.exhausted += p.exhausted;
    }
    if total.exhausted * 1000 > samples {
        return Err(Error::Consistency(format!("{} of {samples} pairs exhausted the budget", total.exhausted)));
    }
    Ok(total)
}

/// Crossing probability under mixed growth with time changes, against
/// `overshoot_cdf_closed(a, b)`.
pub fn verify_mixed_identity(
    a: f64,
    b: f64,
    rates: &AdaptedRates,
    samples: u64,
    config: &AspSamplerConfig,
    seed: u64,
    tolerance: f64,
) -> Result<VerifierReport> {
    let closed = overshoot_cdf_closed(a, b)?;
    let tally = mixed_tally(a, b, rates, samples, config, seed)?;
    let est = EstimateWithCI::proportion(tally.crossings(), tally.completed(), seed);
    let rates_json = serde_json::to_value(rates).expect("serializable");
    let p = params(&[("a", json!(a)), ("b", json!(b)), ("rates", rates_json)], config, samples, seed);
    Ok(VerifierReport::new("mixed", p, est, closed, tolerance))
}

/// Continuum three-segment crossing: two processes from `a` and `b` at equal
/// rates, crossing iff the second hits first with overshoot below `c`.
pub fn three_segment_limit(a: f64, b: f64, c: f64, samples: u64, config: &AspSamplerConfig, seed: u64) -> Result<EstimateWithCI> {
    if !(c > 0.0) {
        return Err(Error::Domain("c must be positive".into()));
    }
    let dist = StepDistribution::default();
    let rates = AdaptedRates::equal();
    run_pair(a, b, &rates, &AspSamplerConfig { budget: 0, ..*config }, &dist, &mut crate::rng::seeded(0))?;
    estimate_event(samples, seed, |rng| {
        let h = run_pair(a, b, &rates, config, &dist, rng).expect("validated").done()?;
        Some(h.first == Walker::Second && h.overshoot < c)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub points: Vec<VerifierReport>,
    /// Deviations from the limit are non-increasing in `lambda` up to three
    /// combined standard errors (and `1e-12` of rounding).
    pub trend_ok: bool,
    pub pass: bool,
}

/// `Q_{ceil(lambda a), ceil(lambda b)}` for each `lambda` against the limit
/// `overshoot_cdf_closed(a, b)`. With `samples = None` the discrete values
/// are exact (closed-form landing law); otherwise they are sampled from the
/// exact landing law. `pass` requires the trend and the last point within
/// `tolerance`.
pub fn verify_walk_scaling(
    a: f64,
    b: f64,
    lambdas: &[u64],
    samples: Option<u64>,
    seed: u64,
    tolerance: f64,
) -> Result<ScalingReport> {
    let closed = overshoot_cdf_closed(a, b)?;
    let dist = StepDistribution::default();
    let mut points = Vec::new();
    for &lambda in lambdas {
        if lambda < 1 {
            return Err(Error::Domain("lambda must be >= 1".into()));
        }
        let la = ((a * lambda as f64).ceil() as u64).max(1);
        let lb = ((b * lambda as f64).ceil() as u64).max(1);
        let est = match samples {
            None => EstimateWithCI { value: crossing_probability(la, lb)?, stderr: 0.0, samples: 0, seed },
            Some(n) => {
                let landing = LandingSampler::new(la)?;
                let hits = count_successes(n, seed, |rng| landing.sample(&dist, rng).1 >= lb);
                EstimateWithCI::proportion(hits, n, seed)
            }
        };
        let mut p = BTreeMap::new();
        p.insert("a".into(), json!(a));
        p.insert("b".into(), json!(b));
        p.insert("lambda".into(), json!(lambda));
        p.insert("samples".into(), json!(samples));
        p.insert("seed".into(), json!(seed));
        points.push(VerifierReport::new("walk-scaling", p, est, closed, tolerance));
    }
    let trend_ok = points.windows(2).all(|w| {
        let (d0, d1) = ((w[0].estimate - closed).abs(), (w[1].estimate - closed).abs());
        // Exact values still carry floating-point rounding.
        d1 <= d0 + 3.0 * w[0].stderr.hypot(w[1].stderr) + 1e-12
    });
    let pass = trend_ok && points.last().is_some_and(|p| p.pass);
    Ok(ScalingReport { points, trend_ok, pass })
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(x: &[f64], y: &[f64]) -> f64 {
    let mut x = x.to_vec();
    let mut y = y.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Critical value of the two-sample KS statistic at level 1%.
pub fn ks_critical_99(n: usize, m: usize) -> f64 {
    1.628 * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}
