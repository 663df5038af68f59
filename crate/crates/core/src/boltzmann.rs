//! Percolation crossings in free (Boltzmann) triangulations of a polygon.
//!
//! Two estimators of the four-segment crossing probability: the half-plane
//! race reweighted by `p_l / p_{m-1}`, and direct exploration of the free
//! polygon along the interface. Also the exact one-step law of the
//! `(A_n, B_n)` exploration chain with an uncolored segment, and its
//! jump-rate asymptotics.
//!
//! Free peeling probabilities are computed in double precision from
//! `Z_a Z_b / Z_{a+b-1} = p_{a-1} p_{b-1} / p_{a+b-2}`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::asp::{run_pair, AdaptedRates, AspMethod, AspSamplerConfig};
use crate::combinatorics::{
    alpha, gamma_prime, partition_function, pk_f64, ratio, EnumerationTable, ExactRational,
};
use crate::error::{domain, Error, Result};
use crate::estimate::{run_tasks, EstimateWithCI, Moments};
use crate::rng::SimRng;
use crate::walk::{two_walk_race, Outcome, RaceScheduler, StepDistribution, Walker, DEFAULT_BUDGET};

/// `p_m (2/3) / p_{m-1}` and `Z_{m+1} / ((27/2) Z_m)`, both exact.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesCheck {
    pub lhs: ExactRational,
    pub rhs: ExactRational,
    pub equal: bool,
}

/// The internal-vertex probability of a free m-gon computed twice: through
/// the half-plane event `B` and directly from the partition function.
pub fn bayes_event_check(m: u64) -> Result<BayesCheck> {
    if m < 2 {
        return domain(format!("Bayes check needs m >= 2, got {m}"));
    }
    let table = EnumerationTable::new(m + 1);
    let lhs = table.p(m)? * ratio(2, 3) / table.p(m - 1)?;
    let rhs = partition_function(m + 1)? / (alpha() * partition_function(m)?);
    let equal = lhs == rhs;
    Ok(BayesCheck { lhs, rhs, equal })
}

/// Four boundary segments, alternately black and white; `a` and `c` black.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonConfig {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl PolygonConfig {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Result<Self> {
        if a == 0 || b == 0 || c == 0 || d == 0 {
            return domain(format!("segment lengths must be >= 1, got ({a},{b},{c},{d})"));
        }
        Ok(PolygonConfig { a, b, c, d })
    }

    pub fn m(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.a, self.b, self.c, self.d).map(|_| ())
    }
}

/// Mean of an event indicator times a bounded weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Completed samples (the denominator).
    pub samples: u64,
    pub weight_max: f64,
    /// Races that ran out of budget; left out of the denominator.
    pub exhausted: u64,
    pub seed: u64,
}

impl WeightedEstimate {
    pub fn as_estimate(&self) -> EstimateWithCI {
        EstimateWithCI { value: self.value, stderr: self.stderr, samples: self.samples, seed: self.seed }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct WeightSums {
    moments: Moments,
    max: f64,
    exhausted: u64,
}

fn fold_weights(parts: Vec<WeightSums>, seed: u64) -> WeightedEstimate {
    let mut m = Moments::default();
    let mut max = 0.0f64;
    let mut exhausted = 0;
    for p in &parts {
        m.merge(&p.moments);
        max = max.max(p.max);
        exhausted += p.exhausted;
    }
    let e = EstimateWithCI::from_moments(&m, seed);
    WeightedEstimate { value: e.value, stderr: e.stderr, samples: e.samples, weight_max: max, exhausted, seed }
}

/// Reweighted half-plane estimator of the crossing probability.
///
/// Races walks from `a` (black) and `b` (white) under a fair coin. When the
/// white walk enters `Z^-` first with overshoot `o < c`, the sample scores
/// `p_l / p_{m-1}` with `l = S + (-o) + c + d - 1`, the boundary distance
/// from the edge `e_0` to the vertex `v_0` at that moment; otherwise 0.
pub fn crossing_prob_reweighted(cfg: &PolygonConfig, samples: u64, seed: u64) -> Result<WeightedEstimate> {
    crossing_prob_reweighted_with_budget(cfg, samples, seed, DEFAULT_BUDGET)
}

pub fn crossing_prob_reweighted_with_budget(
    cfg: &PolygonConfig,
    samples: u64,
    seed: u64,
    budget: u64,
) -> Result<WeightedEstimate> {
    cfg.validate()?;
    if samples == 0 {
        return domain("samples must be >= 1");
    }
    let dist = StepDistribution::default();
    let pm = pk_f64(cfg.m() - 1);
    let parts = run_tasks(samples, seed, |rng, n| -> Result<WeightSums> {
        let mut s = WeightSums::default();
        for _ in 0..n {
            let w = match two_walk_race(cfg.a, cfg.b, &dist, RaceScheduler::FairCoin, budget, rng)? {
                Outcome::Exhausted { .. } => {
                    s.exhausted += 1;
                    continue;
                }
                Outcome::Done(r) if r.loser == Walker::Second && r.overshoot < cfg.c => {
                    let l = (r.survivor_value + cfg.c + cfg.d - 1) as i64 - r.overshoot as i64;
                    if l < cfg.d as i64 + 1 {
                        return Err(Error::Contract(format!("boundary distance {l} below d + 1 on a crossing")));
                    }
                    pk_f64(l as u64) / pm
                }
                Outcome::Done(_) => 0.0,
            };
            s.moments.push(w);
            s.max = s.max.max(w);
        }
        Ok(s)
    });
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(fold_weights(parts, seed))
}

/// `Z_{k+1} Z_{m-k} / Z_m`: the free m-gon peel reaching the vertex at
/// distance `k` on a given side.
fn free_split(m: u64, k: u64) -> f64 {
    pk_f64(k) * pk_f64(m - k - 1) / pk_f64(m - 1)
}

/// `Z_{m+1} / (alpha Z_m)`.
fn free_internal(m: u64) -> f64 {
    (2.0 * m as f64 - 3.0) / (3.0 * m as f64 + 3.0)
}

/// Distance `k in 1..=m-2` of the peeled vertex given a uniform `u` already
/// past the internal-vertex mass.
fn sample_split_distance(m: u64, mut u: f64) -> u64 {
    for k in 1..m - 1 {
        u -= free_split(m, k);
        if u < 0.0 {
            return k;
        }
    }
    m - 2
}

/// Direct exploration estimate plus the runs that hit the step budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectEstimate {
    pub estimate: EstimateWithCI,
    pub undetermined: u64,
}

/// One run of the interface exploration inside the free polygon. `Some(true)`
/// for a black crossing.
pub fn explore_polygon<R: Rng + ?Sized>(cfg: &PolygonConfig, budget: u64, rng: &mut R) -> Option<bool> {
    // Active edge joins the last black of `a` (x) and the first white of
    // `b` (y). Distances are counted from y away from x: b whites, c blacks,
    // d whites, then the a blacks ending at x.
    let (mut a, mut b) = (cfg.a, cfg.b);
    let (c, d) = (cfg.c, cfg.d);
    for _ in 0..budget {
        let m = a + b + c + d;
        let u: f64 = rng.random();
        let internal = free_internal(m);
        if u < internal {
            if u < internal / 2.0 {
                a += 1;
            } else {
                b += 1;
            }
            continue;
        }
        let k = sample_split_distance(m, u - internal);
        if k < b {
            b -= k;
        } else if k < b + c {
            return Some(true);
        } else if k < b + c + d {
            return Some(false);
        } else {
            a = k + 1 - b - c - d;
        }
    }
    None
}

/// Crossing frequency from direct exploration at the `a`/`b` corner.
pub fn crossing_prob_direct(cfg: &PolygonConfig, samples: u64, seed: u64) -> Result<DirectEstimate> {
    cfg.validate()?;
    if samples == 0 {
        return domain("samples must be >= 1");
    }
    let parts = run_tasks(samples, seed, |rng, n| {
        let (mut black, mut open) = (0u64, 0u64);
        for _ in 0..n {
            match explore_polygon(cfg, DEFAULT_BUDGET, rng) {
                Some(true) => black += 1,
                Some(false) => {}
                None => open += 1,
            }
        }
        (black, open)
    });
    let (black, open) = parts.into_iter().fold((0, 0), |(x, y), (b, o)| (x + b, y + o));
    Ok(DirectEstimate { estimate: EstimateWithCI::proportion(black, samples - open, seed), undetermined: open })
}

/// One scale of [`scaled_reweighted_limit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledPoint {
    pub lambda: u64,
    pub config: PolygonConfig,
    pub discrete: WeightedEstimate,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledLimitReport {
    pub continuum: WeightedEstimate,
    pub points: Vec<ScaledPoint>,
    /// Deviations non-increasing in `lambda` up to 3 combined standard errors.
    pub trend_ok: bool,
}

/// Continuum reweighted expression: two processes from `a`, `b` at equal
/// rates; when the second enters `R^-` first with overshoot below `c`, score
/// `((Y + Y' + c + d) / (a + b + c + d))^{-5/2}` with `Y'` the (negative)
/// landing point.
pub fn continuum_reweighted(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    samples: u64,
    config: &AspSamplerConfig,
    seed: u64,
) -> Result<WeightedEstimate> {
    if ![a, b, c, d].iter().all(|x| *x > 0.0 && x.is_finite()) {
        return domain(format!("lengths must be positive, got ({a},{b},{c},{d})"));
    }
    if config.method != AspMethod::WalkEmbedding {
        return Err(Error::Contract("the continuum pair needs the walk embedding".into()));
    }
    let dist = StepDistribution::default();
    let rates = AdaptedRates::equal();
    let total = a + b + c + d;
    let parts = run_tasks(samples, seed, |rng, n| -> Result<WeightSums> {
        let mut s = WeightSums::default();
        for _ in 0..n {
            let w = match run_pair(a, b, &rates, config, &dist, rng)? {
                Outcome::Exhausted { .. } => {
                    s.exhausted += 1;
                    continue;
                }
                Outcome::Done(h) if h.first == Walker::Second && h.overshoot < c => {
                    continuum_weight(h.survivor, -h.overshoot, c, d, total)
                }
                Outcome::Done(_) => 0.0,
            };
            s.moments.push(w);
            s.max = s.max.max(w);
        }
        Ok(s)
    });
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(fold_weights(parts, seed))
}

/// `((y + y' + c + d) / total)^{-5/2}`.
pub fn continuum_weight(y: f64, y_prime: f64, c: f64, d: f64, total: f64) -> f64 {
    ((y + y_prime + c + d) / total).powf(-2.5)
}

/// Discrete reweighted estimates at `(round(lambda a), ..)` against one
/// continuum estimate.
pub fn scaled_reweighted_limit(
    lengths: [f64; 4],
    lambdas: &[u64],
    samples: u64,
    config: &AspSamplerConfig,
    seed: u64,
) -> Result<ScaledLimitReport> {
    let [a, b, c, d] = lengths;
    let continuum = continuum_reweighted(a, b, c, d, samples, config, seed)?;
    let mut points = Vec::with_capacity(lambdas.len());
    for (i, &lambda) in lambdas.iter().enumerate() {
        let r = |x: f64| ((lambda as f64 * x).round() as u64).max(1);
        let cfg = PolygonConfig::new(r(a), r(b), r(c), r(d))?;
        let discrete = crossing_prob_reweighted(&cfg, samples, seed.wrapping_add(1 + i as u64))?;
        points.push(ScaledPoint { lambda, config: cfg, discrete, deviation: (discrete.value - continuum.value).abs() });
    }
    let trend_ok = points.windows(2).all(|w| {
        let sigma = w[0].discrete.stderr.hypot(w[1].discrete.stderr).hypot(continuum.stderr);
        w[1].deviation <= w[0].deviation + 3.0 * sigma
    });
    Ok(ScaledLimitReport { continuum, points, trend_ok })
}

/// Black segment `a`, white segment `b`, and `c` uncolored vertices,
/// explored from the black/white edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoltzmannChainState {
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl BoltzmannChainState {
    pub fn new(a: u64, b: u64, c: u64) -> Result<Self> {
        if a == 0 || b == 0 || c == 0 {
            return domain(format!("chain state needs a, b, c >= 1, got ({a},{b},{c})"));
        }
        Ok(BoltzmannChainState { a, b, c })
    }

    pub fn m(&self) -> u64 {
        self.a + self.b + self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainStep {
    Next(BoltzmannChainState),
    /// The interface reached the uncolored vertex at position `w` (1 is
    /// adjacent to the black segment).
    Terminated { w: u64 },
}

/// Exact one-step law from a state.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainMass {
    /// Each side grows by one with this probability.
    pub grow: ExactRational,
    /// `shrink_a[k-1]`: `a -> a - k`, `k in 1..a`.
    pub shrink_a: Vec<ExactRational>,
    pub shrink_b: Vec<ExactRational>,
    /// `terminate[k]`: hit the uncolored vertex at distance `k` from the
    /// black segment, `k in 0..c`.
    pub terminate: Vec<ExactRational>,
}

impl ChainMass {
    pub fn total(&self) -> ExactRational {
        let two = ratio(2, 1);
        self.shrink_a.iter().chain(&self.shrink_b).chain(&self.terminate).fold(two * &self.grow, |acc, x| acc + x)
    }
}

/// Exact transition probabilities: grow `Z_{M+1}/(2 alpha Z_M)` per side,
/// shrink by `k` with `Z_{M-k} Z_{k+1} / Z_M`, terminate at distance `k`
/// with `Z_{a+k+1} Z_{b+c-k} / Z_M`.
pub fn chain_step_mass(state: &BoltzmannChainState, table: &EnumerationTable) -> Result<ChainMass> {
    BoltzmannChainState::new(state.a, state.b, state.c)?;
    let m = state.m();
    let zm = table.z(m)?;
    let grow = table.z(m + 1)? / (ratio(2, 1) * alpha() * &zm);
    let shrink = |side: u64| -> Result<Vec<ExactRational>> {
        (1..side).map(|k| Ok(table.z(m - k)? * table.z(k + 1)? / &zm)).collect()
    };
    let terminate = (0..state.c)
        .map(|k| Ok(table.z(state.a + k + 1)? * table.z(state.b + state.c - k)? / &zm))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChainMass { grow, shrink_a: shrink(state.a)?, shrink_b: shrink(state.b)?, terminate })
}

/// Samples one step of the chain. The floating-point probabilities are
/// checked to sum to 1.
pub fn chain_step<R: Rng + ?Sized>(state: &BoltzmannChainState, rng: &mut R) -> Result<ChainStep> {
    let s = BoltzmannChainState::new(state.a, state.b, state.c)?;
    let m = s.m();
    let grow = free_internal(m) / 2.0;
    // Distances from the black end of the active edge: a - 1 blacks, the
    // uncolored segment, then b - 1 whites.
    let total: f64 = 2.0 * grow + (1..m - 1).map(|i| free_split(m, i)).sum::<f64>();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Consistency(format!("one-step mass {total} at {s:?}")));
    }
    let mut u: f64 = rng.random();
    if u < grow {
        return Ok(ChainStep::Next(BoltzmannChainState { a: s.a + 1, ..s }));
    }
    u -= grow;
    if u < grow {
        return Ok(ChainStep::Next(BoltzmannChainState { b: s.b + 1, ..s }));
    }
    let i = sample_split_distance(m, u - grow);
    Ok(if i < s.a {
        ChainStep::Next(BoltzmannChainState { a: s.a - i, ..s })
    } else if i < s.a + s.c {
        ChainStep::Terminated { w: i - s.a + 1 }
    } else {
        ChainStep::Next(BoltzmannChainState { b: s.b - (m - 1 - i), ..s })
    })
}

/// Runs the chain to termination; `None` if the budget runs out.
pub fn run_chain<R: Rng + ?Sized>(start: &BoltzmannChainState, budget: u64, rng: &mut R) -> Result<Option<u64>> {
    let mut s = *start;
    for _ in 0..budget {
        match chain_step(&s, rng)? {
            ChainStep::Next(n) => s = n,
            ChainStep::Terminated { w } => return Ok(Some(w)),
        }
    }
    Ok(None)
}

/// Histogram of the terminal position `w`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WHistogram {
    /// `counts[j]` is the number of runs ending at position `j + 1`.
    pub counts: Vec<u64>,
    pub undetermined: u64,
    pub seed: u64,
}

impl WHistogram {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("position,count\n");
        for (j, c) in self.counts.iter().enumerate() {
            s.push_str(&format!("{},{}\n", j + 1, c));
        }
        s
    }

    pub fn completed(&self) -> u64 {
        self.counts.iter().sum()
    }
}

pub fn w_distribution(a: u64, b: u64, c: u64, samples: u64, seed: u64) -> Result<WHistogram> {
    let start = BoltzmannChainState::new(a, b, c)?;
    let parts = run_tasks(samples, seed, |rng: &mut SimRng, n| -> Result<(Vec<u64>, u64)> {
        let mut h = vec![0u64; c as usize];
        let mut open = 0;
        for _ in 0..n {
            match run_chain(&start, DEFAULT_BUDGET, rng)? {
                Some(w) => h[(w - 1) as usize] += 1,
                None => open += 1,
            }
        }
        Ok((h, open))
    });
    let mut counts = vec![0u64; c as usize];
    let mut undetermined = 0;
    for p in parts {
        let (h, o) = p?;
        counts.iter_mut().zip(h).for_each(|(x, y)| *x += y);
        undetermined += o;
    }
    Ok(WHistogram { counts, undetermined, seed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateKind {
    Jump,
    Termination,
}

/// Exact one-step probability at the scaled state against its asymptotic form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub kind: RateKind,
    pub lambda: u64,
    /// `k` for jumps, `z` for termination.
    pub position: f64,
    pub discrete: f64,
    pub asymptotic: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCheckReport {
    pub rows: Vec<RateRow>,
    pub gamma_prime_estimate: f64,
    pub gamma_prime: f64,
    /// Ratios at the largest lambda within 2% of 1, and the `gamma'`
    /// estimate within 0.5%.
    pub pass: bool,
}

/// `Z_n 9^{-n} n^{5/2}`, which tends to `gamma'`.
pub fn gamma_prime_estimate(n: u64) -> f64 {
    // Z_n 9^{-n} = p_{n-1} / 9
    pk_f64(n - 1) / 9.0 * (n as f64).powf(2.5)
}

/// Compares `Z_{l(M-k)} Z_{lk+1} / Z_{lM}` with
/// `9 gamma' l^{-5/2} (k(M-k)/M)^{-5/2}` (jumps, `M = x + y + c`) and
/// `Z_{l(x+z)+1} Z_{l(y+c-z)} / Z_{lM}` with
/// `9 gamma' l^{-5/2} ((x+z)(y+c-z)/M)^{-5/2}` (termination).
pub fn jump_rate_asymptotics_check(
    x: f64,
    y: f64,
    c: f64,
    k_fracs: &[f64],
    z_fracs: &[f64],
    lambdas: &[u64],
) -> Result<RateCheckReport> {
    if ![x, y, c].iter().all(|v| *v > 0.0 && v.is_finite()) {
        return domain(format!("x, y, c must be positive, got ({x},{y},{c})"));
    }
    if k_fracs.iter().any(|k| !(*k > 0.0 && *k < x)) || z_fracs.iter().any(|z| !(*z > 0.0 && *z < c)) {
        return domain("jump sizes must lie in (0, x) and termination points in (0, c)");
    }
    if lambdas.is_empty() {
        return domain("no scales given");
    }
    let gp = gamma_prime();
    let mut rows = Vec::new();
    for &lambda in lambdas {
        let lf = lambda as f64;
        let r = |v: f64| (lf * v).round() as u64;
        let (xa, yb, cc) = (r(x), r(y), r(c));
        let m = xa + yb + cc;
        let big_m = x + y + c;
        let scale = 9.0 * gp * lf.powf(-2.5);
        for &k in k_fracs {
            let kk = r(k).max(1);
            let discrete = free_split(m, kk);
            let asymptotic = scale * (k * (big_m - k) / big_m).powf(-2.5);
            rows.push(RateRow { kind: RateKind::Jump, lambda, position: k, discrete, asymptotic, ratio: discrete / asymptotic });
        }
        for &z in z_fracs {
            let kz = r(z);
            let discrete = free_split(m, xa + kz);
            let asymptotic = scale * ((x + z) * (y + c - z) / big_m).powf(-2.5);
            rows.push(RateRow {
                kind: RateKind::Termination,
                lambda,
                position: z,
                discrete,
                asymptotic,
                ratio: discrete / asymptotic,
            });
        }
    }
    let last = *lambdas.iter().max().unwrap();
    let gamma_prime_estimate = gamma_prime_estimate(10_000);
    let pass = rows.iter().filter(|r| r.lambda == last).all(|r| (r.ratio - 1.0).abs() < 0.02)
        && (gamma_prime_estimate / gp - 1.0).abs() < 0.005;
    Ok(RateCheckReport { rows, gamma_prime_estimate, gamma_prime: gp, pass })
}
