use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use super::StepDistribution;
use crate::error::{domain, Result};
use crate::rng::open_unit;

/// Default cap on non-lazy moves per run.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Result of a simulation that may run out of budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Outcome<T> {
    Done(T),
    /// The run used up its move budget before it was decided.
    Exhausted { moves: u64 },
}

impl<T> Outcome<T> {
    pub fn done(self) -> Option<T> {
        match self {
            Outcome::Done(t) => Some(t),
            Outcome::Exhausted { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirstPassageRecord {
    /// `T_-` counted in steps of the lazy walk.
    pub hit_time: u64,
    /// Number of non-lazy moves up to `T_-`.
    pub moves: u64,
    /// `|S_{T_-}|`.
    pub overshoot: u64,
    pub max_height: u64,
}

/// Runs the walk from `a` until it first enters `Z^-`.
///
/// Only non-lazy moves are simulated; the lazy holding steps are added back
/// to `hit_time` as a negative binomial count, which has the same law as
/// simulating them one by one.
pub fn run_first_passage<R: Rng + ?Sized>(
    a: u64,
    dist: &StepDistribution,
    budget: u64,
    rng: &mut R,
) -> Result<Outcome<FirstPassageRecord>> {
    if a < 1 {
        return domain("start must be >= 1");
    }
    let mut height = a;
    let mut max_height = a;
    let mut moves = 0u64;
    loop {
        let run = dist.sample_up_run(rng);
        if moves + run >= budget {
            return Ok(Outcome::Exhausted { moves: budget });
        }
        height += run;
        max_height = max_height.max(height);
        moves += run + 1;
        let jump = dist.sample_jump(rng);
        if jump >= height {
            let record = FirstPassageRecord {
                hit_time: moves + lazy_holds(moves, rng),
                moves,
                overshoot: jump - height,
                max_height,
            };
            return Ok(Outcome::Done(record));
        }
        height -= jump;
    }
}

/// Total lazy steps interleaved with `moves` non-lazy ones: a sum of
/// `moves` geometric(1/2) counts, drawn as a gamma-mixed Poisson.
fn lazy_holds<R: Rng + ?Sized>(moves: u64, rng: &mut R) -> u64 {
    if moves == 0 {
        return 0;
    }
    let g = Gamma::new(moves as f64, 1.0).expect("positive shape").sample(rng);
    if g <= 0.0 {
        return 0;
    }
    Poisson::new(g).map(|p| p.sample(rng) as u64).unwrap_or(0)
}

/// Which of two walks is advanced at each exploration event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RaceScheduler {
    /// Each event picks a walk by a fair coin (the embedded jump chain).
    FairCoin,
    /// Each event picks the first walk with this probability: clocks of
    /// rates `r1, r2` give `r1 / (r1 + r2)`.
    Weighted(f64),
    /// Each walk carries its own rate-1 exponential clock.
    ExponentialClocks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Walker {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaceOutcome {
    /// The walk that entered `Z^-` first.
    pub loser: Walker,
    pub overshoot: u64,
    /// Value of the other walk at that moment (always >= 1).
    pub survivor_value: u64,
    /// Continuous time of the hit; only meaningful with exponential clocks.
    pub time: f64,
}

/// Two independent walks from `a` and `b` until one of them enters `Z^-`.
/// Ties cannot occur: every event moves exactly one walk. The budget counts
/// non-lazy moves of both walks together.
pub fn two_walk_race<R: Rng + ?Sized>(
    a: u64,
    b: u64,
    dist: &StepDistribution,
    scheduler: RaceScheduler,
    budget: u64,
    rng: &mut R,
) -> Result<Outcome<RaceOutcome>> {
    if a < 1 || b < 1 {
        return domain("race starts must be >= 1");
    }
    match scheduler {
        RaceScheduler::FairCoin => Ok(embedded_race([a, b], 0.5, dist, budget, rng)),
        RaceScheduler::Weighted(w) => {
            if !(w > 0.0 && w < 1.0) {
                return domain(format!("scheduler weight must be in (0,1), got {w}"));
            }
            Ok(embedded_race([a, b], w, dist, budget, rng))
        }
        RaceScheduler::ExponentialClocks => Ok(clocked_race([a, b], dist, budget, rng)),
    }
}

/// The embedded chain: up-moves are batched between consecutive jumps and
/// split between the walks binomially.
fn embedded_race<R: Rng + ?Sized>(
    mut heights: [u64; 2],
    first_weight: f64,
    dist: &StepDistribution,
    budget: u64,
    rng: &mut R,
) -> Outcome<RaceOutcome> {
    let mut moves = 0u64;
    loop {
        let run = dist.sample_up_run(rng);
        if moves + run >= budget {
            return Outcome::Exhausted { moves: budget };
        }
        moves += run + 1;
        let ups_first = if first_weight == 0.5 {
            fair_binomial(run, rng)
        } else {
            (0..run).filter(|_| rng.random::<f64>() < first_weight).count() as u64
        };
        heights[0] += ups_first;
        heights[1] += run - ups_first;
        let idx = if rng.random::<f64>() < first_weight { 0 } else { 1 };
        let jump = dist.sample_jump(rng);
        if jump >= heights[idx] {
            return Outcome::Done(RaceOutcome {
                loser: if idx == 0 { Walker::First } else { Walker::Second },
                overshoot: jump - heights[idx],
                survivor_value: heights[1 - idx],
                time: f64::NAN,
            });
        }
        heights[idx] -= jump;
    }
}

fn fair_binomial<R: Rng + ?Sized>(n: u64, rng: &mut R) -> u64 {
    let mut left = n;
    let mut count = 0u64;
    while left > 0 {
        let take = left.min(64);
        let bits: u64 = rng.random();
        let mask = if take == 64 { u64::MAX } else { (1u64 << take) - 1 };
        count += (bits & mask).count_ones() as u64;
        left -= take;
    }
    count
}

/// Explicit clocks: each walk makes lazy steps at rate 1, so non-lazy moves
/// at rate 1/2 each; the next event is the earlier of two fresh exponential
/// waits (memorylessness).
fn clocked_race<R: Rng + ?Sized>(
    mut heights: [u64; 2],
    dist: &StepDistribution,
    budget: u64,
    rng: &mut R,
) -> Outcome<RaceOutcome> {
    let mut time = 0.0;
    let mut moves = 0u64;
    while moves < budget {
        let t0 = -open_unit(rng).ln() * 2.0;
        let t1 = -open_unit(rng).ln() * 2.0;
        let idx = if t0 < t1 { 0 } else { 1 };
        time += t0.min(t1);
        moves += 1;
        let step = dist.sample_move(rng);
        if step > 0 {
            heights[idx] += 1;
            continue;
        }
        let jump = (-step) as u64;
        if jump >= heights[idx] {
            return Outcome::Done(RaceOutcome {
                loser: if idx == 0 { Walker::First } else { Walker::Second },
                overshoot: jump - heights[idx],
                survivor_value: heights[1 - idx],
                time,
            });
        }
        heights[idx] -= jump;
    }
    Outcome::Exhausted { moves }
}

/// How a walk left the strip `{1, .., level - 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LevelExit {
    /// Entered `Z^-` at depth `overshoot`.
    Below { overshoot: u64, moves: u64 },
    /// Reached `level` exactly (upward moves are `+1`).
    Reached { moves: u64 },
}

/// Runs the walk from `a` until it enters `Z^-` or reaches `level`.
pub fn run_to_level<R: Rng + ?Sized>(
    a: u64,
    level: u64,
    dist: &StepDistribution,
    budget: u64,
    rng: &mut R,
) -> Result<Outcome<LevelExit>> {
    if a < 1 || a >= level {
        return domain(format!("need 1 <= start < level, got start {a}, level {level}"));
    }
    let mut height = a;
    let mut moves = 0u64;
    loop {
        let run = dist.sample_up_run(rng);
        if height + run >= level {
            moves += level - height;
            return Ok(if moves > budget {
                Outcome::Exhausted { moves: budget }
            } else {
                Outcome::Done(LevelExit::Reached { moves })
            });
        }
        if moves + run >= budget {
            return Ok(Outcome::Exhausted { moves: budget });
        }
        height += run;
        moves += run + 1;
        let jump = dist.sample_jump(rng);
        if jump >= height {
            return Ok(Outcome::Done(LevelExit::Below { overshoot: jump - height, moves }));
        }
        height -= jump;
    }
}
