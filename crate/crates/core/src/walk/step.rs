use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::combinatorics::{halfplane_pk, pk_f64, ratio, tail_mass, tail_mass_f64, ExactRational};
use crate::rng::open_unit;

/// Number of jump sizes whose exact probabilities are stored.
const DEFAULT_EXACT_HEAD: u64 = 64;
/// Number of jump sizes covered by the floating-point sampling table.
const CDF_LEN: usize = 4096;
/// Jumps are looked up by linear scan up to here, then by bisection.
const LINEAR_SCAN: usize = 16;

/// Step law of the boundary walk: `0` w.p. 1/2, `+1` w.p. 1/3, `-k` w.p. `p_k`.
///
/// The exact head covers `+1`, `0` and `-1..=-K`; `tail` is the exact mass of
/// all larger jumps. Sampling is exact in law (up to floating-point
/// resolution): jumps beyond the table are drawn by inverting the closed-form
/// tail `sum_{j>k} p_j = (2k-1) p_k / 3`.
#[derive(Debug, Clone)]
pub struct StepDistribution {
    head: Vec<(i64, ExactRational)>,
    tail: ExactRational,
    /// `P(jump <= k | jump)` for `k = 1..=CDF_LEN`.
    jump_cdf: Vec<f64>,
}

impl Default for StepDistribution {
    fn default() -> Self {
        Self::new(DEFAULT_EXACT_HEAD)
    }
}

impl StepDistribution {
    pub fn new(exact_head: u64) -> Self {
        let exact_head = exact_head.max(1);
        let mut head = vec![(1, ratio(1, 3)), (0, ratio(1, 2))];
        for k in 1..=exact_head {
            head.push((-(k as i64), halfplane_pk(k).expect("k >= 1")));
        }
        let mut jump_cdf = Vec::with_capacity(CDF_LEN);
        let mut acc = 0.0;
        for k in 1..=CDF_LEN as u64 {
            acc += 6.0 * pk_f64(k);
            jump_cdf.push(acc);
        }
        // Pin the last entry to the closed-form complement of the tail so the
        // table and the tail sampler partition [0,1) consistently.
        *jump_cdf.last_mut().unwrap() = 1.0 - 6.0 * tail_mass_f64(CDF_LEN as u64);
        StepDistribution { head, tail: tail_mass(exact_head), jump_cdf }
    }

    /// `(step, probability)` for the exactly tabulated steps.
    pub fn head(&self) -> &[(i64, ExactRational)] {
        &self.head
    }

    /// Exact probability of a jump beyond the tabulated head.
    pub fn tail_mass(&self) -> &ExactRational {
        &self.tail
    }

    pub fn head_mass(&self) -> ExactRational {
        self.head.iter().fold(BigRational::zero(), |acc, (_, p)| acc + p)
    }

    /// Exact drift of the truncated head, `1/3 - sum_{k<=K} k p_k`. Tends to 0
    /// as the head grows; the untruncated law has mean exactly zero.
    pub fn head_drift(&self) -> ExactRational {
        self.head
            .iter()
            .fold(BigRational::zero(), |acc, (s, p)| acc + p * BigRational::from_integer((*s).into()))
    }

    pub fn is_normalized(&self) -> bool {
        self.head_mass() + &self.tail == BigRational::one()
    }

    /// One step of the lazy walk.
    #[inline]
    pub fn sample_step<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let u: f64 = rng.random();
        if u < 0.5 {
            0
        } else if u < 5.0 / 6.0 {
            1
        } else {
            -(self.sample_jump(rng) as i64)
        }
    }

    /// One step of the walk with the lazy step conditioned out:
    /// `+1` w.p. 2/3, `-k` w.p. `2 p_k`.
    #[inline]
    pub fn sample_move<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        if rng.random::<f64>() < 2.0 / 3.0 {
            1
        } else {
            -(self.sample_jump(rng) as i64)
        }
    }

    /// Number of `+1` moves before the next downward jump of the non-lazy
    /// walk: geometric, `P(r) = (2/3)^r / 3`.
    #[inline]
    pub fn sample_up_run<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u = open_unit(rng);
        (u.ln() / (2f64 / 3.0).ln()).floor() as u64
    }

    /// Size `k >= 1` of a downward jump, `P(k) = 6 p_k`.
    #[inline]
    pub fn sample_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let v: f64 = rng.random();
        let cdf = &self.jump_cdf;
        if v >= cdf[CDF_LEN - 1] {
            return self.sample_tail_jump(rng, CDF_LEN as u64);
        }
        for (i, &c) in cdf.iter().take(LINEAR_SCAN).enumerate() {
            if v < c {
                return i as u64 + 1;
            }
        }
        cdf.partition_point(|&c| c <= v) as u64 + 1
    }

    /// Jump size conditioned to exceed `beyond`.
    pub fn sample_tail_jump<R: Rng + ?Sized>(&self, rng: &mut R, beyond: u64) -> u64 {
        // X = min{k : T(k) < U T(beyond)} gives P(X > k) = T(k) / T(beyond).
        let target = open_unit(rng) * tail_mass_f64(beyond);
        first_below(tail_mass_f64, beyond, target)
    }
}

/// `min{k > from : f(k) < target}` for nonincreasing `f` with
/// `f(from) >= target`, by doubling then bisection. Saturates at `u64::MAX/4`.
pub(crate) fn first_below(f: impl Fn(u64) -> f64, from: u64, target: f64) -> u64 {
    let cap = u64::MAX / 4;
    let mut lo = from;
    let mut hi = from.saturating_mul(2).max(from + 1);
    while f(hi) >= target {
        if hi >= cap {
            return cap;
        }
        lo = hi;
        hi = hi.saturating_mul(2).min(cap);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if f(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}
