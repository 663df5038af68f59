use rand::Rng;

use super::step::first_below;
use super::StepDistribution;
use crate::combinatorics::{cumulative_tail_f64, scale_function_f64, tail_mass_f64};
use crate::error::{domain, Result};
use crate::rng::open_unit;

/// Exact sampler of the overshoot `|S_{T_-}|` of the walk started at a fixed
/// height, without simulating the path.
///
/// The last position `y` before the killing jump has law
/// `G(h, y) * 2 T(y-1)` with the untruncated Green function
/// `G(h, y) = (3/2) (W(h-1) - W(h-y-1))`; given `y`, the jump is a `p`-jump
/// conditioned to be at least `y`. Positions `y >= h` carry the constant
/// factor `W(h-1)`, so their total mass is the closed-form cumulative tail.
#[derive(Debug, Clone)]
pub struct LandingSampler {
    start: u64,
    /// Cumulative weights of `y = 1..h-1`.
    cdf: Vec<f64>,
    far_mass: f64,
}

impl LandingSampler {
    pub fn new(start: u64) -> Result<Self> {
        if start < 1 {
            return domain("start must be >= 1");
        }
        let wh = scale_function_f64(start - 1);
        let mut cdf = Vec::with_capacity(start as usize - 1);
        let mut acc = 0.0;
        for y in 1..start {
            acc += 3.0 * (wh - scale_function_f64(start - y - 1)) * tail_mass_f64(y - 1);
            cdf.push(acc);
        }
        let far_mass = 3.0 * wh * cumulative_tail_f64(start - 1);
        Ok(LandingSampler { start, cdf, far_mass })
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    /// Total mass of the law; 1 up to rounding.
    pub fn total_mass(&self) -> f64 {
        self.cdf.last().copied().unwrap_or(0.0) + self.far_mass
    }

    /// Draws `(y, overshoot)`: the height just before the killing jump and
    /// the depth reached below 0.
    pub fn sample<R: Rng + ?Sized>(&self, dist: &StepDistribution, rng: &mut R) -> (u64, u64) {
        let near = self.cdf.last().copied().unwrap_or(0.0);
        let u = rng.random::<f64>() * self.total_mass();
        let y = if u < near {
            self.cdf.partition_point(|&c| c <= u) as u64 + 1
        } else {
            // P(y - 1 >= J) = S(J) / S(h - 1) for J >= h - 1.
            let from = self.start - 1;
            let target = open_unit(rng) * cumulative_tail_f64(from);
            first_below(cumulative_tail_f64, from, target)
        };
        let jump = if y == 1 { dist.sample_jump(rng) } else { dist.sample_tail_jump(rng, y - 1) };
        (y, jump - y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::walk::{crossing_probability, overshoot_pmf};

    #[test]
    fn total_mass_is_one() {
        for h in [1, 2, 3, 10, 256, 10_000] {
            let s = LandingSampler::new(h).unwrap();
            assert!((s.total_mass() - 1.0).abs() < 1e-10, "h={h}: {}", s.total_mass());
        }
        assert!(LandingSampler::new(0).is_err());
    }

    #[test]
    fn sampled_overshoot_matches_exact_law() {
        let d = StepDistribution::default();
        let mut rng = seeded(21);
        for h in [1u64, 6, 80] {
            let s = LandingSampler::new(h).unwrap();
            let n = 200_000u64;
            let mut bins = vec![0u64; 21];
            for _ in 0..n {
                let (y, j) = s.sample(&d, &mut rng);
                assert!(y >= 1);
                bins[(j as usize).min(20)] += 1;
            }
            let mut chi2 = 0.0;
            for (j, &c) in bins.iter().enumerate() {
                let p = if j < 20 { overshoot_pmf(h, j as u64).unwrap() } else { crossing_probability(h, 20).unwrap() };
                let e = p * n as f64;
                chi2 += (c as f64 - e).powi(2) / e;
            }
            // 20 degrees of freedom, 99.9% quantile 45.3.
            assert!(chi2 < 45.3, "h={h}: chi2 {chi2}");
        }
    }
}
