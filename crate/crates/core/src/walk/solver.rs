//! Exact first-passage laws of the boundary walk.
//!
//! The walk is killed on entering `{.., -1, 0}` or, when truncated at `N`,
//! on reaching `N + 1`. Because upward moves are `+1` only, the killed Green
//! function has the closed form
//!
//! ```text
//! G(x, y) = ( W(x-1) W(N-y) / W(N) - W(x-y-1) ) / q
//! ```
//!
//! where `q = 2/3` is the up-move probability of the non-lazy walk and `W` is
//! the scale function (`W(n) = (2n+1) C(2n,n) 4^{-n}`, see
//! [`scale_function`](crate::combinatorics::scale_function)). This solves the
//! harmonic system `h = P h` on `{1..N}` directly; the lazy step only
//! rescales `G` by 2 and does not change any hitting law. Letting `N -> oo`
//! gives `G(x, y) = (W(x-1) - W(x-y-1)) / q`, and the summed tails make the
//! untruncated overshoot law a finite sum.

use crate::combinatorics::{cumulative_tail_f64, pk_f64, scale_function_f64, tail_mass_f64};
use crate::error::{domain, Result};

const UP: f64 = 2.0 / 3.0;

/// Law of the overshoot `|S_{T_-}|` for a walk started at `start`.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingDistribution {
    pub start: u64,
    pub truncation: u64,
    /// `mass[j] = P(S_{T_-} = -j, T_- before reaching N+1)`.
    pub mass: Vec<f64>,
    /// Probability of landing below `-(mass.len() - 1)` before reaching `N+1`.
    pub mass_beyond: f64,
    /// Probability of reaching `N + 1` before `Z^-`.
    pub escape_mass: f64,
    green: Vec<f64>,
}

impl HittingDistribution {
    /// `P(|S_{T_-}| >= b, T_- before reaching N+1)`.
    pub fn prob_at_least(&self, b: u64) -> f64 {
        at_least_from_green(&self.green, b)
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum::<f64>() + self.mass_beyond + self.escape_mass
    }
}

fn at_least_from_green(green: &[f64], b: u64) -> f64 {
    // Killing from y with overshoot >= b needs a jump of size >= y + b.
    green
        .iter()
        .enumerate()
        .map(|(i, g)| g * 2.0 * tail_mass_f64(i as u64 + b))
        .sum()
}

/// Scale function table for truncation height `N`, reusable across starts and
/// thresholds.
#[derive(Debug, Clone)]
pub struct FirstPassageSolver {
    truncation: u64,
    /// `w[n] = W(n)` for `n = 0..=N`.
    w: Vec<f64>,
}

impl FirstPassageSolver {
    pub fn new(truncation: u64) -> Result<Self> {
        if truncation < 1 {
            return domain("truncation must be >= 1");
        }
        let w = (0..=truncation).map(scale_function_f64).collect();
        Ok(FirstPassageSolver { truncation, w })
    }

    pub fn truncation(&self) -> u64 {
        self.truncation
    }

    fn scale(&self, n: i64) -> f64 {
        if n < 0 {
            0.0
        } else {
            self.w[n as usize]
        }
    }

    fn check_start(&self, a: u64) -> Result<()> {
        if a < 1 || a > self.truncation {
            return domain(format!("start {a} outside 1..={}", self.truncation));
        }
        Ok(())
    }

    /// Expected number of (non-lazy) moves spent at each `y = 1..=N`.
    pub fn green_row(&self, a: u64) -> Result<Vec<f64>> {
        self.check_start(a)?;
        let n = self.truncation as i64;
        let a = a as i64;
        let wn = self.scale(n);
        let wa = self.scale(a - 1);
        Ok((1..=n)
            .map(|y| (wa * self.scale(n - y) / wn - self.scale(a - y - 1)) / UP)
            .collect())
    }

    /// `P_a(reach N+1 before Z^-)`.
    pub fn escape(&self, a: u64) -> Result<f64> {
        self.check_start(a)?;
        Ok(self.scale(a as i64 - 1) / self.scale(self.truncation as i64))
    }

    /// Truncated `P_a(|S_{T_-}| >= b)`: escapes count as no crossing.
    pub fn prob_at_least(&self, a: u64, b: u64) -> Result<f64> {
        Ok(at_least_from_green(&self.green_row(a)?, b))
    }

    /// Overshoot law with `mass[j]` tabulated for `j = 0..=max_overshoot`.
    pub fn distribution(&self, a: u64, max_overshoot: u64) -> Result<HittingDistribution> {
        let green = self.green_row(a)?;
        let mass = (0..=max_overshoot)
            .map(|j| {
                green
                    .iter()
                    .enumerate()
                    .map(|(i, g)| g * 2.0 * pk_f64(i as u64 + 1 + j))
                    .sum()
            })
            .collect();
        let mass_beyond = at_least_from_green(&green, max_overshoot + 1);
        Ok(HittingDistribution {
            start: a,
            truncation: self.truncation,
            mass,
            mass_beyond,
            escape_mass: self.escape(a)?,
            green,
        })
    }

    /// Rigorous bracket for the untruncated `Q_{a,b} = P_a(|S_{T_-}| >= b)`.
    ///
    /// By the strong Markov property at the hit of `N+1`,
    /// `Q(a) = h(a) + e(a) Q(N+1)` with `h` the truncated value and `e` the
    /// escape probability. `Q(N+1) <= 1`, and `Q` is nondecreasing in the
    /// start, so `Q(N+1) >= Q(N) = h(N) + e(N) Q(N+1)`.
    pub fn crossing_bounds(&self, a: u64, b: u64) -> Result<(f64, f64)> {
        let h_a = self.prob_at_least(a, b)?;
        let e_a = self.escape(a)?;
        let n = self.truncation;
        let h_n = self.prob_at_least(n, b)?;
        let e_n = self.escape(n)?;
        let theta_low = (h_n / (1.0 - e_n)).min(1.0);
        Ok((h_a + e_a * theta_low, h_a + e_a))
    }
}

/// Truncated `Q_{a,b} = P_a(|S_{T_-}| >= b)` and its error bound (the escape
/// probability): the untruncated value lies in `[value, value + bound]`.
pub fn hitting_prob_exact(a: u64, b: u64, truncation: u64) -> Result<(f64, f64)> {
    if truncation < a {
        return domain(format!("truncation {truncation} below start {a}"));
    }
    let solver = FirstPassageSolver::new(truncation)?;
    let d = solver.distribution(a, 0)?;
    Ok((d.prob_at_least(b), d.escape_mass))
}

/// Full overshoot law from `a` at truncation `N`, tabulated up to `j = N`.
pub fn overshoot_distribution_exact(a: u64, truncation: u64) -> Result<HittingDistribution> {
    if truncation < a {
        return domain(format!("truncation {truncation} below start {a}"));
    }
    FirstPassageSolver::new(truncation)?.distribution(a, truncation)
}

/// Untruncated `Q_{a,b} = P_a(|S_{T_-}| >= b)`, exact up to rounding:
///
/// ```text
/// Q = 3 [ sum_{y<a} (W(a-1) - W(a-y-1)) T(y+b-1) + W(a-1) S(a+b-1) ]
/// ```
///
/// with `T` the one-sided tail mass and `S` its cumulative sum. Cost `O(a)`.
pub fn crossing_probability(a: u64, b: u64) -> Result<f64> {
    if a < 1 {
        return domain("start must be >= 1");
    }
    let wa = scale_function_f64(a - 1);
    let mut near = 0.0;
    for y in 1..a {
        near += (wa - scale_function_f64(a - y - 1)) * tail_mass_f64(y + b - 1);
    }
    Ok(3.0 * (near + wa * cumulative_tail_f64(a + b - 1)))
}

/// Untruncated `P_a(|S_{T_-}| = j)`.
pub fn overshoot_pmf(a: u64, j: u64) -> Result<f64> {
    if a < 1 {
        return domain("start must be >= 1");
    }
    let wa = scale_function_f64(a - 1);
    let mut near = 0.0;
    for y in 1..a {
        near += (wa - scale_function_f64(a - y - 1)) * pk_f64(y + j);
    }
    Ok(3.0 * (near + wa * tail_mass_f64(a + j - 1)))
}
