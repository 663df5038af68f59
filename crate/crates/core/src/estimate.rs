//! Monte Carlo estimates and the deterministic parallel driver.
//!
//! Samples are cut into fixed-size tasks; task `t` draws from
//! `task_stream(seed, t)`. Per-task partial results are collected in task
//! order and folded sequentially, so the result for a given seed is
//! bit-identical whatever the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{task_stream, SimRng};

/// Samples per task.
pub const TASK_SIZE: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCI {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl EstimateWithCI {
    /// Binomial proportion with the plug-in standard error.
    pub fn proportion(successes: u64, samples: u64, seed: u64) -> Self {
        let n = samples.max(1) as f64;
        let p = successes as f64 / n;
        EstimateWithCI { value: p, stderr: (p * (1.0 - p) / n).sqrt(), samples, seed }
    }

    /// Sample mean from running sums.
    pub fn from_moments(m: &Moments, seed: u64) -> Self {
        let n = m.count.max(1) as f64;
        let mean = m.sum / n;
        let var = if m.count > 1 { ((m.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        EstimateWithCI { value: mean, stderr: (var / n).sqrt(), samples: m.count, seed }
    }

    /// Symmetric interval `value ± z stderr`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.value - z * self.stderr, self.value + z * self.stderr)
    }

    /// `|value - target|` in units of the standard error (infinite if the
    /// error is zero and the values differ).
    pub fn z_score(&self, target: f64) -> f64 {
        z(self.value - target, self.stderr)
    }

    /// Difference from another independent estimate in units of the combined
    /// standard error.
    pub fn z_score_against(&self, other: &EstimateWithCI) -> f64 {
        z(self.value - other.value, self.stderr.hypot(other.stderr))
    }
}

fn z(diff: f64, sigma: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else {
        diff.abs() / sigma
    }
}

/// Running sums for a mean estimate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }
}

/// Runs `f(rng, n)` for consecutive tasks covering `samples` draws and
/// returns the per-task results in task order. `n` is the number of draws
/// the task is responsible for.
pub fn run_tasks<T, F>(samples: u64, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut SimRng, u64) -> T + Sync,
{
    let tasks = samples.div_ceil(TASK_SIZE);
    (0..tasks)
        .into_par_iter()
        .map(|t| {
            let n = TASK_SIZE.min(samples - t * TASK_SIZE);
            f(&mut task_stream(seed, t), n)
        })
        .collect()
}

/// Counts the draws for which `trial` returns true.
pub fn count_successes<F>(samples: u64, seed: u64, trial: F) -> u64
where
    F: Fn(&mut SimRng) -> bool + Sync,
{
    run_tasks(samples, seed, |rng, n| (0..n).filter(|_| trial(rng)).count() as u64).into_iter().sum()
}

/// Mean of `draw` over `samples` draws.
pub fn mean_of<F>(samples: u64, seed: u64, draw: F) -> EstimateWithCI
where
    F: Fn(&mut SimRng) -> f64 + Sync,
{
    let parts = run_tasks(samples, seed, |rng, n| {
        let mut m = Moments::default();
        for _ in 0..n {
            m.push(draw(rng));
        }
        m
    });
    let mut total = Moments::default();
    for p in &parts {
        total.merge(p);
    }
    EstimateWithCI::from_moments(&total, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn proportion_and_scores() {
        let e = EstimateWithCI::proportion(250, 1000, 1);
        assert_eq!(e.value, 0.25);
        assert!((e.stderr - (0.1875f64 / 1000.0).sqrt()).abs() < 1e-15);
        assert!((e.z_score(0.25 + 2.0 * e.stderr) - 2.0).abs() < 1e-9);
        assert_eq!(e.z_score(0.25), 0.0);
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let draw = |rng: &mut SimRng| rng.random::<f64>().powi(3);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| mean_of(50_000, 9, draw));
        let b = four.install(|| mean_of(50_000, 9, draw));
        assert_eq!(a, b);
        assert!(a.z_score(0.25) < 4.0);
        let c = one.install(|| count_successes(10_001, 3, |r| r.random::<f64>() < 0.5));
        let d = four.install(|| count_successes(10_001, 3, |r| r.random::<f64>() < 0.5));
        assert_eq!(c, d);
    }

    #[test]
    fn tasks_cover_every_sample() {
        let sizes = run_tasks(3 * TASK_SIZE + 5, 0, |_, n| n);
        assert_eq!(sizes, vec![TASK_SIZE, TASK_SIZE, TASK_SIZE, 5]);
    }
}
