//! Batches of independent episodes and their aggregate metrics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{run_episode, EpisodeResult, Policy, RunOptions};

#[derive(Debug, Clone)]
pub struct Job<R> {
    pub config: ScenarioConfig<R>,
    pub seed: u64,
}

/// Runs every job on a pool of `parallelism` threads. Results come back in
/// job order whatever the pool size.
pub fn run_batch<R: Real>(
    jobs: &[Job<R>],
    policy: &Policy<R>,
    options: &RunOptions,
    parallelism: usize,
) -> Result<Vec<(EpisodeResult, Vec<String>)>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| jobs.par_iter().map(|j| run_episode(&j.config, j.seed, policy, options)).collect())
}

/// Deterministic aggregate of a batch; wall-clock figures live in [`TimingReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub episodes: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// 95 % Wilson score interval for the success rate.
    pub success_ci95: (f64, f64),
    /// Mean over successful episodes only.
    pub mean_capture_steps: Option<f64>,
    pub clean_captures: usize,
    pub coverage_target: f64,
    /// Episodes that never reach the target count as slower than all others.
    pub median_steps_to_coverage: Option<f64>,
}

impl BatchReport {
    pub fn from_results(results: &[EpisodeResult], coverage_target: f64) -> Self {
        let n = results.len();
        let successes = results.iter().filter(|r| r.success).count();
        let steps: Vec<f64> = results.iter().filter_map(|r| r.capture_steps).map(f64::from).collect();
        let mean_capture_steps = (!steps.is_empty()).then(|| steps.iter().sum::<f64>() / steps.len() as f64);
        let cover: Vec<Option<u32>> = results.iter().map(|r| r.steps_to_coverage(coverage_target)).collect();
        Self {
            episodes: n,
            successes,
            success_rate: if n == 0 { 0.0 } else { successes as f64 / n as f64 },
            success_ci95: wilson_interval(successes, n, 1.96),
            mean_capture_steps,
            clean_captures: results.iter().filter(|r| r.clean).count(),
            coverage_target,
            median_steps_to_coverage: median_with_missing(&cover),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub steps: usize,
    pub median_step_us: f64,
    pub mean_step_us: f64,
    pub p95_step_us: f64,
}

impl TimingReport {
    pub fn from_results(results: &[EpisodeResult]) -> Self {
        let mut all: Vec<u64> = results.iter().flat_map(|r| r.step_micros.iter().copied()).collect();
        all.sort_unstable();
        let pick = |q: f64| -> f64 {
            if all.is_empty() {
                return 0.0;
            }
            all[((all.len() - 1) as f64 * q).round() as usize] as f64
        };
        let mean = if all.is_empty() { 0.0 } else { all.iter().sum::<u64>() as f64 / all.len() as f64 };
        Self { steps: all.len(), median_step_us: median_u64(&all), mean_step_us: mean, p95_step_us: pick(0.95) }
    }
}

fn median_u64(sorted: &[u64]) -> f64 {
    match sorted.len() {
        0 => 0.0,
        n if n % 2 == 1 => sorted[n / 2] as f64,
        n => (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0,
    }
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Median where `None` ranks above every value. `None` if the median itself
/// falls on a missing entry.
pub fn median_with_missing(values: &[Option<u32>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v: Vec<Option<u32>> = values.to_vec();
    v.sort_by(|a, b| match (a, b) {
        (Some(a), Some(b)) => a.cmp(b),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2].map(f64::from)
    } else {
        Some((f64::from(v[n / 2 - 1]?) + f64::from(v[n / 2]?)) / 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn result(success: bool, steps: Option<u32>, curve: Vec<f64>) -> EpisodeResult {
        EpisodeResult {
            seed: 0,
            success,
            capture_steps: steps,
            clean: success,
            steps: steps.unwrap_or(512),
            coverage_curve: curve,
            step_micros: vec![10, 30, 20],
        }
    }

    #[test]
    fn wilson_known_values() {
        let (lo, hi) = wilson_interval(45, 50, 1.96);
        assert_abs_diff_eq!(lo, 0.7864, epsilon = 1e-4);
        assert_abs_diff_eq!(hi, 0.9565, epsilon = 1e-4);
        let (lo, hi) = wilson_interval(50, 50, 1.96);
        assert_abs_diff_eq!(hi, 1.0);
        assert!(lo > 0.92 && lo < 0.93);
    }

    #[test]
    fn single_episode_report_matches_episode() {
        let r = result(true, Some(42), vec![0.1, 0.5, 0.9]);
        let rep = BatchReport::from_results(std::slice::from_ref(&r), 0.8);
        assert_eq!(rep.success_rate, 1.0);
        assert_eq!(rep.mean_capture_steps, Some(42.0));
        assert_eq!(rep.median_steps_to_coverage, Some(2.0));
    }

    #[test]
    fn mean_conditions_on_success() {
        let rs = [result(true, Some(40), vec![]), result(false, None, vec![]), result(true, Some(60), vec![])];
        let rep = BatchReport::from_results(&rs, 0.8);
        assert_eq!(rep.mean_capture_steps, Some(50.0));
        assert_abs_diff_eq!(rep.success_rate, 2.0 / 3.0);
    }

    #[test]
    fn median_with_missing_entries() {
        assert_eq!(median_with_missing(&[Some(3), None, Some(1)]), Some(3.0));
        assert_eq!(median_with_missing(&[Some(3), None, None]), None);
        assert_eq!(median_with_missing(&[Some(4), Some(2)]), Some(3.0));
    }

    #[test]
    fn timing_stats() {
        let t = TimingReport::from_results(&[result(true, Some(1), vec![])]);
        assert_eq!(t.median_step_us, 20.0);
        assert_eq!(t.steps, 3);
    }
}
