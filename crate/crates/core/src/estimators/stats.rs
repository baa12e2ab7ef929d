//! Small statistical toolbox shared by the estimators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Ordinary least squares `y = intercept + slope x`; returns `(slope, intercept)`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Jackknife standard error from leave-one-block-out replicates.
pub fn jackknife_stderr(replicates: &[f64]) -> f64 {
    let b = replicates.len() as f64;
    let m = mean(replicates);
    ((b - 1.0) / b * replicates.iter().map(|r| (r - m) * (r - m)).sum::<f64>()).sqrt()
}

/// Contiguous block boundaries splitting `n` items into `blocks` parts.
pub fn block_bounds(n: usize, blocks: usize) -> Vec<(usize, usize)> {
    let blocks = blocks.min(n).max(1);
    (0..blocks)
        .map(|b| (b * n / blocks, (b + 1) * n / blocks))
        .collect()
}

/// `log((1/N) sum_i exp(q l_i))` over the present values, with its
/// leave-one-block-out replicates. Blocks are contiguous in sample index so
/// the same samples are left out at every `n`. Terms are shifted by their
/// maximum and replicates are assembled from prefix and suffix block sums,
/// so no subtraction of nearly equal sums occurs. At `q = 0` every value is
/// exactly 0.
pub fn log_mean_exp_blocks(logs: &[Option<f64>], q: f64, blocks: usize) -> (f64, Vec<f64>) {
    let shift = logs
        .iter()
        .flatten()
        .map(|l| q * l)
        .fold(f64::NEG_INFINITY, f64::max);
    let bounds = block_bounds(logs.len(), blocks);
    let sums: Vec<(f64, usize)> = bounds
        .iter()
        .map(|&(s, e)| {
            logs[s..e].iter().flatten().fold((0.0, 0), |(sum, count), l| {
                (sum + (q * l - shift).exp(), count + 1)
            })
        })
        .collect();
    let mut prefix = vec![(0.0, 0); sums.len() + 1];
    for (i, &(s, c)) in sums.iter().enumerate() {
        prefix[i + 1] = (prefix[i].0 + s, prefix[i].1 + c);
    }
    let mut suffix = vec![(0.0, 0); sums.len() + 1];
    for i in (0..sums.len()).rev() {
        suffix[i] = (suffix[i + 1].0 + sums[i].0, suffix[i + 1].1 + sums[i].1);
    }
    let estimate = |sum: f64, count: usize| shift + (sum / count as f64).ln();
    let full = estimate(prefix[sums.len()].0, prefix[sums.len()].1);
    let replicates = (0..sums.len())
        .map(|b| estimate(prefix[b].0 + suffix[b + 1].0, prefix[b].1 + suffix[b + 1].1))
        .collect();
    (full, replicates)
}

/// Bootstrap standard error of the mean with a fixed seed.
pub fn bootstrap_mean_stderr(xs: &[f64], resamples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = xs.len();
    let means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| xs[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    variance(&means).sqrt()
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
///
/// `censored` observations are only known to exceed `censor_point`; the
/// empirical CDF is exact below it, so the supremum runs over the observed
/// values and the left limit at the censoring point.
pub fn ks_statistic(
    observed: &[f64],
    censored: usize,
    censor_point: f64,
    cdf: impl Fn(f64) -> f64,
) -> f64 {
    let total = (observed.len() + censored) as f64;
    let mut xs = observed.to_vec();
    xs.sort_by(f64::total_cmp);
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / total - f).max(f - i as f64 / total);
    }
    if censored > 0 {
        let below = xs.iter().filter(|&&x| x < censor_point).count() as f64;
        d = d.max((cdf(censor_point) - below / total).abs());
    }
    d
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Hill estimator of the tail index from the `k` largest values.
pub fn hill_tail_index(values: &[f64], k: usize) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| *x > 0.0).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    let k = k.min(v.len() - 1).max(1);
    let threshold = v[k].ln();
    let mean_excess = v[..k].iter().map(|x| x.ln() - threshold).sum::<f64>() / k as f64;
    1.0 / mean_excess
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ols_recovers_a_line() {
        let x = [8.0, 12.0, 16.0];
        let y: Vec<f64> = x.iter().map(|v| 0.3 + 1.5 * v).collect();
        let (s, c) = ols(&x, &y);
        assert!((s - 1.5).abs() < 1e-12 && (c - 0.3).abs() < 1e-12);
    }

    #[test]
    fn log_mean_exp_matches_direct_formula() {
        let logs: Vec<f64> = (0..103).map(|i| (i as f64).sin() * 5.0).collect();
        let q = 1.7;
        let wrapped: Vec<Option<f64>> = logs.iter().copied().map(Some).collect();
        let (full, reps) = log_mean_exp_blocks(&wrapped, q, 10);
        let direct = (logs.iter().map(|l| (q * l).exp()).sum::<f64>() / 103.0).ln();
        assert!((full - direct).abs() < 1e-12);
        let (s, e) = block_bounds(103, 10)[3];
        let kept: Vec<f64> = logs[..s].iter().chain(&logs[e..]).copied().collect();
        let direct = (kept.iter().map(|l| (q * l).exp()).sum::<f64>() / kept.len() as f64).ln();
        assert!((reps[3] - direct).abs() < 1e-12);
        let (zero, reps) = log_mean_exp_blocks(&wrapped, 0.0, 10);
        assert_eq!(zero, 0.0);
        assert!(reps.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn ks_of_a_perfect_grid_is_small() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_statistic(&xs, 0, f64::INFINITY, |x| x.clamp(0.0, 1.0)) <= 0.0005 + 1e-12);
        // Censor the top half: the sup only sees the lower half plus the jump.
        let lower: Vec<f64> = xs[..500].to_vec();
        assert!(ks_statistic(&lower, 500, 0.5, |x| x.clamp(0.0, 1.0)) <= 0.0005 + 1e-12);
    }

    #[test]
    fn hill_on_exact_pareto_quantiles() {
        let n = 100_000;
        let xs: Vec<f64> = (1..=n).map(|i| (i as f64 / n as f64).powf(-1.0 / 2.0)).collect();
        let a = hill_tail_index(&xs, 1000);
        assert!((a - 2.0).abs() < 0.05, "{a}");
    }

    #[test]
    fn normal_cdf_anchor() {
        assert!((standard_normal_cdf(1.96) - 0.975).abs() < 1e-4);
    }
}
