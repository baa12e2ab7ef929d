use super::stats::{ks_statistic, mean, standard_normal_cdf, variance};
use super::{sample_recurrence, EstimationPlan, RecurrenceSample, SampleSet};
use crate::error::{invalid, Error, Result};
use crate::source::SourceSpec;
use crate::symbolic::{nested_hitting_times, ScanOutcome};
use crate::thermo::Spectra;

/// Exact entropy and variance of a Markov source, refusing the
/// maximal-entropy case where the fluctuations degenerate.
fn entropy_and_variance(source: &SourceSpec) -> Result<(f64, f64)> {
    let markov = source.as_markov().ok_or(Error::NotMarkov)?;
    let spectra = Spectra::new(markov)?;
    let sigma2 = spectra.asymptotic_variance()?;
    if sigma2 == 0.0 {
        return Err(Error::DegenerateSource);
    }
    Ok((spectra.entropy(), sigma2))
}

/// Fluctuations of `log w_n` (and of `log r_n` when sampled) at one `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationReport {
    pub n: usize,
    pub samples: usize,
    pub h: f64,
    pub sigma2: f64,
    /// `(log w_n - n h) / (sigma sqrt n)` of the uncensored samples.
    pub standardized: Vec<f64>,
    /// KS distance to `N(0, 1)`, censored samples handled as right-censored.
    pub ks: f64,
    pub censored_fraction: f64,
    /// Sample mean and variance of `(log w_n) / n`.
    pub mean_log_w_over_n: f64,
    pub var_log_w_over_n: f64,
    /// Sample variance of `(log w_n - n h) / sqrt n`, to compare with `sigma^2`.
    pub scaled_variance: f64,
    pub ks_return: Option<f64>,
    pub sa: SaBoundRow,
}

impl FluctuationReport {
    /// `scaled_variance / sigma^2`.
    pub fn variance_ratio(&self) -> f64 {
        self.scaled_variance / self.sigma2
    }
}

fn standardized_ks(times: &[ScanOutcome], n: usize, h: f64, sigma2: f64, budget: u64) -> (Vec<f64>, f64) {
    let scale = (sigma2 * n as f64).sqrt();
    let z = |t: f64| (t.ln() - n as f64 * h) / scale;
    let observed: Vec<f64> = times.iter().filter_map(|o| o.hit()).map(|t| z(t as f64)).collect();
    let censored = times.len() - observed.len();
    let ks = ks_statistic(&observed, censored, z(budget as f64), standard_normal_cdf);
    (observed, ks)
}

fn report(samples: &[RecurrenceSample], n: usize, budget: u64, h: f64, sigma2: f64, epsilon: f64) -> Result<FluctuationReport> {
    let w: Vec<ScanOutcome> = samples
        .iter()
        .map(|s| s.w.ok_or_else(|| Error::InvalidArgument("fluctuation checks need hitting times".into())))
        .collect::<Result<_>>()?;
    let (standardized, ks) = standardized_ks(&w, n, h, sigma2, budget);
    let ks_return = samples
        .iter()
        .map(|s| s.r)
        .collect::<Option<Vec<ScanOutcome>>>()
        .map(|r| standardized_ks(&r, n, h, sigma2, budget).1);
    let logs: Vec<f64> = w.iter().map(|o| (o.value_or_budget() as f64).ln()).collect();
    let per_n: Vec<f64> = logs.iter().map(|l| l / n as f64).collect();
    let scaled: Vec<f64> = logs
        .iter()
        .map(|l| (l - n as f64 * h) / (n as f64).sqrt())
        .collect();
    Ok(FluctuationReport {
        n,
        samples: samples.len(),
        h,
        sigma2,
        standardized,
        ks,
        censored_fraction: w.iter().filter(|o| o.is_censored()).count() as f64 / w.len() as f64,
        mean_log_w_over_n: mean(&per_n),
        var_log_w_over_n: variance(&per_n),
        scaled_variance: variance(&scaled),
        ks_return,
        sa: sa_row(samples, n, budget, epsilon)?,
    })
}

/// Central-limit check at every `n` of the plan, against the exact `h` and
/// `sigma^2` of the source.
pub fn clt_check(plan: &EstimationPlan) -> Result<Vec<FluctuationReport>> {
    let (h, sigma2) = entropy_and_variance(&plan.source)?;
    let samples = sample_recurrence(plan)?;
    clt_from_samples(&samples, h, sigma2, plan.epsilon)
}

pub fn clt_from_samples(samples: &SampleSet, h: f64, sigma2: f64, epsilon: f64) -> Result<Vec<FluctuationReport>> {
    samples
        .n_grid
        .iter()
        .zip(&samples.by_n)
        .map(|(&n, row)| report(row, n, samples.budget, h, sigma2, epsilon))
        .collect()
}

/// Fractions of samples outside `-eps log n <= log(w_n mu) <= log(eps log n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaBoundRow {
    pub n: usize,
    pub lower: f64,
    /// Includes the undetermined samples, counted as violations.
    pub upper: f64,
    /// Censored scans whose budget was too short to decide the upper bound.
    pub undetermined: f64,
    pub lower_stderr: f64,
    pub upper_stderr: f64,
    /// The same fractions for `r_n` when sampled.
    pub r_lower: Option<f64>,
    pub r_upper: Option<f64>,
}

fn violations(times: &[ScanOutcome], log_mu: &[f64], n: usize, budget: u64, epsilon: f64) -> (f64, f64, f64) {
    let lower_bound = -epsilon * (n as f64).ln();
    let upper_bound = (epsilon * (n as f64).ln()).ln();
    let (mut lower, mut upper, mut undetermined) = (0usize, 0usize, 0usize);
    for (t, &lm) in times.iter().zip(log_mu) {
        match *t {
            ScanOutcome::Hit(w) => {
                let v = (w as f64).ln() + lm;
                lower += (v < lower_bound) as usize;
                upper += (v > upper_bound) as usize;
            }
            ScanOutcome::Censored { budget: b } => {
                // No start position <= b - n + 1 matched, so w >= b - n + 2.
                let least = (b.min(budget) as f64 - n as f64 + 2.0).ln() + lm;
                upper += 1;
                undetermined += (least <= upper_bound) as usize;
            }
        }
    }
    let total = times.len() as f64;
    (lower as f64 / total, upper as f64 / total, undetermined as f64 / total)
}

fn sa_row(samples: &[RecurrenceSample], n: usize, budget: u64, epsilon: f64) -> Result<SaBoundRow> {
    let log_mu: Vec<f64> = samples
        .iter()
        .map(|s| s.log_mu.ok_or(Error::NotMarkov))
        .collect::<Result<_>>()?;
    let w: Vec<ScanOutcome> = samples
        .iter()
        .map(|s| s.w.ok_or_else(|| Error::InvalidArgument("bound checks need hitting times".into())))
        .collect::<Result<_>>()?;
    let (lower, upper, undetermined) = violations(&w, &log_mu, n, budget, epsilon);
    let r = samples.iter().map(|s| s.r).collect::<Option<Vec<ScanOutcome>>>();
    let r_fracs = r.map(|r| {
        // On the k-scale the shift r_n - 1 plays the role of w_n.
        let shifted: Vec<ScanOutcome> = r
            .iter()
            .map(|o| match *o {
                ScanOutcome::Hit(k) => ScanOutcome::Hit(k - 1),
                c => c,
            })
            .collect();
        violations(&shifted, &log_mu, n, budget, epsilon)
    });
    let total = samples.len() as f64;
    let se = |p: f64| (p * (1.0 - p) / total).sqrt();
    Ok(SaBoundRow {
        n,
        lower,
        upper,
        undetermined,
        lower_stderr: se(lower),
        upper_stderr: se(upper),
        r_lower: r_fracs.map(|f| f.0),
        r_upper: r_fracs.map(|f| f.1),
    })
}

/// Violation fractions of the almost-sure bounds at every `n` of the plan.
pub fn sa_bound_check(plan: &EstimationPlan, epsilon: f64) -> Result<Vec<SaBoundRow>> {
    if epsilon.is_nan() || epsilon <= 1.0 {
        return invalid(format!("epsilon = {epsilon} must exceed 1"));
    }
    plan.source.as_markov().ok_or(Error::NotMarkov)?;
    let samples = sample_recurrence(plan)?;
    sa_from_samples(&samples, epsilon)
}

pub fn sa_from_samples(samples: &SampleSet, epsilon: f64) -> Result<Vec<SaBoundRow>> {
    if epsilon.is_nan() || epsilon <= 1.0 {
        return invalid(format!("epsilon = {epsilon} must exceed 1"));
    }
    samples
        .n_grid
        .iter()
        .zip(&samples.by_n)
        .map(|(&n, row)| sa_row(row, n, samples.budget, epsilon))
        .collect()
}

/// `(log w_n - n h) / (sigma sqrt(2 n log log n))` along one pair `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LilTrace {
    pub points: Vec<(usize, f64)>,
    pub max: f64,
    /// First `n` whose scan ran out of budget; the trace ends before it.
    pub censored_at: Option<usize>,
}

/// Follow one pair of streams (numbers 0 and 1 of the source) for
/// `n_min..=n_max`, stopping at the first censored scan.
pub fn lil_trace(source: &SourceSpec, n_min: usize, n_max: usize, budget: u64) -> Result<LilTrace> {
    if n_min < 3 || n_max < n_min {
        return invalid("need 3 <= n_min <= n_max so that log log n > 0");
    }
    let (h, sigma2) = entropy_and_variance(source)?;
    let sigma = sigma2.sqrt();
    let word = source.stream(0, n_max as u64)?.take_vec(n_max);
    let lengths: Vec<usize> = (n_min..=n_max).collect();
    let mut y = source.stream(1, budget)?;
    let hits = nested_hitting_times(&word, &lengths, &mut y)?;
    let mut points = Vec::new();
    let mut censored_at = None;
    for (&n, outcome) in lengths.iter().zip(hits) {
        match outcome {
            ScanOutcome::Hit(w) => {
                let nf = n as f64;
                let value = ((w as f64).ln() - nf * h) / (sigma * (2.0 * nf * nf.ln().ln()).sqrt());
                points.push((n, value));
            }
            ScanOutcome::Censored { .. } => {
                censored_at = Some(n);
                break;
            }
        }
    }
    let max = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(LilTrace {
        points,
        max,
        censored_at,
    })
}
