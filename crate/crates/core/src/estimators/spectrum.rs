use super::stats::{bootstrap_mean_stderr, jackknife_stderr, log_mean_exp_blocks, mean, ols};
use super::{sample_recurrence, CensoringPolicy, EstimationPlan, RecurrenceSample, SampleKinds, SampleSet};
use crate::error::{invalid, Result};
use crate::symbolic::ScanOutcome;
use crate::thermo::{CurveKind, SpectrumCurve, SpectrumPoint};

/// Jackknife block count.
pub const JACKKNIFE_BLOCKS: usize = 50;

/// Censored fraction above which an estimate carries a reliability warning.
pub const WARN_CENSORED: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecurrenceKind {
    Hitting,
    Return,
    NonOverlapping,
}

impl RecurrenceKind {
    pub fn label(self) -> &'static str {
        match self {
            RecurrenceKind::Hitting => "w",
            RecurrenceKind::Return => "r",
            RecurrenceKind::NonOverlapping => "rhat",
        }
    }

    fn pick(self, s: &RecurrenceSample) -> Option<ScanOutcome> {
        match self {
            RecurrenceKind::Hitting => s.w,
            RecurrenceKind::Return => s.r,
            RecurrenceKind::NonOverlapping => s.r_hat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReturnVariant {
    Overlapping,
    NonOverlapping,
}

/// Moment-spectrum estimate for one recurrence kind.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    pub kind: RecurrenceKind,
    /// Per `q`: OLS slope of `n W_n(q)` against `n` (or `W_n(q)` itself
    /// when the grid has a single `n`), with jackknife standard errors.
    pub curve: SpectrumCurve,
    /// `log_moments[j][i] = log((1/N) sum t^q)` at `q_grid[j]`, `n_grid[i]`.
    pub log_moments: Vec<Vec<f64>>,
    pub log_moment_stderr: Vec<Vec<f64>>,
    pub censored_fraction: Vec<f64>,
    pub warnings: Vec<String>,
}

impl SpectrumEstimate {
    /// `W_n(q) = log_moment / n`.
    pub fn w_n(&self, q_index: usize, n_index: usize) -> f64 {
        self.log_moments[q_index][n_index] / self.curve.n[n_index] as f64
    }
}

/// Estimate `(1/n) log E[t^q]` for every `n` and `q` from existing samples.
pub fn spectrum_estimate(
    samples: &SampleSet,
    kind: RecurrenceKind,
    q_grid: &[f64],
    policy: CensoringPolicy,
) -> Result<SpectrumEstimate> {
    if policy == CensoringPolicy::Exclude && q_grid.iter().any(|&q| q > 0.0) {
        return invalid("censored samples may only be excluded for q <= 0");
    }
    let mut logs_by_n = Vec::with_capacity(samples.n_grid.len());
    let mut censored_fraction = Vec::with_capacity(samples.n_grid.len());
    for (j, row) in samples.by_n.iter().enumerate() {
        let n = samples.n_grid[j] as u64;
        let mut censored = 0usize;
        let logs = row
            .iter()
            .map(|s| match kind.pick(s) {
                Some(ScanOutcome::Hit(t)) => Ok(Some((t as f64).ln())),
                Some(ScanOutcome::Censored { budget }) => {
                    censored += 1;
                    // Block indices count n symbols each.
                    let bound = match kind {
                        RecurrenceKind::NonOverlapping => (budget / n).max(1),
                        _ => budget,
                    };
                    Ok(match policy {
                        CensoringPolicy::SubstituteBudget => Some((bound as f64).ln()),
                        CensoringPolicy::Exclude => None,
                    })
                }
                None => invalid(format!(
                    "samples at n = {} carry no {} times",
                    samples.n_grid[j],
                    kind.label()
                )),
            })
            .collect::<Result<Vec<Option<f64>>>>()?;
        censored_fraction.push(censored as f64 / row.len() as f64);
        logs_by_n.push(logs);
    }
    let ns: Vec<f64> = samples.n_grid.iter().map(|&n| n as f64).collect();
    let mut points = Vec::with_capacity(q_grid.len());
    let mut log_moments = Vec::with_capacity(q_grid.len());
    let mut log_moment_stderr = Vec::with_capacity(q_grid.len());
    for &q in q_grid {
        let per_n: Vec<(f64, Vec<f64>)> = logs_by_n
            .iter()
            .map(|logs| log_mean_exp_blocks(logs, q, JACKKNIFE_BLOCKS))
            .collect();
        let full: Vec<f64> = per_n.iter().map(|(f, _)| *f).collect();
        let blocks = per_n[0].1.len();
        let (value, stderr) = if ns.len() >= 2 {
            let reps: Vec<f64> = (0..blocks)
                .map(|b| {
                    let ys: Vec<f64> = per_n.iter().map(|(_, r)| r[b]).collect();
                    ols(&ns, &ys).0
                })
                .collect();
            (ols(&ns, &full).0, jackknife_stderr(&reps))
        } else {
            (full[0] / ns[0], jackknife_stderr(&per_n[0].1) / ns[0])
        };
        points.push(SpectrumPoint {
            q,
            value: Some(value),
            stderr: Some(stderr),
        });
        log_moment_stderr.push(per_n.iter().map(|(_, r)| jackknife_stderr(r)).collect());
        log_moments.push(full);
    }
    let warnings = samples
        .n_grid
        .iter()
        .zip(&censored_fraction)
        .filter(|(_, &c)| c > WARN_CENSORED)
        .map(|(n, c)| format!("{}: {:.1}% of scans censored at n = {n}", kind.label(), 100.0 * c))
        .collect();
    Ok(SpectrumEstimate {
        kind,
        curve: SpectrumCurve {
            kind: CurveKind::Estimated,
            points,
            n: samples.n_grid.clone(),
            samples: Some(samples.by_n[0].len()),
        },
        log_moments,
        log_moment_stderr,
        censored_fraction,
        warnings,
    })
}

/// Sample and estimate the hitting-time spectrum `W_n(q)`.
pub fn spectrum_estimate_w(plan: &EstimationPlan) -> Result<SpectrumEstimate> {
    let mut plan = plan.clone();
    plan.kinds = SampleKinds::HITTING;
    let samples = sample_recurrence(&plan)?;
    spectrum_estimate(&samples, RecurrenceKind::Hitting, &plan.q_grid, plan.censoring)
}

/// Sample and estimate a return-time spectrum.
pub fn spectrum_estimate_r(plan: &EstimationPlan, variant: ReturnVariant) -> Result<SpectrumEstimate> {
    let mut plan = plan.clone();
    let kind = match variant {
        ReturnVariant::Overlapping => {
            plan.kinds = SampleKinds {
                hitting: false,
                ret: true,
                non_overlapping: false,
            };
            RecurrenceKind::Return
        }
        ReturnVariant::NonOverlapping => {
            plan.kinds = SampleKinds {
                hitting: false,
                ret: false,
                non_overlapping: true,
            };
            RecurrenceKind::NonOverlapping
        }
    };
    let samples = sample_recurrence(&plan)?;
    spectrum_estimate(&samples, kind, &plan.q_grid, plan.censoring)
}

/// Sample mean of `(1/n) log w_n` with a bootstrap standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    /// Censored samples enter as `(1/n) log B`, a lower bound.
    pub censored_fraction: f64,
    /// More than 10% of the samples were censored.
    pub unreliable: bool,
}

/// Entropy estimates at every `n` of an existing sample set.
pub fn entropy_estimate(samples: &SampleSet, seed: u64) -> Result<Vec<EntropyEstimate>> {
    samples
        .n_grid
        .iter()
        .zip(&samples.by_n)
        .map(|(&n, row)| {
            let mut censored = 0;
            let values = row
                .iter()
                .map(|s| match s.w {
                    Some(w) => {
                        censored += w.is_censored() as usize;
                        Ok((w.value_or_budget() as f64).ln() / n as f64)
                    }
                    None => invalid("entropy estimate needs hitting times"),
                })
                .collect::<Result<Vec<f64>>>()?;
            let censored_fraction = censored as f64 / values.len() as f64;
            Ok(EntropyEstimate {
                n,
                mean: mean(&values),
                stderr: bootstrap_mean_stderr(&values, 200, seed ^ n as u64),
                censored_fraction,
                unreliable: censored_fraction > WARN_CENSORED,
            })
        })
        .collect()
}
