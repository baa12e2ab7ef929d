//! Monte Carlo estimators of recurrence statistics and the tests that
//! compare them with the exact values.
//!
//! Sample `i` always uses stream `2i` of the source as the `x` sequence and
//! stream `2i + 1` as the independent `y` sequence, whatever the cylinder
//! length. Estimates at different `n` therefore share their randomness,
//! which makes slopes across `n` far less noisy, and every result depends
//! only on `(seed, i)`, never on the number of worker threads.

mod fit;
mod fluctuation;
mod mp;
pub mod stats;
mod spectrum;

pub use fit::{exp_law_fit, kac_check, kac_from_stream, BandPoint, FitReport, KacReport};
pub use fluctuation::{
    clt_check, clt_from_samples, lil_trace, sa_bound_check, sa_from_samples, FluctuationReport,
    LilTrace, SaBoundRow,
};
pub use mp::{mp_divergence_check, sojourn_tail_exponent, MpGrowthReport};
pub use spectrum::{
    entropy_estimate, spectrum_estimate, spectrum_estimate_r, spectrum_estimate_w,
    EntropyEstimate, RecurrenceKind, ReturnVariant, SpectrumEstimate,
};

use crate::error::{invalid, Result};
use crate::par;
use crate::source::{cylinder_measure, energy, SourceSpec};
use crate::symbolic::{nested_hitting_times, return_scan, ScanOutcome};

/// How censored scans enter moment estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CensoringPolicy {
    /// A censored time counts as the budget `B`: a lower bound for `q > 0`
    /// and an upper bound on the contribution `B^q` for `q < 0`.
    #[default]
    SubstituteBudget,
    /// Censored samples are dropped (only allowed when `q <= 0`).
    Exclude,
}

/// Which recurrence times to measure per sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleKinds {
    pub hitting: bool,
    pub ret: bool,
    pub non_overlapping: bool,
}

impl SampleKinds {
    pub const HITTING: SampleKinds = SampleKinds {
        hitting: true,
        ret: false,
        non_overlapping: false,
    };
    pub const ALL: SampleKinds = SampleKinds {
        hitting: true,
        ret: true,
        non_overlapping: true,
    };
    pub const RETURNS: SampleKinds = SampleKinds {
        hitting: false,
        ret: true,
        non_overlapping: true,
    };
}

/// Everything a Monte Carlo run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationPlan {
    pub source: SourceSpec,
    /// Cylinder lengths, strictly increasing.
    pub n_grid: Vec<usize>,
    pub q_grid: Vec<f64>,
    /// Number of samples `N`.
    pub samples: usize,
    /// Budget `B` of every stream.
    pub budget: u64,
    pub censoring: CensoringPolicy,
    pub kinds: SampleKinds,
    /// The `epsilon` of the almost-sure bounds on `w_n mu`.
    pub epsilon: f64,
}

impl EstimationPlan {
    pub fn new(source: SourceSpec, n_grid: Vec<usize>, samples: usize, budget: u64) -> Self {
        EstimationPlan {
            source,
            n_grid,
            q_grid: crate::thermo::default_q_grid(),
            samples,
            budget,
            censoring: CensoringPolicy::SubstituteBudget,
            kinds: SampleKinds::HITTING,
            epsilon: 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() || self.n_grid[0] == 0 {
            return invalid("n grid must be non-empty with n >= 1");
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("n grid must be strictly increasing");
        }
        let n_max = *self.n_grid.last().expect("non-empty") as u64;
        if self.budget < 2 * n_max {
            return invalid(format!("budget {} < 2n = {}", self.budget, 2 * n_max));
        }
        if self.samples < 100 {
            return invalid(format!("{} samples, at least 100 required", self.samples));
        }
        if self.censoring == CensoringPolicy::Exclude && self.q_grid.iter().any(|&q| q > 0.0) {
            return invalid("excluding censored samples biases q > 0 moments; use budget substitution");
        }
        if self.q_grid.iter().any(|q| !q.is_finite()) {
            return invalid("q grid must be finite");
        }
        Ok(())
    }
}

/// One draw of the recurrence times of `x_1 .. x_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceSample {
    pub w: Option<ScanOutcome>,
    pub r: Option<ScanOutcome>,
    pub r_hat: Option<ScanOutcome>,
    /// `log mu([x_1^n])` when the source is Markov.
    pub log_mu: Option<f64>,
    pub mu: Option<f64>,
    /// `S_n phi` of the cylinder when the source is Markov and `n > k`.
    pub energy: Option<f64>,
}

/// Samples for every `n` of the plan: `by_n[j][i]` is sample `i` at `n_grid[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub n_grid: Vec<usize>,
    pub budget: u64,
    pub by_n: Vec<Vec<RecurrenceSample>>,
}

impl SampleSet {
    pub fn at(&self, n: usize) -> Option<&[RecurrenceSample]> {
        let j = self.n_grid.iter().position(|&m| m == n)?;
        Some(&self.by_n[j])
    }
}

/// Draw sample `index` of the plan at every `n`.
pub fn draw_sample(plan: &EstimationPlan, index: usize) -> Result<Vec<RecurrenceSample>> {
    let n_max = *plan.n_grid.last().expect("validated");
    let (word, returns) = if plan.kinds.ret || plan.kinds.non_overlapping {
        // Return scans need their own pass per n since each reads the prefix anew.
        let mut per_n = Vec::with_capacity(plan.n_grid.len());
        let mut word = Vec::new();
        for &n in &plan.n_grid {
            let mut x = plan.source.stream(2 * index as u64, plan.budget)?;
            let scan = return_scan(&mut x, n, plan.kinds.ret, plan.kinds.non_overlapping)?;
            if n == n_max {
                word = scan.pattern.symbols().to_vec();
            }
            per_n.push((scan.r, scan.r_hat));
        }
        (word, per_n)
    } else {
        let mut x = plan.source.stream(2 * index as u64, plan.budget)?;
        (x.take_vec(n_max), vec![(None, None); plan.n_grid.len()])
    };
    let hits = if plan.kinds.hitting {
        let mut y = plan.source.stream(2 * index as u64 + 1, plan.budget)?;
        nested_hitting_times(&word, &plan.n_grid, &mut y)?
            .into_iter()
            .map(Some)
            .collect()
    } else {
        vec![None; plan.n_grid.len()]
    };
    let markov = plan.source.as_markov();
    plan.n_grid
        .iter()
        .zip(hits.into_iter().zip(returns))
        .map(|(&n, (w, (r, r_hat)))| {
            let cyl = markov.map(|m| cylinder_measure(m, &word[..n])).transpose()?;
            Ok(RecurrenceSample {
                w,
                r,
                r_hat,
                log_mu: cyl.map(|c| c.log_measure),
                mu: cyl.map(|c| c.measure),
                energy: markov.and_then(|m| energy(m, &word[..n]).ok()),
            })
        })
        .collect()
}

/// All `N` samples of the plan, generated in parallel when enabled and
/// collected in sample order.
pub fn sample_recurrence(plan: &EstimationPlan) -> Result<SampleSet> {
    plan.validate()?;
    let rows = par::map_indexed(plan.samples, |i| draw_sample(plan, i));
    let mut by_n = vec![Vec::with_capacity(plan.samples); plan.n_grid.len()];
    for row in rows {
        for (j, s) in row?.into_iter().enumerate() {
            by_n[j].push(s);
        }
    }
    Ok(SampleSet {
        n_grid: plan.n_grid.clone(),
        budget: plan.budget,
        by_n,
    })
}
