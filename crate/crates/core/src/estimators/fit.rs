use super::stats::{ks_statistic, mean};
use crate::error::{invalid, Error, Result};
use crate::par;
use crate::source::{cylinder_measure, SourceSpec};
use crate::symbolic::{hitting_time, scan_first, Pattern, ScanOutcome, StreamCursor, SymbolSource};

/// Censored fraction above which an exponential fit is flagged.
pub const FIT_CENSORED_FLAG: f64 = 0.01;

/// Values of `t mu` at which the rate diagnostic is evaluated.
pub const BAND_GRID: [f64; 10] = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5];

/// `-log P(tau > t) / (t mu)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPoint {
    pub t_mu: f64,
    /// `None` when no sample survived past `t`.
    pub value: Option<f64>,
}

/// Exponential-law fit of rescaled hitting times `tau mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub mu: f64,
    /// Method-of-moments rate `1 / mean(tau mu)`.
    pub rho_hat: f64,
    /// KS distance between the rescaled sample and `Exp(rho_hat)`.
    pub ks: f64,
    pub samples: usize,
    pub censored_fraction: f64,
    /// More than 1% of the scans were censored.
    pub flagged: bool,
    pub band: Vec<BandPoint>,
    /// Every band value is positive and inside `[rho_hat / 2, 2 rho_hat]`.
    pub band_ok: bool,
    /// Fraction of successive returns to the cylinder whose offset is at
    /// least `n`, i.e. that do not overlap the previous occurrence.
    pub zeta_hat: Option<f64>,
}

/// Fit `P(tau mu > t) = exp(-rho t)` to `samples` independent hitting
/// times of `pattern`, each scanned in its own stream of at most `budget`.
pub fn exp_law_fit(source: &SourceSpec, pattern: &Pattern, samples: usize, budget: u64) -> Result<FitReport> {
    if samples < 1000 {
        return invalid(format!("{samples} samples, at least 1000 required"));
    }
    let markov = source.as_markov().ok_or(Error::NotMarkov)?;
    let mu = cylinder_measure(markov, pattern.symbols())?.measure;
    if mu <= 0.0 {
        return invalid("pattern has measure zero");
    }
    let outcomes = par::map_indexed(samples, |i| {
        let mut y = source.stream(i as u64, budget)?;
        hitting_time(pattern, &mut y)
    })
    .into_iter()
    .collect::<Result<Vec<ScanOutcome>>>()?;
    let censored = outcomes.iter().filter(|o| o.is_censored()).count();
    let scaled: Vec<f64> = outcomes
        .iter()
        .map(|o| o.value_or_budget() as f64 * mu)
        .collect();
    let observed: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| o.hit())
        .map(|t| t as f64 * mu)
        .collect();
    let rho_hat = 1.0 / mean(&scaled);
    let ks = ks_statistic(&observed, censored, budget as f64 * mu, |t| {
        1.0 - (-rho_hat * t).exp()
    });
    let band: Vec<BandPoint> = BAND_GRID
        .iter()
        .map(|&t_mu| {
            let t = t_mu / mu;
            let survivors = scaled.iter().filter(|&&s| s / mu > t).count();
            let value = (survivors > 0)
                .then(|| -(survivors as f64 / samples as f64).ln() / t_mu);
            BandPoint { t_mu, value }
        })
        .collect();
    let band_ok = band.iter().all(|p| {
        p.value
            .is_some_and(|v| v > 0.0 && v >= 0.5 * rho_hat && v <= 2.0 * rho_hat)
    });
    let zeta_hat = {
        let mut stream = source.stream(samples as u64, budget.saturating_mul(4))?;
        let hits = scan_first(pattern, &mut stream, samples.min(2000) + 1);
        let gaps: Vec<u64> = hits.windows(2).map(|w| w[1] - w[0]).collect();
        (!gaps.is_empty()).then(|| {
            gaps.iter().filter(|&&g| g >= pattern.len() as u64).count() as f64 / gaps.len() as f64
        })
    };
    let censored_fraction = censored as f64 / samples as f64;
    Ok(FitReport {
        mu,
        rho_hat,
        ks,
        samples,
        censored_fraction,
        flagged: censored_fraction > FIT_CENSORED_FLAG,
        band,
        band_ok,
        zeta_hat,
    })
}

/// Result of an empirical Kac check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KacReport {
    pub mu: f64,
    pub returns: usize,
    pub mean_return: f64,
    /// `mean_return * mu`, close to 1.
    pub ratio: f64,
}

/// Mean gap between `returns + 1` successive occurrences of `pattern` in
/// `stream`, times `mu`.
pub fn kac_from_stream<S: SymbolSource>(
    pattern: &Pattern,
    stream: &mut StreamCursor<S>,
    returns: usize,
    mu: f64,
) -> Result<KacReport> {
    let hits = scan_first(pattern, stream, returns + 1);
    if hits.len() < returns + 1 {
        return Err(Error::Numerical(format!(
            "only {} occurrences within the budget",
            hits.len()
        )));
    }
    let mean_return = (hits[returns] - hits[0]) as f64 / returns as f64;
    Ok(KacReport {
        mu,
        returns,
        mean_return,
        ratio: mean_return * mu,
    })
}

/// Kac's lemma along one stationary stream of the source.
pub fn kac_check(source: &SourceSpec, pattern: &Pattern, returns: usize) -> Result<KacReport> {
    let markov = source.as_markov().ok_or(Error::NotMarkov)?;
    let mu = cylinder_measure(markov, pattern.symbols())?.measure;
    if mu <= 0.0 {
        return invalid("pattern has measure zero");
    }
    let budget = ((returns as f64 + 1.0) / mu * 20.0).min(u64::MAX as f64) as u64;
    let mut stream = source.stream(0, budget)?;
    kac_from_stream(pattern, &mut stream, returns, mu)
}


