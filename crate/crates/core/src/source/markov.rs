use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::symbolic::{Pattern, Symbol};

/// Largest number of contexts `|A|^k` accepted for a Markov source.
pub const MAX_CONTEXTS: usize = 1 << 20;

const ROW_SUM_TOLERANCE: f64 = 1e-12;
const STATIONARY_TOLERANCE: f64 = 1e-13;
const STATIONARY_MAX_ITER: usize = 1_000_000;

/// Whether zero transition probabilities are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftMode {
    /// Strictly positive kernel: the full shift.
    #[default]
    Full,
    /// Zeros allowed: a subshift of finite type.
    Subshift,
}

/// A stationary order-k Markov measure on `|A|` symbols.
///
/// Contexts are the words `a_1 .. a_k`, indexed in base `|A|` with `a_1`
/// most significant. The kernel is stored flat: `kernel[c * |A| + a]` is
/// `p(c -> a)`, which is also the index of the `(k+1)`-word `c a`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovSpec {
    alphabet: usize,
    order: usize,
    mode: ShiftMode,
    kernel: Vec<f64>,
    stationary: Vec<f64>,
}

impl MarkovSpec {
    /// Validate a kernel given as one row per context.
    pub fn new(alphabet: usize, order: usize, rows: Vec<Vec<f64>>, mode: ShiftMode) -> Result<Self> {
        if !(2..=256).contains(&alphabet) {
            return Err(Error::InvalidSpec(format!(
                "alphabet size {alphabet} outside [2, 256]"
            )));
        }
        let contexts = checked_pow(alphabet, order)
            .filter(|&c| c <= MAX_CONTEXTS)
            .ok_or_else(|| {
                Error::SizeGuard(format!("{alphabet}^{order} contexts exceed {MAX_CONTEXTS}"))
            })?;
        if rows.len() != contexts {
            return Err(Error::InvalidSpec(format!(
                "expected {contexts} kernel rows for order {order}, got {}",
                rows.len()
            )));
        }
        let mut kernel = Vec::with_capacity(contexts * alphabet);
        for (c, row) in rows.iter().enumerate() {
            if row.len() != alphabet {
                return Err(Error::InvalidSpec(format!(
                    "kernel row {c} has {} entries, expected {alphabet}",
                    row.len()
                )));
            }
            for &p in row {
                if !p.is_finite() || p < 0.0 {
                    return Err(Error::InvalidSpec(format!("kernel row {c} has entry {p}")));
                }
                if p == 0.0 && mode == ShiftMode::Full {
                    return Err(Error::InvalidSpec(format!(
                        "kernel row {c} has a zero entry (only allowed in subshift mode)"
                    )));
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidSpec(format!("kernel row {c} sums to {sum}")));
            }
            kernel.extend_from_slice(row);
        }
        let stationary = stationary_distribution(alphabet, contexts, &kernel)?;
        Ok(MarkovSpec {
            alphabet,
            order,
            mode,
            kernel,
            stationary,
        })
    }

    /// I.i.d. source with the given symbol probabilities.
    pub fn bernoulli(probs: &[f64]) -> Result<Self> {
        MarkovSpec::new(probs.len(), 0, vec![probs.to_vec()], ShiftMode::Full)
    }

    /// The measure of maximal entropy on the full shift.
    pub fn uniform(alphabet: usize) -> Result<Self> {
        MarkovSpec::bernoulli(&vec![1.0 / alphabet as f64; alphabet])
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mode(&self) -> ShiftMode {
        self.mode
    }

    pub fn contexts(&self) -> usize {
        self.stationary.len()
    }

    /// Flat kernel, `kernel()[c * |A| + a] = p(c -> a)`.
    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    pub fn row(&self, context: usize) -> &[f64] {
        &self.kernel[context * self.alphabet..(context + 1) * self.alphabet]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.kernel.chunks(self.alphabet).map(<[f64]>::to_vec).collect()
    }

    /// Stationary distribution over contexts.
    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// Context reached from `context` after emitting `symbol`.
    #[inline]
    pub fn next_context(&self, context: usize, symbol: Symbol) -> usize {
        (context * self.alphabet + symbol as usize) % self.contexts()
    }

    /// Index of a context word of length `order`.
    pub fn context_index(&self, word: &[Symbol]) -> usize {
        word.iter()
            .fold(0, |acc, &a| acc * self.alphabet + a as usize)
    }

    /// Symbols of the context with the given index.
    pub fn context_word(&self, mut index: usize) -> Vec<Symbol> {
        let mut word = vec![0; self.order];
        for slot in word.iter_mut().rev() {
            *slot = (index % self.alphabet) as Symbol;
            index /= self.alphabet;
        }
        word
    }

    fn check_word(&self, word: &[Symbol]) -> Result<()> {
        match word.iter().find(|&&a| a as usize >= self.alphabet) {
            Some(a) => invalid(format!("symbol {a} outside alphabet of size {}", self.alphabet)),
            None => Ok(()),
        }
    }
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    (0..exp).try_fold(1usize, |acc, _| acc.checked_mul(base))
}

/// Stationary vector of the context chain by power iteration on the lazy
/// chain `(I + P) / 2`, which has the same fixed point and is aperiodic.
/// Once the residual is below tolerance, iteration continues while it still
/// shrinks, so the result sits at the rounding floor.
fn stationary_distribution(alphabet: usize, contexts: usize, kernel: &[f64]) -> Result<Vec<f64>> {
    let mut pi = vec![1.0 / contexts as f64; contexts];
    let mut next = vec![0.0; contexts];
    let mut best = f64::INFINITY;
    for _ in 0..STATIONARY_MAX_ITER {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (c, &mass) in pi.iter().enumerate() {
            for a in 0..alphabet {
                let p = kernel[c * alphabet + a];
                if p > 0.0 {
                    next[(c * alphabet + a) % contexts] += mass * p;
                }
            }
        }
        let residual = next
            .iter()
            .zip(&pi)
            .map(|(n, p)| (n - p).abs())
            .fold(0.0, f64::max);
        if residual < STATIONARY_TOLERANCE && residual >= best {
            return Ok(pi);
        }
        best = best.min(residual);
        for (n, &p) in next.iter_mut().zip(&pi) {
            *n = 0.5 * (p + *n);
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        std::mem::swap(&mut pi, &mut next);
    }
    Err(Error::Numerical(
        "stationary distribution did not converge".into(),
    ))
}

/// Exact probability of a cylinder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderMeasure {
    /// Natural log of the measure; `-inf` for forbidden words.
    pub log_measure: f64,
    /// Linear measure (may underflow to 0 for very long words).
    pub measure: f64,
    /// The word uses a zero-probability transition or context.
    pub forbidden: bool,
}

impl CylinderMeasure {
    fn from_log(log_measure: f64) -> Self {
        CylinderMeasure {
            log_measure,
            measure: log_measure.exp(),
            forbidden: log_measure == f64::NEG_INFINITY,
        }
    }
}

/// `mu([a_1 .. a_n])`: stationary weight of the leading context times the
/// kernel entries along the word. Words shorter than the order use the
/// marginal of the stationary distribution.
pub fn cylinder_measure(spec: &MarkovSpec, word: &[Symbol]) -> Result<CylinderMeasure> {
    if word.is_empty() {
        return invalid("cylinder word must have length >= 1");
    }
    spec.check_word(word)?;
    let k = spec.order;
    if word.len() < k {
        let span = checked_pow(spec.alphabet, k - word.len()).expect("bounded by contexts");
        let start = spec.context_index(word) * span;
        let mass: f64 = spec.stationary[start..start + span].iter().sum();
        return Ok(CylinderMeasure::from_log(mass.ln()));
    }
    let context = spec.context_index(&word[..k]);
    let log_pi = spec.stationary[context].ln();
    Ok(CylinderMeasure::from_log(log_pi + log_kernel_sum(spec, word)))
}

/// Sum of `log p` over the transitions inside `word` (its `n - k` windows).
fn log_kernel_sum(spec: &MarkovSpec, word: &[Symbol]) -> f64 {
    let k = spec.order;
    let mut context = spec.context_index(&word[..k]);
    let mut total = 0.0;
    for &a in &word[k..] {
        total += spec.kernel[context * spec.alphabet + a as usize].ln();
        context = spec.next_context(context, a);
    }
    total
}

/// A locally constant potential of range `m`: `values[w]` is `phi` of the
/// `m`-word with base-`|A|` index `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTable {
    pub alphabet: usize,
    pub range: usize,
    pub values: Vec<f64>,
}

impl PotentialTable {
    pub fn new(alphabet: usize, range: usize, values: Vec<f64>) -> Result<Self> {
        if range == 0 {
            return invalid("potential range must be >= 1");
        }
        let expected = checked_pow(alphabet, range)
            .ok_or_else(|| Error::SizeGuard("potential table too large".into()))?;
        if values.len() != expected {
            return invalid(format!(
                "potential of range {range} needs {expected} values, got {}",
                values.len()
            ));
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return invalid("potential values must be finite or -inf");
        }
        Ok(PotentialTable {
            alphabet,
            range,
            values,
        })
    }

    /// `phi` of the range-`m` word `window`.
    pub fn value(&self, window: &[Symbol]) -> f64 {
        let index = window
            .iter()
            .fold(0, |acc, &a| acc * self.alphabet + a as usize);
        self.values[index]
    }

    /// The potential multiplied by `scale` (with `0 * -inf = -inf` kept forbidden).
    pub fn scaled(&self, scale: f64) -> PotentialTable {
        let values = self
            .values
            .iter()
            .map(|&v| if v == f64::NEG_INFINITY { v } else { scale * v })
            .collect();
        PotentialTable {
            alphabet: self.alphabet,
            range: self.range,
            values,
        }
    }
}

/// `phi(a_1 .. a_{k+1}) = log p(a_1 .. a_k -> a_{k+1})`, normalized so that
/// its pressure vanishes.
pub fn potential_from_markov(spec: &MarkovSpec) -> Result<PotentialTable> {
    if spec.mode == ShiftMode::Full && spec.kernel.iter().any(|&p| p <= 0.0) {
        return invalid("full-shift potential needs a strictly positive kernel");
    }
    let values = spec.kernel.iter().map(|p| p.ln()).collect();
    let table = PotentialTable::new(spec.alphabet, spec.order + 1, values)?;
    let pressure = crate::thermo::pressure(&table, 1.0)?;
    if pressure.abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "potential is not normalized: P(phi) = {pressure:e}"
        )));
    }
    Ok(table)
}

/// `S phi` of the word: the sum of `phi` over its `n - m + 1` windows.
pub fn energy(spec: &MarkovSpec, word: &[Symbol]) -> Result<f64> {
    let m = spec.order + 1;
    if word.len() < m {
        return invalid(format!(
            "energy needs a word of length >= {m}, got {}",
            word.len()
        ));
    }
    spec.check_word(word)?;
    Ok(log_kernel_sum(spec, word))
}

/// `mu` and `S phi` of a pattern together, as attached to samples.
pub fn pattern_weights(spec: &MarkovSpec, pattern: &Pattern) -> Result<(CylinderMeasure, Option<f64>)> {
    let measure = cylinder_measure(spec, pattern.symbols())?;
    let energy = energy(spec, pattern.symbols()).ok();
    Ok((measure, energy))
}

/// Realized Gibbs-property constants of a Markov source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GibbsConstants {
    /// `log(max pi / min pi)`: bounds `|log mu - S phi|` uniformly.
    pub log_k: f64,
    /// Smallest and largest `log p` (the exponential decay rates of cylinders).
    pub min_log_kernel: f64,
    pub max_log_kernel: f64,
}

pub fn gibbs_constants(spec: &MarkovSpec) -> GibbsConstants {
    let positive = |v: &&f64| **v > 0.0;
    let max_pi = spec.stationary.iter().cloned().fold(f64::MIN, f64::max);
    let min_pi = spec
        .stationary
        .iter()
        .filter(positive)
        .cloned()
        .fold(f64::MAX, f64::min);
    let logs = spec.kernel.iter().filter(positive).map(|p| p.ln());
    let (lo, hi) = logs.fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)));
    GibbsConstants {
        log_k: (max_pi / min_pi).ln(),
        min_log_kernel: lo,
        max_log_kernel: hi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> MarkovSpec {
        MarkovSpec::new(2, 1, vec![vec![0.9, 0.1], vec![0.2, 0.8]], ShiftMode::Full).unwrap()
    }

    #[test]
    fn bernoulli_cylinder() {
        let b = MarkovSpec::bernoulli(&[0.7, 0.3]).unwrap();
        let m = cylinder_measure(&b, &[0, 0]).unwrap();
        assert!((m.measure - 0.49).abs() < 1e-15);
        assert!(!m.forbidden);
    }

    #[test]
    fn markov_stationary_and_cylinder() {
        let s = two_state();
        assert!((s.stationary()[0] - 2.0 / 3.0).abs() < 1e-12);
        let m = cylinder_measure(&s, &[0, 1]).unwrap();
        assert!((m.measure - 2.0 / 30.0).abs() < 1e-12);
        assert!((cylinder_measure(&s, &[1]).unwrap().measure - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn short_words_use_context_marginals() {
        let s = MarkovSpec::new(
            2,
            2,
            vec![vec![0.6, 0.4], vec![0.3, 0.7], vec![0.5, 0.5], vec![0.1, 0.9]],
            ShiftMode::Full,
        )
        .unwrap();
        let p0 = cylinder_measure(&s, &[0]).unwrap().measure;
        let p00 = cylinder_measure(&s, &[0, 0]).unwrap().measure;
        let p01 = cylinder_measure(&s, &[0, 1]).unwrap().measure;
        assert!((p0 - p00 - p01).abs() < 1e-14);
    }

    #[test]
    fn potentials() {
        let half = potential_from_markov(&MarkovSpec::uniform(2).unwrap()).unwrap();
        assert!(half.values.iter().all(|v| (v + std::f64::consts::LN_2).abs() < 1e-12));
        let b = potential_from_markov(&MarkovSpec::bernoulli(&[0.7, 0.3]).unwrap()).unwrap();
        assert!((b.values[0] + 0.356675).abs() < 1e-6);
        assert!((b.values[1] + 1.203973).abs() < 1e-6);
        let e = energy(&MarkovSpec::bernoulli(&[0.7, 0.3]).unwrap(), &[0, 0, 0]).unwrap();
        assert!((e + 1.070024).abs() < 1e-6);
    }

    #[test]
    fn energy_needs_full_window() {
        let s = two_state();
        assert!(energy(&s, &[0]).is_err());
        assert!((energy(&s, &[0, 1]).unwrap() - 0.1f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn validation_errors() {
        assert!(MarkovSpec::bernoulli(&[0.7, 0.2]).is_err());
        assert!(MarkovSpec::bernoulli(&[1.0, 0.0]).is_err());
        assert!(MarkovSpec::bernoulli(&[1.0]).is_err());
        assert!(MarkovSpec::new(2, 1, vec![vec![0.5, 0.5]], ShiftMode::Full).is_err());
        assert!(MarkovSpec::new(2, 1, vec![vec![0.0, 1.0], vec![1.0, 0.0]], ShiftMode::Subshift).is_ok());
    }

    #[test]
    fn forbidden_words_are_flagged() {
        let s = MarkovSpec::new(2, 1, vec![vec![0.5, 0.5], vec![1.0, 0.0]], ShiftMode::Subshift).unwrap();
        let m = cylinder_measure(&s, &[1, 1]).unwrap();
        assert!(m.forbidden);
        assert_eq!(m.measure, 0.0);
    }

    #[test]
    fn gibbs_constants_of_two_state_chain() {
        let g = gibbs_constants(&two_state());
        assert!((g.log_k - 2f64.ln()).abs() < 1e-12);
        assert!((g.min_log_kernel - 0.1f64.ln()).abs() < 1e-15);
    }
}
