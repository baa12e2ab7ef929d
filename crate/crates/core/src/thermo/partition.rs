use crate::error::{invalid, Error, Result};
use crate::source::{cylinder_measure, MarkovSpec};
use crate::symbolic::Symbol;

/// Largest number of words `brute_force_partition` will enumerate.
pub const BRUTE_FORCE_LIMIT: usize = 1 << 20;

/// `log` of a sum given by its terms' logs; `-inf` for an empty sum.
pub fn log_sum_exp(terms: impl IntoIterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.into_iter().collect();
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// `log sum_{|w| = n} mu([w])^(1 - q)` over the allowed words, computed by
/// `n - k` steps of the `q`-deformed transfer operator in log space,
/// starting from `pi^(1 - q)` on the contexts.
pub fn partition_sum(spec: &MarkovSpec, n: usize, q: f64) -> Result<f64> {
    if n == 0 {
        return invalid("partition sums need n >= 1");
    }
    let a = spec.alphabet();
    let k = spec.order();
    let s = 1.0 - q;
    let pi = spec.stationary();
    if n <= k {
        // Marginals of pi on the leading n symbols.
        let span = a.pow((k - n) as u32);
        return Ok(log_sum_exp(pi.chunks(span).filter_map(|block| {
            let mass: f64 = block.iter().sum();
            (mass > 0.0).then(|| s * mass.ln())
        })));
    }
    let contexts = spec.contexts();
    let kernel = spec.kernel();
    let mut v: Vec<f64> = pi
        .iter()
        .map(|&p| if p > 0.0 { s * p.ln() } else { f64::NEG_INFINITY })
        .collect();
    let mut incoming: Vec<Vec<f64>> = vec![Vec::with_capacity(a); contexts];
    for _ in k..n {
        incoming.iter_mut().for_each(Vec::clear);
        for (c, &vc) in v.iter().enumerate() {
            if vc == f64::NEG_INFINITY {
                continue;
            }
            for b in 0..a {
                let p = kernel[c * a + b];
                if p > 0.0 {
                    incoming[spec.next_context(c, b as Symbol)].push(vc + s * p.ln());
                }
            }
        }
        for (slot, terms) in v.iter_mut().zip(&incoming) {
            *slot = log_sum_exp(terms.iter().copied());
        }
    }
    Ok(log_sum_exp(v))
}

/// The same sum by enumerating every word and its exact cylinder measure.
pub fn brute_force_partition(spec: &MarkovSpec, n: usize, q: f64) -> Result<f64> {
    if n == 0 {
        return invalid("partition sums need n >= 1");
    }
    let a = spec.alphabet();
    let words = (0..n)
        .try_fold(1usize, |acc, _| acc.checked_mul(a))
        .filter(|&w| w <= BRUTE_FORCE_LIMIT)
        .ok_or_else(|| Error::SizeGuard(format!("{a}^{n} words exceed {BRUTE_FORCE_LIMIT}")))?;
    let mut word = vec![0 as Symbol; n];
    let mut terms = Vec::with_capacity(words);
    for index in 0..words {
        let mut rest = index;
        for slot in word.iter_mut().rev() {
            *slot = (rest % a) as Symbol;
            rest /= a;
        }
        let m = cylinder_measure(spec, &word)?;
        if !m.forbidden {
            terms.push((1.0 - q) * m.log_measure);
        }
    }
    Ok(log_sum_exp(terms))
}
