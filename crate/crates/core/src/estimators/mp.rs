use super::stats::hill_tail_index;
use crate::error::{invalid, Result};
use crate::source::{mp_sojourn_lengths, MpParams, MpStream};
use crate::symbolic::SymbolSource;

/// Growth of the empirical `q`-th moment of the hitting time of `I_1`
/// along one Manneville-Pomeau orbit, over doubling orbit lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct MpGrowthReport {
    pub alpha: f64,
    pub q: f64,
    pub sizes: Vec<u64>,
    /// `(1/T) sum_{t <= T} tau_t^q` for each size `T`.
    pub moments: Vec<f64>,
    /// `moments[i + 1] / moments[i]`.
    pub growth: Vec<f64>,
    /// Geometric mean of the growth factors.
    pub mean_growth: f64,
    /// `|moments[last] / moments[last - 1] - 1|`.
    pub final_relative_change: f64,
    /// Hill estimate of the tail index of the sojourn lengths in `I_0`.
    pub tail_exponent: f64,
    pub sojourns: usize,
}

/// `tau_t = inf{j >= 1 : x_{t + j - 1} in I_1}` for every point of an orbit
/// of length `base * 2^doublings`, with running moments at each doubling.
/// The zeros after the last visit to `I_1` are closed as if the orbit
/// entered `I_1` right after its end (a lower bound).
pub fn mp_divergence_check(params: MpParams, seed: u64, q: f64, base: u64, doublings: u32) -> Result<MpGrowthReport> {
    params.validate()?;
    if base < 10_000 || doublings == 0 {
        return invalid("need base >= 10^4 and at least one doubling");
    }
    let sizes: Vec<u64> = (0..=doublings).map(|d| base << d).collect();
    let total = *sizes.last().expect("non-empty");
    let mut stream = MpStream::new(params, seed, 0)?;
    let mut buf = vec![0u8; 1 << 16];
    let mut sums = vec![0.0f64; sizes.len()];
    let mut acc = 0.0f64;
    let mut next_size = 0usize;
    let mut t = 0u64;
    let mut run_start = 0u64;
    let mut produced = 0u64;
    // Close the run of zeros [run_start, end) followed by a 1 at `end`.
    let mut close = |run_start: u64, end: u64, acc: &mut f64, next_size: &mut usize, t: &mut u64| {
        for pos in run_start..=end.min(total - 1) {
            let tau = (end - pos + 1) as f64;
            *acc += tau.powf(q);
            *t = pos + 1;
            if *next_size < sizes.len() && *t == sizes[*next_size] {
                sums[*next_size] = *acc;
                *next_size += 1;
            }
        }
    };
    while produced < total {
        let len = (buf.len() as u64).min(total - produced) as usize;
        stream.fill(&mut buf[..len]);
        for (i, &s) in buf[..len].iter().enumerate() {
            if s == 1 {
                let end = produced + i as u64;
                close(run_start, end, &mut acc, &mut next_size, &mut t);
                run_start = end + 1;
            }
        }
        produced += len as u64;
    }
    if run_start < total {
        close(run_start, total, &mut acc, &mut next_size, &mut t);
    }
    let moments: Vec<f64> = sums.iter().zip(&sizes).map(|(s, &n)| s / n as f64).collect();
    let growth: Vec<f64> = moments.windows(2).map(|w| w[1] / w[0]).collect();
    let mean_growth = growth.iter().map(|g| g.ln()).sum::<f64>() / growth.len() as f64;
    let runs = mp_sojourn_lengths(params, seed, total.min(10_000_000))?;
    let values: Vec<f64> = runs.iter().map(|&r| r as f64).collect();
    let k = (values.len() as f64).sqrt().ceil() as usize;
    Ok(MpGrowthReport {
        alpha: params.alpha,
        q,
        sizes,
        final_relative_change: (growth[growth.len() - 1] - 1.0).abs(),
        growth,
        moments,
        mean_growth: mean_growth.exp(),
        tail_exponent: hill_tail_index(&values, k),
        sojourns: runs.len(),
    })
}

/// Hill estimate of the sojourn tail index from an orbit of `budget` symbols,
/// using the `sqrt(#runs)` largest runs.
pub fn sojourn_tail_exponent(params: MpParams, seed: u64, budget: u64) -> Result<f64> {
    let runs = mp_sojourn_lengths(params, seed, budget)?;
    let values: Vec<f64> = runs.iter().map(|&r| r as f64).collect();
    let k = (values.len() as f64).sqrt().ceil() as usize;
    Ok(hill_tail_index(&values, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_a_tiny_orbit_by_hand() {
        // Direct recomputation of tau from the stored orbit.
        let p = MpParams::new(0.5).unwrap();
        let base = 10_000;
        let report = mp_divergence_check(p, 4, 1.0, base, 1).unwrap();
        let mut s = MpStream::new(p, 4, 0).unwrap();
        let mut x = vec![0u8; 2 * base as usize];
        s.fill(&mut x);
        let tau = |t: usize| {
            (t..x.len())
                .find(|&j| x[j] == 1)
                .map(|j| j - t + 1)
                .unwrap_or(x.len() - t + 1) as f64
        };
        for (i, &size) in report.sizes.iter().enumerate() {
            let m = (0..size as usize).map(tau).sum::<f64>() / size as f64;
            assert!((m - report.moments[i]).abs() < 1e-9 * m, "{m} vs {}", report.moments[i]);
        }
    }
}
