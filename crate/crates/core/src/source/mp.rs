use serde::{Deserialize, Serialize};

use super::rng::Uniform32;
use crate::error::{invalid, Result};
use crate::symbolic::{Symbol, SymbolSource};

/// How the Manneville-Pomeau orbit is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MpMode {
    /// Plain double-precision iteration of the map.
    #[default]
    Float64,
    /// Renewal approximation: every visit to the right interval is followed
    /// by a fresh uniform reinjection point, and the following run of zeros
    /// is read off a precomputed table of left-branch preimages of `x*`.
    Renewal,
}

/// Parameters of `T(x) = x + x^(1+alpha) mod 1` and its two-interval coding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpParams {
    pub alpha: f64,
    #[serde(default)]
    pub mode: MpMode,
    #[serde(default = "default_burn_in")]
    pub burn_in: u64,
}

fn default_burn_in() -> u64 {
    1000
}

impl MpParams {
    pub fn new(alpha: f64) -> Result<MpParams> {
        let p = MpParams {
            alpha,
            mode: MpMode::Float64,
            burn_in: default_burn_in(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return invalid(format!("alpha = {} must lie in (0, 1)", self.alpha));
        }
        Ok(())
    }

    /// The point `x*` with `x* + x*^(1+alpha) = 1` separating `I_0 = [0, x*)`
    /// from `I_1 = [x*, 1)`.
    pub fn split_point(&self) -> f64 {
        left_preimage(self.alpha, 1.0)
    }

    /// One step of the map.
    #[inline]
    pub fn step(&self, x: f64) -> f64 {
        let y = x + x.powf(1.0 + self.alpha);
        if y >= 1.0 {
            y - 1.0
        } else {
            y
        }
    }
}

/// Solve `z + z^(1+alpha) = target` for `z` in `[0, target]` by bisection.
fn left_preimage(alpha: f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, target);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mid + mid.powf(1.0 + alpha) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

const RENEWAL_TABLE: usize = 1 << 14;

/// Symbol stream of a Manneville-Pomeau orbit.
#[derive(Debug, Clone)]
pub struct MpStream {
    params: MpParams,
    split: f64,
    x: f64,
    uniform: Uniform32,
    /// `z[j-1]` is the `j`-th left preimage of `x*`, decreasing in `j`.
    preimages: Vec<f64>,
    pending_zeros: u64,
    pending_one: bool,
}

impl MpStream {
    pub fn new(params: MpParams, seed: u64, offset: u64) -> Result<MpStream> {
        params.validate()?;
        let mut uniform = Uniform32::new(seed, offset);
        let split = params.split_point();
        let preimages = match params.mode {
            MpMode::Float64 => Vec::new(),
            MpMode::Renewal => {
                let mut z = Vec::with_capacity(RENEWAL_TABLE);
                let mut t = split;
                for _ in 0..RENEWAL_TABLE {
                    t = left_preimage(params.alpha, t);
                    z.push(t);
                }
                z
            }
        };
        let mut x = uniform.next_f64();
        for _ in 0..params.burn_in {
            x = params.step(x);
        }
        Ok(MpStream {
            params,
            split,
            x,
            uniform,
            preimages,
            pending_zeros: 0,
            pending_one: false,
        })
    }

    /// Number of steps a point `u < x*` spends in `I_0` before entering `I_1`.
    fn sojourn(&self, u: f64) -> u64 {
        let z = &self.preimages;
        // Count preimages strictly greater than u: the cell index of u.
        let j = z.partition_point(|&p| p > u);
        if j < z.len() {
            return j as u64 + 1;
        }
        // Beyond the table use the asymptotic z_j ~ (alpha j)^(-1/alpha).
        let a = self.params.alpha;
        let tail = (u.powf(-a) - z[z.len() - 1].powf(-a)) / a;
        z.len() as u64 + 1 + tail.max(0.0) as u64
    }

    fn next_renewal(&mut self) -> Symbol {
        if self.pending_zeros > 0 {
            self.pending_zeros -= 1;
            return 0;
        }
        if self.pending_one {
            self.pending_one = false;
            return 1;
        }
        let u = self.uniform.next_f64();
        if u >= self.split {
            return 1;
        }
        self.pending_zeros = self.sojourn(u) - 1;
        self.pending_one = true;
        0
    }
}

impl SymbolSource for MpStream {
    fn alphabet_size(&self) -> usize {
        2
    }

    fn fill(&mut self, buf: &mut [Symbol]) {
        match self.params.mode {
            MpMode::Float64 => {
                for slot in buf {
                    *slot = (self.x >= self.split) as Symbol;
                    self.x = self.params.step(self.x);
                }
            }
            MpMode::Renewal => {
                for slot in buf {
                    *slot = self.next_renewal();
                }
            }
        }
    }
}

/// Lengths of the maximal runs of symbol 0 in an orbit of `budget` symbols.
/// Runs cut by either end of the orbit are included.
pub fn mp_sojourn_lengths(params: MpParams, seed: u64, budget: u64) -> Result<Vec<u64>> {
    if budget < 10_000 {
        return invalid(format!("budget {budget} below 10^4"));
    }
    let mut stream = MpStream::new(params, seed, 0)?;
    let mut runs = Vec::new();
    let mut run = 0u64;
    let mut buf = vec![0; 1 << 16];
    let mut left = budget;
    while left > 0 {
        let len = (buf.len() as u64).min(left) as usize;
        stream.fill(&mut buf[..len]);
        for &s in &buf[..len] {
            if s == 0 {
                run += 1;
            } else if run > 0 {
                runs.push(run);
                run = 0;
            }
        }
        left -= len as u64;
    }
    if run > 0 {
        runs.push(run);
    }
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_point_solves_the_branch_equation() {
        let p = MpParams::new(0.5).unwrap();
        let x = p.split_point();
        assert!((x + x.powf(1.5) - 1.0).abs() < 1e-12);
        let y = p.step(x);
        assert!(y < 1e-9 || y > 1.0 - 1e-9);
    }

    #[test]
    fn alpha_out_of_range() {
        assert!(MpParams::new(1.5).is_err());
        assert!(MpParams::new(0.0).is_err());
    }

    #[test]
    fn runs_conserve_length() {
        let p = MpParams::new(0.5).unwrap();
        let budget = 20_000;
        let runs = mp_sojourn_lengths(p, 3, budget).unwrap();
        assert!(runs.iter().all(|&r| r >= 1));
        let mut s = MpStream::new(p, 3, 0).unwrap();
        let mut buf = vec![0; budget as usize];
        s.fill(&mut buf);
        let ones = buf.iter().filter(|&&b| b == 1).count() as u64;
        assert_eq!(runs.iter().sum::<u64>() + ones, budget);
        assert!(mp_sojourn_lengths(p, 3, 100).is_err());
    }

    #[test]
    fn renewal_sojourns_match_iteration() {
        let params = MpParams {
            alpha: 0.5,
            mode: MpMode::Renewal,
            burn_in: 0,
        };
        let s = MpStream::new(params, 1, 0).unwrap();
        for &u in &[0.5, 0.3, 0.1, 0.01, 1e-3] {
            let mut x = u;
            let mut steps = 0;
            while x < s.split {
                x = params.step(x);
                steps += 1;
            }
            assert_eq!(s.sojourn(u), steps, "u = {u}");
        }
    }
}
