use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::source::PotentialTable;

const EIGEN_TOLERANCE: f64 = 1e-15;
const MAX_SQUARINGS: usize = 200;
/// Largest transfer matrix handled (dense powers cost `states^3`).
pub const MAX_STATES: usize = 1024;

/// Transfer matrix of a range-`m` potential `psi` on the `(m-1)`-word
/// states: `L(c, c') = exp(psi(c a))` when `c'` is the last `m - 1` symbols
/// of `c a`. Entries are stored shifted by `max psi` so they never overflow.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    alphabet: usize,
    states: usize,
    /// `weights[c * |A| + a] = exp(psi(c a) - shift)`.
    weights: Vec<f64>,
    shift: f64,
}

/// Perron eigen-data of a transfer matrix.
#[derive(Debug, Clone)]
pub struct Perron {
    /// `log` of the Perron eigenvalue (the pressure).
    pub log_lambda: f64,
    /// Right eigenvector, positive, unit 1-norm.
    pub right: Vec<f64>,
    /// Left eigenvector, positive, normalized so that `<left, right> = 1`.
    pub left: Vec<f64>,
}

impl TransferMatrix {
    pub fn new(potential: &PotentialTable) -> TransferMatrix {
        let alphabet = potential.alphabet;
        let states = potential.values.len() / alphabet;
        let shift = potential
            .values
            .iter()
            .cloned()
            .filter(|v| v.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        let shift = if shift.is_finite() { shift } else { 0.0 };
        let weights = potential.values.iter().map(|v| (v - shift).exp()).collect();
        TransferMatrix {
            alphabet,
            states,
            weights,
            shift,
        }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    #[inline]
    fn target(&self, edge: usize) -> usize {
        edge % self.states
    }

    /// `(L v)(c) = sum_a L(c, c a) v(next)`, in shifted units.
    fn apply_right(&self, v: &[f64], out: &mut [f64]) {
        for (c, slot) in out.iter_mut().enumerate() {
            let base = c * self.alphabet;
            *slot = (0..self.alphabet)
                .map(|a| self.weights[base + a] * v[self.target(base + a)])
                .sum();
        }
    }

    /// Strong connectivity of the graph of positive entries.
    pub fn is_irreducible(&self) -> bool {
        let reach = |forward: bool| {
            let mut seen = vec![false; self.states];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(c) = stack.pop() {
                let neighbours: Vec<usize> = if forward {
                    (0..self.alphabet)
                        .filter(|&a| self.weights[c * self.alphabet + a] > 0.0)
                        .map(|a| self.target(c * self.alphabet + a))
                        .collect()
                } else {
                    (0..self.weights.len())
                        .filter(|&e| self.weights[e] > 0.0 && self.target(e) == c)
                        .map(|e| e / self.alphabet)
                        .collect()
                };
                for d in neighbours {
                    if !seen[d] {
                        seen[d] = true;
                        stack.push(d);
                    }
                }
            }
            seen.iter().all(|&s| s)
        };
        reach(true) && reach(false)
    }

    /// Perron eigenvalue and eigenvectors by power iteration on the powers
    /// `L^(2^j)`, obtained by repeated squaring of the normalized matrix, so
    /// small spectral gaps cost logarithmically many steps. Matrices with
    /// zero entries are iterated as `L + I` so periodic graphs converge.
    pub fn perron(&self) -> Result<Perron> {
        if self.states > MAX_STATES {
            return Err(Error::SizeGuard(format!(
                "{} transfer states exceed {MAX_STATES}",
                self.states
            )));
        }
        if !self.is_irreducible() {
            return Err(Error::Reducible);
        }
        let n = self.states;
        let lazy = self.weights.contains(&0.0);
        let mut m = DMatrix::<f64>::zeros(n, n);
        for (e, &w) in self.weights.iter().enumerate() {
            m[(e / self.alphabet, self.target(e))] += w;
        }
        if lazy {
            for c in 0..n {
                m[(c, c)] += 1.0;
            }
        }
        let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;
        for _ in 0..MAX_SQUARINGS {
            let scale = m.max();
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Error::Numerical("transfer matrix powers collapsed".into()));
            }
            m /= scale;
            let right = normalized(m.column_sum().iter().copied());
            let left = normalized(m.row_sum().iter().copied());
            if let Some((r0, l0)) = &previous {
                if max_diff(r0, &right) <= EIGEN_TOLERANCE && max_diff(l0, &left) <= EIGEN_TOLERANCE {
                    return Ok(self.finish(right, left));
                }
            }
            previous = Some((right, left));
            m = &m * &m;
        }
        Err(Error::Numerical("Perron iteration did not converge".into()))
    }

    fn finish(&self, right: Vec<f64>, mut left: Vec<f64>) -> Perron {
        let mut lr = vec![0.0; self.states];
        self.apply_right(&right, &mut lr);
        let lambda = lr.iter().sum::<f64>() / right.iter().sum::<f64>();
        let dot: f64 = left.iter().zip(&right).map(|(l, r)| l * r).sum();
        left.iter_mut().for_each(|x| *x /= dot);
        Perron {
            log_lambda: lambda.ln() + self.shift,
            right,
            left,
        }
    }

    /// Stationary mean of the edge observable `f` under the equilibrium
    /// state of this potential: the Markov chain
    /// `Q(c -> c') = L(c, c') r(c') / (lambda r(c))` with stationary law
    /// proportional to `l(c) r(c)`.
    pub fn equilibrium_mean(&self, f: &[f64]) -> Result<f64> {
        let perron = self.perron()?;
        let lambda = (perron.log_lambda - self.shift).exp();
        let mut mean = 0.0;
        for c in 0..self.states {
            let nu = perron.left[c] * perron.right[c];
            if nu == 0.0 {
                continue;
            }
            for a in 0..self.alphabet {
                let e = c * self.alphabet + a;
                let w = self.weights[e];
                if w > 0.0 {
                    let q = w * perron.right[self.target(e)] / (lambda * perron.right[c]);
                    mean += nu * q * f[e];
                }
            }
        }
        Ok(mean)
    }
}

fn normalized(v: impl Iterator<Item = f64>) -> Vec<f64> {
    let v: Vec<f64> = v.collect();
    let total: f64 = v.iter().sum();
    v.into_iter().map(|x| x / total).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_case() {
        let p = PotentialTable::new(2, 1, vec![0.49f64.ln(), 0.09f64.ln()]).unwrap();
        let perron = TransferMatrix::new(&p).perron().unwrap();
        assert!((perron.log_lambda - 0.58f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn periodic_subshift_converges() {
        // Only the transitions 0 -> 1 and 1 -> 0 are allowed.
        let ninf = f64::NEG_INFINITY;
        let p = PotentialTable::new(2, 2, vec![ninf, 0.0, 0.0, ninf]).unwrap();
        let perron = TransferMatrix::new(&p).perron().unwrap();
        assert!(perron.log_lambda.abs() < 1e-12);
    }

    #[test]
    fn tiny_spectral_gap() {
        // Nearly decoupled two-state chain raised to a high power.
        let s = 6.0;
        let v: Vec<f64> = [0.95f64, 0.05, 0.05, 0.95].iter().map(|p| s * p.ln()).collect();
        let p = PotentialTable::new(2, 2, v).unwrap();
        let perron = TransferMatrix::new(&p).perron().unwrap();
        let expected = (0.95f64.powf(s) + 0.05f64.powf(s)).ln();
        assert!((perron.log_lambda - expected).abs() < 1e-13);
    }

    #[test]
    fn reducible_is_rejected() {
        let ninf = f64::NEG_INFINITY;
        let p = PotentialTable::new(2, 2, vec![0.0, 0.0, ninf, 0.0]).unwrap();
        assert_eq!(TransferMatrix::new(&p).perron().unwrap_err(), Error::Reducible);
    }
}
