//! Random symbol sources: stationary Markov chains of any finite order
//! (exact Gibbs measures for locally constant potentials) and the
//! two-interval coding of the Manneville-Pomeau map.

mod markov;
mod mp;
pub mod rng;

pub use markov::{
    cylinder_measure, energy, gibbs_constants, pattern_weights, potential_from_markov,
    CylinderMeasure, GibbsConstants, MarkovSpec, PotentialTable, ShiftMode, MAX_CONTEXTS,
};
pub use mp::{mp_sojourn_lengths, MpMode, MpParams, MpStream};

use crate::error::Result;
use crate::symbolic::{StreamCursor, Symbol, SymbolSource};
use rng::{thresholds, Uniform32};

/// What a source is.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    Markov(MarkovSpec),
    Mp(MpParams),
}

/// A source together with the seed that fixes every stream drawn from it.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub kind: SourceKind,
    pub seed: u64,
}

impl SourceSpec {
    pub fn markov(spec: MarkovSpec, seed: u64) -> SourceSpec {
        SourceSpec {
            kind: SourceKind::Markov(spec),
            seed,
        }
    }

    pub fn mp(params: MpParams, seed: u64) -> SourceSpec {
        SourceSpec {
            kind: SourceKind::Mp(params),
            seed,
        }
    }

    pub fn as_markov(&self) -> Option<&MarkovSpec> {
        match &self.kind {
            SourceKind::Markov(m) => Some(m),
            SourceKind::Mp(_) => None,
        }
    }

    pub fn alphabet(&self) -> usize {
        match &self.kind {
            SourceKind::Markov(m) => m.alphabet(),
            SourceKind::Mp(_) => 2,
        }
    }

    /// Independent stream number `offset`, capped at `budget` symbols.
    pub fn stream(&self, offset: u64, budget: u64) -> Result<StreamCursor<SourceStream>> {
        sample_stream(self, offset, budget)
    }
}

/// Stationary sampler of a Markov source.
#[derive(Debug, Clone)]
pub struct MarkovStream {
    alphabet: usize,
    contexts: usize,
    /// `alphabet` cumulative 32-bit thresholds per context.
    thresholds: Vec<u64>,
    context: usize,
    prelude: Vec<Symbol>,
    uniform: Uniform32,
}

impl MarkovStream {
    pub fn new(spec: &MarkovSpec, seed: u64, offset: u64) -> MarkovStream {
        let mut uniform = Uniform32::new(seed, offset);
        let thresholds = (0..spec.contexts())
            .flat_map(|c| thresholds(spec.row(c)))
            .collect();
        // Initial context drawn from the stationary distribution.
        let u = uniform.next_f64();
        let pi = spec.stationary();
        let mut acc = 0.0;
        let mut context = pi.len() - 1;
        for (c, &p) in pi.iter().enumerate() {
            acc += p;
            if u < acc {
                context = c;
                break;
            }
        }
        let mut prelude = spec.context_word(context);
        prelude.reverse();
        MarkovStream {
            alphabet: spec.alphabet(),
            contexts: spec.contexts(),
            thresholds,
            context,
            prelude,
            uniform,
        }
    }

    #[inline(always)]
    fn emit(&mut self) -> Symbol {
        let u = self.uniform.next_u32() as u64;
        let a = self.alphabet;
        let row = &self.thresholds[self.context * a..self.context * a + a - 1];
        let mut s = 0;
        while s < row.len() && u >= row[s] {
            s += 1;
        }
        self.context = (self.context * a + s) % self.contexts;
        s as Symbol
    }
}

impl SymbolSource for MarkovStream {
    fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    fn fill(&mut self, buf: &mut [Symbol]) {
        let mut i = 0;
        while i < buf.len() {
            match self.prelude.pop() {
                Some(s) => buf[i] = s,
                None => break,
            }
            i += 1;
        }
        let rest = &mut buf[i..];
        if self.alphabet == 2 && self.contexts == 1 {
            let t = self.thresholds[0];
            for slot in rest {
                *slot = (self.uniform.next_u32() as u64 >= t) as Symbol;
            }
        } else {
            for slot in rest {
                *slot = self.emit();
            }
        }
    }
}

/// Any stream a [`SourceSpec`] can produce.
#[derive(Debug, Clone)]
pub enum SourceStream {
    Markov(MarkovStream),
    Mp(Box<MpStream>),
}

impl SymbolSource for SourceStream {
    fn alphabet_size(&self) -> usize {
        match self {
            SourceStream::Markov(s) => s.alphabet_size(),
            SourceStream::Mp(s) => s.alphabet_size(),
        }
    }

    fn fill(&mut self, buf: &mut [Symbol]) {
        match self {
            SourceStream::Markov(s) => s.fill(buf),
            SourceStream::Mp(s) => s.fill(buf),
        }
    }
}

/// A cursor over stream number `offset` of `spec`. Markov streams start
/// in a stationary context; MP streams start from a uniform point followed
/// by the configured burn-in.
pub fn sample_stream(spec: &SourceSpec, offset: u64, budget: u64) -> Result<StreamCursor<SourceStream>> {
    let stream = match &spec.kind {
        SourceKind::Markov(m) => SourceStream::Markov(MarkovStream::new(m, spec.seed, offset)),
        SourceKind::Mp(p) => SourceStream::Mp(Box::new(MpStream::new(*p, spec.seed, offset)?)),
    };
    Ok(StreamCursor::new(stream, budget))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draw(spec: &SourceSpec, offset: u64, n: usize) -> Vec<Symbol> {
        sample_stream(spec, offset, n as u64).unwrap().take_vec(n)
    }

    #[test]
    fn fair_coin_frequency() {
        let spec = SourceSpec::markov(MarkovSpec::uniform(2).unwrap(), 11);
        let x = draw(&spec, 0, 1_000_000);
        let zeros = x.iter().filter(|&&s| s == 0).count() as f64 / 1e6;
        assert!((0.498..=0.502).contains(&zeros), "{zeros}");
    }

    #[test]
    fn markov_transition_frequencies() {
        let m = MarkovSpec::new(2, 1, vec![vec![0.9, 0.1], vec![0.2, 0.8]], ShiftMode::Full).unwrap();
        let spec = SourceSpec::markov(m, 5);
        let x = draw(&spec, 3, 1_000_000);
        let mut counts = [[0f64; 2]; 2];
        for w in x.windows(2) {
            counts[w[0] as usize][w[1] as usize] += 1.0;
        }
        let p = [[0.9, 0.1], [0.2, 0.8]];
        for a in 0..2 {
            let row = counts[a][0] + counts[a][1];
            for b in 0..2 {
                assert!((counts[a][b] / row - p[a][b]).abs() < 0.01);
            }
        }
    }

    #[test]
    fn distinct_offsets_are_uncorrelated() {
        let spec = SourceSpec::markov(MarkovSpec::uniform(2).unwrap(), 99);
        let a = draw(&spec, 0, 100_000);
        let b = draw(&spec, 1, 100_000);
        let n = a.len() as f64;
        let ma = a.iter().map(|&s| s as f64).sum::<f64>() / n;
        let mb = b.iter().map(|&s| s as f64).sum::<f64>() / n;
        let mut cov = 0.0;
        let (mut va, mut vb) = (0.0, 0.0);
        for (&x, &y) in a.iter().zip(&b) {
            let (dx, dy) = (x as f64 - ma, y as f64 - mb);
            cov += dx * dy;
            va += dx * dx;
            vb += dy * dy;
        }
        let corr = cov / (va * vb).sqrt();
        assert!(corr.abs() < 0.01, "{corr}");
    }

    #[test]
    fn seed_determinism_and_chunk_independence() {
        let m = MarkovSpec::new(3, 1, vec![vec![0.2, 0.3, 0.5]; 3], ShiftMode::Full).unwrap();
        let spec = SourceSpec::markov(m, 42);
        let whole = draw(&spec, 7, 1_000_000);
        assert_eq!(whole, draw(&spec, 7, 1_000_000));
        let mut s = MarkovStream::new(spec.as_markov().unwrap(), 42, 7);
        let mut pieces = Vec::new();
        for len in [1usize, 3, 17, 1000, 5] {
            let mut buf = vec![0; len];
            s.fill(&mut buf);
            pieces.extend(buf);
        }
        assert_eq!(pieces, whole[..pieces.len()]);
    }

    #[test]
    fn stream_begins_with_a_stationary_context() {
        let m = MarkovSpec::new(
            2,
            2,
            vec![vec![0.6, 0.4], vec![0.3, 0.7], vec![0.5, 0.5], vec![0.1, 0.9]],
            ShiftMode::Full,
        )
        .unwrap();
        let pi11 = m.stationary()[3];
        let spec = SourceSpec::markov(m, 1);
        let hits = (0..20_000)
            .filter(|&i| draw(&spec, i, 2) == [1, 1])
            .count() as f64
            / 20_000.0;
        assert!((hits - pi11).abs() < 0.015, "{hits} vs {pi11}");
    }
}
