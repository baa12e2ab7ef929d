use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use super::transfer::TransferMatrix;
use crate::error::{Error, Result};
use crate::source::{potential_from_markov, MarkovSpec, PotentialTable};

/// Edge-chain size above which the variance computation refuses to run.
const MAX_VARIANCE_STATES: usize = 4096;

/// Below this the asymptotic variance is reported as exactly zero.
const ZERO_VARIANCE: f64 = 1e-13;

/// `P(scale * phi)`: log of the Perron eigenvalue of the transfer matrix.
pub fn pressure(potential: &PotentialTable, scale: f64) -> Result<f64> {
    Ok(TransferMatrix::new(&potential.scaled(scale)).perron()?.log_lambda)
}

/// Exact spectra of one Markov source, sharing the normalized potential.
#[derive(Debug, Clone)]
pub struct Spectra {
    spec: MarkovSpec,
    potential: PotentialTable,
}

impl Spectra {
    pub fn new(spec: &MarkovSpec) -> Result<Spectra> {
        Ok(Spectra {
            potential: potential_from_markov(spec)?,
            spec: spec.clone(),
        })
    }

    pub fn spec(&self) -> &MarkovSpec {
        &self.spec
    }

    pub fn potential(&self) -> &PotentialTable {
        &self.potential
    }

    /// Rényi spectrum `M(q) = P((1 - q) phi)`.
    pub fn renyi_m(&self, q: f64) -> Result<f64> {
        if q == 0.0 {
            return Ok(0.0);
        }
        pressure(&self.potential, 1.0 - q)
    }

    /// `P(2 phi)`, the value of the hitting spectrum below `q = -1`.
    pub fn p2(&self) -> Result<f64> {
        pressure(&self.potential, 2.0)
    }

    /// Hitting-time spectrum: `M(q)` for `q >= -1`, `P(2 phi)` below.
    pub fn hitting_w(&self, q: f64) -> Result<f64> {
        if q >= -1.0 {
            self.renyi_m(q)
        } else {
            self.p2()
        }
    }

    /// Non-overlapping return-time spectrum, `None` on `[-1, 0)` where it is
    /// not determined.
    pub fn nonoverlap_rhat(&self, q: f64) -> Result<Option<f64>> {
        if q < -1.0 {
            self.p2().map(Some)
        } else if q >= 0.0 {
            self.renyi_m(q).map(Some)
        } else {
            Ok(None)
        }
    }

    /// `M(q) / q`, with the value `h` at `q = 0`.
    pub fn renyi_m_bar(&self, q: f64) -> Result<f64> {
        if q == 0.0 {
            Ok(self.entropy())
        } else {
            Ok(self.renyi_m(q)? / q)
        }
    }

    /// `W(q) / q`, with the value `h` at `q = 0`.
    pub fn hitting_w_bar(&self, q: f64) -> Result<f64> {
        if q == 0.0 {
            Ok(self.entropy())
        } else {
            Ok(self.hitting_w(q)? / q)
        }
    }

    /// Entropy `-sum_c pi(c) sum_a p(c -> a) log p(c -> a)`.
    pub fn entropy(&self) -> f64 {
        entropy(&self.spec)
    }

    pub fn asymptotic_variance(&self) -> Result<f64> {
        asymptotic_variance(&self.spec)
    }

    /// `-int phi d mu_{2 phi}`: the right derivative of `W` at `q = -1`.
    pub fn right_slope_at_minus_one(&self) -> Result<f64> {
        let twisted = TransferMatrix::new(&self.potential.scaled(2.0));
        let phi: Vec<f64> = self
            .potential
            .values
            .iter()
            .map(|&v| if v.is_finite() { v } else { 0.0 })
            .collect();
        Ok(-twisted.equilibrium_mean(&phi)?)
    }

    /// `u_0 = h - W'(-1+)`, the extent of the lower large-deviation range.
    pub fn u0(&self) -> Result<f64> {
        Ok((self.right_slope_at_minus_one()? - self.entropy()).abs())
    }

    pub fn curve(&self, kind: CurveKind, grid: &[f64]) -> Result<SpectrumCurve> {
        let points = grid
            .iter()
            .map(|&q| {
                let value = match kind {
                    CurveKind::ExactM => Some(self.renyi_m(q)?),
                    CurveKind::ExactW => Some(self.hitting_w(q)?),
                    CurveKind::ExactRhat => self.nonoverlap_rhat(q)?,
                    CurveKind::Estimated => {
                        return Err(Error::InvalidArgument(
                            "exact curves cannot have the estimated kind".into(),
                        ))
                    }
                };
                Ok(SpectrumPoint {
                    q,
                    value,
                    stderr: None,
                })
            })
            .collect::<Result<_>>()?;
        Ok(SpectrumCurve {
            kind,
            points,
            n: Vec::new(),
            samples: None,
        })
    }
}

pub fn renyi_m(spec: &MarkovSpec, q: f64) -> Result<f64> {
    Spectra::new(spec)?.renyi_m(q)
}

pub fn hitting_spectrum_w(spec: &MarkovSpec, q: f64) -> Result<f64> {
    Spectra::new(spec)?.hitting_w(q)
}

pub fn nonoverlap_spectrum_rhat(spec: &MarkovSpec, q: f64) -> Result<Option<f64>> {
    Spectra::new(spec)?.nonoverlap_rhat(q)
}

pub fn entropy(spec: &MarkovSpec) -> f64 {
    let pi = spec.stationary();
    (0..spec.contexts())
        .map(|c| {
            let row: f64 = spec
                .row(c)
                .iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| p * p.ln())
                .sum();
            -pi[c] * row
        })
        .sum()
}

/// `sigma^2 = lim (1/n) Var(S_n phi)` by the Green-Kubo sum, evaluated in
/// closed form on the chain of `(k+1)`-words `e = (c, a)`: with stationary
/// law `nu`, centred observable `f = log p(e) - mean`, and fundamental
/// matrix `Z = (I - P + 1 nu^T)^-1`, `sigma^2 = <f, (2Z - I) f>_nu`.
pub fn asymptotic_variance(spec: &MarkovSpec) -> Result<f64> {
    let a = spec.alphabet();
    let states = spec.kernel().len();
    if states > MAX_VARIANCE_STATES {
        return Err(Error::SizeGuard(format!(
            "{states} edge states exceed {MAX_VARIANCE_STATES}"
        )));
    }
    let pi = spec.stationary();
    let kernel = spec.kernel();
    let nu: Vec<f64> = (0..states).map(|e| pi[e / a] * kernel[e]).collect();
    let f: Vec<f64> = kernel
        .iter()
        .map(|&p| if p > 0.0 { p.ln() } else { 0.0 })
        .collect();
    let mean: f64 = nu.iter().zip(&f).map(|(n, f)| n * f).sum();
    let fbar = DVector::from_iterator(states, f.iter().map(|v| v - mean));
    let mut m = DMatrix::<f64>::identity(states, states);
    for e in 0..states {
        let next = spec.next_context(e / a, (e % a) as u8);
        for b in 0..a {
            m[(e, next * a + b)] -= kernel[next * a + b];
        }
        for (g, &w) in nu.iter().enumerate() {
            m[(e, g)] += w;
        }
    }
    let zf = m
        .lu()
        .solve(&fbar)
        .ok_or_else(|| Error::Numerical("fundamental matrix is singular".into()))?;
    let sigma2: f64 = (0..states)
        .map(|e| nu[e] * fbar[e] * (2.0 * zf[e] - fbar[e]))
        .sum();
    Ok(if sigma2 < ZERO_VARIANCE { 0.0 } else { sigma2 })
}

/// What a spectrum curve holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    ExactM,
    ExactW,
    ExactRhat,
    Estimated,
}

impl CurveKind {
    pub fn label(self) -> &'static str {
        match self {
            CurveKind::ExactM => "exact-M",
            CurveKind::ExactW => "exact-W",
            CurveKind::ExactRhat => "exact-Rhat",
            CurveKind::Estimated => "estimated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub q: f64,
    /// `None` where the spectrum is not determined.
    pub value: Option<f64>,
    pub stderr: Option<f64>,
}

/// A sampled function `q -> value` with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCurve {
    pub kind: CurveKind,
    pub points: Vec<SpectrumPoint>,
    /// Cylinder lengths behind an estimate (empty for exact curves).
    pub n: Vec<usize>,
    pub samples: Option<usize>,
}

impl SpectrumCurve {
    pub fn value_at(&self, q: f64) -> Option<f64> {
        self.points.iter().find(|p| p.q == q).and_then(|p| p.value)
    }

    pub fn point_at(&self, q: f64) -> Option<&SpectrumPoint> {
        self.points.iter().find(|p| p.q == q)
    }

    /// Second differences `>= -tol` and first differences `>= -tol` over
    /// the defined points (grid assumed sorted).
    pub fn is_convex_nondecreasing(&self, tol: f64) -> bool {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter_map(|p| p.value.map(|v| (p.q, v)))
            .collect();
        let slopes: Vec<f64> = pts
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect();
        slopes.iter().all(|&s| s >= -tol) && slopes.windows(2).all(|w| w[1] - w[0] >= -tol)
    }

    /// CSV with columns `q,value,kind,stderr`; undefined values are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# schema=1\nq,value,kind,stderr\n");
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_num(p.q),
                p.value.map(fmt_num).unwrap_or_default(),
                self.kind.label(),
                p.stderr.map(fmt_num).unwrap_or_default()
            );
        }
        out
    }
}

/// Fixed-precision rendering used in every CSV.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        let s = format!("{v:.9}");
        if s == "-0.000000000" {
            "0.000000000".into()
        } else {
            s
        }
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// `-3, -2.9, ..., 3`, which contains `-1`, `0` and `1` exactly.
pub fn default_q_grid() -> Vec<f64> {
    (-30..=30).map(|i| i as f64 / 10.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b73() -> Spectra {
        Spectra::new(&MarkovSpec::bernoulli(&[0.7, 0.3]).unwrap()).unwrap()
    }

    #[test]
    fn pressure_anchors() {
        let uniform = PotentialTable::new(2, 1, vec![-(2f64.ln()); 2]).unwrap();
        assert!(pressure(&uniform, 1.0).unwrap().abs() < 1e-15);
        assert!((pressure(&uniform, 0.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((b73().p2().unwrap() + 0.544727).abs() < 1e-6);
    }

    #[test]
    fn renyi_values() {
        let s = b73();
        assert!((s.renyi_m(2.0).unwrap() - 1.560648).abs() < 1e-6);
        assert_eq!(s.renyi_m(0.0).unwrap(), 0.0);
        let u = Spectra::new(&MarkovSpec::uniform(2).unwrap()).unwrap();
        for q in [-2.0, 0.5, 3.0] {
            assert!((u.renyi_m(q).unwrap() - q * 2f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn hitting_and_nonoverlap_spectra() {
        let s = b73();
        assert!((s.hitting_w(-2.0).unwrap() + 0.544727).abs() < 1e-6);
        assert!((s.hitting_w(-1.0).unwrap() - s.p2().unwrap()).abs() < 1e-12);
        assert!((s.nonoverlap_rhat(1.0).unwrap().unwrap() - 2f64.ln()).abs() < 1e-12);
        assert_eq!(s.nonoverlap_rhat(-0.5).unwrap(), None);
        let u = Spectra::new(&MarkovSpec::uniform(2).unwrap()).unwrap();
        assert!((u.hitting_w(-2.5).unwrap() + 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn entropy_and_variance() {
        let s = b73();
        assert!((s.entropy() - 0.610864).abs() < 1e-6);
        assert!((s.asymptotic_variance().unwrap() - 0.150762).abs() < 1e-6);
        let u = MarkovSpec::uniform(2).unwrap();
        assert_eq!(asymptotic_variance(&u).unwrap(), 0.0);
        assert!((entropy(&u) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn bar_spectra_at_zero() {
        let s = b73();
        assert_eq!(s.hitting_w_bar(0.0).unwrap(), s.entropy());
        assert!((s.hitting_w_bar(-2.0).unwrap() - s.p2().unwrap() / -2.0).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let c = b73().curve(CurveKind::ExactRhat, &[-0.5, 0.0]).unwrap();
        let csv = c.to_csv();
        assert!(csv.starts_with("# schema=1\nq,value,kind,stderr\n"));
        assert!(csv.contains("-0.500000000,,exact-Rhat,\n"));
        assert!(csv.contains("0.000000000,0.000000000,exact-Rhat,\n"));
    }
}
