use super::spectra::Spectra;
use crate::error::{Error, Result};

/// Left end of the admissible `q` range, `-1` approached from above.
pub const Q_MIN: f64 = -1.0 + 1e-6;
/// Right end of the search range for the above side.
pub const Q_MAX: f64 = 60.0;

const GRID_POINTS: usize = 400;
const GOLDEN_TOLERANCE: f64 = 1e-8;

/// Deviations of `(1/n) log w_n` above or below the entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Above,
    Below,
}

impl Side {
    pub fn label(self) -> &'static str {
        match self {
            Side::Above => "above",
            Side::Below => "below",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFunction {
    pub side: Side,
    pub u: Vec<f64>,
    /// `+inf` where the supremum escapes to `q -> infinity`.
    pub rate: Vec<f64>,
    pub u0: f64,
}

/// `I(u) = sup_{q > -1} { (h +- u) q - W(q) }` on each grid point, by a
/// coarse scan of `[-1 + 1e-6, Q_MAX]` followed by golden-section search on
/// the concave objective.
pub fn rate_function(spectra: &Spectra, side: Side, u_grid: &[f64]) -> Result<RateFunction> {
    if spectra.asymptotic_variance()? == 0.0 {
        return Err(Error::FlatSpectrum);
    }
    let h = spectra.entropy();
    let u0 = spectra.u0()?;
    let mut rate = Vec::with_capacity(u_grid.len());
    for &u in u_grid {
        let out_of_range = match side {
            Side::Above => u.is_nan() || u < 0.0,
            Side::Below => !(u >= 0.0 && u < u0),
        };
        if out_of_range {
            return Err(Error::OutOfRange { u, u0 });
        }
        if u == 0.0 {
            rate.push(0.0);
            continue;
        }
        let x = match side {
            Side::Above => h + u,
            Side::Below => h - u,
        };
        rate.push(legendre(spectra, x)?);
    }
    Ok(RateFunction {
        side,
        u: u_grid.to_vec(),
        rate,
        u0,
    })
}

fn legendre(spectra: &Spectra, x: f64) -> Result<f64> {
    let objective = |q: f64| -> Result<f64> { Ok(x * q - spectra.hitting_w(q)?) };
    let step = (Q_MAX - Q_MIN) / GRID_POINTS as f64;
    let grid: Vec<f64> = (0..=GRID_POINTS).map(|i| Q_MIN + step * i as f64).collect();
    let values = grid.iter().map(|&q| objective(q)).collect::<Result<Vec<f64>>>()?;
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (i, &v)| if v > values[b] { i } else { b });
    if best == GRID_POINTS {
        return Ok(f64::INFINITY);
    }
    let mut lo = grid[best.saturating_sub(1)];
    let mut hi = grid[best + 1];
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (objective(c)?, objective(d)?);
    while hi - lo > GOLDEN_TOLERANCE {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = objective(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = objective(d)?;
        }
    }
    let q = 0.5 * (lo + hi);
    Ok(objective(q)?.max(values[best]).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::MarkovSpec;

    fn b73() -> Spectra {
        Spectra::new(&MarkovSpec::bernoulli(&[0.7, 0.3]).unwrap()).unwrap()
    }

    #[test]
    fn zero_deviation_costs_nothing() {
        let s = b73();
        for side in [Side::Above, Side::Below] {
            assert_eq!(rate_function(&s, side, &[0.0]).unwrap().rate, vec![0.0]);
        }
    }

    #[test]
    fn above_side_is_convex_and_increasing() {
        let grid: Vec<f64> = (0..=50).map(|i| i as f64 * 0.01).collect();
        let r = rate_function(&b73(), Side::Above, &grid).unwrap().rate;
        assert!(r.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(r.windows(3).all(|w| w[2] - 2.0 * w[1] + w[0] >= -1e-9));
    }

    #[test]
    fn bernoulli_closed_form() {
        // For q > -1, W = M and I(x) = sup_q {x q - log sum p^(1-q)}.
        let s = b73();
        let u = 0.1;
        let x = s.entropy() + u;
        let brute = (0..200_000)
            .map(|i| -1.0 + 1e-6 + i as f64 * 1e-4)
            .map(|q: f64| x * q - (0.7f64.powf(1.0 - q) + 0.3f64.powf(1.0 - q)).ln())
            .fold(f64::MIN, f64::max);
        let r = rate_function(&s, Side::Above, &[u]).unwrap().rate[0];
        assert!((r - brute).abs() < 1e-7, "{r} vs {brute}");
    }

    #[test]
    fn below_side_range() {
        let s = b73();
        let u0 = s.u0().unwrap();
        assert!(rate_function(&s, Side::Below, &[0.5 * u0]).unwrap().rate[0] > 0.0);
        assert!(matches!(
            rate_function(&s, Side::Below, &[u0 * 1.01]),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn maximal_entropy_is_flat() {
        let s = Spectra::new(&MarkovSpec::uniform(2).unwrap()).unwrap();
        assert_eq!(rate_function(&s, Side::Above, &[0.1]).unwrap_err(), Error::FlatSpectrum);
    }
}
