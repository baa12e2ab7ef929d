use hitstat::source::{cylinder_measure, energy, MarkovSpec, ShiftMode};
use hitstat::thermo::{
    asymptotic_variance, brute_force_partition, default_q_grid, entropy, partition_sum, CurveKind,
    Spectra,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_spec(rng: &mut ChaCha8Rng, alphabet: usize, order: usize) -> MarkovSpec {
    let rows = (0..alphabet.pow(order as u32))
        .map(|_| {
            let w: Vec<f64> = (0..alphabet).map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = w.iter().sum();
            let mut row: Vec<f64> = w.iter().map(|x| x / total).collect();
            let head: f64 = row[..alphabet - 1].iter().sum();
            row[alphabet - 1] = 1.0 - head;
            row
        })
        .collect();
    MarkovSpec::new(alphabet, order, rows, ShiftMode::Full).unwrap()
}

fn all_words(alphabet: usize, n: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..alphabet.pow(n as u32)).map(move |mut i| {
        let mut w = vec![0u8; n];
        for slot in w.iter_mut().rev() {
            *slot = (i % alphabet) as u8;
            i /= alphabet;
        }
        w
    })
}

#[test]
fn partition_routes_agree_on_random_chains() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (alphabet, order) in [(2, 1), (3, 1), (2, 2), (3, 0), (2, 3)] {
        let spec = random_spec(&mut rng, alphabet, order);
        for n in 1..=8 {
            for q in [-2.0, -1.0, 0.0, 0.5, 2.0] {
                let a = partition_sum(&spec, n, q).unwrap();
                let b = brute_force_partition(&spec, n, q).unwrap();
                assert!((a - b).abs() < 1e-12, "|A|={alphabet} k={order} n={n} q={q}");
            }
        }
    }
}

#[test]
fn cylinder_measures_sum_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spec = random_spec(&mut rng, 2, 2);
    for n in 1..=12 {
        let total: f64 = all_words(2, n)
            .map(|w| cylinder_measure(&spec, &w).unwrap().measure)
            .sum();
        assert!((total - 1.0).abs() < 1e-12, "n = {n}");
    }
    let b = MarkovSpec::bernoulli(&[0.7, 0.3]).unwrap();
    let total: f64 = all_words(2, 10)
        .map(|w| cylinder_measure(&b, &w).unwrap().measure)
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn gibbs_identity_on_random_words() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let spec = random_spec(&mut rng, 3, 2);
    for _ in 0..100 {
        let n = rng.random_range(3..30);
        let w: Vec<u8> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let log_mu = cylinder_measure(&spec, &w).unwrap().log_measure;
        let context = spec.context_index(&w[..2]);
        let rebuilt = spec.stationary()[context].ln() + energy(&spec, &w).unwrap();
        assert!((log_mu - rebuilt).abs() < 1e-12);
        assert!((log_mu.exp() - rebuilt.exp()).abs() < 1e-12);
    }
}

#[test]
fn markov_entropy_by_hand() {
    let m = MarkovSpec::new(2, 1, vec![vec![0.9, 0.1], vec![0.2, 0.8]], ShiftMode::Full).unwrap();
    let row = |p: f64| -(p * p.ln() + (1.0 - p) * (1.0 - p).ln());
    let expected = 2.0 / 3.0 * row(0.9) + 1.0 / 3.0 * row(0.2);
    assert!((entropy(&m) - expected).abs() < 1e-12);
}

#[test]
fn derivatives_of_m_at_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for (alphabet, order) in [(2, 0), (2, 1), (3, 1), (2, 2)] {
        let spec = random_spec(&mut rng, alphabet, order);
        let s = Spectra::new(&spec).unwrap();
        let d = 1e-4;
        let (mp, mm) = (s.renyi_m(d).unwrap(), s.renyi_m(-d).unwrap());
        assert!(((mp - mm) / (2.0 * d) - s.entropy()).abs() < 1e-6);
        let curvature = (mp + mm) / (d * d);
        let sigma2 = asymptotic_variance(&spec).unwrap();
        assert!((curvature - sigma2).abs() < 1e-4, "{curvature} vs {sigma2}");
    }
}

#[test]
fn variance_by_truncated_green_kubo() {
    // Var(f) + 2 sum_j Cov(f, f o T^j) on the chain of 2-words, with every
    // probability taken from cylinder measures and P^j applied term by term.
    let m = MarkovSpec::new(2, 1, vec![vec![0.9, 0.1], vec![0.2, 0.8]], ShiftMode::Full).unwrap();
    let mu = |w: &[u8]| cylinder_measure(&m, w).unwrap().measure;
    let edges: Vec<[u8; 2]> = vec![[0, 0], [0, 1], [1, 0], [1, 1]];
    let nu: Vec<f64> = edges.iter().map(|e| mu(e)).collect();
    let f: Vec<f64> = edges.iter().map(|e| energy(&m, e).unwrap()).collect();
    let mean: f64 = nu.iter().zip(&f).map(|(a, b)| a * b).sum();
    let fbar: Vec<f64> = f.iter().map(|v| v - mean).collect();
    let step = |g: &[f64]| -> Vec<f64> {
        edges
            .iter()
            .map(|e| {
                (0..2u8)
                    .map(|b| {
                        let next = edges.iter().position(|x| *x == [e[1], b]).unwrap();
                        mu(&[e[0], e[1], b]) / mu(e) * g[next]
                    })
                    .sum()
            })
            .collect()
    };
    let inner = |g: &[f64]| -> f64 { (0..4).map(|i| nu[i] * fbar[i] * g[i]).sum() };
    let mut total = inner(&fbar);
    let mut g = fbar.clone();
    for _ in 0..300 {
        g = step(&g);
        total += 2.0 * inner(&g);
    }
    let sigma2 = asymptotic_variance(&m).unwrap();
    assert!((total - sigma2).abs() < 1e-12, "{total} vs {sigma2}");
}

#[test]
fn kink_at_minus_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for spec in [MarkovSpec::bernoulli(&[0.7, 0.3]).unwrap(), random_spec(&mut rng, 3, 1)] {
        let s = Spectra::new(&spec).unwrap();
        let d = 1e-6;
        let right = (s.hitting_w(-1.0 + d).unwrap() - s.hitting_w(-1.0).unwrap()) / d;
        let left = (s.hitting_w(-1.0).unwrap() - s.hitting_w(-1.0 - d).unwrap()) / d;
        assert_eq!(left, 0.0);
        let closed = s.right_slope_at_minus_one().unwrap();
        assert!(closed > 0.0);
        assert!((right - closed).abs() < 1e-5, "{right} vs {closed}");
    }
    let b = Spectra::new(&MarkovSpec::bernoulli(&[0.7, 0.3]).unwrap()).unwrap();
    let closed = -(0.49 * 0.7f64.ln() + 0.09 * 0.3f64.ln()) / 0.58;
    assert!((b.right_slope_at_minus_one().unwrap() - closed).abs() < 1e-12);
}

#[test]
fn spectra_shapes_on_default_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let spec = random_spec(&mut rng, 3, 1);
    let s = Spectra::new(&spec).unwrap();
    let grid = default_q_grid();
    assert!(grid.contains(&-1.0) && grid.contains(&0.0) && grid.contains(&1.0));
    let m = s.curve(CurveKind::ExactM, &grid).unwrap();
    assert!(m.is_convex_nondecreasing(1e-10));
    let w = s.curve(CurveKind::ExactW, &grid).unwrap();
    let p2 = s.p2().unwrap();
    for p in &w.points {
        let v = p.value.unwrap();
        if p.q >= -1.0 {
            assert_eq!(v, m.value_at(p.q).unwrap());
        } else {
            assert_eq!(v, p2);
        }
        if p.q != 0.0 {
            let wbar = s.hitting_w_bar(p.q).unwrap();
            let expect = if p.q >= -1.0 { s.renyi_m_bar(p.q).unwrap() } else { p2 / p.q };
            assert!((wbar - expect).abs() < 1e-15);
        }
    }
}

#[test]
fn normalized_partition_sums_approach_m() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let spec = random_spec(&mut rng, 2, 1);
    let s = Spectra::new(&spec).unwrap();
    for q in [-2.0, -0.5, 0.5, 2.0] {
        let m = s.renyi_m(q).unwrap();
        let gaps: Vec<f64> = (4..=14)
            .map(|n| (partition_sum(&spec, n, q).unwrap() / n as f64 - m).abs())
            .collect();
        let c = gaps.iter().enumerate().map(|(i, g)| g * (i + 4) as f64).fold(0.0, f64::max);
        assert!(c < 5.0);
        assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12), "q = {q}: {gaps:?}");
    }
}

proptest! {
    #[test]
    fn m_is_convex_and_nondecreasing(seed in any::<u64>(), q in -4.0f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = Spectra::new(&random_spec(&mut rng, 2, 1)).unwrap();
        let h = 0.05;
        let (a, b, c) = (s.renyi_m(q - h).unwrap(), s.renyi_m(q).unwrap(), s.renyi_m(q + h).unwrap());
        prop_assert!(a + c - 2.0 * b >= -1e-10);
        prop_assert!(c >= b - 1e-12 && b >= a - 1e-12);
    }

    #[test]
    fn q_zero_partition_is_zero(seed in any::<u64>(), n in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_spec(&mut rng, 3, 1);
        prop_assert!(partition_sum(&spec, n, 0.0).unwrap().abs() < 1e-12);
    }
}
