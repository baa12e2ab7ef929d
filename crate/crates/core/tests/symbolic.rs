use hitstat::symbolic::{
    hitting_time, non_overlapping_return_time, return_time, scan_all, Pattern, ScanOutcome,
    StreamCursor, Symbol,
};
use proptest::prelude::*;

fn naive_hit(pattern: &[Symbol], stream: &[Symbol]) -> Option<u64> {
    let n = pattern.len();
    (0..stream.len().saturating_sub(n - 1))
        .find(|&i| &stream[i..i + n] == pattern)
        .map(|i| i as u64 + 1)
}

fn naive_all(pattern: &[Symbol], stream: &[Symbol]) -> Vec<u64> {
    let n = pattern.len();
    (0..stream.len().saturating_sub(n - 1))
        .filter(|&i| &stream[i..i + n] == pattern)
        .map(|i| i as u64 + 1)
        .collect()
}

fn naive_return(stream: &[Symbol], n: usize) -> Option<u64> {
    (1..stream.len().saturating_sub(n - 1))
        .find(|&i| stream[i..i + n] == stream[..n])
        .map(|i| i as u64 + 1)
}

fn naive_block_return(stream: &[Symbol], n: usize) -> Option<u64> {
    (1..stream.len() / n)
        .find(|&k| stream[k * n..(k + 1) * n] == stream[..n])
        .map(|k| k as u64)
}

fn naive_min_period(word: &[Symbol]) -> usize {
    let n = word.len();
    (1..=n)
        .find(|&k| (0..n - k).all(|i| word[i + k] == word[i]))
        .unwrap()
}

fn binary_words(len: usize) -> impl Iterator<Item = Vec<Symbol>> {
    (0u32..1 << len).map(move |bits| (0..len).map(|i| ((bits >> i) & 1) as Symbol).collect())
}

fn outcome(found: Option<u64>, budget: usize) -> ScanOutcome {
    match found {
        Some(t) => ScanOutcome::Hit(t),
        None => ScanOutcome::Censored {
            budget: budget as u64,
        },
    }
}

#[test]
fn exhaustive_oracle_equivalence() {
    let patterns: Vec<Vec<Symbol>> = (1..=4).flat_map(binary_words).collect();
    let streams: Vec<Vec<Symbol>> = (1..=12).flat_map(binary_words).collect();
    for p in &patterns {
        let pattern = Pattern::new(p.clone()).unwrap();
        assert_eq!(pattern.min_period(), naive_min_period(p));
        for s in &streams {
            let mut c = StreamCursor::from_symbols(s.clone());
            if s.len() >= p.len() {
                let got = hitting_time(&pattern, &mut c).unwrap();
                assert_eq!(got, outcome(naive_hit(p, s), s.len()), "{p:?} in {s:?}");
            } else {
                assert!(hitting_time(&pattern, &mut c).is_err());
            }
            let mut c = StreamCursor::from_symbols(s.clone());
            assert_eq!(scan_all(&pattern, &mut c), naive_all(p, s));
        }
    }
    for s in &streams {
        for n in 1..=4 {
            let mut c = StreamCursor::from_symbols(s.clone());
            let mut d = StreamCursor::from_symbols(s.clone());
            if s.len() < 2 * n {
                assert!(return_time(&mut c, n).is_err());
                assert!(non_overlapping_return_time(&mut d, n).is_err());
                continue;
            }
            assert_eq!(return_time(&mut c, n).unwrap(), outcome(naive_return(s, n), s.len()));
            assert_eq!(
                non_overlapping_return_time(&mut d, n).unwrap(),
                outcome(naive_block_return(s, n), s.len())
            );
        }
    }
}

#[test]
fn return_offset_is_at_least_min_period() {
    for s in (8..=12).flat_map(binary_words) {
        for n in 1..=4 {
            let p = Pattern::new(s[..n].to_vec()).unwrap();
            let mut c = StreamCursor::from_symbols(s.clone());
            if let ScanOutcome::Hit(r) = return_time(&mut c, n).unwrap() {
                assert!(r > p.min_period() as u64);
            }
        }
    }
}

fn ternary_stream() -> impl Strategy<Value = Vec<Symbol>> {
    prop::collection::vec(0u8..3, 8..400)
}

proptest! {
    #[test]
    fn hitting_time_is_monotone_in_n(x in ternary_stream(), y in ternary_stream(), n in 1usize..6) {
        prop_assume!(x.len() > n);
        let short = Pattern::new(x[..n].to_vec()).unwrap();
        let long = Pattern::new(x[..n + 1].to_vec()).unwrap();
        let ws = hitting_time(&short, &mut StreamCursor::from_symbols(y.clone()));
        let wl = hitting_time(&long, &mut StreamCursor::from_symbols(y.clone()));
        if let (Ok(ws), Ok(wl)) = (ws, wl) {
            match (ws, wl) {
                (ScanOutcome::Hit(a), ScanOutcome::Hit(b)) => prop_assert!(b >= a),
                (ScanOutcome::Censored { .. }, lw) => prop_assert!(lw.is_censored()),
                _ => {}
            }
        }
    }

    #[test]
    fn own_prefix_hit_from_second_symbol_is_return_offset(x in ternary_stream(), n in 1usize..5) {
        prop_assume!(x.len() >= 2 * n);
        let r = return_time(&mut StreamCursor::from_symbols(x.clone()), n).unwrap();
        let p = Pattern::new(x[..n].to_vec()).unwrap();
        let w = hitting_time(&p, &mut StreamCursor::from_symbols(x[1..].to_vec())).unwrap();
        match (r, w) {
            (ScanOutcome::Hit(r), ScanOutcome::Hit(w)) => prop_assert_eq!(r - 1, w),
            (r, w) => prop_assert!(r.is_censored() && w.is_censored()),
        }
    }

    #[test]
    fn censored_scans_agree_with_oracle(p in prop::collection::vec(0u8..3, 1..6), s in ternary_stream()) {
        let pattern = Pattern::new(p.clone()).unwrap();
        let got = hitting_time(&pattern, &mut StreamCursor::from_symbols(s.clone())).unwrap();
        prop_assert_eq!(got, outcome(naive_hit(&p, &s), s.len()));
    }

    #[test]
    fn scan_all_is_restarted_hitting_time(p in prop::collection::vec(0u8..2, 1..4), s in ternary_stream()) {
        let pattern = Pattern::new(p.clone()).unwrap();
        let all = scan_all(&pattern, &mut StreamCursor::from_symbols(s.clone()));
        let mut restarted = Vec::new();
        let mut start = 0usize;
        while s.len() - start >= p.len() {
            let mut c = StreamCursor::from_symbols(s[start..].to_vec());
            match hitting_time(&pattern, &mut c).unwrap() {
                ScanOutcome::Hit(j) => {
                    restarted.push(start as u64 + j);
                    start += j as usize;
                }
                ScanOutcome::Censored { .. } => break,
            }
        }
        prop_assert!(all.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(all, restarted);
    }
}

proptest! {
    #[test]
    fn nested_scan_equals_separate_scans(x in prop::collection::vec(0u8..2, 12..13), y in prop::collection::vec(0u8..2, 20..300)) {
        let lengths = [1usize, 3, 4, 7, 12];
        let nested = hitstat::symbolic::nested_hitting_times(&x, &lengths, &mut StreamCursor::from_symbols(y.clone())).unwrap();
        for (&n, got) in lengths.iter().zip(&nested) {
            let p = Pattern::new(x[..n].to_vec()).unwrap();
            let single = hitting_time(&p, &mut StreamCursor::from_symbols(y.clone())).unwrap();
            prop_assert_eq!(*got, single, "n = {}", n);
        }
    }
}
