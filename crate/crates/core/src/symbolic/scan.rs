use super::pattern::{Pattern, Symbol};
use super::stream::{StreamCursor, SymbolSource};
use crate::error::{invalid, Result};

/// Result of a budgeted scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScanOutcome {
    /// The recurrence time on the 1-based scale of the operation.
    Hit(u64),
    /// No occurrence within the budget (number of symbols available to the scan).
    Censored { budget: u64 },
}

impl ScanOutcome {
    pub fn hit(self) -> Option<u64> {
        match self {
            ScanOutcome::Hit(t) => Some(t),
            ScanOutcome::Censored { .. } => None,
        }
    }

    pub fn is_censored(self) -> bool {
        matches!(self, ScanOutcome::Censored { .. })
    }

    /// The observed time, or the budget when censored (a lower bound).
    pub fn value_or_budget(self) -> u64 {
        match self {
            ScanOutcome::Hit(t) => t,
            ScanOutcome::Censored { budget } => budget,
        }
    }
}

/// Failure-function automaton of a single pattern, expanded into a full
/// transition table. State `n` means "the last n symbols equal the pattern".
#[derive(Debug, Clone)]
pub struct Automaton {
    n: u32,
    shift: u32,
    table: Vec<u32>,
}

impl Automaton {
    pub fn new(pattern: &Pattern, alphabet: usize) -> Automaton {
        let word = pattern.symbols();
        let prefix = pattern.prefix_function();
        let n = word.len();
        let alphabet = alphabet.max(pattern.max_symbol() as usize + 1);
        let stride = alphabet.next_power_of_two();
        let shift = stride.trailing_zeros();
        let mut table = vec![0u32; (n + 1) * stride];
        for state in 0..=n {
            for a in 0..alphabet {
                let next = if state < n && word[state] as usize == a {
                    state + 1
                } else if state == 0 {
                    0
                } else {
                    table[(prefix[state - 1] << shift) | a] as usize
                };
                table[(state << shift) | a] = next as u32;
            }
        }
        Automaton {
            n: n as u32,
            shift,
            table,
        }
    }

    pub fn accept_state(&self) -> u32 {
        self.n
    }

    #[inline(always)]
    pub fn step(&self, state: u32, symbol: Symbol) -> u32 {
        self.table[((state as usize) << self.shift) | symbol as usize]
    }

    /// Feed symbols from `state`; returns the index just past the first
    /// symbol that completes a match, or `None` with the final state.
    #[inline]
    pub fn run(&self, mut state: u32, symbols: &[Symbol]) -> (u32, Option<usize>) {
        for (i, &s) in symbols.iter().enumerate() {
            state = self.step(state, s);
            if state == self.n {
                return (state, Some(i + 1));
            }
        }
        (state, None)
    }
}

/// First `j >= 1` such that the window starting at the j-th symbol pulled
/// from `stream` (counting from the cursor's current position) equals
/// `pattern`. Consumes exactly `j + n - 1` symbols on a hit.
pub fn hitting_time<S: SymbolSource>(
    pattern: &Pattern,
    stream: &mut StreamCursor<S>,
) -> Result<ScanOutcome> {
    let budget = stream.remaining();
    if budget < pattern.len() as u64 {
        return invalid(format!(
            "budget {budget} shorter than pattern length {}",
            pattern.len()
        ));
    }
    let automaton = Automaton::new(pattern, stream.alphabet_size());
    Ok(scan_from(&automaton, 0, 0, stream, budget))
}

/// Continue scanning with a prepared automaton. The returned start index
/// is relative to the cursor position at the time of the call, shifted by
/// `pre`, the number of pattern symbols already fed to reach `state`.
fn scan_from<S: SymbolSource>(
    automaton: &Automaton,
    mut state: u32,
    pre: u64,
    stream: &mut StreamCursor<S>,
    budget: u64,
) -> ScanOutcome {
    let n = automaton.accept_state() as u64;
    let mut seen = pre;
    loop {
        let chunk = stream.chunk();
        if chunk.is_empty() {
            return ScanOutcome::Censored { budget };
        }
        let (next, hit) = automaton.run(state, chunk);
        match hit {
            Some(k) => {
                stream.consume(k);
                seen += k as u64;
                return ScanOutcome::Hit(seen - n + 1);
            }
            None => {
                let len = chunk.len();
                stream.consume(len);
                seen += len as u64;
                state = next;
            }
        }
    }
}

/// Hitting times of the nested prefixes `word[..n]`, `n` in increasing
/// `lengths`, from a single pass over `stream`. Since an occurrence of a
/// longer prefix is also an occurrence of every shorter one, the scan for
/// each length resumes where the previous one matched, with the automaton
/// of the longer prefix already in the state of the shorter match.
pub fn nested_hitting_times<S: SymbolSource>(
    word: &[Symbol],
    lengths: &[usize],
    stream: &mut StreamCursor<S>,
) -> Result<Vec<ScanOutcome>> {
    if lengths.is_empty() || lengths[0] == 0 || lengths.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("lengths must be positive and strictly increasing");
    }
    let longest = *lengths.last().expect("non-empty");
    if longest > word.len() {
        return invalid(format!("word of length {} shorter than {longest}", word.len()));
    }
    let budget = stream.remaining();
    if budget < longest as u64 {
        return invalid(format!("budget {budget} shorter than pattern length {longest}"));
    }
    let mut out = Vec::with_capacity(lengths.len());
    let mut state = 0;
    let mut seen = 0u64;
    for &n in lengths {
        if out.last().is_some_and(|o: &ScanOutcome| o.is_censored()) {
            out.push(ScanOutcome::Censored { budget });
            continue;
        }
        let pattern = Pattern::new(word[..n].to_vec())?;
        let automaton = Automaton::new(&pattern, stream.alphabet_size());
        let before = stream.position();
        let outcome = scan_from(&automaton, state, seen, stream, budget);
        seen += stream.position() - before;
        state = n as u32;
        out.push(outcome);
    }
    Ok(out)
}

/// All (overlapping) occurrence start positions of `pattern`, 1-based from
/// the cursor position at call time, until the budget runs out.
pub fn scan_all<S: SymbolSource>(pattern: &Pattern, stream: &mut StreamCursor<S>) -> Vec<u64> {
    scan_first(pattern, stream, usize::MAX)
}

/// Like [`scan_all`] but stops right after the `limit`-th occurrence.
pub fn scan_first<S: SymbolSource>(
    pattern: &Pattern,
    stream: &mut StreamCursor<S>,
    limit: usize,
) -> Vec<u64> {
    let automaton = Automaton::new(pattern, stream.alphabet_size());
    let n = pattern.len() as u64;
    let mut state = 0;
    let mut seen = 0u64;
    let mut out = Vec::new();
    while out.len() < limit {
        let chunk = stream.chunk();
        if chunk.is_empty() {
            break;
        }
        let (next, hit) = automaton.run(state, chunk);
        let used = hit.unwrap_or(chunk.len());
        stream.consume(used);
        seen += used as u64;
        state = next;
        if hit.is_some() {
            out.push(seen - n + 1);
        }
    }
    out
}

/// Both return times of a stream's own n-prefix, from a single pass.
#[derive(Debug, Clone)]
pub struct ReturnScan {
    pub pattern: Pattern,
    /// Overlapping return time `r_n` (k-scale, `>= 2`), if requested.
    pub r: Option<ScanOutcome>,
    /// Non-overlapping return time (block index, `>= 1`), if requested.
    pub r_hat: Option<ScanOutcome>,
}

/// Read the first `n` symbols as the target word and scan the continuation
/// for the requested return times. Stops as soon as every requested time is
/// known or the budget is exhausted.
pub fn return_scan<S: SymbolSource>(
    stream: &mut StreamCursor<S>,
    n: usize,
    want_r: bool,
    want_r_hat: bool,
) -> Result<ReturnScan> {
    if n == 0 {
        return invalid("word length must be >= 1");
    }
    let budget = stream.remaining();
    if budget < 2 * n as u64 {
        return invalid(format!("budget {budget} shorter than 2n = {}", 2 * n));
    }
    let word = stream.take_vec(n);
    let pattern = Pattern::new(word)?;
    let automaton = Automaton::new(&pattern, stream.alphabet_size());
    let censored = ScanOutcome::Censored { budget };

    if want_r && !want_r_hat {
        // Re-feed positions 2..n, then continue with the fast loop.
        let mut state = 0;
        for &s in &pattern.symbols()[1..] {
            state = automaton.step(state, s);
        }
        let r = match scan_from(&automaton, state, n as u64 - 1, stream, budget) {
            ScanOutcome::Hit(j) => ScanOutcome::Hit(j + 1),
            c => c,
        };
        return Ok(ReturnScan {
            pattern,
            r: Some(r),
            r_hat: None,
        });
    }

    let word = pattern.symbols();
    let mut state = 0;
    for &s in &word[1..] {
        state = automaton.step(state, s);
    }
    let accept = automaton.accept_state();
    let mut r = if want_r { None } else { Some(censored) };
    let mut r_hat = None;
    // Position of the last consumed symbol, block index and offset of the next one.
    let mut pos = n as u64;
    let mut block = 1u64;
    let mut offset = 0usize;
    let mut block_ok = true;
    'outer: loop {
        let chunk = stream.chunk();
        if chunk.is_empty() {
            break;
        }
        let mut used = 0;
        for &s in chunk {
            used += 1;
            pos += 1;
            if r.is_none() {
                state = automaton.step(state, s);
                if state == accept {
                    r = Some(ScanOutcome::Hit(pos - n as u64 + 1));
                }
            }
            block_ok &= s == word[offset];
            offset += 1;
            if offset == n {
                if block_ok && r_hat.is_none() {
                    r_hat = Some(ScanOutcome::Hit(block));
                }
                block += 1;
                offset = 0;
                block_ok = true;
            }
            if r.is_some() && r_hat.is_some() {
                stream.consume(used);
                break 'outer;
            }
        }
        stream.consume(used);
    }
    Ok(ReturnScan {
        pattern,
        r: want_r.then(|| r.unwrap_or(censored)),
        r_hat: Some(r_hat.unwrap_or(censored)),
    })
}

/// `r_n = inf{k >= 2 : x_k .. x_{k+n-1} = x_1 .. x_n}` of the stream.
pub fn return_time<S: SymbolSource>(stream: &mut StreamCursor<S>, n: usize) -> Result<ScanOutcome> {
    Ok(return_scan(stream, n, true, false)?.r.expect("requested"))
}

/// `inf{k >= 1 : block k equals block 0}` with blocks of length `n`.
pub fn non_overlapping_return_time<S: SymbolSource>(
    stream: &mut StreamCursor<S>,
    n: usize,
) -> Result<ScanOutcome> {
    Ok(return_scan(stream, n, false, true)?.r_hat.expect("requested"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::pattern::parse_digits;

    fn letters(s: &str) -> Vec<Symbol> {
        s.bytes().map(|b| b - b'a').collect()
    }

    fn cursor(s: &str) -> StreamCursor<crate::symbolic::SliceSource> {
        StreamCursor::from_symbols(letters(s))
    }

    fn pat(s: &str) -> Pattern {
        Pattern::new(letters(s)).unwrap()
    }

    #[test]
    fn hitting_time_examples() {
        assert_eq!(hitting_time(&pat("ab"), &mut cursor("ccab")).unwrap(), ScanOutcome::Hit(3));
        assert_eq!(hitting_time(&pat("a"), &mut cursor("a")).unwrap(), ScanOutcome::Hit(1));
        assert_eq!(hitting_time(&pat("aba"), &mut cursor("ababa")).unwrap(), ScanOutcome::Hit(1));
        assert_eq!(hitting_time(&pat("bab"), &mut cursor("ababa")).unwrap(), ScanOutcome::Hit(2));
        assert_eq!(
            hitting_time(&pat("bb"), &mut cursor("ababa")).unwrap(),
            ScanOutcome::Censored { budget: 5 }
        );
        assert!(hitting_time(&pat("abc"), &mut cursor("ab")).is_err());
    }

    #[test]
    fn hitting_time_consumes_exactly_to_match_end() {
        let mut c = cursor("ccabab");
        assert_eq!(hitting_time(&pat("ab"), &mut c).unwrap(), ScanOutcome::Hit(3));
        assert_eq!(c.position(), 4);
        // The next scan is relative to the new position.
        assert_eq!(hitting_time(&pat("ab"), &mut c).unwrap(), ScanOutcome::Hit(1));
    }

    #[test]
    fn return_time_examples() {
        assert_eq!(return_time(&mut cursor("aaaa"), 2).unwrap(), ScanOutcome::Hit(2));
        assert_eq!(return_time(&mut cursor("abab"), 2).unwrap(), ScanOutcome::Hit(3));
        assert_eq!(return_time(&mut cursor("abcabc"), 3).unwrap(), ScanOutcome::Hit(4));
        assert!(return_time(&mut cursor("abc"), 2).is_err());
    }

    #[test]
    fn non_overlapping_examples() {
        assert_eq!(non_overlapping_return_time(&mut cursor("abab"), 2).unwrap(), ScanOutcome::Hit(1));
        assert_eq!(non_overlapping_return_time(&mut cursor("abbaab"), 2).unwrap(), ScanOutcome::Hit(2));
        assert_eq!(non_overlapping_return_time(&mut cursor("aaaa"), 2).unwrap(), ScanOutcome::Hit(1));
        assert_eq!(
            non_overlapping_return_time(&mut cursor("abbabb"), 2).unwrap(),
            ScanOutcome::Censored { budget: 6 }
        );
    }

    #[test]
    fn scan_all_examples() {
        assert_eq!(scan_all(&pat("ab"), &mut cursor("ababab")), vec![1, 3, 5]);
        assert_eq!(scan_all(&pat("aa"), &mut cursor("aaaa")), vec![1, 2, 3]);
        assert!(scan_all(&pat("abc"), &mut cursor("ab")).is_empty());
    }

    #[test]
    fn pattern_symbols_beyond_stream_alphabet() {
        let p = Pattern::new(parse_digits("2").unwrap()).unwrap();
        let mut c = StreamCursor::from_symbols(vec![0, 1, 0]);
        assert!(hitting_time(&p, &mut c).unwrap().is_censored());
    }

    #[test]
    fn long_stream_crosses_chunks() {
        let mut data = vec![0u8; 50_000];
        data[40_000] = 1;
        data[40_001] = 1;
        let p = Pattern::new(vec![1, 1]).unwrap();
        let mut c = StreamCursor::from_symbols(data.clone());
        assert_eq!(hitting_time(&p, &mut c).unwrap(), ScanOutcome::Hit(40_001));
        let mut c = StreamCursor::from_symbols(data);
        assert_eq!(scan_all(&p, &mut c), vec![40_001]);
    }
}
