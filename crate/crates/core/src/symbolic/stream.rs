use super::pattern::Symbol;

/// A lazy generator of symbols.
///
/// `fill` must write exactly `buf.len()` symbols, and the concatenation of
/// everything a source produces must not depend on how the requests are
/// split into buffers.
pub trait SymbolSource {
    fn alphabet_size(&self) -> usize;
    fn fill(&mut self, buf: &mut [Symbol]);
}

impl<S: SymbolSource + ?Sized> SymbolSource for Box<S> {
    fn alphabet_size(&self) -> usize {
        (**self).alphabet_size()
    }
    fn fill(&mut self, buf: &mut [Symbol]) {
        (**self).fill(buf)
    }
}

/// A fixed, finite sequence of symbols.
#[derive(Debug, Clone)]
pub struct SliceSource {
    symbols: Vec<Symbol>,
    alphabet: usize,
    next: usize,
}

impl SliceSource {
    pub fn new(symbols: Vec<Symbol>) -> SliceSource {
        let alphabet = symbols.iter().map(|&s| s as usize + 1).max().unwrap_or(1).max(2);
        SliceSource {
            symbols,
            alphabet,
            next: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

impl SymbolSource for SliceSource {
    fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    fn fill(&mut self, buf: &mut [Symbol]) {
        let end = self.next + buf.len();
        assert!(end <= self.symbols.len(), "slice source exhausted");
        buf.copy_from_slice(&self.symbols[self.next..end]);
        self.next = end;
    }
}

const MIN_CHUNK: usize = 64;
const MAX_CHUNK: usize = 8192;

/// Pull-based cursor over a [`SymbolSource`] with a hard budget.
///
/// Positions are 1-based: after the first pull `position() == 1`. The
/// cursor never hands out more than `budget` symbols in total. Symbols are
/// generated in growing chunks so short scans do not pay for long buffers.
pub struct StreamCursor<S> {
    source: S,
    budget: u64,
    position: u64,
    generated: u64,
    buf: Vec<Symbol>,
    head: usize,
}

impl<S: SymbolSource> StreamCursor<S> {
    pub fn new(source: S, budget: u64) -> StreamCursor<S> {
        StreamCursor {
            source,
            budget,
            position: 0,
            generated: 0,
            buf: Vec::new(),
            head: 0,
        }
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Number of symbols consumed so far (position of the last one pulled).
    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn remaining(&self) -> u64 {
        self.budget - self.position
    }

    pub fn alphabet_size(&self) -> usize {
        self.source.alphabet_size()
    }

    pub fn into_source(self) -> S {
        self.source
    }

    /// Next symbol, or `None` once the budget is exhausted.
    #[inline]
    pub fn pull(&mut self) -> Option<Symbol> {
        if self.head == self.buf.len() && !self.refill() {
            return None;
        }
        let s = self.buf[self.head];
        self.head += 1;
        self.position += 1;
        Some(s)
    }

    /// Unconsumed buffered symbols, refilling if necessary. Empty only when
    /// the budget is exhausted. Call [`StreamCursor::consume`] afterwards.
    #[inline]
    pub fn chunk(&mut self) -> &[Symbol] {
        if self.head == self.buf.len() {
            self.refill();
        }
        &self.buf[self.head..]
    }

    /// Mark `k` symbols of the current chunk as consumed.
    #[inline]
    pub fn consume(&mut self, k: usize) {
        debug_assert!(self.head + k <= self.buf.len());
        self.head += k;
        self.position += k as u64;
    }

    /// Consume and discard up to `k` symbols; returns how many were skipped.
    pub fn skip(&mut self, mut k: u64) -> u64 {
        let mut skipped = 0;
        while k > 0 {
            let avail = self.chunk().len() as u64;
            if avail == 0 {
                break;
            }
            let take = avail.min(k);
            self.consume(take as usize);
            k -= take;
            skipped += take;
        }
        skipped
    }

    /// Pull `n` symbols into a vector (fewer if the budget runs out).
    pub fn take_vec(&mut self, n: usize) -> Vec<Symbol> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let need = n - out.len();
            let chunk = self.chunk();
            if chunk.is_empty() {
                break;
            }
            let take = chunk.len().min(need);
            out.extend_from_slice(&chunk[..take]);
            self.consume(take);
        }
        out
    }

    fn refill(&mut self) -> bool {
        let left = self.budget - self.generated;
        if left == 0 {
            self.buf.clear();
            self.head = 0;
            return false;
        }
        let next_len = if self.buf.is_empty() {
            MIN_CHUNK
        } else {
            (self.buf.len() * 2).min(MAX_CHUNK)
        };
        let len = (next_len as u64).min(left) as usize;
        self.buf.resize(len, 0);
        self.source.fill(&mut self.buf[..len]);
        self.generated += len as u64;
        self.head = 0;
        true
    }
}

impl StreamCursor<SliceSource> {
    /// Cursor over a literal sequence; the budget is the sequence length.
    pub fn from_symbols(symbols: Vec<Symbol>) -> Self {
        let len = symbols.len() as u64;
        StreamCursor::new(SliceSource::new(symbols), len)
    }

    /// Cursor over a literal sequence with an explicit (smaller) budget.
    pub fn from_symbols_with_budget(symbols: Vec<Symbol>, budget: u64) -> Self {
        let budget = budget.min(symbols.len() as u64);
        StreamCursor::new(SliceSource::new(symbols), budget)
    }
}
