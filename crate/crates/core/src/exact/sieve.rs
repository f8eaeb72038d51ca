//! Segmented prime sieve streaming an ordered range.

const SEGMENT: usize = 1 << 18;

/// Ordered stream of primes in [lo, hi).
pub fn prime_range(lo: u64, hi: u64) -> PrimeIter {
    assert!(lo <= hi, "prime_range requires lo <= hi");
    let root = (hi as f64).sqrt() as u64 + 2;
    PrimeIter {
        base: simple_sieve(root),
        seg: Vec::new(),
        seg_lo: lo,
        seg_base: lo,
        cursor: 0,
        hi,
    }
}

fn simple_sieve(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut comp = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !comp[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                comp[j] = true;
                j += i;
            }
        }
    }
    out
}

pub struct PrimeIter {
    base: Vec<u64>,
    seg: Vec<bool>,
    /// Start of the next unsieved segment.
    seg_lo: u64,
    /// Start of the segment currently held in `seg`.
    seg_base: u64,
    cursor: usize,
    hi: u64,
}

impl PrimeIter {
    fn fill_segment(&mut self) -> bool {
        while self.seg_lo < self.hi {
            let lo = self.seg_lo;
            let hi = (lo + SEGMENT as u64).min(self.hi);
            let len = (hi - lo) as usize;
            self.seg.clear();
            self.seg.resize(len, true);
            if lo == 0 {
                if len > 0 {
                    self.seg[0] = false;
                }
                if len > 1 {
                    self.seg[1] = false;
                }
            } else if lo == 1 {
                self.seg[0] = false;
            }
            for &p in &self.base {
                if p * p >= hi {
                    break;
                }
                let start = ((lo + p - 1) / p).max(p) * p;
                let mut j = start;
                while j < hi {
                    self.seg[(j - lo) as usize] = false;
                    j += p;
                }
            }
            self.cursor = 0;
            self.seg_lo = hi;
            if self.seg.iter().any(|&b| b) {
                // remember where this segment started for index -> value
                self.seg_base = lo;
                return true;
            }
        }
        false
    }
}

impl Iterator for PrimeIter {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        loop {
            while self.cursor < self.seg.len() {
                let i = self.cursor;
                self.cursor += 1;
                if self.seg[i] {
                    return Some(self.seg_base + i as u64);
                }
            }
            if !self.fill_segment() {
                return None;
            }
        }
    }
}
