//! Finite-window diagnostics for the shift orbit of an indicator sequence:
//! factor complexity, recurrence of words and empirical cylinder measures.

use std::collections::{BTreeMap, HashSet};

use crate::error::{invalid, Result};
use crate::sequences::{parse_word, BinarySequence};

/// Occurrence counts of all length-`n` words in a window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordStats {
    pub word_length: usize,
    /// Keys are ASCII `"0"/"1"` words, sorted lexicographically.
    pub counts: BTreeMap<String, u64>,
    /// `N - n + 1` starting positions.
    pub total_positions: u64,
}

impl WordStats {
    pub fn frequency(&self, word: &str) -> f64 {
        self.counts.get(word).copied().unwrap_or(0) as f64 / self.total_positions as f64
    }

    pub fn frequencies(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.counts.iter().map(|(w, &c)| (w.as_str(), c as f64 / self.total_positions as f64))
    }
}

fn check_length(x: &BinarySequence, n: usize) -> Result<()> {
    if n == 0 || n > x.len() {
        return invalid(format!("word length {n} outside 1..={}", x.len()));
    }
    Ok(())
}

/// Packs each length-`n` window (`n <= 64`) into a `u64`, first bit highest.
fn packed_words(bits: &[u8], n: usize) -> impl Iterator<Item = u64> + '_ {
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut acc = 0u64;
    bits.iter().enumerate().filter_map(move |(i, &b)| {
        acc = ((acc << 1) | b as u64) & mask;
        (i + 1 >= n).then_some(acc)
    })
}

fn unpack(word: u64, n: usize) -> String {
    (0..n).rev().map(|i| if (word >> i) & 1 == 1 { '1' } else { '0' }).collect()
}

/// Number of distinct length-`n` factors.
pub fn block_complexity(x: &BinarySequence, n: usize) -> Result<usize> {
    check_length(x, n)?;
    if n <= 64 {
        Ok(packed_words(x.bits(), n).collect::<HashSet<_>>().len())
    } else {
        Ok(x.bits().windows(n).collect::<HashSet<_>>().len())
    }
}

/// Occurrences of `word` and the largest distance between consecutive
/// start positions. The gap is `None` with fewer than two occurrences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Recurrence {
    pub count: usize,
    pub max_gap: Option<usize>,
}

pub fn recurrence_gaps(x: &BinarySequence, word: &str) -> Result<Recurrence> {
    let w = parse_word(word)?;
    if w.is_empty() || w.len() > x.len() {
        return invalid(format!("word length {} outside 1..={}", w.len(), x.len()));
    }
    let mut count = 0;
    let mut last: Option<usize> = None;
    let mut max_gap: Option<usize> = None;
    for (i, window) in x.bits().windows(w.len()).enumerate() {
        if window == w.as_slice() {
            count += 1;
            if let Some(prev) = last {
                max_gap = Some(max_gap.map_or(i - prev, |g| g.max(i - prev)));
            }
            last = Some(i);
        }
    }
    Ok(Recurrence { count, max_gap })
}

/// Empirical cylinder frequencies `count(w) / (N - n + 1)`, without
/// periodization.
pub fn empirical_measure(x: &BinarySequence, n: usize) -> Result<WordStats> {
    check_length(x, n)?;
    let mut counts = BTreeMap::new();
    if n <= 64 {
        let mut packed: std::collections::HashMap<u64, u64> = std::collections::HashMap::new();
        for w in packed_words(x.bits(), n) {
            *packed.entry(w).or_default() += 1;
        }
        for (w, c) in packed {
            counts.insert(unpack(w, n), c);
        }
    } else {
        for w in x.bits().windows(n) {
            let s: String = w.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
            *counts.entry(s).or_default() += 1;
        }
    }
    Ok(WordStats { word_length: n, counts, total_positions: (x.len() - n + 1) as u64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::gen_thue_morse;

    fn tm(n: i64) -> BinarySequence {
        gen_thue_morse(n).unwrap().indicator()
    }

    #[test]
    fn complexity_examples() {
        let x = tm(1 << 16);
        assert_eq!(block_complexity(&x, 1).unwrap(), 2);
        // factors of length 3: 001 010 011 100 101 110 (000 and 111 never occur)
        assert_eq!(block_complexity(&x, 3).unwrap(), 6);
        let ones = BinarySequence::new(vec![1; 100]);
        for n in [1, 5, 64, 65, 100] {
            assert_eq!(block_complexity(&ones, n).unwrap(), 1);
        }
        assert!(block_complexity(&ones, 101).is_err());
        assert!(block_complexity(&ones, 0).is_err());
    }

    #[test]
    fn complexity_long_words_agree_between_paths() {
        let x = tm(4096);
        let via_slices = x.bits().windows(64).collect::<HashSet<_>>().len();
        assert_eq!(block_complexity(&x, 64).unwrap(), via_slices);
    }

    #[test]
    fn recurrence_examples() {
        let x = tm(16);
        assert_eq!(recurrence_gaps(&x, "11").unwrap(), Recurrence { count: 2, max_gap: Some(4) });
        let alt = BinarySequence::new((0..20).map(|i| 1 - (i % 2) as u8).collect());
        assert_eq!(recurrence_gaps(&alt, "10").unwrap().max_gap, Some(2));
        assert_eq!(recurrence_gaps(&alt, "11").unwrap(), Recurrence { count: 0, max_gap: None });
        assert!(recurrence_gaps(&alt, "1x").is_err());
    }

    #[test]
    fn empirical_examples() {
        let stats = empirical_measure(&tm(16), 2).unwrap();
        assert_eq!(stats.total_positions, 15);
        assert_eq!(stats.counts["11"], 2);
        assert_eq!(stats.counts["00"], 3);
        assert_eq!(stats.counts["01"], 5);
        assert_eq!(stats.counts["10"], 5);
        let total: f64 = stats.frequencies().map(|(_, f)| f).sum();
        assert!((total - 1.0).abs() < 1e-15);

        let ones = empirical_measure(&BinarySequence::new(vec![1; 10]), 2).unwrap();
        assert_eq!(ones.counts.len(), 1);
        assert_eq!(ones.frequency("11"), 1.0);
    }
}
