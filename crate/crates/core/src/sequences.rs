//! Integer frequency sets `F` on finite windows and their indicator sequences.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fft::pair_counts;

/// Largest window accepted by the Bohr generator. Beyond this `n * alpha`
/// loses too many fractional bits in double precision.
pub const MAX_BOHR_WINDOW: i64 = 1 << 31;

/// How a [`FrequencySet`] was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Arithmetic { start: i64, gap: i64, count: i64 },
    Bohr { alpha: f64, beta: f64, a0: f64, a1: f64 },
    ThueMorse,
    Explicit,
}

/// A finite piece of an integer set: the elements of `F` inside the
/// half-open window `[lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySet {
    window: (i64, i64),
    support: Vec<i64>,
    provenance: Provenance,
}

impl FrequencySet {
    /// Builds an explicit set. Elements are sorted and deduplicated; all of
    /// them must lie in `[lo, hi)`.
    pub fn explicit(window: (i64, i64), elements: impl IntoIterator<Item = i64>) -> Result<Self> {
        let (lo, hi) = window;
        if lo > hi {
            return invalid(format!("window [{lo}, {hi}) is reversed"));
        }
        let support: Vec<i64> = elements.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if let Some(&bad) = support.iter().find(|&&n| n < lo || n >= hi) {
            return invalid(format!("element {bad} outside window [{lo}, {hi})"));
        }
        Ok(Self { window, support, provenance: Provenance::Explicit })
    }

    /// Explicit set whose window is the tight hull `[min, max + 1)`.
    pub fn from_elements(elements: impl IntoIterator<Item = i64>) -> Self {
        let support: Vec<i64> = elements.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let window = match (support.first(), support.last()) {
            (Some(&a), Some(&b)) => (a, b + 1),
            _ => (0, 0),
        };
        Self { window, support, provenance: Provenance::Explicit }
    }

    pub fn window(&self) -> (i64, i64) {
        self.window
    }

    pub fn window_len(&self) -> usize {
        (self.window.1 - self.window.0) as usize
    }

    pub fn support(&self) -> &[i64] {
        &self.support
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn contains(&self, n: i64) -> bool {
        self.support.binary_search(&n).is_ok()
    }

    /// Elements inside `[a, b]` (closed).
    pub fn elements_in(&self, a: i64, b: i64) -> &[i64] {
        let start = self.support.partition_point(|&n| n < a);
        let end = self.support.partition_point(|&n| n <= b);
        &self.support[start..end.max(start)]
    }

    /// The set `F + m`, with its window moved along.
    pub fn translate(&self, m: i64) -> Self {
        Self {
            window: (self.window.0 + m, self.window.1 + m),
            support: self.support.iter().map(|&n| n + m).collect(),
            provenance: Provenance::Explicit,
        }
    }

    /// Restriction to `[lo, hi)` intersected with the current window.
    pub fn restrict(&self, lo: i64, hi: i64) -> Self {
        let lo = lo.max(self.window.0);
        let hi = hi.min(self.window.1).max(lo);
        Self {
            window: (lo, hi),
            support: self.support.iter().copied().filter(|&n| n >= lo && n < hi).collect(),
            provenance: Provenance::Explicit,
        }
    }

    /// Indicator of the support relative to the window start:
    /// `bits[n] = 1` iff `lo + n` is in the set.
    pub fn indicator(&self) -> BinarySequence {
        let mut bits = vec![0u8; self.window_len()];
        for &n in &self.support {
            bits[(n - self.window.0) as usize] = 1;
        }
        BinarySequence { bits }
    }

    /// Reruns the generator recorded in the provenance on the same window.
    /// Explicit sets are returned unchanged.
    pub fn regenerate(&self) -> Result<Self> {
        match self.provenance {
            Provenance::Arithmetic { start, gap, count } => gen_arithmetic(start, gap, count),
            Provenance::Bohr { alpha, beta, a0, a1 } => gen_bohr(alpha, beta, a0, a1, self.window.1 - self.window.0),
            Provenance::ThueMorse => gen_thue_morse(self.window.1 - self.window.0),
            Provenance::Explicit => Ok(self.clone()),
        }
    }

    /// Checks the structural invariants; used after deserialization.
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.window;
        if lo > hi {
            return invalid(format!("window [{lo}, {hi}) is reversed"));
        }
        if self.support.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("support is not strictly increasing");
        }
        if let (Some(&a), Some(&b)) = (self.support.first(), self.support.last()) {
            if a < lo || b >= hi {
                return invalid(format!("support [{a}, {b}] leaves window [{lo}, {hi})"));
            }
        }
        if self.provenance != Provenance::Explicit {
            let lo_expected = match self.provenance {
                Provenance::Arithmetic { start, .. } => start,
                _ => 0,
            };
            if lo != lo_expected {
                return invalid(format!("window start {lo} inconsistent with provenance"));
            }
            let fresh = self.regenerate()?;
            if fresh.support != self.support || fresh.window != self.window {
                return invalid("support does not match what its provenance generates");
            }
        }
        Ok(())
    }

    /// Run lengths of the indicator, alternating zeros and ones and
    /// starting with a (possibly empty) run of zeros at `lo`.
    pub fn run_lengths(&self) -> Vec<u64> {
        let mut runs = Vec::new();
        let mut cursor = self.window.0;
        let mut i = 0;
        while i < self.support.len() {
            let start = self.support[i];
            let mut end = start + 1;
            i += 1;
            while i < self.support.len() && self.support[i] == end {
                end += 1;
                i += 1;
            }
            runs.push((start - cursor) as u64);
            runs.push((end - start) as u64);
            cursor = end;
        }
        if cursor < self.window.1 {
            runs.push((self.window.1 - cursor) as u64);
        }
        runs
    }

    /// Inverse of [`FrequencySet::run_lengths`].
    pub fn from_run_lengths(window: (i64, i64), runs: &[u64], provenance: Provenance) -> Result<Self> {
        let mut support = Vec::new();
        let mut cursor = window.0;
        for (i, &r) in runs.iter().enumerate() {
            let next =
                cursor.checked_add(r as i64).ok_or_else(|| Error::InvalidArgument("run lengths overflow".into()))?;
            if i % 2 == 1 {
                support.extend(cursor..next);
            }
            cursor = next;
        }
        if cursor != window.1 {
            return invalid(format!(
                "run lengths cover [{}, {cursor}) but window is [{}, {})",
                window.0, window.0, window.1
            ));
        }
        Ok(Self { window, support, provenance })
    }
}

/// Indicator sequence `chi_F` of a set on the window `[0, N)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinarySequence {
    bits: Vec<u8>,
}

impl BinarySequence {
    /// Panics if any entry is not 0 or 1.
    pub fn new(bits: Vec<u8>) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "binary sequence entries must be 0 or 1");
        Self { bits }
    }

    /// Parses an ASCII word such as `"0110"`.
    pub fn from_word(word: &str) -> Result<Self> {
        parse_word(word).map(|bits| Self { bits })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Positions `n` with `bits[n] = 1`.
    pub fn ones(&self) -> Vec<i64> {
        self.bits.iter().enumerate().filter(|(_, &b)| b == 1).map(|(n, _)| n as i64).collect()
    }
}

pub(crate) fn parse_word(word: &str) -> Result<Vec<u8>> {
    word.bytes()
        .map(|c| match c {
            b'0' => Ok(0),
            b'1' => Ok(1),
            _ => Err(Error::Parse(format!("word {word:?} is not binary"))),
        })
        .collect()
}

/// `{start + j * gap : 0 <= j < count}` on the tight window.
pub fn gen_arithmetic(start: i64, gap: i64, count: i64) -> Result<FrequencySet> {
    if gap < 1 {
        return invalid(format!("gap must be positive, got {gap}"));
    }
    if count < 1 {
        return invalid(format!("count must be positive, got {count}"));
    }
    let last = (count - 1)
        .checked_mul(gap)
        .and_then(|s| s.checked_add(start))
        .ok_or_else(|| Error::InvalidArgument("arithmetic progression overflows i64".into()))?;
    Ok(FrequencySet {
        window: (start, last + 1),
        support: (0..count).map(|j| start + j * gap).collect(),
        provenance: Provenance::Arithmetic { start, gap, count },
    })
}

/// Bohr set `{n in [0, N) : frac(n alpha + beta) in [a0, a1)}`.
pub fn gen_bohr(alpha: f64, beta: f64, a0: f64, a1: f64, window: i64) -> Result<FrequencySet> {
    if !(0.0..=1.0).contains(&a0) || !(0.0..=1.0).contains(&a1) || a0 >= a1 {
        return invalid(format!("need 0 <= a0 < a1 <= 1, got [{a0}, {a1})"));
    }
    if !alpha.is_finite() || !beta.is_finite() {
        return invalid("alpha and beta must be finite");
    }
    if !(1..=MAX_BOHR_WINDOW).contains(&window) {
        return invalid(format!("window size must be in [1, 2^31], got {window}"));
    }
    let support = (0..window)
        .filter(|&n| {
            let t = crate::scalar::frac(n as f64 * alpha + beta);
            t >= a0 && t < a1
        })
        .collect();
    Ok(FrequencySet { window: (0, window), support, provenance: Provenance::Bohr { alpha, beta, a0, a1 } })
}

/// Integers in `[0, N)` with even binary digit sum.
pub fn gen_thue_morse(window: i64) -> Result<FrequencySet> {
    if window < 1 {
        return invalid(format!("window size must be positive, got {window}"));
    }
    Ok(FrequencySet {
        window: (0, window),
        support: (0..window).filter(|n| n.count_ones() % 2 == 0).collect(),
        provenance: Provenance::ThueMorse,
    })
}

/// Resolves the named irrational rotation numbers accepted on the command
/// line, or parses a decimal literal.
pub fn parse_alpha(text: &str) -> Result<f64> {
    match text.trim() {
        "sqrt2-1" => Ok(std::f64::consts::SQRT_2 - 1.0),
        "golden" => Ok((5f64.sqrt() - 1.0) / 2.0),
        other => other
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("alpha {other:?} is neither a number nor a known constant"))),
    }
}

/// `F - F`, on the symmetric window `[-D, D + 1)` with `D = max F - min F`.
pub fn difference_set(set: &FrequencySet) -> FrequencySet {
    let s = set.support();
    let (Some(&first), Some(&last)) = (s.first(), s.last()) else {
        return FrequencySet { window: (0, 0), support: Vec::new(), provenance: Provenance::Explicit };
    };
    let span = last - first;
    let use_fft = (s.len() as u64).pow(2) > 1 << 22 && span <= 1 << 24;
    let counted = if use_fft { pair_counts(s).ok() } else { None };
    let support: Vec<i64> = match counted {
        Some(counts) => {
            let lags: Vec<i64> = counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(k, _)| k as i64).collect();
            lags.iter().rev().map(|&k| -k).chain(lags.iter().copied().filter(|&k| k > 0)).collect()
        }
        None => {
            let mut diffs = Vec::with_capacity(s.len() * s.len());
            for &a in s {
                for &b in s {
                    diffs.push(a - b);
                }
            }
            diffs.sort_unstable();
            diffs.dedup();
            diffs
        }
    };
    FrequencySet { window: (-span, span + 1), support, provenance: Provenance::Explicit }
}

/// One row of [`density`]: `count / n` is the density on `[lo, lo + n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPoint {
    pub n: u64,
    pub count: u64,
}

impl DensityPoint {
    pub fn ratio(&self) -> f64 {
        self.count as f64 / self.n as f64
    }
}

/// Exact counts `|F ∩ [lo, lo + n)|` at each checkpoint `n`.
pub fn density(set: &FrequencySet, checkpoints: &[u64]) -> Result<Vec<DensityPoint>> {
    let lo = set.window.0;
    checkpoints
        .iter()
        .map(|&n| {
            if n == 0 || n as usize > set.window_len() {
                return invalid(format!("checkpoint {n} outside window of size {}", set.window_len()));
            }
            let count = set.support.partition_point(|&x| x < lo + n as i64) as u64;
            Ok(DensityPoint { n, count })
        })
        .collect()
}

/// Largest gap between consecutive elements, counting the distance from the
/// window start to the first element and from the last element to the last
/// window position.
pub fn syndetic_gap(set: &FrequencySet) -> Result<i64> {
    let (Some(&first), Some(&last)) = (set.support.first(), set.support.last()) else {
        return Err(Error::Undefined("syndetic gap of an empty set".into()));
    };
    let inner = set.support.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0);
    Ok(inner.max(first - set.window.0).max(set.window.1 - 1 - last))
}

// JSON layout: {"window":[lo,hi],"provenance":{...},"support":[...] | {"rle":[...]}}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SupportRepr {
    List(Vec<i64>),
    Rle { rle: Vec<u64> },
}

#[derive(Serialize, Deserialize)]
struct FrequencySetRepr {
    window: [i64; 2],
    provenance: Provenance,
    support: SupportRepr,
}

/// Windows at least this large are written with run-length support.
pub const RLE_THRESHOLD: usize = 4096;

impl FrequencySet {
    pub fn to_json(&self) -> Result<String> {
        let support = if self.window_len() >= RLE_THRESHOLD {
            SupportRepr::Rle { rle: self.run_lengths() }
        } else {
            SupportRepr::List(self.support.clone())
        };
        let repr =
            FrequencySetRepr { window: [self.window.0, self.window.1], provenance: self.provenance.clone(), support };
        Ok(serde_json::to_string(&repr)?)
    }

    /// Parses and validates, including regeneration from provenance.
    pub fn from_json(text: &str) -> Result<Self> {
        let repr: FrequencySetRepr = serde_json::from_str(text)?;
        let window = (repr.window[0], repr.window[1]);
        let set = match repr.support {
            SupportRepr::List(support) => Self { window, support, provenance: repr.provenance },
            SupportRepr::Rle { rle } => Self::from_run_lengths(window, &rle, repr.provenance)?,
        };
        set.validate()?;
        Ok(set)
    }
}
