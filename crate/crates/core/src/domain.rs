//! The multislice domain: words in `[ℓ]^n` with a prescribed colour histogram.
//!
//! Elements are ordered lexicographically (colour 1 < colour 2 < …), which
//! fixes the dense-table index of every element and makes file formats
//! portable. Colours are 0-based internally and 1-based in external formats;
//! the conversion happens only at the serialization boundary.

use std::fmt;

use num_rational::Rational64;
use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default cap on the domain size for operations that build dense tables.
pub const DEFAULT_DENSE_CAP: u64 = 200_000;

/// A multislice: the set of words in `[ℓ]^n` in which colour `i` appears
/// exactly `κ_i` times.
///
/// Weights are indexed by 0-based colour internally. The spec is immutable
/// after construction and cheap to clone.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultisliceSpec {
    kappa: Vec<u32>,
    points: usize,
    dense_cap: u64,
}

impl MultisliceSpec {
    /// Builds a spec from the colour weights `κ_1,…,κ_ℓ`.
    ///
    /// Requires at least two colours and every weight positive.
    pub fn new(kappa: Vec<u32>) -> Result<Self> {
        if kappa.len() < 2 {
            return Err(Error::InvalidWeights(format!(
                "need at least 2 colours, got {}",
                kappa.len()
            )));
        }
        if kappa.len() > 255 {
            return Err(Error::InvalidWeights(format!(
                "at most 255 colours supported, got {}",
                kappa.len()
            )));
        }
        if kappa.iter().any(|&k| k == 0) {
            return Err(Error::InvalidWeights(
                "every colour weight must be positive".into(),
            ));
        }
        let points = kappa.iter().map(|&k| k as usize).sum();
        Ok(Self {
            kappa,
            points,
            dense_cap: DEFAULT_DENSE_CAP,
        })
    }

    /// Same spec with a different cap on dense-table construction.
    pub fn with_dense_cap(mut self, cap: u64) -> Self {
        self.dense_cap = cap;
        self
    }

    /// Number of colours `ℓ`.
    pub fn colors(&self) -> usize {
        self.kappa.len()
    }

    /// Number of points `n = Σ κ_i`.
    pub fn points(&self) -> usize {
        self.points
    }

    /// The colour weights, indexed by 0-based colour.
    pub fn weights(&self) -> &[u32] {
        &self.kappa
    }

    /// Weight of one colour.
    pub fn weight(&self, color: usize) -> Result<u32> {
        self.kappa
            .get(color)
            .copied()
            .ok_or(Error::ColorOutOfRange {
                color,
                colors: self.colors(),
            })
    }

    /// Whether every colour class has at least `rho * n` coordinates.
    pub fn is_balanced(&self, rho: f64) -> bool {
        let min = self.kappa.iter().copied().min().unwrap_or(0) as f64;
        min >= rho * self.points as f64
    }

    /// The cap applied when building dense tables over this spec.
    pub fn dense_cap(&self) -> u64 {
        self.dense_cap
    }

    /// Exact number of elements, the multinomial coefficient
    /// `n! / (κ_1! ⋯ κ_ℓ!)`.
    ///
    /// Computed with checked 128-bit intermediates; fails explicitly instead
    /// of overflowing.
    pub fn domain_size(&self) -> Result<u64> {
        let mut size: u128 = 1;
        let mut placed: u64 = 0;
        for &k in &self.kappa {
            placed += u64::from(k);
            size = size
                .checked_mul(binomial_u128(placed, u64::from(k))?)
                .ok_or(Error::DomainSizeOverflow)?;
            if size > u64::MAX as u128 {
                return Err(Error::DomainSizeOverflow);
            }
        }
        Ok(size as u64)
    }

    /// Domain size as a dense-table length, enforcing the configured cap.
    pub fn dense_len(&self) -> Result<usize> {
        let size = self.domain_size()?;
        if size > self.dense_cap {
            return Err(Error::DenseBudgetExceeded {
                size,
                cap: self.dense_cap,
            });
        }
        Ok(size as usize)
    }

    /// Lexicographic rank of a word.
    pub fn rank(&self, element: &Element) -> Result<Rank> {
        if !self.matches_histogram(element.word()) {
            return Err(Error::HistogramMismatch);
        }
        let mut counts = self.kappa.clone();
        let mut remaining_total = self.domain_size()? as u128;
        let mut remaining_len = self.points as u128;
        let mut rank: u128 = 0;
        for &c in element.word() {
            let c = c as usize;
            for (lower, &cnt) in counts[..c].iter().enumerate() {
                let _ = lower;
                if cnt > 0 {
                    // exact: remaining_total * cnt is divisible by remaining_len
                    rank += remaining_total * cnt as u128 / remaining_len;
                }
            }
            remaining_total = remaining_total * counts[c] as u128 / remaining_len;
            counts[c] -= 1;
            remaining_len -= 1;
        }
        Ok(Rank(rank as u64))
    }

    /// The element with the given lexicographic rank.
    pub fn unrank(&self, rank: Rank) -> Result<Element> {
        let size = self.domain_size()?;
        if rank.0 >= size {
            return Err(Error::RankOutOfRange { rank: rank.0, size });
        }
        let mut counts = self.kappa.clone();
        let mut remaining_total = size as u128;
        let mut remaining_len = self.points as u128;
        let mut target = rank.0 as u128;
        let mut word = Vec::with_capacity(self.points);
        for _ in 0..self.points {
            for c in 0..counts.len() {
                if counts[c] == 0 {
                    continue;
                }
                let with_c = remaining_total * counts[c] as u128 / remaining_len;
                if target < with_c {
                    word.push(c as u8);
                    remaining_total = with_c;
                    counts[c] -= 1;
                    remaining_len -= 1;
                    break;
                }
                target -= with_c;
            }
        }
        Ok(Element { word })
    }

    /// Streams every element exactly once, in rank order.
    pub fn enumerate(&self) -> ElementIter {
        let mut word = Vec::with_capacity(self.points);
        for (c, &k) in self.kappa.iter().enumerate() {
            word.extend(std::iter::repeat(c as u8).take(k as usize));
        }
        ElementIter { next: Some(word) }
    }

    /// Materializes the full element list in rank order, respecting the
    /// dense cap.
    pub fn elements(&self) -> Result<Vec<Element>> {
        let len = self.dense_len()?;
        let out: Vec<Element> = self.enumerate().collect();
        debug_assert_eq!(out.len(), len);
        Ok(out)
    }

    /// Draws a uniform element.
    ///
    /// Shuffling the sorted word uniformly over all `n!` coordinate
    /// permutations hits each distinct word `κ_1!⋯κ_ℓ!` times, so the result
    /// is uniform over the multislice.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Element {
        use rand::seq::SliceRandom;
        let mut word = Vec::with_capacity(self.points);
        for (c, &k) in self.kappa.iter().enumerate() {
            word.extend(std::iter::repeat(c as u8).take(k as usize));
        }
        word.shuffle(rng);
        Element { word }
    }

    /// The fraction of the domain on which a fixed coordinate has the given
    /// colour, `κ_i / n`.
    pub fn color_frequency(&self, color: usize) -> Result<Rational64> {
        let k = self.weight(color)?;
        Ok(Rational64::new(i64::from(k), self.points as i64))
    }

    fn matches_histogram(&self, word: &[u8]) -> bool {
        if word.len() != self.points {
            return false;
        }
        let mut counts = vec![0u32; self.colors()];
        for &c in word {
            let c = c as usize;
            if c >= counts.len() {
                return false;
            }
            counts[c] += 1;
        }
        counts == self.kappa
    }

    /// Validates that a word belongs to this multislice.
    pub fn check_element(&self, element: &Element) -> Result<()> {
        if self.matches_histogram(element.word()) {
            Ok(())
        } else {
            Err(Error::HistogramMismatch)
        }
    }

    /// Validates a 0-based coordinate.
    pub fn check_coordinate(&self, coordinate: usize) -> Result<()> {
        if coordinate < self.points {
            Ok(())
        } else {
            Err(Error::CoordinateOutOfRange {
                coordinate,
                points: self.points,
            })
        }
    }

    /// Validates a 0-based colour.
    pub fn check_color(&self, color: usize) -> Result<()> {
        if color < self.colors() {
            Ok(())
        } else {
            Err(Error::ColorOutOfRange {
                color,
                colors: self.colors(),
            })
        }
    }
}

impl Serialize for MultisliceSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            kappa: &'a [u32],
        }
        Wire { kappa: &self.kappa }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MultisliceSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            kappa: Vec<u32>,
        }
        let wire = Wire::deserialize(deserializer)?;
        MultisliceSpec::new(wire.kappa).map_err(D::Error::custom)
    }
}

impl fmt::Display for MultisliceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.kappa.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// One word of the multislice, with 0-based colours.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    word: Vec<u8>,
}

impl Element {
    /// Wraps a raw 0-based word without validating it against a spec.
    pub fn from_word(word: Vec<u8>) -> Self {
        Self { word }
    }

    /// Parses a 1-based colour sequence, validating the histogram.
    pub fn from_one_based(colors: &[u32], spec: &MultisliceSpec) -> Result<Self> {
        let mut word = Vec::with_capacity(colors.len());
        for &c in colors {
            if c == 0 || c as usize > spec.colors() {
                return Err(Error::ColorOutOfRange {
                    color: c as usize,
                    colors: spec.colors(),
                });
            }
            word.push((c - 1) as u8);
        }
        let element = Self { word };
        spec.check_element(&element)?;
        Ok(element)
    }

    /// The word with 0-based colours.
    pub fn word(&self) -> &[u8] {
        &self.word
    }

    /// The word with 1-based colours, as used by external formats.
    pub fn to_one_based(&self) -> Vec<u32> {
        self.word.iter().map(|&c| u32::from(c) + 1).collect()
    }

    /// 0-based colour at a 0-based coordinate.
    pub fn color(&self, coordinate: usize) -> usize {
        self.word[coordinate] as usize
    }

    /// Number of coordinates.
    pub fn len(&self) -> usize {
        self.word.len()
    }

    /// True when the word is empty (never for a valid multislice element).
    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// The word with the entries at two coordinates switched.
    ///
    /// An involution; preserves the colour histogram. Coordinates may be
    /// equal colours, in which case the word is unchanged.
    pub fn transposed(&self, j1: usize, j2: usize) -> Result<Element> {
        let n = self.word.len();
        for j in [j1, j2] {
            if j >= n {
                return Err(Error::CoordinateOutOfRange {
                    coordinate: j,
                    points: n,
                });
            }
        }
        let mut word = self.word.clone();
        word.swap(j1, j2);
        Ok(Element { word })
    }

    /// In-place coordinate switch; caller guarantees the range.
    pub(crate) fn swap_in_place(&mut self, j1: usize, j2: usize) {
        self.word.swap(j1, j2);
    }
}

impl fmt::Display for Element {
    fmt_one_based!();
}

macro_rules! fmt_one_based {
    () => {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "[")?;
            for (i, c) in self.word.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", c + 1)?;
            }
            write!(f, "]")
        }
    };
}
use fmt_one_based;

/// Dense-table index of an element under the lexicographic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rank(pub u64);

impl Rank {
    /// The index as a table offset.
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Iterator over a multislice in lexicographic order.
pub struct ElementIter {
    next: Option<Vec<u8>>,
}

impl Iterator for ElementIter {
    type Item = Element;

    fn next(&mut self) -> Option<Element> {
        let current = self.next.take()?;
        let mut successor = current.clone();
        if next_multiset_permutation(&mut successor) {
            self.next = Some(successor);
        }
        Some(Element { word: current })
    }
}

/// Advances a word to its lexicographic successor among rearrangements of
/// itself. Returns false from the last permutation.
fn next_multiset_permutation(word: &mut [u8]) -> bool {
    if word.len() < 2 {
        return false;
    }
    let mut pivot = word.len() - 1;
    while pivot > 0 && word[pivot - 1] >= word[pivot] {
        pivot -= 1;
    }
    if pivot == 0 {
        return false;
    }
    let pivot = pivot - 1;
    let mut successor = word.len() - 1;
    while word[successor] <= word[pivot] {
        successor -= 1;
    }
    word.swap(pivot, successor);
    word[pivot + 1..].reverse();
    true
}

/// `C(n, k)` with checked 128-bit arithmetic.
fn binomial_u128(n: u64, k: u64) -> Result<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 1..=k {
        // acc * (n-k+j) is divisible by j: acc holds C(n-k+j-1, j-1)
        acc = acc
            .checked_mul((n - k + j) as u128)
            .ok_or(Error::DomainSizeOverflow)?
            / j as u128;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(kappa: &[u32]) -> MultisliceSpec {
        MultisliceSpec::new(kappa.to_vec()).unwrap()
    }

    #[test]
    fn rejects_degenerate_weights() {
        assert!(matches!(
            MultisliceSpec::new(vec![3]),
            Err(Error::InvalidWeights(_))
        ));
        assert!(matches!(
            MultisliceSpec::new(vec![2, 0]),
            Err(Error::InvalidWeights(_))
        ));
    }

    #[test]
    fn domain_size_small_cases() {
        assert_eq!(spec(&[1, 1]).domain_size().unwrap(), 2);
        assert_eq!(spec(&[2, 2]).domain_size().unwrap(), 6);
        assert_eq!(spec(&[2, 2, 2]).domain_size().unwrap(), 90);
        assert_eq!(spec(&[2, 1]).domain_size().unwrap(), 3);
    }

    #[test]
    fn domain_size_overflow_is_explicit() {
        let wide = spec(&[120, 120]);
        assert_eq!(wide.domain_size(), Err(Error::DomainSizeOverflow));
    }

    #[test]
    fn dense_cap_is_enforced() {
        let s = spec(&[10, 10]); // C(20,10) = 184756
        assert!(s.dense_len().is_ok());
        let capped = s.with_dense_cap(1000);
        assert!(matches!(
            capped.dense_len(),
            Err(Error::DenseBudgetExceeded { size: 184756, cap: 1000 })
        ));
    }

    #[test]
    fn balance_predicate() {
        assert!(spec(&[2, 2, 2]).is_balanced(1.0 / 3.0));
        assert!(!spec(&[1, 5]).is_balanced(0.3));
    }

    #[test]
    fn unrank_first_and_last() {
        let s = spec(&[2, 1]);
        assert_eq!(s.unrank(Rank(0)).unwrap().to_one_based(), vec![1, 1, 2]);
        assert_eq!(s.unrank(Rank(2)).unwrap().to_one_based(), vec![2, 1, 1]);
        assert!(matches!(
            s.unrank(Rank(3)),
            Err(Error::RankOutOfRange { rank: 3, size: 3 })
        ));
    }

    #[test]
    fn rank_of_lexicographic_maximum() {
        let s = spec(&[2, 2]);
        let e = Element::from_one_based(&[2, 2, 1, 1], &s).unwrap();
        assert_eq!(s.rank(&e).unwrap(), Rank(5));
    }

    #[test]
    fn rank_rejects_foreign_words() {
        let s = spec(&[2, 2]);
        let e = Element::from_word(vec![0, 0, 0, 1]);
        assert_eq!(s.rank(&e), Err(Error::HistogramMismatch));
    }

    #[test]
    fn enumerate_small_domains() {
        let s = spec(&[1, 1]);
        let words: Vec<Vec<u32>> = s.enumerate().map(|e| e.to_one_based()).collect();
        assert_eq!(words, vec![vec![1, 2], vec![2, 1]]);

        let s = spec(&[2, 1]);
        let words: Vec<Vec<u32>> = s.enumerate().map(|e| e.to_one_based()).collect();
        assert_eq!(words, vec![vec![1, 1, 2], vec![1, 2, 1], vec![2, 1, 1]]);

        assert_eq!(spec(&[2, 2, 2]).enumerate().count(), 90);
    }

    #[test]
    fn transposition_examples() {
        let s = spec(&[2, 1]);
        let e = Element::from_one_based(&[1, 1, 2], &s).unwrap();
        assert_eq!(e.transposed(0, 2).unwrap().to_one_based(), vec![2, 1, 1]);
        // equal colours leave the word unchanged
        assert_eq!(e.transposed(0, 1).unwrap(), e);
        // involution
        let swapped = e.transposed(0, 2).unwrap();
        assert_eq!(swapped.transposed(0, 2).unwrap(), e);
        assert!(matches!(
            e.transposed(0, 3),
            Err(Error::CoordinateOutOfRange { .. })
        ));
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let s = spec(&[2, 2]);
        let a = s.sample(&mut ChaCha8Rng::seed_from_u64(17));
        let b = s.sample(&mut ChaCha8Rng::seed_from_u64(17));
        assert_eq!(a, b);
        s.check_element(&a).unwrap();
    }

    #[test]
    fn sampling_frequencies_are_uniform() {
        // 6e4 draws over 6 elements; each frequency within 3σ of 1/6 and the
        // chi-square statistic at a comfortable level for 5 degrees of freedom.
        let s = spec(&[2, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 60_000usize;
        let mut counts = [0u64; 6];
        for _ in 0..draws {
            let e = s.sample(&mut rng);
            counts[s.rank(&e).unwrap().index()] += 1;
        }
        let p = 1.0 / 6.0;
        let sigma = (p * (1.0 - p) / draws as f64).sqrt();
        let expected = draws as f64 * p;
        let mut chi2 = 0.0;
        for &c in &counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - p).abs() <= 3.0 * sigma, "frequency {freq} too far from {p}");
            chi2 += (c as f64 - expected).powi(2) / expected;
        }
        assert!(chi2 < 25.0, "chi-square {chi2} too large");
    }

    #[test]
    fn serde_round_trip() {
        let s = spec(&[2, 2, 2]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"kappa":[2,2,2]}"#);
        let back: MultisliceSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<MultisliceSpec>(r#"{"kappa":[3]}"#).is_err());
    }
}
