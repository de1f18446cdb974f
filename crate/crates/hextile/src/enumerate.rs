//! Exact counting and exhaustive generation of diamond tilings.
//!
//! The number of complete tilings of a hexagonal aperture with side lengths
//! `(a, b, c)` cells is the classic boxed-plane-partition product
//!
//! ```text
//!     T = prod_{i=1..a} prod_{j=1..b} prod_{g=1..c} (i+j+g-1) / (i+j+g-2)
//! ```
//!
//! evaluated exactly in big-integer arithmetic. Generation walks the tiling
//! words in lexicographic order: each step lifts the right-most liftable
//! letter by one and completes the remaining letters with the lowest
//! compatible field, which is exactly the next valid word.

pub use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

use crate::lattice::HexAperture;
use crate::tiling::{
    boundary_known, extend_heights, heights_valid, tiling_from_heights, Extend, Tiling,
    TilingError, TilingWord, WordCodec,
};

#[derive(Debug, Error, PartialEq)]
pub enum EnumerationError {
    #[error("side lengths must all be at least 1")]
    ZeroSide,
    #[error(transparent)]
    Tiling(#[from] TilingError),
}

/// Exact cardinality of the tiling space for side lengths `(a, b, c)`.
///
/// Computed from the per-value exponents of the triple product so the
/// division is a single exact big-integer quotient.
pub fn cardinality(a: u32, b: u32, c: u32) -> Result<BigUint, EnumerationError> {
    if a == 0 || b == 0 || c == 0 {
        return Err(EnumerationError::ZeroSide);
    }
    let (a, b, c) = (a as usize, b as usize, c as usize);
    // occurrences[s] = #{(i,j,g) : i+j+g = s}; built with a difference array
    // over g ranges.
    let top = a + b + c;
    let mut diff = vec![0i64; top + 2];
    for i in 1..=a {
        for j in 1..=b {
            diff[i + j + 1] += 1;
            diff[i + j + c + 1] -= 1;
        }
    }
    let mut occurrences = vec![0i64; top + 1];
    let mut running = 0;
    for s in 0..=top {
        running += diff[s];
        occurrences[s] = running;
    }
    // Factor m appears with net exponent occ(m+1) - occ(m+2).
    let mut numerator = BigUint::one();
    let mut denominator = BigUint::one();
    for m in 1..top {
        let exponent = occurrences[m + 1] - occurrences.get(m + 2).copied().unwrap_or(0);
        if exponent > 0 {
            numerator *= BigUint::from(m).pow(exponent as u32);
        } else if exponent < 0 {
            denominator *= BigUint::from(m).pow((-exponent) as u32);
        }
    }
    debug_assert!((&numerator % &denominator) == BigUint::ZERO);
    Ok(numerator / denominator)
}

/// Cardinality of a regular aperture.
pub fn regular_cardinality(ap: &HexAperture) -> BigUint {
    cardinality(ap.rings(), ap.rings(), ap.rings()).expect("rings >= 1")
}

/// The word after `word` in lexicographic order, or `None` past the maximal
/// word. The input must be a valid word.
pub fn successor(
    ap: &HexAperture,
    word: &TilingWord,
) -> Result<Option<TilingWord>, TilingError> {
    let codec = WordCodec::new(ap);
    if !codec.is_valid(word) {
        return Err(TilingError::InvalidWord);
    }
    let full = codec.word_heights(word);
    Ok(successor_of(&codec, word, &full))
}

/// Successor on pre-validated state: `full` are the heights of `word`.
///
/// Scanning lift positions from the last letter backwards keeps the longest
/// possible prefix, so the first position whose lifted prefix still admits a
/// completion gives exactly the next word; completing that suffix with the
/// lowest compatible field makes it the lexicographically smallest one.
fn successor_of(codec: &WordCodec, word: &TilingWord, full: &[i64]) -> Option<TilingWord> {
    let ap = codec.aperture();
    let l = ap.internal_count();
    let internal = ap.internal_vertices();
    let h = |rank: usize| full[internal[rank]];
    // Pin order: boundary vertices are always fixed (0), internal vertex of
    // raster rank r is fixed from candidate position r + 1 on.
    let mut fixed_from = vec![0usize; ap.vertices().len()];
    for (rank, &v) in internal.iter().enumerate() {
        fixed_from[v] = rank + 1;
    }

    'candidates: for xi in (0..l).rev() {
        // Letters are bounded by the vertex depth.
        if word.letters()[xi] >= ap.vertex_depth(xi) {
            continue;
        }
        // Dip test: a vertex can only lift if it sits strictly below every
        // neighbor whose height is already pinned. (Lifting by 3 flips its
        // incident edge deltas, which stays legal only from a local minimum
        // of the pinned surface.)
        let v = internal[xi];
        for &eid in ap.edges_at(v) {
            let w = ap.edges()[eid].other_end(v);
            if fixed_from[w] <= xi && full[w] <= full[v] {
                continue 'candidates;
            }
        }
        // Fix the prefix, lift letter xi by one (heights move in steps of 3)
        // and complete the rest with the lowest compatible field.
        let mut known = boundary_known(ap);
        for rank in 0..xi {
            known[internal[rank]] = Some(h(rank));
        }
        known[internal[xi]] = Some(h(xi) + 3);
        if let Some(next_full) = extend_heights(ap, &known, Extend::Lowest) {
            debug_assert!(heights_valid(ap, &next_full));
            return Some(codec.word_from_full(&next_full));
        }
    }
    None
}

/// Resumable cursor over all tilings of an aperture, in word order.
///
/// Iteration yields `(t, word, tiling)` with `t` counting from 1; the first
/// pair is the minimal tiling and the last is the maximal one. The `(word,
/// t)` pair is exactly what the checkpoint file format stores.
pub struct Enumeration<'a> {
    codec: WordCodec<'a>,
    next_word: Option<TilingWord>,
    index: u64,
}

impl<'a> Enumeration<'a> {
    pub fn new(ap: &'a HexAperture) -> Self {
        let codec = WordCodec::new(ap);
        let zero = TilingWord::zeros(ap.internal_count());
        Self {
            codec,
            next_word: Some(zero),
            index: 0,
        }
    }

    /// Resumes so that the next item returned is `(t, word, ...)`.
    pub fn resume(ap: &'a HexAperture, word: TilingWord, t: u64) -> Result<Self, TilingError> {
        let codec = WordCodec::new(ap);
        if !codec.is_valid(&word) {
            return Err(TilingError::InvalidWord);
        }
        Ok(Self {
            codec,
            next_word: Some(word),
            index: t.saturating_sub(1),
        })
    }

    /// 1-based index of the item that `next` will return.
    pub fn next_index(&self) -> u64 {
        self.index + 1
    }

    pub fn peek_word(&self) -> Option<&TilingWord> {
        self.next_word.as_ref()
    }
}

impl<'a> Iterator for Enumeration<'a> {
    type Item = (u64, TilingWord, Tiling);

    fn next(&mut self) -> Option<Self::Item> {
        let word = self.next_word.take()?;
        self.index += 1;
        let full = self.codec.word_heights(&word);
        let tiling = tiling_from_heights(self.codec.aperture(), &full)
            .expect("enumeration only visits valid words");
        self.next_word = successor_of(&self.codec, &word, &full);
        Some((self.index, word, tiling))
    }
}

/// Convenience wrapper collecting the full enumeration.
pub fn enumerate_all(ap: &HexAperture) -> Vec<(TilingWord, Tiling)> {
    Enumeration::new(ap).map(|(_, w, t)| (w, t)).collect()
}

/// Independent oracle: all perfect matchings of the triangle adjacency graph
/// by straight backtracking. Exponential; intended for cross-checking the
/// word enumeration on small apertures (three rings or fewer).
pub fn brute_force_enumerate(ap: &HexAperture) -> Vec<Tiling> {
    let n = ap.triangle_count();
    let mut matched = vec![false; n];
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(n / 2);
    let mut out = Vec::new();

    fn recurse(
        ap: &HexAperture,
        from: usize,
        matched: &mut [bool],
        pairs: &mut Vec<(usize, usize)>,
        out: &mut Vec<Tiling>,
    ) {
        let Some(t) = (from..matched.len()).find(|&t| !matched[t]) else {
            out.push(Tiling::from_pairs(ap, pairs).expect("backtracker built a perfect matching"));
            return;
        };
        matched[t] = true;
        for nb in ap.triangle(t).neighbors.iter().flatten() {
            if !matched[*nb] {
                matched[*nb] = true;
                pairs.push((t, *nb));
                recurse(ap, t + 1, matched, pairs, out);
                pairs.pop();
                matched[*nb] = false;
            }
        }
        matched[t] = false;
    }

    recurse(ap, 0, &mut matched, &mut pairs, &mut out);
    out
}
