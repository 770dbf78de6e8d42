//! Decidable boolean algebra of ultimately periodic index sets.
//!
//! Every vertex set, edge set and range in this crate is an [`UpSet`]: a
//! subset of a 1-based index universe given by explicit membership bits below
//! a threshold and a repeating bit pattern from the threshold on. The
//! representation is kept canonical (minimal threshold, minimal period), so
//! structural equality coincides with set equality.

use std::fmt;

use thiserror::Error;

/// Index universe an [`UpSet`] lives in. Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Universe {
    /// Indices `1..=n`.
    Finite(u64),
    /// All of `1, 2, 3, ...`.
    Infinite,
}

impl Universe {
    /// Whether `i` is an index of this universe.
    pub fn contains(&self, i: u64) -> bool {
        match self {
            Universe::Finite(n) => i >= 1 && i <= *n,
            Universe::Infinite => i >= 1,
        }
    }
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Universe::Finite(n) => write!(f, "finite {n}"),
            Universe::Infinite => write!(f, "infinite"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SetError {
    #[error("universe mismatch: {0} vs {1}")]
    UniverseMismatch(Universe, Universe),
}

/// Cardinality classification of an [`UpSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cardinality {
    Finite(u64),
    Infinite,
}

/// Ultimately periodic subset of a 1-based index universe.
///
/// Indices `1..=prefix.len()` are governed by `prefix`; an index
/// `i > prefix.len()` is a member iff `pattern[(i - prefix.len() - 1) % p]`
/// is set. Over a finite universe the pattern is absent and the prefix spans
/// the whole universe.
///
/// Values are canonical by construction: the pattern has minimal period and
/// the prefix is as short as possible, so derived equality and ordering are
/// set equality and a fixed total order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UpSet {
    universe: Universe,
    prefix: Vec<bool>,
    /// Empty exactly when the universe is finite.
    pattern: Vec<bool>,
}

impl UpSet {
    /// Builds a set from raw parts and canonicalizes.
    ///
    /// Over an infinite universe an empty `pattern` is read as "all clear
    /// from the threshold on".
    pub fn from_parts(universe: Universe, prefix: Vec<bool>, pattern: Vec<bool>) -> Self {
        let mut s = match universe {
            Universe::Finite(n) => {
                let mut prefix = prefix;
                // Expand any supplied pattern into explicit bits, then clamp.
                if !pattern.is_empty() {
                    let base = prefix.len();
                    while (prefix.len() as u64) < n {
                        let offset = prefix.len() - base;
                        prefix.push(pattern[offset % pattern.len()]);
                    }
                }
                prefix.resize(n as usize, false);
                UpSet {
                    universe,
                    prefix,
                    pattern: Vec::new(),
                }
            }
            Universe::Infinite => {
                let pattern = if pattern.is_empty() { vec![false] } else { pattern };
                UpSet {
                    universe,
                    prefix,
                    pattern,
                }
            }
        };
        s.canonicalize();
        s
    }

    /// The empty set.
    pub fn empty(universe: Universe) -> Self {
        Self::from_parts(universe, Vec::new(), vec![false])
    }

    /// The whole universe.
    pub fn all(universe: Universe) -> Self {
        match universe {
            Universe::Finite(n) => Self::from_parts(universe, vec![true; n as usize], Vec::new()),
            Universe::Infinite => Self::from_parts(universe, Vec::new(), vec![true]),
        }
    }

    /// Finite set from explicit member indices. Indices outside the universe
    /// are ignored.
    pub fn finite(universe: Universe, members: &[u64]) -> Self {
        let top = members.iter().copied().max().unwrap_or(0);
        let mut prefix = vec![false; top as usize];
        for &i in members {
            if i >= 1 && universe.contains(i) {
                prefix[(i - 1) as usize] = true;
            }
        }
        Self::from_parts(universe, prefix, vec![false])
    }

    /// Singleton `{i}`.
    pub fn singleton(universe: Universe, i: u64) -> Self {
        Self::finite(universe, &[i])
    }

    /// The set described by an `ap(start, period, bits)` literal: explicit
    /// emptiness below `start`, then `bits` repeating with the given period.
    pub fn arithmetic(universe: Universe, start: u64, bits: &[bool]) -> Self {
        assert!(start >= 1, "start index is 1-based");
        assert!(!bits.is_empty(), "pattern must be nonempty");
        match universe {
            Universe::Infinite => {
                Self::from_parts(universe, vec![false; (start - 1) as usize], bits.to_vec())
            }
            Universe::Finite(n) => {
                let mut prefix = vec![false; n as usize];
                for i in start..=n {
                    prefix[(i - 1) as usize] = bits[((i - start) as usize) % bits.len()];
                }
                Self::from_parts(universe, prefix, Vec::new())
            }
        }
    }

    /// The cofinite set `{i : i >= start}` (truncated over finite universes).
    pub fn from_index(universe: Universe, start: u64) -> Self {
        Self::arithmetic(universe, start.max(1), &[true])
    }

    /// Builds a set by sampling `f` on `1..threshold+period`, trusting that
    /// `f` is `period`-periodic from `threshold` on.
    pub fn from_fn(universe: Universe, threshold: u64, period: u64, f: impl Fn(u64) -> bool) -> Self {
        assert!(threshold >= 1 && period >= 1);
        match universe {
            Universe::Finite(n) => {
                let prefix = (1..=n).map(&f).collect();
                Self::from_parts(universe, prefix, Vec::new())
            }
            Universe::Infinite => {
                let prefix = (1..threshold).map(&f).collect();
                let pattern = (threshold..threshold + period).map(&f).collect();
                Self::from_parts(universe, prefix, pattern)
            }
        }
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    /// First index governed by the pattern (threshold `t`); equals
    /// `prefix.len() + 1`.
    pub fn threshold(&self) -> u64 {
        self.prefix.len() as u64 + 1
    }

    /// Pattern period (1 for finite universes by convention).
    pub fn period(&self) -> u64 {
        self.pattern.len().max(1) as u64
    }

    pub(crate) fn prefix_bits(&self) -> &[bool] {
        &self.prefix
    }

    pub(crate) fn pattern_bits(&self) -> &[bool] {
        &self.pattern
    }

    /// Decides membership of the 1-based index `i`.
    pub fn contains(&self, i: u64) -> bool {
        if i == 0 || !self.universe.contains(i) {
            return false;
        }
        let k = (i - 1) as usize;
        if k < self.prefix.len() {
            self.prefix[k]
        } else if self.pattern.is_empty() {
            false
        } else {
            self.pattern[(k - self.prefix.len()) % self.pattern.len()]
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.prefix.iter().any(|&b| b) && !self.pattern.iter().any(|&b| b)
    }

    pub fn cardinality(&self) -> Cardinality {
        if self.pattern.iter().any(|&b| b) {
            Cardinality::Infinite
        } else {
            Cardinality::Finite(self.prefix.iter().filter(|&&b| b).count() as u64)
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.cardinality(), Cardinality::Finite(_))
    }

    /// Smallest member, if any.
    pub fn min_member(&self) -> Option<u64> {
        self.iter().next()
    }

    /// Iterates members in increasing order (unbounded for infinite sets).
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        let bound = match (self.universe, self.pattern.iter().any(|&b| b)) {
            (Universe::Finite(n), _) => Some(n),
            (Universe::Infinite, false) => Some(self.prefix.len() as u64),
            (Universe::Infinite, true) => None,
        };
        (1u64..)
            .take_while(move |&i| bound.map_or(true, |n| i <= n))
            .filter(move |&i| self.contains(i))
    }

    /// Members `<= bound`, collected.
    pub fn members_upto(&self, bound: u64) -> Vec<u64> {
        (1..=bound).filter(|&i| self.contains(i)).collect()
    }

    fn check_universe(&self, other: &UpSet) -> Result<(), SetError> {
        if self.universe != other.universe {
            return Err(SetError::UniverseMismatch(self.universe, other.universe));
        }
        Ok(())
    }

    fn zip(&self, other: &UpSet, f: impl Fn(bool, bool) -> bool) -> Result<UpSet, SetError> {
        self.check_universe(other)?;
        match self.universe {
            Universe::Finite(n) => Ok(UpSet::from_fn(self.universe, n.max(1), 1, |i| {
                f(self.contains(i), other.contains(i))
            })),
            Universe::Infinite => {
                let threshold = self.threshold().max(other.threshold());
                let period = lcm(self.period(), other.period());
                Ok(UpSet::from_fn(self.universe, threshold, period, |i| {
                    f(self.contains(i), other.contains(i))
                }))
            }
        }
    }

    pub fn union(&self, other: &UpSet) -> Result<UpSet, SetError> {
        self.zip(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &UpSet) -> Result<UpSet, SetError> {
        self.zip(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &UpSet) -> Result<UpSet, SetError> {
        self.zip(other, |a, b| a && !b)
    }

    /// Complement within the universe.
    pub fn complement(&self) -> UpSet {
        match self.universe {
            Universe::Finite(n) => UpSet::from_fn(self.universe, n.max(1), 1, |i| !self.contains(i)),
            Universe::Infinite => {
                UpSet::from_fn(self.universe, self.threshold(), self.period(), |i| {
                    !self.contains(i)
                })
            }
        }
    }

    /// `self ⊆ other` (same universe required).
    pub fn is_subset(&self, other: &UpSet) -> Result<bool, SetError> {
        Ok(self.difference(other)?.is_empty())
    }

    /// `self ⊊ other`.
    pub fn is_proper_subset(&self, other: &UpSet) -> Result<bool, SetError> {
        Ok(self != other && self.is_subset(other)?)
    }

    /// Image under `i ↦ a·i + b` restricted to the target universe `target`.
    pub fn affine_image(&self, a: u64, b: i64, target: Universe) -> UpSet {
        assert!(a >= 1);
        let in_image = |j: u64| -> bool {
            let d = j as i128 - b as i128;
            if d <= 0 || d % a as i128 != 0 {
                return false;
            }
            let i = d / a as i128;
            i >= 1 && i <= u64::MAX as i128 && self.contains(i as u64)
        };
        match target {
            Universe::Finite(n) => UpSet::from_fn(target, n.max(1), 1, in_image),
            Universe::Infinite => {
                // From a·t + b on, membership is (a·p)-periodic.
                let t = (self.threshold() as i128 * a as i128 + b as i128).max(1) as u64;
                UpSet::from_fn(target, t, a * self.period(), in_image)
            }
        }
    }

    /// Preimage `{i : a·i + b ∈ self}` as a subset of `source`.
    pub fn affine_preimage(&self, a: u64, b: i64, source: Universe) -> UpSet {
        assert!(a >= 1);
        let hits = |i: u64| -> bool {
            let j = i as i128 * a as i128 + b as i128;
            j >= 1 && j <= u64::MAX as i128 && self.contains(j as u64)
        };
        match source {
            Universe::Finite(n) => UpSet::from_fn(source, n.max(1), 1, hits),
            Universe::Infinite => {
                // Once a·i + b clears the threshold of self, membership is
                // period(self)-periodic in i.
                let t = ((self.threshold() as i128 - b as i128) / a as i128 + 1).max(1) as u64;
                UpSet::from_fn(source, t, self.period(), hits)
            }
        }
    }

    /// Minimal threshold and minimal period, in that order of priority: the
    /// pattern is reduced to its shortest period, then prefix bits that agree
    /// with the rotated pattern are absorbed into it.
    fn canonicalize(&mut self) {
        if self.universe == Universe::Finite(0) {
            self.prefix.clear();
            self.pattern.clear();
            return;
        }
        if let Universe::Finite(n) = self.universe {
            self.prefix.resize(n as usize, false);
            self.pattern.clear();
            return;
        }
        // Minimal period: smallest divisor d of p with a d-periodic pattern.
        let p = self.pattern.len();
        for d in 1..=p {
            if p % d != 0 {
                continue;
            }
            if (0..p).all(|k| self.pattern[k] == self.pattern[k % d]) {
                self.pattern.truncate(d);
                break;
            }
        }
        // Minimal threshold: absorb trailing prefix bits that match the
        // pattern rotated one step back.
        while let Some(&last) = self.prefix.last() {
            let p = self.pattern.len();
            if self.pattern[p - 1] != last {
                break;
            }
            self.prefix.pop();
            self.pattern.rotate_right(1);
        }
        // Rotations preserve the minimal cyclic period, so no re-check is
        // needed after absorption.
    }
}

impl fmt::Display for UpSet {
    /// Canonical literal: `fin{..}` for finite sets, `ap(t,p,bits)` for a
    /// pure tail, `fin{..}|ap(t,p,bits)` when scattered prefix bits precede
    /// the tail.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fin_part = |f: &mut fmt::Formatter<'_>, bits: &[bool]| -> fmt::Result {
            write!(f, "fin{{")?;
            let mut first = true;
            for (k, &b) in bits.iter().enumerate() {
                if b {
                    if !first {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", k + 1)?;
                    first = false;
                }
            }
            write!(f, "}}")
        };
        if !self.pattern.iter().any(|&b| b) {
            return fin_part(f, &self.prefix);
        }
        let has_prefix_bits = self.prefix.iter().any(|&b| b);
        if has_prefix_bits {
            fin_part(f, &self.prefix)?;
            write!(f, "|")?;
        }
        write!(f, "ap({},{},", self.threshold(), self.period())?;
        for &b in &self.pattern {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        write!(f, ")")
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Binary set operation selector, mirroring the CLI surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersect,
    Difference,
}

/// Applies a binary operation; see [`UpSet::union`] and friends.
pub fn ups_op(kind: SetOp, s: &UpSet, t: &UpSet) -> Result<UpSet, SetError> {
    match kind {
        SetOp::Union => s.union(t),
        SetOp::Intersect => s.intersect(t),
        SetOp::Difference => s.difference(t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn odds() -> UpSet {
        UpSet::arithmetic(Universe::Infinite, 1, &[true, false])
    }

    fn evens() -> UpSet {
        UpSet::arithmetic(Universe::Infinite, 2, &[true, false])
    }

    fn cofin3() -> UpSet {
        UpSet::from_index(Universe::Infinite, 3)
    }

    #[test]
    fn union_of_odds_and_evens_is_all() {
        let all = UpSet::all(Universe::Infinite);
        assert_eq!(odds().union(&evens()).unwrap(), all);
    }

    #[test]
    fn intersection_of_odds_and_evens_is_empty() {
        assert!(odds().intersect(&evens()).unwrap().is_empty());
    }

    #[test]
    fn cofinite_meets_finite() {
        let fin = UpSet::finite(Universe::Infinite, &[1, 2, 3]);
        let got = cofin3().intersect(&fin).unwrap();
        assert_eq!(got, UpSet::singleton(Universe::Infinite, 3));
    }

    #[test]
    fn cardinality_examples() {
        assert_eq!(
            UpSet::finite(Universe::Infinite, &[1, 2]).cardinality(),
            Cardinality::Finite(2)
        );
        assert_eq!(odds().cardinality(), Cardinality::Infinite);
        let d = cofin3().difference(&cofin3()).unwrap();
        assert_eq!(d.cardinality(), Cardinality::Finite(0));
    }

    #[test]
    fn period_minimization() {
        // pattern "10" from 1 vs "1010" from 1 denote the same set.
        let a = UpSet::arithmetic(Universe::Infinite, 1, &[true, false]);
        let b = UpSet::arithmetic(Universe::Infinite, 1, &[true, false, true, false]);
        assert_eq!(a, b);
        assert_eq!(a.period(), 2);
    }

    #[test]
    fn threshold_minimization() {
        // evens written with an explicit zero prefix canonicalizes to t=1.
        let e = UpSet::arithmetic(Universe::Infinite, 2, &[true, false]);
        assert_eq!(e.threshold(), 1);
        assert_eq!(e.to_string(), "ap(1,2,01)");
        assert_eq!(cofin3().to_string(), "ap(3,1,1)");
        assert_eq!(odds().to_string(), "ap(1,2,10)");
    }

    #[test]
    fn union_with_empty_is_identity() {
        let s = odds();
        let u = s.union(&UpSet::empty(Universe::Infinite)).unwrap();
        assert_eq!(u, s);
    }

    #[test]
    fn odds_differ_from_evens() {
        assert_ne!(odds(), evens());
    }

    #[test]
    fn universe_mismatch_is_an_error() {
        let a = UpSet::all(Universe::Infinite);
        let b = UpSet::all(Universe::Finite(3));
        assert!(matches!(a.union(&b), Err(SetError::UniverseMismatch(_, _))));
    }

    #[test]
    fn finite_universe_complement() {
        let s = UpSet::finite(Universe::Finite(4), &[1, 3]);
        let c = s.complement();
        assert_eq!(c, UpSet::finite(Universe::Finite(4), &[2, 4]));
        assert_eq!(s.to_string(), "fin{1,3}");
    }

    #[test]
    fn affine_image_of_odds() {
        // i ↦ 2i + 1 over odds {1,3,5,..} gives {3,7,11,..}.
        let img = odds().affine_image(2, 1, Universe::Infinite);
        for j in 1..200 {
            let expect = j >= 3 && (j - 3) % 4 == 0;
            assert_eq!(img.contains(j), expect, "index {j}");
        }
    }

    #[test]
    fn affine_preimage_matches_pointwise() {
        let pre = cofin3().affine_preimage(2, -1, Universe::Infinite);
        for i in 1..200 {
            assert_eq!(pre.contains(i), 2 * i - 1 >= 3, "index {i}");
        }
    }

    #[test]
    fn display_mixed_form() {
        // {1} ∪ {i >= 4 : i even}
        let s = UpSet::finite(Universe::Infinite, &[1])
            .union(&UpSet::arithmetic(Universe::Infinite, 4, &[true, false]))
            .unwrap();
        assert_eq!(s.to_string(), "fin{1}|ap(3,2,01)");
        for i in 1..50 {
            assert_eq!(s.contains(i), i == 1 || (i >= 4 && i % 2 == 0));
        }
    }
}
