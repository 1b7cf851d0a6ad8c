//! Closed rational intervals and finite unions of them.

use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::rational::{fmt_rational, max_r, min_r, one, zero, Rational};

/// A closed interval `[lo, hi]` inside `[0, 1]`. Degenerate (`lo == hi`)
/// intervals represent single points.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo > hi {
            return Err(Error::Domain(format!(
                "interval bounds out of order: {} > {}",
                fmt_rational(&lo),
                fmt_rational(&hi)
            )));
        }
        if lo < zero() || hi > one() {
            return Err(Error::Domain(format!(
                "interval [{}, {}] not inside [0,1]",
                fmt_rational(&lo),
                fmt_rational(&hi)
            )));
        }
        Ok(Interval { lo, hi })
    }

    /// Skips the `[0,1]` check; used for range slabs and internal bookkeeping.
    pub(crate) fn raw(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn unit() -> Self {
        Interval::raw(zero(), one())
    }

    pub fn point(x: Rational) -> Self {
        Interval::raw(x.clone(), x)
    }

    pub fn len(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interior(&self, x: &Rational) -> bool {
        &self.lo < x && x < &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / Rational::from_integer(2.into())
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = max_r(&self.lo, &other.lo).clone();
        let hi = min_r(&self.hi, &other.hi).clone();
        (lo <= hi).then(|| Interval::raw(lo, hi))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]",
            fmt_rational(&self.lo),
            fmt_rational(&self.hi)
        )
    }
}

/// Finite union of closed intervals, kept sorted with overlapping or touching
/// parts merged. The measure is exact.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { parts: Vec::new() }
    }

    pub fn unit() -> Self {
        IntervalSet::from_parts(vec![Interval::unit()])
    }

    pub fn single(iv: Interval) -> Self {
        IntervalSet { parts: vec![iv] }
    }

    pub fn points<I: IntoIterator<Item = Rational>>(xs: I) -> Self {
        IntervalSet::from_parts(xs.into_iter().map(Interval::point).collect())
    }

    /// Normalizes an arbitrary collection of intervals.
    pub fn from_parts(mut parts: Vec<Interval>) -> Self {
        parts.sort();
        let mut merged: Vec<Interval> = Vec::with_capacity(parts.len());
        for iv in parts {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => merged.push(iv),
            }
        }
        IntervalSet { parts: merged }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn measure(&self) -> Rational {
        self.parts
            .iter()
            .fold(Rational::zero(), |acc, p| acc + p.len())
    }

    pub fn contains(&self, x: &Rational) -> bool {
        // parts are sorted; binary search on lo
        let idx = self.parts.partition_point(|p| &p.lo <= x);
        idx > 0 && self.parts[idx - 1].contains(x)
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut all = self.parts.clone();
        all.extend(other.parts.iter().cloned());
        IntervalSet::from_parts(all)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.parts.len() && j < other.parts.len() {
            let a = &self.parts[i];
            let b = &other.parts[j];
            if let Some(c) = a.intersect(b) {
                out.push(c);
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet::from_parts(out)
    }

    /// Positive-length parts only.
    pub fn nondegenerate(&self) -> impl Iterator<Item = &Interval> {
        self.parts.iter().filter(|p| !p.is_degenerate())
    }

    /// Whether some part meets the open interval `(0, 1)`.
    pub fn meets_open_unit(&self) -> bool {
        self.parts.iter().any(|p| p.hi > zero() && p.lo < one())
    }

    /// True when both sets agree up to finitely many points.
    pub fn eq_up_to_points(&self, other: &IntervalSet) -> bool {
        let a: Vec<_> = self.nondegenerate().collect();
        let b: Vec<_> = other.nondegenerate().collect();
        a == b
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, p) in self.parts.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}
