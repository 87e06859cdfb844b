use serde::{Deserialize, Serialize};

/// Closed interval `[lo, hi]` on the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains_point(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `other ⊆ self`, allowing `tol` of slack at both ends.
    pub fn contains(&self, other: &Interval, tol: f64) -> bool {
        other.lo >= self.lo - tol && other.hi <= self.hi + tol
    }

    /// Closed intersection test: touching endpoints count.
    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Length of the overlap of the two intervals (zero when disjoint or touching).
    pub fn overlap_len(&self, other: &Interval) -> f64 {
        (self.hi.min(other.hi) - self.lo.max(other.lo)).max(0.0)
    }
}

/// Lebesgue measure of a finite union of intervals, by sorting left
/// endpoints and merging.
pub fn union_measure(intervals: &mut [Interval]) -> f64 {
    if intervals.is_empty() {
        return 0.0;
    }
    intervals.sort_unstable_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut total = 0.0;
    let mut cur = intervals[0];
    for iv in &intervals[1..] {
        if iv.lo <= cur.hi {
            cur.hi = cur.hi.max(iv.hi);
        } else {
            total += cur.len();
            cur = *iv;
        }
    }
    total + cur.len()
}

/// Merges a list of intervals into a sorted, disjoint list. Touching
/// intervals are joined.
pub fn merge_intervals(mut intervals: Vec<Interval>) -> Vec<Interval> {
    intervals.sort_unstable_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
    for iv in intervals {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}
