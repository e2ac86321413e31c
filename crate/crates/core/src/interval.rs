//! Closed-open time intervals in seconds and exact measure arithmetic over
//! their unions.

use serde::{Deserialize, Serialize};

/// A time span `[start, end)` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    /// Builds an interval, returning `None` when `start > end` or either bound
    /// is not finite.
    pub fn new(start: f64, end: f64) -> Option<Self> {
        if start.is_finite() && end.is_finite() && start <= end {
            Some(Self { start, end })
        } else {
            None
        }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t < self.end
    }

    /// Intersection with `other`; `None` when they share no positive-length span.
    pub fn clip(&self, other: &Interval) -> Option<Interval> {
        let start = self.start.max(other.start);
        let end = self.end.min(other.end);
        (end > start).then_some(Interval { start, end })
    }

    pub fn translate(&self, dt: f64) -> Interval {
        Interval {
            start: self.start + dt,
            end: self.end + dt,
        }
    }
}

/// Sorted, pairwise-disjoint union of the given intervals. Touching intervals
/// are coalesced and empty ones dropped.
pub fn union(intervals: &[Interval]) -> Vec<Interval> {
    let mut sorted: Vec<Interval> = intervals.iter().copied().filter(|i| !i.is_empty()).collect();
    sorted.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.end.total_cmp(&b.end)));

    let mut out: Vec<Interval> = Vec::with_capacity(sorted.len());
    for iv in sorted {
        match out.last_mut() {
            Some(last) if iv.start <= last.end => last.end = last.end.max(iv.end),
            _ => out.push(iv),
        }
    }
    out
}

/// Total length covered by the intervals, overlaps counted once.
pub fn union_measure(intervals: &[Interval]) -> f64 {
    union(intervals).iter().map(Interval::duration).sum()
}

/// Length of `union(a) ∩ union(b)`, computed with a two-pointer sweep.
pub fn intersection_measure(a: &[Interval], b: &[Interval]) -> f64 {
    let ua = union(a);
    let ub = union(b);
    let (mut i, mut j) = (0, 0);
    let mut total = 0.0;
    while i < ua.len() && j < ub.len() {
        let start = ua[i].start.max(ub[j].start);
        let end = ua[i].end.min(ub[j].end);
        if end > start {
            total += end - start;
        }
        if ua[i].end < ub[j].end {
            i += 1;
        } else {
            j += 1;
        }
    }
    total
}
