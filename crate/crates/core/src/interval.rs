//! Sorted unions of disjoint intervals.
//!
//! Safe regions are unions of closed intervals; exclusion sets are sublevel
//! sets of a continuous bound and carry open endpoints where the bound crosses
//! its level.

use serde::{Deserialize, Serialize};

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    #[serde(default, skip_serializing_if = "is_false")]
    pub lo_open: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub hi_open: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_open: false,
            hi_open: false,
        }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_open: true,
            hi_open: true,
        }
    }

    pub fn point(x: f64) -> Self {
        Self::closed(x, x)
    }

    pub fn length(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && (self.lo_open || self.hi_open))
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi && !self.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_open {
            x > self.lo
        } else {
            x >= self.lo
        };
        let below = if self.hi_open {
            x < self.hi
        } else {
            x <= self.hi
        };
        above && below
    }

    /// Intersection with another interval; may be empty.
    pub fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_open) = if self.lo > other.lo {
            (self.lo, self.lo_open)
        } else if other.lo > self.lo {
            (other.lo, other.lo_open)
        } else {
            (self.lo, self.lo_open || other.lo_open)
        };
        let (hi, hi_open) = if self.hi < other.hi {
            (self.hi, self.hi_open)
        } else if other.hi < self.hi {
            (other.hi, other.hi_open)
        } else {
            (self.hi, self.hi_open || other.hi_open)
        };
        Interval {
            lo,
            hi,
            lo_open,
            hi_open,
        }
    }
}

/// Sorted, pairwise disjoint intervals with per-interval provenance
/// (indices of the initial safe points each interval grew from).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IntervalUnion {
    intervals: Vec<Interval>,
    #[serde(default)]
    provenance: Vec<Vec<usize>>,
}

impl IntervalUnion {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_intervals(intervals: impl IntoIterator<Item = Interval>) -> Self {
        let mut u = Self::new();
        for iv in intervals {
            u.push(iv, Vec::new());
        }
        u.normalized()
    }

    /// Append without normalizing.
    pub fn push(&mut self, interval: Interval, sources: Vec<usize>) {
        self.intervals.push(interval);
        self.provenance.push(sources);
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn provenance(&self) -> &[Vec<usize>] {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    /// Sort, drop empty pieces and merge overlapping or touching intervals.
    /// Idempotent.
    pub fn normalized(&self) -> IntervalUnion {
        let mut items: Vec<(Interval, Vec<usize>)> = self
            .intervals
            .iter()
            .copied()
            .zip(
                self.provenance
                    .iter()
                    .cloned()
                    .chain(std::iter::repeat(Vec::new())),
            )
            .filter(|(iv, _)| !iv.is_empty())
            .collect();
        items.sort_by(|(p, _), (q, _)| p.lo.total_cmp(&q.lo).then(p.lo_open.cmp(&q.lo_open)));

        let mut out = IntervalUnion::new();
        for (iv, src) in items {
            if let Some(cur) = out.intervals.last_mut() {
                let joins = iv.lo < cur.hi || (iv.lo == cur.hi && !(cur.hi_open && iv.lo_open));
                if joins {
                    if iv.lo == cur.lo {
                        cur.lo_open = cur.lo_open && iv.lo_open;
                    }
                    if iv.hi > cur.hi {
                        cur.hi = iv.hi;
                        cur.hi_open = iv.hi_open;
                    } else if iv.hi == cur.hi {
                        cur.hi_open = cur.hi_open && iv.hi_open;
                    }
                    let merged = out.provenance.last_mut().expect("parallel vectors");
                    merged.extend(src);
                    merged.sort_unstable();
                    merged.dedup();
                    continue;
                }
            }
            let mut src = src;
            src.sort_unstable();
            src.dedup();
            out.push(iv, src);
        }
        out
    }

    /// Pieces of this union inside `other`'s interval.
    pub fn intersect_interval(&self, other: &Interval) -> IntervalUnion {
        IntervalUnion::from_intervals(self.intervals.iter().map(|iv| iv.intersect(other)))
    }

    /// `true` if every interval lies within some interval of `outer`.
    pub fn is_subset_of(&self, outer: &IntervalUnion) -> bool {
        self.intervals.iter().all(|iv| {
            outer.intervals.iter().any(|o| {
                let lo_ok = iv.lo > o.lo || (iv.lo == o.lo && (!o.lo_open || iv.lo_open));
                let hi_ok = iv.hi < o.hi || (iv.hi == o.hi && (!o.hi_open || iv.hi_open));
                lo_ok && hi_ok
            })
        })
    }
}

/// Free-function form of [`IntervalUnion::normalized`].
pub fn normalize(union: &IntervalUnion) -> IntervalUnion {
    union.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn closed_union(pairs: &[(f64, f64)]) -> IntervalUnion {
        IntervalUnion::from_intervals(pairs.iter().map(|&(a, b)| Interval::closed(a, b)))
    }

    fn bounds(u: &IntervalUnion) -> Vec<(f64, f64)> {
        u.intervals().iter().map(|iv| (iv.lo, iv.hi)).collect()
    }

    #[test]
    fn overlapping_merge() {
        assert_eq!(
            bounds(&closed_union(&[(0.0, 2.0), (1.0, 3.0)])),
            vec![(0.0, 3.0)]
        );
    }

    #[test]
    fn disjoint_unchanged() {
        assert_eq!(
            bounds(&closed_union(&[(2.0, 3.0), (0.0, 1.0)])),
            vec![(0.0, 1.0), (2.0, 3.0)]
        );
    }

    #[test]
    fn touching_closed_merge() {
        assert_eq!(
            bounds(&closed_union(&[(0.0, 1.0), (1.0, 2.0)])),
            vec![(0.0, 2.0)]
        );
    }

    #[test]
    fn touching_open_ends_stay_apart() {
        let u = IntervalUnion::from_intervals([Interval::open(0.0, 1.0), Interval::open(1.0, 2.0)]);
        assert_eq!(u.len(), 2);
        assert!(!u.contains(1.0));
        let half = IntervalUnion::from_intervals([
            Interval::open(0.0, 1.0),
            Interval {
                lo: 1.0,
                hi: 2.0,
                lo_open: false,
                hi_open: true,
            },
        ]);
        assert_eq!(half.len(), 1);
        assert!(half.contains(1.0));
    }

    #[test]
    fn provenance_merges() {
        let mut u = IntervalUnion::new();
        u.push(Interval::closed(0.0, 2.0), vec![1]);
        u.push(Interval::closed(5.0, 6.0), vec![2]);
        u.push(Interval::closed(1.0, 3.0), vec![0]);
        let n = u.normalized();
        assert_eq!(n.provenance(), &[vec![0, 1], vec![2]]);
    }

    #[test]
    fn empty_pieces_dropped() {
        let u =
            IntervalUnion::from_intervals([Interval::open(1.0, 1.0), Interval::closed(2.0, 2.0)]);
        assert_eq!(bounds(&u), vec![(2.0, 2.0)]);
    }

    #[test]
    fn intersect_keeps_openness() {
        let iv = Interval::open(-1.0, 1.0).intersect(&Interval::closed(-2.0, 0.5));
        assert_eq!(
            iv,
            Interval {
                lo: -1.0,
                hi: 0.5,
                lo_open: true,
                hi_open: false
            }
        );
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent_and_preserves_membership(
            raw in prop::collection::vec((-10.0f64..10.0, 0.0f64..3.0, any::<bool>(), any::<bool>()), 0..12),
            probes in prop::collection::vec(-12.0f64..13.0, 20),
        ) {
            let mut u = IntervalUnion::new();
            for (lo, len, lo_open, hi_open) in &raw {
                u.push(Interval { lo: *lo, hi: lo + len, lo_open: *lo_open, hi_open: *hi_open }, vec![]);
            }
            let n = u.normalized();
            prop_assert_eq!(n.normalized(), n.clone());
            for w in n.intervals().windows(2) {
                prop_assert!(w[0].hi <= w[1].lo);
            }
            for x in probes {
                prop_assert_eq!(u.contains(x), n.contains(x));
            }
            for iv in u.intervals() {
                for x in [iv.lo, iv.hi] {
                    prop_assert_eq!(u.contains(x), n.contains(x));
                }
            }
        }
    }
}
