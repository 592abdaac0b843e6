//! Closed sets as normalized unions of closed segments, relatively open
//! subsets of a carrier, generalized balls and complements.

use alloc::format;
use alloc::vec::Vec;

use super::model::MetricSpace;
use crate::error::{Error, Result};

/// Closed segment `[lo, hi]`; `lo == hi` is a single point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
}

impl Segment {
    pub fn new(lo: f64, hi: f64) -> Self {
        Segment { lo, hi }
    }

    pub fn point(p: f64) -> Self {
        Segment { lo: p, hi: p }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }
}

/// A closed subset of a carrier: finitely many disjoint closed segments,
/// sorted by their left end.
///
/// On discrete carriers every segment is a single carrier point.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ClosedSet {
    parts: Vec<Segment>,
}

impl ClosedSet {
    pub fn empty() -> Self {
        ClosedSet { parts: Vec::new() }
    }

    /// Normalizes `parts`: sorts them and merges segments that overlap or
    /// touch.
    pub fn new(parts: impl IntoIterator<Item = Segment>) -> Result<Self> {
        let mut parts: Vec<Segment> = parts.into_iter().collect();
        if let Some(s) = parts
            .iter()
            .find(|s| !(s.lo.is_finite() && s.hi.is_finite() && s.lo <= s.hi))
        {
            return Err(Error::InvalidSet(format!(
                "segment [{}, {}] is not a finite closed interval",
                s.lo, s.hi
            )));
        }
        parts.sort_by(|p, q| p.lo.total_cmp(&q.lo));
        let mut merged: Vec<Segment> = Vec::with_capacity(parts.len());
        for s in parts {
            match merged.last_mut() {
                Some(last) if s.lo <= last.hi => last.hi = last.hi.max(s.hi),
                _ => merged.push(s),
            }
        }
        Ok(ClosedSet { parts: merged })
    }

    pub fn from_points(points: impl IntoIterator<Item = f64>) -> Result<Self> {
        ClosedSet::new(points.into_iter().map(Segment::point))
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        ClosedSet::new([Segment::new(lo, hi)])
    }

    pub(crate) fn from_normalized(parts: Vec<Segment>) -> Self {
        debug_assert!(parts.windows(2).all(|w| w[0].hi < w[1].lo));
        ClosedSet { parts }
    }

    pub fn parts(&self) -> &[Segment] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        let idx = self.parts.partition_point(|s| s.lo <= x);
        idx > 0 && self.parts[idx - 1].hi >= x
    }

    /// Every segment lies inside some segment of `other`.
    pub fn is_subset_of(&self, other: &ClosedSet) -> bool {
        self.parts.iter().all(|s| {
            let idx = other.parts.partition_point(|o| o.lo <= s.lo);
            idx > 0 && other.parts[idx - 1].hi >= s.hi
        })
    }

    /// Checks that the set is a subset of the carrier, and on discrete
    /// carriers that it consists of carrier points.
    pub fn validate_in(&self, space: &MetricSpace) -> Result<()> {
        for s in &self.parts {
            if space.discrete_points().is_some() && !s.is_point() {
                return Err(Error::InvalidSet(format!(
                    "segment [{}, {}] on a discrete carrier must be a single point",
                    s.lo, s.hi
                )));
            }
            space.check(s.lo)?;
            space.check(s.hi)?;
        }
        Ok(())
    }

    /// Exact `d(x, self)`.
    pub fn distance(&self, space: &MetricSpace, x: f64) -> Result<f64> {
        space.check(x)?;
        if self.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(self.distance_unchecked(space, x))
    }

    /// `d(x, self)` without checks; infinite for the empty set.
    pub(crate) fn distance_unchecked(&self, space: &MetricSpace, x: f64) -> f64 {
        if !space.is_ordered() {
            return self
                .parts
                .iter()
                .map(|s| space.metric(x, s.lo))
                .fold(f64::INFINITY, f64::min);
        }
        let idx = self.parts.partition_point(|s| s.lo <= x);
        let mut best = f64::INFINITY;
        if idx > 0 {
            let left = self.parts[idx - 1];
            if left.hi >= x {
                return 0.0;
            }
            best = space.metric(x, left.hi);
        }
        if let Some(right) = self.parts.get(idx) {
            best = best.min(space.metric(x, right.lo));
        }
        best
    }
}

/// Distance from `x` to a sorted list of carrier points; infinite if empty.
pub(crate) fn distance_to_sorted(space: &MetricSpace, points: &[f64], x: f64) -> f64 {
    if !space.is_ordered() {
        return points
            .iter()
            .map(|&p| space.metric(x, p))
            .fold(f64::INFINITY, f64::min);
    }
    let idx = points.partition_point(|&p| p < x);
    let mut best = f64::INFINITY;
    if idx > 0 {
        best = space.metric(x, points[idx - 1]);
    }
    if let Some(&p) = points.get(idx) {
        best = best.min(space.metric(x, p));
    }
    best
}

/// A connected piece of a relatively open set.
///
/// An end is closed only where the piece reaches the end of the carrier (a
/// carrier end is interior to the carrier in the subspace topology). On
/// discrete carriers every span is a closed single point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Span {
    pub fn open(lo: f64, hi: f64) -> Self {
        Span {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn point(p: f64) -> Self {
        Span {
            lo: p,
            hi: p,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.lo < x || (self.lo_closed && self.lo == x))
            && (x < self.hi || (self.hi_closed && self.hi == x))
    }
}

/// A relatively open subset of the carrier, as sorted disjoint spans.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct OpenSet {
    spans: Vec<Span>,
}

impl OpenSet {
    pub fn empty() -> Self {
        OpenSet { spans: Vec::new() }
    }

    /// The whole carrier, which is open in itself.
    pub fn whole(space: &MetricSpace) -> Self {
        match space.line() {
            Some(l) => OpenSet {
                spans: alloc::vec![Span {
                    lo: l.lo(),
                    hi: l.hi(),
                    lo_closed: true,
                    hi_closed: true,
                }],
            },
            None => OpenSet {
                spans: space
                    .discrete_points()
                    .unwrap_or(&[])
                    .iter()
                    .map(|&p| Span::point(p))
                    .collect(),
            },
        }
    }

    /// Sorts the spans; they must be pairwise disjoint.
    pub fn new(mut spans: Vec<Span>) -> Result<Self> {
        spans.sort_by(|p, q| p.lo.total_cmp(&q.lo));
        for s in &spans {
            if !(s.lo <= s.hi && (s.lo < s.hi || (s.lo_closed && s.hi_closed))) {
                return Err(Error::InvalidSet(format!(
                    "span ({}, {}) is empty or inverted",
                    s.lo, s.hi
                )));
            }
        }
        for w in spans.windows(2) {
            let overlap = w[1].lo < w[0].hi || (w[1].lo == w[0].hi && w[0].hi_closed && w[1].lo_closed);
            if overlap {
                return Err(Error::InvalidSet(format!(
                    "spans ending at {} and starting at {} overlap",
                    w[0].hi, w[1].lo
                )));
            }
        }
        Ok(OpenSet { spans })
    }

    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        let idx = self.spans.partition_point(|s| s.lo <= x);
        idx > 0 && self.spans[idx - 1].contains(x)
    }
}

/// `B_r(A) = {x : d(x, A) < r}` within the carrier.
pub fn generalized_ball(space: &MetricSpace, set: &ClosedSet, r: f64) -> Result<OpenSet> {
    if !(r > 0.0) || r.is_nan() {
        return Err(Error::NonPositive {
            name: "radius",
            value: r,
        });
    }
    set.validate_in(space)?;
    if set.is_empty() {
        return Ok(OpenSet::empty());
    }
    let Some(line) = space.line() else {
        let points = space.discrete_points().unwrap_or(&[]);
        let spans = points
            .iter()
            .filter(|&&p| set.distance_unchecked(space, p) < r)
            .map(|&p| Span::point(p))
            .collect();
        return Ok(OpenSet { spans });
    };

    let (m_lo, m_hi) = line.coord_bounds();
    // metric-coordinate intervals (coord(lo) - r, coord(hi) + r), merged
    let mut pieces: Vec<(f64, f64)> = Vec::with_capacity(set.parts().len());
    for s in set.parts() {
        let a = line.coord(s.lo) - r;
        let b = line.coord(s.hi) + r;
        match pieces.last_mut() {
            Some(last) if a < last.1 => last.1 = last.1.max(b),
            _ => pieces.push((a, b)),
        }
    }
    let spans = pieces
        .into_iter()
        .map(|(a, b)| {
            let (lo, lo_closed) = if a < m_lo {
                (line.lo(), true)
            } else {
                (line.point(a), false)
            };
            let (hi, hi_closed) = if b > m_hi {
                (line.hi(), true)
            } else {
                (line.point(b), false)
            };
            Span {
                lo,
                hi,
                lo_closed,
                hi_closed,
            }
        })
        .collect();
    Ok(OpenSet { spans })
}

/// `∁G` taken within the carrier. The result may be empty.
pub fn complement_in_carrier(space: &MetricSpace, open: &OpenSet) -> ClosedSet {
    let Some(line) = space.line() else {
        let points = space.discrete_points().unwrap_or(&[]);
        let parts = points
            .iter()
            .filter(|&&p| !open.contains(p))
            .map(|&p| Segment::point(p))
            .collect();
        return ClosedSet::from_normalized(parts);
    };

    let mut parts = Vec::with_capacity(open.spans().len() + 1);
    // `cursor` is the left end of the next gap; `None` once it is covered.
    let mut cursor = Some(line.lo());
    for s in open.spans() {
        if let Some(c) = cursor {
            if c < s.lo || (c == s.lo && !s.lo_closed) {
                parts.push(Segment::new(c, s.lo));
            }
        }
        cursor = if s.hi_closed { None } else { Some(s.hi) };
    }
    if let Some(c) = cursor {
        if c <= line.hi() {
            parts.push(Segment::new(c, line.hi()));
        }
    }
    merge_touching(&mut parts);
    ClosedSet::from_normalized(parts)
}

fn merge_touching(parts: &mut Vec<Segment>) {
    let mut out: Vec<Segment> = Vec::with_capacity(parts.len());
    for s in parts.drain(..) {
        match out.last_mut() {
            Some(last) if s.lo <= last.hi => last.hi = last.hi.max(s.hi),
            _ => out.push(s),
        }
    }
    *parts = out;
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use crate::metric_space::Warp;

    fn unit() -> MetricSpace {
        MetricSpace::interval(0.0, 1.0).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn normalization_merges_overlaps() {
        let s = ClosedSet::new([
            Segment::new(0.5, 0.6),
            Segment::new(0.1, 0.2),
            Segment::new(0.55, 0.7),
            Segment::point(0.2),
        ])
        .unwrap();
        assert_eq!(s.parts(), &[Segment::new(0.1, 0.2), Segment::new(0.5, 0.7)]);
        assert!(ClosedSet::new([Segment::new(0.3, 0.2)]).is_err());
    }

    #[test]
    fn distance_to_points_and_intervals() {
        let x = unit();
        let s = ClosedSet::new([Segment::point(0.0), Segment::new(0.5, 0.6)]).unwrap();
        assert!(close(s.distance(&x, 0.25).unwrap(), 0.25));
        assert_eq!(s.distance(&x, 0.55).unwrap(), 0.0);
        assert_eq!(s.distance(&x, 0.0).unwrap(), 0.0);
        assert!(close(s.distance(&x, 0.9).unwrap(), 0.3));
        assert_eq!(ClosedSet::empty().distance(&x, 0.3), Err(Error::EmptySet));
    }

    #[test]
    fn distance_to_spaced_net() {
        // brute force over {0, 0.4, 0.8}: |0.45 - 0.4| = 0.05
        let x = unit();
        let d = distance_to_sorted(&x, &[0.0, 0.4, 0.8], 0.45);
        assert!(close(d, 0.05));
    }

    #[test]
    fn ball_around_point() {
        let x = unit();
        let g = generalized_ball(&x, &ClosedSet::from_points([0.5]).unwrap(), 0.1).unwrap();
        assert_eq!(g.spans().len(), 1);
        let s = g.spans()[0];
        assert!(close(s.lo, 0.4) && close(s.hi, 0.6));
        assert!(!s.lo_closed && !s.hi_closed);
    }

    #[test]
    fn ball_around_union() {
        let x = unit();
        let a = ClosedSet::new([Segment::new(0.2, 0.3), Segment::point(0.7)]).unwrap();
        let g = generalized_ball(&x, &a, 0.05).unwrap();
        let got: Vec<(f64, f64)> = g.spans().iter().map(|s| (s.lo, s.hi)).collect();
        let want = [(0.15, 0.35), (0.65, 0.75)];
        assert_eq!(got.len(), 2);
        for (g, w) in got.iter().zip(want) {
            assert!(close(g.0, w.0) && close(g.1, w.1));
        }
    }

    #[test]
    fn ball_exceeding_carrier_is_whole() {
        let x = unit();
        let g = generalized_ball(&x, &ClosedSet::from_points([0.0]).unwrap(), 2.0).unwrap();
        assert_eq!(g, OpenSet::whole(&x));
        assert!(complement_in_carrier(&x, &g).is_empty());
    }

    #[test]
    fn complements() {
        let x = unit();
        let g = OpenSet::new(vec![Span::open(0.4, 0.6)]).unwrap();
        let f = complement_in_carrier(&x, &g);
        assert_eq!(f.parts(), &[Segment::new(0.0, 0.4), Segment::new(0.6, 1.0)]);

        let g = OpenSet::new(vec![Span::open(0.15, 0.35), Span::open(0.65, 0.75)]).unwrap();
        let f = complement_in_carrier(&x, &g);
        assert_eq!(
            f.parts(),
            &[
                Segment::new(0.0, 0.15),
                Segment::new(0.35, 0.65),
                Segment::new(0.75, 1.0)
            ]
        );
    }

    #[test]
    fn complement_keeps_shared_boundary_point() {
        let x = unit();
        let g = OpenSet::new(vec![Span::open(0.0, 0.5), Span::open(0.5, 1.0)]).unwrap();
        let f = complement_in_carrier(&x, &g);
        assert_eq!(
            f.parts(),
            &[Segment::point(0.0), Segment::point(0.5), Segment::point(1.0)]
        );
    }

    #[test]
    fn warped_ball_uses_metric_coordinates() {
        let x = MetricSpace::warped(-1.0, 1.0, Warp::Cube).unwrap();
        let g = generalized_ball(&x, &ClosedSet::from_points([0.0]).unwrap(), 0.001).unwrap();
        let s = g.spans()[0];
        assert!(close(s.lo, -0.1) && close(s.hi, 0.1));
    }

    #[test]
    fn discrete_ball_and_complement() {
        let x = MetricSpace::factorial_gaps(5).unwrap();
        let a = ClosedSet::from_points([0.0]).unwrap();
        let g = generalized_ball(&x, &a, 0.2).unwrap();
        let members: Vec<f64> = g.spans().iter().map(|s| s.lo).collect();
        assert_eq!(members, vec![0.0, 1.0 / 120.0, 1.0 / 24.0, 1.0 / 6.0]);
        let f = complement_in_carrier(&x, &g);
        assert_eq!(f.parts(), &[Segment::point(0.5), Segment::point(1.0)]);
        assert!(ClosedSet::interval(0.0, 0.5).unwrap().validate_in(&x).is_err());
    }

    #[test]
    fn subset_relation() {
        let big = ClosedSet::new([Segment::new(0.0, 0.4), Segment::new(0.6, 1.0)]).unwrap();
        let small = ClosedSet::new([Segment::new(0.1, 0.2), Segment::point(0.6)]).unwrap();
        assert!(small.is_subset_of(&big));
        assert!(!big.is_subset_of(&small));
    }
}
