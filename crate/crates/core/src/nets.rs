//! Maximal ε-separated sets built by a deterministic greedy sweep, their
//! verification, and the oscillation-witness search for distance-to-net
//! functions.
//!
//! On a line the sweep walks each domain piece from left to right: seeds
//! are kept, and every gap is filled with the earliest coordinate that is at
//! least ε away from everything already placed. Points are placed exactly,
//! so the result is maximal (equivalently ε-dense in the domain), not merely
//! dense on a grid. Discrete carriers use the same greedy rule over the
//! ascending point order.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::metric_space::{distance_to_sorted, Line, MetricSpace, OpenSet, Span};

/// Fraction of ε by which the first point of a piece with an open left end
/// is moved inside it.
pub const DEFAULT_OPEN_OFFSET: f64 = 1.0 / 16.0;

/// Density checks probe at `epsilon / DEFAULT_PROBE_DIVISOR` unless told
/// otherwise.
pub const DEFAULT_PROBE_DIVISOR: f64 = 16.0;

/// Default bound on the number of points in a single net.
pub const DEFAULT_POINT_CAP: usize = 10_000_000;

/// An ε-separated set of carrier points living in an open domain.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparatedNet {
    epsilon: f64,
    points: Vec<f64>,
    domain: OpenSet,
}

impl SeparatedNet {
    /// Wraps points without building or checking anything; `points` is
    /// sorted on the way in.
    pub fn from_points(epsilon: f64, mut points: Vec<f64>, domain: OpenSet) -> Self {
        points.sort_by(f64::total_cmp);
        SeparatedNet {
            epsilon,
            points,
            domain,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Net points in ascending order.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn domain(&self) -> &OpenSet {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The domain was empty, so the net is empty for lack of room.
    pub fn is_vacuous(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.points.binary_search_by(|p| p.total_cmp(&x)).is_ok()
    }

    /// `d(x, net)`; errors on an empty net.
    pub fn distance(&self, space: &MetricSpace, x: f64) -> Result<f64> {
        space.check(x)?;
        if self.points.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(distance_to_sorted(space, &self.points, x))
    }
}

/// Options for [`build_maximal_separated`].
#[derive(Clone, Debug)]
pub struct NetBuilder<'a> {
    epsilon: f64,
    seeds: &'a [f64],
    cap: usize,
    open_offset: f64,
    level: u32,
}

impl<'a> NetBuilder<'a> {
    pub fn new(epsilon: f64) -> Self {
        NetBuilder {
            epsilon,
            seeds: &[],
            cap: DEFAULT_POINT_CAP,
            open_offset: DEFAULT_OPEN_OFFSET,
            level: 0,
        }
    }

    /// Points that must appear in the net.
    pub fn seeds(mut self, seeds: &'a [f64]) -> Self {
        self.seeds = seeds;
        self
    }

    pub fn cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn open_offset(mut self, fraction: f64) -> Self {
        self.open_offset = fraction;
        self
    }

    /// Level reported when the point cap is exceeded.
    pub fn level(mut self, level: u32) -> Self {
        self.level = level;
        self
    }

    pub fn build(&self, space: &MetricSpace, domain: &OpenSet) -> Result<SeparatedNet> {
        let eps = self.epsilon;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::NonPositive {
                name: "epsilon",
                value: eps,
            });
        }
        if !(self.open_offset > 0.0 && self.open_offset < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "open offset must lie in (0, 1), got {}",
                self.open_offset
            )));
        }
        let mut seeds = self.seeds.to_vec();
        seeds.sort_by(f64::total_cmp);
        seeds.dedup();
        for &s in &seeds {
            space.check(s)?;
            if !domain.contains(s) {
                return Err(Error::SeedOutsideDomain(s));
            }
        }
        check_seed_separation(space, &seeds, eps)?;
        if domain.is_empty() {
            return Ok(SeparatedNet::from_points(eps, Vec::new(), domain.clone()));
        }
        let points = match space.line() {
            Some(line) => self.sweep_line(line, domain, &seeds)?,
            None => self.greedy_discrete(space, domain, seeds)?,
        };
        Ok(SeparatedNet {
            epsilon: eps,
            points,
            domain: domain.clone(),
        })
    }

    fn push(&self, out: &mut Vec<f64>, p: f64) -> Result<()> {
        if out.len() >= self.cap {
            return Err(Error::NetTooLarge {
                level: self.level,
                cap: self.cap,
            });
        }
        out.push(p);
        Ok(())
    }

    fn sweep_line(&self, line: &Line, domain: &OpenSet, seeds: &[f64]) -> Result<Vec<f64>> {
        let eps = self.epsilon;
        // smallest representable point to the right of `p` at distance >= eps
        let step = |p: f64| -> f64 {
            let mut y = line.warp().invert(line.coord(p) + eps);
            while line.metric(p, y) < eps {
                y = y.next_up();
            }
            y
        };
        let mut out = Vec::new();
        let mut next_seed = 0;
        let mut last: Option<f64> = None;
        for span in domain.spans() {
            let mut y = first_candidate(line, span, eps * self.open_offset);
            if let Some(p) = last {
                y = y.max(step(p));
            }
            loop {
                if let Some(&s) = seeds.get(next_seed) {
                    if y >= s || line.metric(y, s) < eps {
                        if !span.contains(s) {
                            // a seed further right blocks the rest of this span
                            break;
                        }
                        self.push(&mut out, s)?;
                        last = Some(s);
                        next_seed += 1;
                        y = step(s);
                        continue;
                    }
                }
                if !span.contains(y) {
                    break;
                }
                self.push(&mut out, y)?;
                last = Some(y);
                y = step(y);
            }
        }
        debug_assert_eq!(next_seed, seeds.len());
        Ok(out)
    }

    fn greedy_discrete(
        &self,
        space: &MetricSpace,
        domain: &OpenSet,
        mut accepted: Vec<f64>,
    ) -> Result<Vec<f64>> {
        let eps = self.epsilon;
        if accepted.len() > self.cap {
            return Err(Error::NetTooLarge {
                level: self.level,
                cap: self.cap,
            });
        }
        for span in domain.spans() {
            let p = span.lo;
            let idx = accepted.partition_point(|&q| q < p);
            if accepted.get(idx) == Some(&p) {
                continue;
            }
            let admissible = if space.is_ordered() {
                let left_ok = idx == 0 || space.metric(p, accepted[idx - 1]) >= eps;
                let right_ok = idx == accepted.len() || space.metric(p, accepted[idx]) >= eps;
                left_ok && right_ok
            } else {
                accepted.iter().all(|&q| space.metric(p, q) >= eps)
            };
            if admissible {
                if accepted.len() >= self.cap {
                    return Err(Error::NetTooLarge {
                        level: self.level,
                        cap: self.cap,
                    });
                }
                accepted.insert(idx, p);
            }
        }
        Ok(accepted)
    }
}

fn first_candidate(line: &Line, span: &Span, offset: f64) -> f64 {
    if span.lo_closed {
        return span.lo;
    }
    let width = line.coord(span.hi) - line.coord(span.lo);
    let off = offset.min(width / 2.0);
    let y = line.warp().invert(line.coord(span.lo) + off);
    if y <= span.lo {
        span.lo.next_up()
    } else {
        y
    }
}

fn check_seed_separation(space: &MetricSpace, seeds: &[f64], eps: f64) -> Result<()> {
    if space.is_ordered() {
        if let Some(w) = seeds.windows(2).find(|w| space.metric(w[0], w[1]) < eps) {
            return Err(Error::SeedSeparation(w[0], w[1]));
        }
    } else {
        for (i, &s) in seeds.iter().enumerate() {
            if let Some(&t) = seeds[i + 1..].iter().find(|&&t| space.metric(s, t) < eps) {
                return Err(Error::SeedSeparation(s, t));
            }
        }
    }
    Ok(())
}

/// A maximal ε-separated set in `domain` containing `seeds`.
pub fn build_maximal_separated(
    space: &MetricSpace,
    domain: &OpenSet,
    epsilon: f64,
    seeds: &[f64],
) -> Result<SeparatedNet> {
    NetBuilder::new(epsilon).seeds(seeds).build(space, domain)
}

/// Outcome of [`verify_separated`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparationCheck {
    pub separated: bool,
    /// First pair closer than ε, if any.
    pub violation: Option<(f64, f64)>,
}

/// Exact pairwise check `d(s, t) >= ε`. On ordered models consecutive
/// points suffice.
pub fn verify_separated(space: &MetricSpace, net: &SeparatedNet) -> SeparationCheck {
    let eps = net.epsilon;
    let pts = &net.points;
    let violation = if space.is_ordered() {
        pts.windows(2)
            .find(|w| space.metric(w[0], w[1]) < eps)
            .map(|w| (w[0], w[1]))
    } else {
        pts.iter().enumerate().find_map(|(i, &s)| {
            pts[i + 1..]
                .iter()
                .find(|&&t| space.metric(s, t) < eps)
                .map(|&t| (s, t))
        })
    };
    SeparationCheck {
        separated: violation.is_none(),
        violation,
    }
}

/// Outcome of [`verify_dense`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityCheck {
    pub dense: bool,
    /// Probe farthest from the net and its distance.
    pub worst: Option<(f64, f64)>,
    pub probes: usize,
}

/// Checks `d(x, net) < ε` on a probe grid of the domain.
pub fn verify_dense(
    space: &MetricSpace,
    net: &SeparatedNet,
    probe_resolution: f64,
) -> Result<DensityCheck> {
    let eps = net.epsilon;
    if !(probe_resolution > 0.0) || probe_resolution > eps / DEFAULT_PROBE_DIVISOR {
        return Err(Error::InvalidArgument(format!(
            "probe resolution {probe_resolution} must lie in (0, epsilon/16]"
        )));
    }
    let mut check = DensityCheck {
        dense: true,
        worst: None,
        probes: 0,
    };
    let mut visit = |x: f64| {
        let d = distance_to_sorted(space, &net.points, x);
        check.probes += 1;
        if check.worst.is_none_or(|(_, w)| d >= w) {
            check.worst = Some((x, d));
        }
        if !(d < eps) {
            check.dense = false;
        }
    };
    match space.line() {
        Some(line) => {
            for span in net.domain.spans() {
                for_each_probe(line, span, probe_resolution, &mut visit);
            }
        }
        None => {
            for span in net.domain.spans() {
                visit(span.lo);
            }
        }
    }
    Ok(check)
}

fn for_each_probe(line: &Line, span: &Span, resolution: f64, visit: &mut impl FnMut(f64)) {
    let c0 = line.coord(span.lo);
    let c1 = line.coord(span.hi);
    if span.lo_closed {
        visit(span.lo);
    }
    let steps = libm::ceil((c1 - c0) / resolution) as usize;
    for i in 1..steps {
        let p = line.point(c0 + i as f64 * resolution);
        if span.contains(p) {
            visit(p);
        }
    }
    if span.hi_closed && span.hi != span.lo {
        visit(span.hi);
    }
}

/// A point `u` of the closed ball `B̄_ε(x)` with large `|ψ(u) - ψ(x)|`,
/// where `ψ = d(·, net)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaWitness {
    pub u: f64,
    pub oscillation: f64,
    /// `λε/8`
    pub bound: f64,
    pub satisfied: bool,
}

/// Searches `B̄_ε(x)` for the point maximizing `|d(u, E) - d(x, E)|`.
///
/// The distance function is piecewise monotone between net points and
/// their midpoints, so those are searched together with the ball ends and
/// a grid of resolution ε/64. `satisfied` is false when no candidate
/// reaches `λε/8`, which signals a violated hypothesis or a too-coarse
/// search.
pub fn lemma_witness_search(
    space: &MetricSpace,
    net: &SeparatedNet,
    x: f64,
    epsilon: f64,
    lambda: f64,
) -> Result<LemmaWitness> {
    space.check(x)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::NonPositive {
            name: "epsilon",
            value: epsilon,
        });
    }
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!(
            "lambda must lie in [0, 1), got {lambda}"
        )));
    }
    if net.is_empty() {
        return Err(Error::EmptySet);
    }
    let psi = |y: f64| distance_to_sorted(space, &net.points, y);
    let psi_x = psi(x);
    let mut best = LemmaWitness {
        u: x,
        oscillation: 0.0,
        bound: lambda * epsilon / 8.0,
        satisfied: false,
    };
    let mut consider = |u: f64| {
        if space.metric(x, u) <= epsilon {
            let osc = (psi(u) - psi_x).abs();
            if osc > best.oscillation {
                best.u = u;
                best.oscillation = osc;
            }
        }
    };
    match space.line() {
        Some(line) => {
            let (m_lo, m_hi) = line.coord_bounds();
            let c = line.coord(x);
            let lo = (c - epsilon).max(m_lo);
            let hi = (c + epsilon).min(m_hi);
            let res = epsilon / 64.0;
            let steps = libm::ceil((hi - lo) / res) as usize;
            for i in 0..=steps {
                consider(line.point((lo + i as f64 * res).min(hi)));
            }
            consider(line.point(lo));
            consider(line.point(hi));
            let pts = &net.points;
            let first = pts.partition_point(|&p| line.coord(p) < lo);
            let last = pts.partition_point(|&p| line.coord(p) <= hi);
            let from = first.saturating_sub(1);
            let to = (last + 1).min(pts.len());
            for i in from..to {
                consider(pts[i]);
                if i + 1 < pts.len() {
                    consider(line.point(0.5 * (line.coord(pts[i]) + line.coord(pts[i + 1]))));
                }
            }
        }
        None => {
            for &p in space.discrete_points().unwrap_or(&[]) {
                consider(p);
            }
        }
    }
    best.satisfied = best.oscillation >= best.bound;
    Ok(best)
}
