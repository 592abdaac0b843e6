//! Estimators for `Lip^r f(x) = sup_{u ∈ B_r(x)} |f(x) - f(u)| / r` and the
//! big, little and local Lipschitz derivatives built from it.
//!
//! Suprema are taken over finite samples of the open ball, so every value
//! is a lower estimate of the true one. On the lines a ball is sampled on a
//! uniform grid in metric coordinates, just inside both ends of the ball and
//! at the carrier ends; for a TW function the kinks of the partial sums can
//! be added, which makes the sup exact for the piecewise-linear levels
//! involved. Balls of the discrete models are enumerated exactly.
//!
//! Limits in `r` are read off a decreasing radius grid: `Lip` is the max and
//! `lip` the min of `Lip^r` over the tail (by default the smallest half of
//! the grid). "Infinite" is decided against a level schedule of lower
//! bounds rather than a fixed threshold.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::metric_space::{Line, MetricSpace};
use crate::tw::{NetChain, Regime, TwParams};

/// Default number of uniform samples per ball.
pub const DEFAULT_SAMPLES: usize = 512;

/// Smallest profile accepted by the limit estimators.
pub const MIN_PROFILE_LEN: usize = 8;

/// Default first radius of a grid.
pub const DEFAULT_R0: f64 = 0.5;

/// Default number of radii in a grid.
pub const DEFAULT_RADII: usize = 12;

// Samples at `m ± r·EDGE` sit just inside the open ball.
const EDGE: f64 = 1.0 - 1.0 / (1u64 << 40) as f64;

const ALIGN_TOL: f64 = 1e-6;

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { name, value: v })
    }
}

/// Points of an open ball, excluding its center.
#[derive(Clone, Debug, PartialEq)]
pub struct BallSample {
    /// Ascending, distinct.
    pub points: Vec<f64>,
    /// How many of `points` came from kink candidates.
    pub kinks_used: usize,
}

/// Chooses the points at which a ball is probed.
#[derive(Clone, Copy, Debug)]
pub struct BallSampler<'a> {
    samples: usize,
    chain: Option<&'a NetChain>,
}

impl Default for BallSampler<'_> {
    fn default() -> Self {
        BallSampler::new(DEFAULT_SAMPLES)
    }
}

impl<'a> BallSampler<'a> {
    pub fn new(samples: usize) -> Self {
        BallSampler {
            samples,
            chain: None,
        }
    }

    /// Adds the kinks of the chain's levels to every ball.
    pub fn with_kinks(self, chain: &'a NetChain) -> Self {
        BallSampler {
            chain: Some(chain),
            ..self
        }
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn uses_kinks(&self) -> bool {
        self.chain.is_some()
    }

    /// Sample points of `B_r(x) \ {x}`.
    pub fn sample(&self, space: &MetricSpace, x: f64, r: f64) -> Result<BallSample> {
        space.check(x)?;
        positive("radius", r)?;
        let Some(line) = space.line() else {
            let points = space
                .discrete_points()
                .unwrap_or(&[])
                .iter()
                .copied()
                .filter(|&p| p != x && space.metric(x, p) < r)
                .collect();
            return Ok(BallSample {
                points,
                kinks_used: 0,
            });
        };
        let inside = |u: f64| u != x && line.contains(u) && line.metric(x, u) < r;
        let m = line.coord(x);
        let (c0, c1) = line.coord_bounds();
        let lo = (m - r).max(c0);
        let hi = (m + r).min(c1);
        let step = (hi - lo) / self.samples.max(1) as f64;
        let mut points = Vec::with_capacity(self.samples + 4);
        for i in 0..self.samples {
            points.push(line.point(lo + (i as f64 + 0.5) * step));
        }
        for e in [m - r * EDGE, m + r * EDGE] {
            if (c0..=c1).contains(&e) {
                points.push(line.point(e));
            }
        }
        points.push(line.lo());
        points.push(line.hi());
        points.retain(|&u| inside(u));
        points.sort_by(f64::total_cmp);
        points.dedup();

        let mut kinks_used = 0;
        if let Some(chain) = self.chain {
            let mut kinks = kink_candidates(chain, x, r)?;
            kinks.retain(|&u| inside(u) && points.binary_search_by(|p| p.total_cmp(&u)).is_err());
            kinks_used = kinks.len();
            points.extend(kinks);
            points.sort_by(f64::total_cmp);
        }
        Ok(BallSample { points, kinks_used })
    }
}

/// Kinks of the partial sums inside `B_r(x)`.
///
/// For every level `n` up to the smallest one with `1/a^n <= r` these are
/// the points of `T_n` that bound its pieces (net points and ends of the
/// components of `F_n`) together with the metric midpoints of consecutive
/// such points, where `d(·, T_n)` peaks. Only the line models have kinks.
pub fn kink_candidates(chain: &NetChain, x: f64, r: f64) -> Result<Vec<f64>> {
    let space = chain.space();
    let line = space.line().ok_or(Error::NotContinuum)?;
    space.check(x)?;
    positive("radius", r)?;
    let top = chain.level_for_radius(r);
    let m = line.coord(x);
    let in_ball = |u: f64| line.metric(x, u) < r;
    let mut out = Vec::new();
    for level in &chain.levels()[..=top as usize] {
        let anchors = level.target_anchors();
        let i0 = anchors.partition_point(|&p| line.coord(p) <= m - r);
        let i1 = anchors.partition_point(|&p| line.coord(p) < m + r);
        out.extend(anchors[i0..i1].iter().copied().filter(|&p| in_ball(p)));
        let j0 = i0.saturating_sub(1);
        let j1 = (i1 + 1).min(anchors.len());
        for w in anchors[j0..j1].windows(2) {
            let mid = midpoint(line, w[0], w[1]);
            if in_ball(mid) {
                out.push(mid);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

fn midpoint(line: &Line, p: f64, q: f64) -> f64 {
    line.point(0.5 * (line.coord(p) + line.coord(q)))
}

/// `max |f(x) - f(u)| / r` over `points`; zero when there are none.
pub fn lip_r_from_points<F: Fn(f64) -> f64>(f: &F, x: f64, r: f64, points: &[f64]) -> f64 {
    let fx = f(x);
    points
        .iter()
        .map(|&u| (fx - f(u)).abs() / r)
        .fold(0.0, f64::max)
}

/// Estimate of `Lip^r f(x)`. Zero when the ball holds no other point.
pub fn lip_r_estimate<F: Fn(f64) -> f64>(
    f: &F,
    space: &MetricSpace,
    x: f64,
    r: f64,
    sampler: &BallSampler<'_>,
) -> Result<f64> {
    let ball = sampler.sample(space, x, r)?;
    Ok(lip_r_from_points(f, x, r, &ball.points))
}

/// Largest difference quotient over pairs of `(point, value)` samples.
///
/// On ordered models the metric adds up along the order, so the largest
/// quotient is attained by a pair of neighbours; otherwise all pairs are
/// compared.
pub fn max_pair_quotient(space: &MetricSpace, samples: &mut Vec<(f64, f64)>) -> f64 {
    samples.sort_by(|p, q| p.0.total_cmp(&q.0));
    samples.dedup_by(|p, q| p.0 == q.0);
    let quotient = |p: &(f64, f64), q: &(f64, f64)| {
        let d = space.metric(p.0, q.0);
        if d > 0.0 {
            (p.1 - q.1).abs() / d
        } else {
            0.0
        }
    };
    let mut best = 0.0f64;
    if space.is_ordered() {
        for w in samples.windows(2) {
            best = best.max(quotient(&w[0], &w[1]));
        }
    } else {
        for (i, p) in samples.iter().enumerate() {
            for q in &samples[i + 1..] {
                best = best.max(quotient(p, q));
            }
        }
    }
    best
}

/// Estimate of `‖f|_{B_r(x)}‖_lip`, the sup of `|f(u) - f(v)| / d(u, v)`
/// over sampled pairs of the ball (including `x`).
pub fn local_lip_estimate<F: Fn(f64) -> f64>(
    f: &F,
    space: &MetricSpace,
    x: f64,
    r: f64,
    sampler: &BallSampler<'_>,
) -> Result<f64> {
    let ball = sampler.sample(space, x, r)?;
    let mut values: Vec<(f64, f64)> = ball.points.iter().map(|&u| (u, f(u))).collect();
    values.push((x, f(x)));
    Ok(max_pair_quotient(space, &mut values))
}

/// A strictly decreasing list of radii.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusGrid {
    radii: Vec<f64>,
}

impl RadiusGrid {
    /// `r_k = r0 · q^k` for `k < count`.
    pub fn geometric(r0: f64, q: f64, count: usize) -> Result<Self> {
        positive("r0", r0)?;
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "grid ratio must lie in (0, 1), got {q}"
            )));
        }
        if count == 0 {
            return Err(Error::InvalidArgument("grid needs at least one radius".into()));
        }
        let radii = (0..count).map(|k| r0 * libm::pow(q, k as f64)).collect();
        RadiusGrid::from_radii(radii)
    }

    /// Geometric grid with `subdivisions` radii per factor `a`, that is with
    /// ratio `a^(-1/subdivisions)`.
    pub fn aligned(a: f64, r0: f64, count: usize, subdivisions: u32) -> Result<Self> {
        if !(a > 1.0 && a.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!(
                "scale factor must exceed 1, got {a}"
            )));
        }
        if subdivisions == 0 {
            return Err(Error::InvalidArgument("subdivisions must be positive".into()));
        }
        RadiusGrid::geometric(r0, libm::pow(a, -1.0 / subdivisions as f64), count)
    }

    pub fn from_radii(radii: Vec<f64>) -> Result<Self> {
        for &r in &radii {
            positive("radius", r)?;
        }
        if radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument("radii must be strictly decreasing".into()));
        }
        Ok(RadiusGrid { radii })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

/// A sampled point of a ball with its value and distance to the center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallPoint {
    pub u: f64,
    pub value: f64,
    pub dist: f64,
}

/// `Lip^r f(x)` along a radius grid, with the samples behind each value.
#[derive(Clone, Debug, PartialEq)]
pub struct LipProfile {
    x: f64,
    fx: f64,
    isolated: bool,
    samples_per_ball: usize,
    kinks_included: bool,
    radii: Vec<f64>,
    values: Vec<f64>,
    kinks_used: Vec<usize>,
    balls: Vec<Vec<BallPoint>>,
}

/// Computes `Lip^r f(x)` at every radius of `grid`.
pub fn lip_profile<F: Fn(f64) -> f64>(
    f: &F,
    space: &MetricSpace,
    x: f64,
    grid: &RadiusGrid,
    sampler: &BallSampler<'_>,
) -> Result<LipProfile> {
    space.check(x)?;
    let fx = f(x);
    let mut values = Vec::with_capacity(grid.len());
    let mut kinks_used = Vec::with_capacity(grid.len());
    let mut balls = Vec::with_capacity(grid.len());
    for &r in grid.radii() {
        let ball = sampler.sample(space, x, r)?;
        let pts: Vec<BallPoint> = ball
            .points
            .iter()
            .map(|&u| BallPoint {
                u,
                value: f(u),
                dist: space.metric(x, u),
            })
            .collect();
        values.push(pts.iter().map(|p| (fx - p.value).abs() / r).fold(0.0, f64::max));
        kinks_used.push(ball.kinks_used);
        balls.push(pts);
    }
    Ok(LipProfile {
        x,
        fx,
        isolated: space.is_non_isolated(x) == Some(false),
        samples_per_ball: sampler.samples(),
        kinks_included: sampler.uses_kinks(),
        radii: grid.radii().to_vec(),
        values,
        kinks_used,
        balls,
    })
}

impl LipProfile {
    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn fx(&self) -> f64 {
        self.fx
    }

    /// Whether `x` is an isolated point of the space.
    pub fn isolated(&self) -> bool {
        self.isolated
    }

    pub fn samples_per_ball(&self) -> usize {
        self.samples_per_ball
    }

    pub fn kinks_included(&self) -> bool {
        self.kinks_included
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// `Lip^r f(x)` estimates, one per radius.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kinks_used(&self) -> &[usize] {
        &self.kinks_used
    }

    /// Number of points sampled in each ball.
    pub fn sample_counts(&self) -> Vec<usize> {
        self.balls.iter().map(Vec::len).collect()
    }

    pub fn ball(&self, k: usize) -> &[BallPoint] {
        &self.balls[k]
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// Index of the first tail radius. `tail` is the number of smallest
    /// radii to use, half the grid by default.
    pub fn tail_start(&self, tail: Option<usize>) -> Result<usize> {
        let len = self.len();
        if len < MIN_PROFILE_LEN {
            return Err(Error::ProfileTooShort {
                len,
                min: MIN_PROFILE_LEN,
            });
        }
        let t = tail.unwrap_or(len / 2);
        if t == 0 || t > len {
            return Err(Error::InvalidArgument(alloc::format!(
                "tail of {t} radii does not fit a profile of {len}"
            )));
        }
        Ok(len - t)
    }
}

/// Max of `Lip^r f(x)` over the tail; zero at isolated points.
pub fn big_lip_estimate(profile: &LipProfile) -> Result<f64> {
    big_lip_estimate_tail(profile, None)
}

pub fn big_lip_estimate_tail(profile: &LipProfile, tail: Option<usize>) -> Result<f64> {
    let start = profile.tail_start(tail)?;
    if profile.isolated {
        return Ok(0.0);
    }
    Ok(profile.values[start..].iter().copied().fold(0.0, f64::max))
}

/// Min of `Lip^r f(x)` over the tail; zero at isolated points.
///
/// A finite grid cannot certify a liminf: the value is an upper estimate of
/// what the tail radii show, and lower bounds come from the schedules.
pub fn little_lip_estimate(profile: &LipProfile) -> Result<f64> {
    little_lip_estimate_tail(profile, None)
}

pub fn little_lip_estimate_tail(profile: &LipProfile, tail: Option<usize>) -> Result<f64> {
    let start = profile.tail_start(tail)?;
    if profile.isolated {
        return Ok(0.0);
    }
    Ok(profile.values[start..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

/// Largest pair quotient over the union of the tail samples and `x`; zero
/// at isolated points. Never below [`big_lip_estimate_tail`] for the same
/// tail.
pub fn local_lip_from_profile(
    space: &MetricSpace,
    profile: &LipProfile,
    tail: Option<usize>,
) -> Result<f64> {
    let start = profile.tail_start(tail)?;
    if profile.isolated {
        return Ok(0.0);
    }
    let mut values: Vec<(f64, f64)> = profile.balls[start..]
        .iter()
        .flatten()
        .map(|p| (p.u, p.value))
        .collect();
    values.push((profile.x, profile.fx));
    Ok(max_pair_quotient(space, &mut values))
}

/// `limsup_{u→x} |f(u) - f(x)| / d(u, x)` read off the tail samples.
pub fn anchored_lip_estimate(profile: &LipProfile, tail: Option<usize>) -> Result<f64> {
    let start = profile.tail_start(tail)?;
    if profile.isolated {
        return Ok(0.0);
    }
    Ok(profile.balls[start..]
        .iter()
        .flatten()
        .filter(|p| p.dist > 0.0)
        .map(|p| (p.value - profile.fx).abs() / p.dist)
        .fold(0.0, f64::max))
}

/// Lower bounds `coefficient · b^n` on `Lip^r f(x)` for `r` in the level band
/// `[unit/a^n, unit/a^(n-1))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    pub coefficient: f64,
    pub a: f64,
    pub b: f64,
    pub unit: f64,
    /// Inclusive window of levels to check; the tail levels when unset.
    pub levels: Option<(u32, u32)>,
}

impl Schedule {
    /// `((b-2)/(b(b-1))) b^n` on bands of unit 1.
    pub fn standard(params: &TwParams) -> Result<Self> {
        if params.regime != Regime::Standard {
            return Err(Error::Regime(alloc::format!(
                "the standard schedule needs standard parameters, got the {} regime",
                params.regime_name()
            )));
        }
        let b = params.b;
        Ok(Schedule {
            coefficient: (b - 2.0) / (b * (b - 1.0)),
            a: params.a,
            b,
            unit: 1.0,
            levels: None,
        })
    }

    /// `(γ/a) b^n` on bands `[ε_n, ε_(n-1))` with `ε_n = α/a^n`.
    pub fn hermetic(params: &TwParams) -> Result<Self> {
        let Some(k) = params.hermetic_constants() else {
            return Err(Error::Regime(alloc::format!(
                "the hermetic schedule needs hermetic parameters, got the {} regime",
                params.regime_name()
            )));
        };
        Ok(Schedule {
            coefficient: k.gamma / params.a,
            a: params.a,
            b: params.b,
            unit: k.alpha,
            levels: None,
        })
    }

    /// The schedule matching the parameter regime.
    pub fn for_params(params: &TwParams) -> Result<Self> {
        match params.regime {
            Regime::Hermetic(_) => Schedule::hermetic(params),
            _ => Schedule::standard(params),
        }
    }

    pub fn with_levels(self, lo: u32, hi: u32) -> Self {
        Schedule {
            levels: Some((lo, hi)),
            ..self
        }
    }

    pub fn bound(&self, n: u32) -> f64 {
        self.coefficient * libm::pow(self.b, n as f64)
    }

    /// The `n >= 0` with `unit/a^n <= r < unit/a^(n-1)`, if any.
    pub fn level_of(&self, r: f64) -> Option<u32> {
        if !(r > 0.0 && r.is_finite()) || r >= self.unit * self.a {
            return None;
        }
        let edge = |n: i64| self.unit / libm::pow(self.a, n as f64);
        let mut n = libm::ceil(libm::log(self.unit / r) / libm::log(self.a)) as i64;
        n = n.max(0);
        while edge(n) > r {
            n += 1;
        }
        while n > 0 && edge(n - 1) <= r {
            n -= 1;
        }
        Some(n as u32)
    }
}

/// Result of checking one level band against the schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelCheck {
    pub level: u32,
    pub bound: f64,
    /// Smallest `Lip^r` estimate over the grid radii in the band.
    pub observed: f64,
    pub radii: usize,
    pub pass: bool,
}

/// Least-squares fit of `ln(value) ≈ ln(C) + n ln(base)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthFit {
    pub base: f64,
    /// Coefficient of determination of the fit.
    pub quality: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlowupVerdict {
    pub blows_up: bool,
    pub levels: Vec<LevelCheck>,
    pub growth_fit: Option<GrowthFit>,
}

fn check_alignment(radii: &[f64], a: f64) -> Result<()> {
    let misaligned = Error::Misaligned { a };
    let q = radii[1] / radii[0];
    if radii
        .windows(2)
        .any(|w| ((w[1] / w[0]) / q - 1.0).abs() > ALIGN_TOL)
    {
        return Err(misaligned);
    }
    let m = libm::log(a) / -libm::log(q);
    if m < 1.0 - ALIGN_TOL || (m - libm::round(m)).abs() > ALIGN_TOL * m {
        return Err(misaligned);
    }
    Ok(())
}

/// Checks a profile against a schedule level by level.
///
/// The grid must be geometric with ratio `a^(-1/m)` for an integer `m`, so
/// that every band is probed the same number of times. A level passes when
/// every grid radius in its band meets the bound; the profile blows up when
/// at least one level is checked and all pass.
pub fn classify_blowup(profile: &LipProfile, schedule: &Schedule) -> Result<BlowupVerdict> {
    let start = profile.tail_start(None)?;
    check_alignment(&profile.radii, schedule.a)?;
    let (lo, hi) = match schedule.levels {
        Some(w) => w,
        None => {
            let tail: Vec<u32> = profile.radii[start..]
                .iter()
                .filter_map(|&r| schedule.level_of(r))
                .collect();
            match (tail.iter().min(), tail.iter().max()) {
                (Some(&lo), Some(&hi)) => (lo, hi),
                _ => (1, 0),
            }
        }
    };
    let mut levels: Vec<LevelCheck> = Vec::new();
    for (k, &r) in profile.radii.iter().enumerate() {
        let Some(n) = schedule.level_of(r) else {
            continue;
        };
        if n < lo || n > hi {
            continue;
        }
        let v = profile.values[k];
        match levels.iter_mut().find(|c| c.level == n) {
            Some(c) => {
                c.observed = c.observed.min(v);
                c.radii += 1;
            }
            None => levels.push(LevelCheck {
                level: n,
                bound: schedule.bound(n),
                observed: v,
                radii: 1,
                pass: false,
            }),
        }
    }
    levels.sort_by_key(|c| c.level);
    for c in &mut levels {
        c.pass = c.observed >= c.bound;
    }
    let blows_up = !levels.is_empty() && levels.iter().all(|c| c.pass);
    let points: Vec<(f64, f64)> = levels
        .iter()
        .filter(|c| c.observed > 0.0 && c.observed.is_finite())
        .map(|c| (c.level as f64, libm::log(c.observed)))
        .collect();
    Ok(BlowupVerdict {
        blows_up,
        growth_fit: fit_growth(&points),
        levels,
    })
}

fn fit_growth(points: &[(f64, f64)]) -> Option<GrowthFit> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let quality = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Some(GrowthFit {
        base: libm::exp(slope),
        quality,
    })
}

/// The three derivative estimates of one profile.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeEstimate {
    pub big: f64,
    pub little: f64,
    pub local: f64,
    pub tail_start: usize,
    pub verdict: Option<BlowupVerdict>,
}

/// Big, little and local estimates over the default tail, and the blow-up
/// verdict when a schedule is given.
pub fn derivative_estimate(
    space: &MetricSpace,
    profile: &LipProfile,
    schedule: Option<&Schedule>,
) -> Result<DerivativeEstimate> {
    let tail_start = profile.tail_start(None)?;
    let verdict = match schedule {
        Some(s) => Some(classify_blowup(profile, s)?),
        None => None,
    };
    Ok(DerivativeEstimate {
        big: big_lip_estimate(profile)?,
        little: little_lip_estimate(profile)?,
        local: local_lip_from_profile(space, profile, None)?,
        tail_start,
        verdict,
    })
}
