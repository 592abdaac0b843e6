//! Hermeticity `H(X, x) = liminf_{r→0+} (1/r) sup_{u ∈ B_r(x)} d(u, x)` and
//! `H(X) = inf_{x ∈ X^d} H(X, x)`.
//!
//! Like the derivative estimators, the liminf is read off the tail of a
//! decreasing radius grid. A generic geometric grid can miss the radii where
//! the ratio collapses: for a sequence with gaps the infimum sits just below
//! a distance from `x`, so on the discrete models those distances are added
//! to the grid from both sides.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lip::{BallSampler, RadiusGrid};
use crate::metric_space::MetricSpace;

/// Ratio of the default hermeticity grid.
pub const DEFAULT_RATIO: f64 = 0.5;

/// Relative offset of the radii placed around a distance from the probe.
pub const GAP_EDGE: f64 = 1e-6;

/// Per-radius hermeticity ratios at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct HermeticityEstimate {
    pub x: f64,
    pub radii: Vec<f64>,
    /// `(1/r) sup_{u ∈ B_r(x)} d(u, x)` over the sampled ball, in `[0, 1)`.
    pub ratios: Vec<f64>,
    pub tail_start: usize,
    /// Min of the tail ratios; zero at an isolated point.
    pub liminf_estimate: f64,
    pub isolated: bool,
}

/// Radii for estimating `H(X, x)`: `r0 / 2^k` for `k < count`, plus on the
/// discrete models the radii `g (1 ± GAP_EDGE)` for every distance `g < r0`
/// from `x` to another point. Radii below the smallest such distance are
/// dropped, since a finite model has no points there.
pub fn hermeticity_radii(
    space: &MetricSpace,
    x: f64,
    r0: f64,
    count: usize,
) -> Result<RadiusGrid> {
    space.check(x)?;
    let base = RadiusGrid::geometric(r0, DEFAULT_RATIO, count)?;
    let Some(points) = space.discrete_points() else {
        return Ok(base);
    };
    let gaps: Vec<f64> = points
        .iter()
        .filter(|&&p| p != x)
        .map(|&p| space.metric(x, p))
        .filter(|&g| g < r0)
        .collect();
    let mut radii: Vec<f64> = base.radii().to_vec();
    for &g in &gaps {
        radii.push(g * (1.0 - GAP_EDGE));
        radii.push(g * (1.0 + GAP_EDGE));
    }
    if let Some(floor) = gaps.iter().copied().reduce(f64::min) {
        radii.retain(|&r| r >= floor * (1.0 - GAP_EDGE));
    }
    radii.retain(|&r| r <= r0);
    radii.sort_by(|p, q| q.total_cmp(p));
    radii.dedup();
    RadiusGrid::from_radii(radii)
}

/// `(1/r) sup_{u ∈ B_r(x)} d(u, x)` over the sampled ball; zero when the
/// ball holds no other point.
pub fn hermeticity_ratio(
    space: &MetricSpace,
    x: f64,
    r: f64,
    sampler: &BallSampler<'_>,
) -> Result<f64> {
    let ball = sampler.sample(space, x, r)?;
    Ok(ball
        .points
        .iter()
        .map(|&u| space.metric(x, u) / r)
        .fold(0.0, f64::max))
}

/// Estimate of `H(X, x)` along `grid`, using the smallest half of the radii
/// (at least one) as the tail.
pub fn hermeticity_at(
    space: &MetricSpace,
    x: f64,
    grid: &RadiusGrid,
    sampler: &BallSampler<'_>,
) -> Result<HermeticityEstimate> {
    space.check(x)?;
    let ratios = grid
        .radii()
        .iter()
        .map(|&r| hermeticity_ratio(space, x, r, sampler))
        .collect::<Result<Vec<f64>>>()?;
    let len = ratios.len();
    let tail_start = len - (len / 2).max(1);
    let isolated = space.is_non_isolated(x) == Some(false);
    let liminf_estimate = if isolated {
        0.0
    } else {
        ratios[tail_start..]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    };
    Ok(HermeticityEstimate {
        x,
        radii: grid.radii().to_vec(),
        ratios,
        tail_start,
        liminf_estimate,
        isolated,
    })
}

/// Estimate of `H(X)` over a set of probes.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalHermeticity {
    /// Min of the probe estimates; `None` when `X^d` is empty.
    pub value: Option<f64>,
    pub argmin: Option<f64>,
    /// Set when `X^d = ∅`, where the infimum is left undefined.
    pub undefined: bool,
    /// Estimates at the probes lying in `X^d`.
    pub probes: Vec<HermeticityEstimate>,
}

/// Min of `H(X, x)` estimates over the probes that are accumulation points,
/// each on its own [`hermeticity_radii`] grid.
pub fn hermeticity_global(
    space: &MetricSpace,
    probes: &[f64],
    r0: f64,
    count: usize,
    sampler: &BallSampler<'_>,
) -> Result<GlobalHermeticity> {
    if probes.is_empty() {
        return Err(Error::InvalidArgument("probe set is empty".into()));
    }
    for &x in probes {
        space.check(x)?;
    }
    if !space.has_non_isolated_points() {
        return Ok(GlobalHermeticity {
            value: None,
            argmin: None,
            undefined: true,
            probes: Vec::new(),
        });
    }
    let mut out = Vec::new();
    for &x in probes {
        if space.is_non_isolated(x) != Some(true) {
            continue;
        }
        let grid = hermeticity_radii(space, x, r0, count)?;
        out.push(hermeticity_at(space, x, &grid, sampler)?);
    }
    let best = out
        .iter()
        .min_by(|p, q| p.liminf_estimate.total_cmp(&q.liminf_estimate))
        .ok_or_else(|| Error::InvalidArgument("no probe is an accumulation point".into()))?;
    Ok(GlobalHermeticity {
        value: Some(best.liminf_estimate),
        argmin: Some(best.x),
        undefined: false,
        probes: out,
    })
}

/// A point `u` with `λr <= d(x, u) <= r`, or `None` if none was found.
///
/// On the lines the candidates are the points at metric distance `r` on
/// either side, then the middle of the annulus; on the discrete models the
/// farthest qualifying point is returned.
pub fn annulus_witness(space: &MetricSpace, x: f64, lambda: f64, r: f64) -> Result<Option<f64>> {
    space.check(x)?;
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(alloc::format!(
            "lambda must lie in [0, 1), got {lambda}"
        )));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::NonPositive {
            name: "radius",
            value: r,
        });
    }
    let ok = |u: f64| {
        let d = space.metric(x, u);
        u != x && lambda * r <= d && d <= r
    };
    if let Some(line) = space.line() {
        let m = line.coord(x);
        let (c0, c1) = line.coord_bounds();
        let mid = 0.5 * (1.0 + lambda) * r;
        for t in [m + r, m - r, m + mid, m - mid] {
            if (c0..=c1).contains(&t) {
                let u = line.point(t);
                if ok(u) {
                    return Ok(Some(u));
                }
            }
        }
        return Ok(None);
    }
    Ok(space
        .discrete_points()
        .unwrap_or(&[])
        .iter()
        .copied()
        .filter(|&u| ok(u))
        .max_by(|&p, &q| space.metric(x, p).total_cmp(&space.metric(x, q))))
}
