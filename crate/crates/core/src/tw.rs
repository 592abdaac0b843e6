//! Centered Takagi-van der Waerden functions
//! `f(x) = Σ_n b^n d(x, T_n)` with `T_n = ∁G_n ∪ S_n`, `G_n = B_{c/a^n}(A)`
//! and `S_n` a maximal `1/a^n`-separated set in `G_n`.
//!
//! The chain is built in ascending form: `S_{n+1}` is seeded with
//! `S_n ∩ G_{n+1}`, which gives `T_n ⊆ T_{n+1}`. Once `x ∈ T_n` every later
//! term vanishes, so evaluation away from the center set is an exact finite
//! sum; near the center the series is truncated and the remainder bound
//! `b^n / ((a - b) a^(n-1))` is reported alongside the value.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::metric_space::{
    complement_in_carrier, distance_to_sorted, generalized_ball, ClosedSet, MetricSpace, OpenSet,
};
use crate::nets::{NetBuilder, SeparatedNet, DEFAULT_POINT_CAP};

/// Default evaluation tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Default chain depth.
pub const DEFAULT_DEPTH: u32 = 12;

/// Margin by which the hermetic regime backs `λ` off from `H`.
pub const HERMETIC_MARGIN: f64 = 0.01;

/// Constants of the hermetic regime.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermeticConstants {
    /// Hermeticity of the space the constants were derived for.
    pub h: f64,
    pub lambda: f64,
    pub alpha: f64,
    /// Smallest admissible `c`, namely `α + 1`.
    pub c_min: f64,
    /// `λ/8 - 1/(b-1) - 2b/(α(a-b))`, positive by construction.
    pub gamma: f64,
}

/// Which guarantees on the derivatives a parameter set carries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regime {
    /// Only `a > b >= 1`, `c > 0`: the function is well defined and bounded.
    General,
    /// `a > b > 2`, `c >= 1`: big and local derivatives blow up exactly on A.
    Standard,
    /// `a > b > 1 + 8/H`, `c >= α + 1`: the little derivative blows up too.
    Hermetic(HermeticConstants),
}

/// Type `(a, b, c)` of a centered function together with its regime.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub regime: Regime,
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite, got {v}")))
    }
}

impl TwParams {
    /// Any `a > b >= 1`, `c > 0`.
    pub fn general(a: f64, b: f64, c: f64) -> Result<Self> {
        finite("a", a)?;
        finite("b", b)?;
        finite("c", c)?;
        if !(a > b && b >= 1.0 && c > 0.0) {
            return Err(Error::Regime(format!(
                "a centered function requires a > b >= 1 and c > 0, got a={a}, b={b}, c={c}"
            )));
        }
        Ok(TwParams {
            a,
            b,
            c,
            regime: Regime::General,
        })
    }

    /// Parameters for which big and local derivatives are infinite exactly
    /// on the center set.
    pub fn standard(a: f64, b: f64, c: f64) -> Result<Self> {
        let mut p = TwParams::general(a, b, c)?;
        if !(b > 2.0 && c >= 1.0) {
            return Err(Error::Regime(format!(
                "the standard regime requires a > b > 2 and c >= 1, got a={a}, b={b}, c={c}"
            )));
        }
        p.regime = Regime::Standard;
        Ok(p)
    }

    /// Hermetic-regime parameters for a space of hermeticity `h`; `c`
    /// defaults to `⌈α⌉ + 1`.
    pub fn hermetic(a: f64, b: f64, h: f64, c: Option<f64>) -> Result<Self> {
        let k = derive_hermetic_constants(a, b, h)?;
        let c = c.unwrap_or(libm::ceil(k.alpha) + 1.0);
        finite("c", c)?;
        if c < k.c_min {
            return Err(Error::Regime(format!(
                "the hermetic regime requires c >= alpha + 1 = {}, got c={c}",
                k.c_min
            )));
        }
        Ok(TwParams {
            a,
            b,
            c,
            regime: Regime::Hermetic(k),
        })
    }

    pub fn hermetic_constants(&self) -> Option<&HermeticConstants> {
        match &self.regime {
            Regime::Hermetic(k) => Some(k),
            _ => None,
        }
    }

    pub fn regime_name(&self) -> &'static str {
        match self.regime {
            Regime::General => "general",
            Regime::Standard => "standard",
            Regime::Hermetic(_) => "hermetic",
        }
    }

    /// `a^n`.
    pub fn scale(&self, n: u32) -> f64 {
        libm::pow(self.a, n as f64)
    }

    /// `b^n`.
    pub fn weight(&self, n: u32) -> f64 {
        libm::pow(self.b, n as f64)
    }
}

/// `λ, α, c_min, γ` for the hermetic regime.
///
/// `λ = H(1 - η)` with `η = 0.01`; if that leaves no room above `8/(b-1)`,
/// `λ` falls back to the midpoint of `(8/(b-1), H)`. Then
/// `α = 2 · (2b/(a-b)) / (λ/8 - 1/(b-1))`, which puts `γ` at exactly half of
/// `λ/8 - 1/(b-1)`.
pub fn derive_hermetic_constants(a: f64, b: f64, h: f64) -> Result<HermeticConstants> {
    finite("a", a)?;
    finite("b", b)?;
    if !(h > 0.0) || h.is_nan() || h.is_infinite() {
        return Err(Error::Regime(format!(
            "the hermetic regime needs a finite positive hermeticity, got H={h}"
        )));
    }
    let threshold = 1.0 + 8.0 / h;
    if !(a > b && b > threshold) {
        return Err(Error::Regime(format!(
            "the hermetic regime requires a > b > 1 + 8/H = {threshold}, got a={a}, b={b}"
        )));
    }
    let needed = 1.0 / (b - 1.0);
    let mut lambda = h * (1.0 - HERMETIC_MARGIN);
    if lambda / 8.0 <= needed {
        lambda = 0.5 * (8.0 * needed + h);
    }
    let room = lambda / 8.0 - needed;
    let alpha = 2.0 * (2.0 * b / (a - b)) / room;
    let gamma = lambda / 8.0 - needed - 2.0 * b / (alpha * (a - b));
    if !(room > 0.0 && alpha > 0.0 && alpha.is_finite() && gamma > 0.0) {
        return Err(Error::Regime(format!(
            "no admissible constants for a={a}, b={b}, H={h}"
        )));
    }
    Ok(HermeticConstants {
        h,
        lambda,
        alpha,
        c_min: alpha + 1.0,
        gamma,
    })
}

/// `b^n / ((a - b) a^(n-1))`, the bound on the `n`-th remainder.
pub fn remainder_bound(params: &TwParams, n: u32) -> f64 {
    let (a, b) = (params.a, params.b);
    a / (a - b) * libm::pow(b / a, n as f64)
}

/// Lipschitz constant `(b^n - 1)/(b - 1)` of the `n`-th partial sum
/// (`n` when `b = 1`).
pub fn partial_sum_lipschitz(params: &TwParams, n: u32) -> f64 {
    if params.b == 1.0 {
        n as f64
    } else {
        (params.weight(n) - 1.0) / (params.b - 1.0)
    }
}

/// One level of the chain.
#[derive(Clone, Debug, PartialEq)]
pub struct Level {
    index: u32,
    radius: f64,
    epsilon: f64,
    ball: OpenSet,
    outside: ClosedSet,
    net: SeparatedNet,
    anchors: Vec<f64>,
}

impl Level {
    pub fn index(&self) -> u32 {
        self.index
    }

    /// `c / a^n`, the radius of `G_n`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `1 / a^n`, the separation of `S_n`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `G_n`.
    pub fn ball(&self) -> &OpenSet {
        &self.ball
    }

    /// `F_n = ∁G_n`.
    pub fn outside(&self) -> &ClosedSet {
        &self.outside
    }

    /// `S_n`.
    pub fn net(&self) -> &SeparatedNet {
        &self.net
    }

    /// Whether `x ∈ T_n`.
    pub fn target_contains(&self, x: f64) -> bool {
        self.outside.contains(x) || self.net.contains(x)
    }

    /// `d(x, T_n)` without carrier checks.
    pub(crate) fn target_distance(&self, space: &MetricSpace, x: f64) -> f64 {
        let d_out = self.outside.distance_unchecked(space, x);
        let d_net = distance_to_sorted(space, self.net.points(), x);
        d_out.min(d_net)
    }

    /// `d(x, T_n)`.
    pub fn distance_to_target(&self, space: &MetricSpace, x: f64) -> Result<f64> {
        space.check(x)?;
        Ok(self.target_distance(space, x))
    }

    /// Sorted points of `T_n` that are kinks of `d(·, T_n)`: the net points
    /// and the ends of the components of `F_n`.
    pub fn target_anchors(&self) -> &[f64] {
        &self.anchors
    }
}

fn anchors_of(net: &SeparatedNet, outside: &ClosedSet) -> Vec<f64> {
    let mut out: Vec<f64> = net.points().to_vec();
    for s in outside.parts() {
        out.push(s.lo);
        if s.hi != s.lo {
            out.push(s.hi);
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Result of [`NetChain::eval`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    /// Bound on the neglected remainder; zero when `exact`.
    pub truncation_bound: f64,
    /// Number of terms summed.
    pub levels_used: u32,
    pub exact: bool,
}

/// Options for [`build_chain`].
#[derive(Clone, Copy, Debug)]
pub struct ChainOptions {
    pub point_cap: usize,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            point_cap: DEFAULT_POINT_CAP,
        }
    }
}

/// The levels `0..=depth` of an ascending centered chain.
#[derive(Clone, Debug, PartialEq)]
pub struct NetChain {
    space: MetricSpace,
    center: ClosedSet,
    params: TwParams,
    levels: Vec<Level>,
}

/// Builds levels `0..=depth` with default options.
pub fn build_chain(
    space: &MetricSpace,
    center: &ClosedSet,
    params: &TwParams,
    depth: u32,
) -> Result<NetChain> {
    build_chain_with(space, center, params, depth, ChainOptions::default())
}

/// Checks that `center` can be the center of a chain on `space`.
pub fn validate_center(space: &MetricSpace, center: &ClosedSet) -> Result<()> {
    if center.is_empty() {
        return Err(Error::EmptyCenter);
    }
    center.validate_in(space)?;
    for s in center.parts() {
        for p in [s.lo, s.hi] {
            if space.is_non_isolated(p) != Some(true) {
                return Err(Error::IsolatedCenter(p));
            }
        }
    }
    Ok(())
}

pub fn build_chain_with(
    space: &MetricSpace,
    center: &ClosedSet,
    params: &TwParams,
    depth: u32,
    options: ChainOptions,
) -> Result<NetChain> {
    validate_center(space, center)?;
    let mut levels: Vec<Level> = Vec::with_capacity(depth as usize + 1);
    for n in 0..=depth {
        let scale = params.scale(n);
        let radius = params.c / scale;
        let epsilon = 1.0 / scale;
        let ball = generalized_ball(space, center, radius)?;
        let outside = complement_in_carrier(space, &ball);
        let seeds: Vec<f64> = match levels.last() {
            Some(prev) => prev
                .net
                .points()
                .iter()
                .copied()
                .filter(|&s| ball.contains(s))
                .collect(),
            None => Vec::new(),
        };
        let net = NetBuilder::new(epsilon)
            .seeds(&seeds)
            .cap(options.point_cap)
            .level(n)
            .build(space, &ball)?;
        let anchors = anchors_of(&net, &outside);
        levels.push(Level {
            index: n,
            radius,
            epsilon,
            ball,
            outside,
            net,
            anchors,
        });
    }
    Ok(NetChain {
        space: space.clone(),
        center: center.clone(),
        params: *params,
        levels,
    })
}

impl NetChain {
    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn center(&self) -> &ClosedSet {
        &self.center
    }

    pub fn params(&self) -> &TwParams {
        &self.params
    }

    pub fn depth(&self) -> u32 {
        self.levels.len() as u32 - 1
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, n: u32) -> Result<&Level> {
        self.levels.get(n as usize).ok_or(Error::LevelOutOfRange {
            level: n,
            depth: self.depth(),
        })
    }

    /// `f(x)`, summed until `x` enters some `T_n` (exact) or the remainder
    /// bound drops to `tol`, and at most over the built levels.
    ///
    /// An unreachable tolerance is not an error: the result is flagged
    /// inexact and carries its bound.
    pub fn eval(&self, x: f64, tol: f64) -> Result<EvalResult> {
        self.space.check(x)?;
        if !(tol > 0.0) {
            return Err(Error::NonPositive {
                name: "tolerance",
                value: tol,
            });
        }
        let mut sum = 0.0;
        for level in &self.levels {
            let n = level.index;
            let d = level.target_distance(&self.space, x);
            if d == 0.0 {
                return Ok(EvalResult {
                    value: sum,
                    truncation_bound: 0.0,
                    levels_used: n,
                    exact: true,
                });
            }
            let bound = remainder_bound(&self.params, n);
            if bound <= tol {
                return Ok(EvalResult {
                    value: sum,
                    truncation_bound: bound,
                    levels_used: n,
                    exact: false,
                });
            }
            sum += self.params.weight(n) * d;
        }
        let used = self.depth() + 1;
        Ok(EvalResult {
            value: sum,
            truncation_bound: remainder_bound(&self.params, used),
            levels_used: used,
            exact: false,
        })
    }

    /// `s_n(x) = Σ_{k<n} b^k d(x, T_k)`.
    pub fn partial_sum(&self, n: u32, x: f64) -> Result<f64> {
        self.space.check(x)?;
        if n > self.depth() + 1 {
            return Err(Error::LevelOutOfRange {
                level: n,
                depth: self.depth(),
            });
        }
        Ok(self.levels[..n as usize]
            .iter()
            .map(|l| self.params.weight(l.index) * l.target_distance(&self.space, x))
            .sum())
    }

    /// `Σ_{n<=k<=depth} b^k d(x, T_k)`, the remainder summed over the built
    /// levels.
    pub fn tail_sum(&self, n: u32, x: f64) -> Result<f64> {
        self.space.check(x)?;
        if n > self.depth() + 1 {
            return Err(Error::LevelOutOfRange {
                level: n,
                depth: self.depth(),
            });
        }
        Ok(self.levels[n as usize..]
            .iter()
            .map(|l| self.params.weight(l.index) * l.target_distance(&self.space, x))
            .sum())
    }

    /// Smallest level whose separation `1/a^n` is at most `r`, capped at the
    /// chain depth.
    pub fn level_for_radius(&self, r: f64) -> u32 {
        let mut n = 0;
        while n < self.depth() && 1.0 / self.params.scale(n) > r {
            n += 1;
        }
        n
    }

    /// A view of the chain as a real function with tolerance `tol`.
    pub fn function(&self, tol: f64) -> TwFunction<'_> {
        TwFunction { chain: self, tol }
    }
}

/// `x ↦ f(x)` for a built chain.
#[derive(Clone, Copy, Debug)]
pub struct TwFunction<'a> {
    chain: &'a NetChain,
    tol: f64,
}

impl TwFunction<'_> {
    pub fn chain(&self) -> &NetChain {
        self.chain
    }

    /// `f(x)`; NaN outside the carrier.
    pub fn value(&self, x: f64) -> f64 {
        self.chain.eval(x, self.tol).map_or(f64::NAN, |r| r.value)
    }
}
