//! Concrete carriers: intervals, warped lines, finite point sets and gap
//! sequences.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Strictly increasing map used to warp the metric of a line.
///
/// A warped line carries the metric `d(x, y) = |w(x) - w(y)|`. The value
/// `w(x)` is called the metric coordinate of `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Warp {
    Identity,
    Cube,
}

impl Warp {
    pub fn apply(self, t: f64) -> f64 {
        match self {
            Warp::Identity => t,
            Warp::Cube => t * t * t,
        }
    }

    pub fn invert(self, m: f64) -> f64 {
        match self {
            Warp::Identity => m,
            Warp::Cube => libm::cbrt(m),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Warp::Identity => "identity",
            Warp::Cube => "cube",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "identity" => Some(Warp::Identity),
            "cube" => Some(Warp::Cube),
            _ => None,
        }
    }
}

/// A closed segment `[lo, hi]` of the real line with a warped metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line {
    lo: f64,
    hi: f64,
    warp: Warp,
}

impl Line {
    pub fn new(lo: f64, hi: f64, warp: Warp) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidModel(format!(
                "line needs finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Line { lo, hi, warp })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn warp(&self) -> Warp {
        self.warp
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Metric coordinate `w(x)`.
    pub fn coord(&self, x: f64) -> f64 {
        self.warp.apply(x)
    }

    /// Carrier point with metric coordinate `m`, clamped to the carrier.
    pub fn point(&self, m: f64) -> f64 {
        self.warp.invert(m).clamp(self.lo, self.hi)
    }

    pub fn metric(&self, x: f64, y: f64) -> f64 {
        (self.coord(x) - self.coord(y)).abs()
    }

    /// Metric coordinates of the two carrier ends.
    pub fn coord_bounds(&self) -> (f64, f64) {
        (self.coord(self.lo), self.coord(self.hi))
    }

    /// Length of the carrier measured in the metric.
    pub fn diameter(&self) -> f64 {
        self.metric(self.lo, self.hi)
    }
}

/// Finitely many abstract points, labelled by distinct reals.
///
/// The metric is either `|x - y|` on the labels or an explicit table.
#[derive(Clone, Debug, PartialEq)]
pub struct FinitePointSet {
    labels: Vec<f64>,
    table: Option<Vec<f64>>,
}

/// Tables up to this size get a full triangle-inequality check on construction.
const TRIANGLE_CHECK_LIMIT: usize = 128;

impl FinitePointSet {
    pub fn new(labels: Vec<f64>) -> Result<Self> {
        let labels = sorted_distinct(labels)?;
        Ok(FinitePointSet { labels, table: None })
    }

    /// Points with an explicit distance table; `table[i][j]` is the distance
    /// between `labels[i]` and `labels[j]`.
    pub fn with_table(labels: Vec<f64>, table: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidModel(format!(
                "distance table must be {n}x{n}"
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| labels[i].total_cmp(&labels[j]));
        let sorted: Vec<f64> = order.iter().map(|&i| labels[i]).collect();
        let sorted = sorted_distinct(sorted)?;
        let mut flat = Vec::with_capacity(n * n);
        for &i in &order {
            for &j in &order {
                flat.push(table[i][j]);
            }
        }
        for i in 0..n {
            if flat[i * n + i] != 0.0 {
                return Err(Error::InvalidModel(format!(
                    "distance of point {} to itself is not zero",
                    sorted[i]
                )));
            }
            for j in 0..n {
                let d = flat[i * n + j];
                if !d.is_finite() || d < 0.0 || (i != j && d == 0.0) {
                    return Err(Error::InvalidModel(format!(
                        "invalid distance {d} between {} and {}",
                        sorted[i], sorted[j]
                    )));
                }
                if d != flat[j * n + i] {
                    return Err(Error::InvalidModel(format!(
                        "distance table is not symmetric at ({}, {})",
                        sorted[i], sorted[j]
                    )));
                }
            }
        }
        if n <= TRIANGLE_CHECK_LIMIT {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let direct = flat[i * n + k];
                        let detour = flat[i * n + j] + flat[j * n + k];
                        if direct > detour * (1.0 + 1e-12) {
                            return Err(Error::InvalidModel(format!(
                                "triangle inequality fails for ({}, {}, {})",
                                sorted[i], sorted[j], sorted[k]
                            )));
                        }
                    }
                }
            }
        }
        Ok(FinitePointSet {
            labels: sorted,
            table: Some(flat),
        })
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn has_table(&self) -> bool {
        self.table.is_some()
    }

    pub fn index_of(&self, x: f64) -> Option<usize> {
        self.labels.binary_search_by(|p| p.total_cmp(&x)).ok()
    }

    fn metric(&self, x: f64, y: f64) -> f64 {
        match &self.table {
            None => (x - y).abs(),
            Some(flat) => match (self.index_of(x), self.index_of(y)) {
                (Some(i), Some(j)) => flat[i * self.labels.len() + j],
                _ => f64::NAN,
            },
        }
    }
}

/// The subspace `{0} ∪ {g_1 > g_2 > ...}` of the real line, with `g_k → 0`.
///
/// Only a finite prefix of the gaps is stored; `0` is the single
/// accumulation point.
#[derive(Clone, Debug, PartialEq)]
pub struct GapSequence {
    // ascending, points[0] == 0
    points: Vec<f64>,
}

impl GapSequence {
    /// `values` must be positive and strictly decreasing.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidModel("gap sequence needs at least one value".into()));
        }
        for w in values.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::InvalidModel(format!(
                    "gap values must strictly decrease, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(&v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidModel(format!("gap value {v} is not positive")));
        }
        let mut points = Vec::with_capacity(values.len() + 1);
        points.push(0.0);
        points.extend(values.iter().rev());
        Ok(GapSequence { points })
    }

    /// The factorial gaps `1/n!` for `n = 1..=terms`.
    pub fn factorial(terms: usize) -> Result<Self> {
        let mut values = Vec::with_capacity(terms);
        let mut g = 1.0;
        for n in 1..=terms {
            g /= n as f64;
            values.push(g);
        }
        GapSequence::new(values)
    }

    /// All carrier points, ascending, starting with `0`.
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// The gap values in decreasing order.
    pub fn gaps(&self) -> impl Iterator<Item = f64> + '_ {
        self.points[1..].iter().rev().copied()
    }
}

fn sorted_distinct(mut labels: Vec<f64>) -> Result<Vec<f64>> {
    if labels.is_empty() {
        return Err(Error::InvalidModel("point set is empty".into()));
    }
    if let Some(&p) = labels.iter().find(|p| !p.is_finite()) {
        return Err(Error::InvalidModel(format!("point label {p} is not finite")));
    }
    labels.sort_by(f64::total_cmp);
    if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidModel(format!("duplicate point label {}", w[0])));
    }
    Ok(labels)
}

/// A metric space from the fixed menu of models.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricSpace {
    /// `[lo, hi]` with the Euclidean metric.
    Interval(Line),
    /// `[lo, hi]` with metric `|w(x) - w(y)|`.
    WarpedLine(Line),
    FinitePointSet(FinitePointSet),
    GapSequence(GapSequence),
}

impl MetricSpace {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Line::new(lo, hi, Warp::Identity).map(MetricSpace::Interval)
    }

    pub fn warped(lo: f64, hi: f64, warp: Warp) -> Result<Self> {
        Line::new(lo, hi, warp).map(MetricSpace::WarpedLine)
    }

    pub fn finite(labels: Vec<f64>) -> Result<Self> {
        FinitePointSet::new(labels).map(MetricSpace::FinitePointSet)
    }

    pub fn finite_with_table(labels: Vec<f64>, table: Vec<Vec<f64>>) -> Result<Self> {
        FinitePointSet::with_table(labels, table).map(MetricSpace::FinitePointSet)
    }

    pub fn gap_sequence(values: Vec<f64>) -> Result<Self> {
        GapSequence::new(values).map(MetricSpace::GapSequence)
    }

    /// `{1/n! : 1 <= n <= terms} ∪ {0}`.
    pub fn factorial_gaps(terms: usize) -> Result<Self> {
        GapSequence::factorial(terms).map(MetricSpace::GapSequence)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            MetricSpace::Interval(_) => "interval",
            MetricSpace::WarpedLine(_) => "warped_line",
            MetricSpace::FinitePointSet(_) => "finite_point_set",
            MetricSpace::GapSequence(_) => "gap_sequence",
        }
    }

    /// The underlying line for the continuum models.
    pub fn line(&self) -> Option<&Line> {
        match self {
            MetricSpace::Interval(l) | MetricSpace::WarpedLine(l) => Some(l),
            _ => None,
        }
    }

    /// Carrier points of the discrete models, ascending.
    pub fn discrete_points(&self) -> Option<&[f64]> {
        match self {
            MetricSpace::FinitePointSet(f) => Some(f.labels()),
            MetricSpace::GapSequence(g) => Some(g.points()),
            _ => None,
        }
    }

    /// True when `d(x, y) = |coord(x) - coord(y)|` for an increasing `coord`,
    /// so that nearest points can be found by order.
    pub fn is_ordered(&self) -> bool {
        match self {
            MetricSpace::FinitePointSet(f) => !f.has_table(),
            _ => true,
        }
    }

    /// Metric coordinate of `x` on an ordered model.
    pub fn coord(&self, x: f64) -> f64 {
        match self {
            MetricSpace::Interval(l) | MetricSpace::WarpedLine(l) => l.coord(x),
            _ => x,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match self {
            MetricSpace::Interval(l) | MetricSpace::WarpedLine(l) => l.contains(x),
            MetricSpace::FinitePointSet(f) => f.index_of(x).is_some(),
            MetricSpace::GapSequence(g) => g.points.binary_search_by(|p| p.total_cmp(&x)).is_ok(),
        }
    }

    pub fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideCarrier(x))
        }
    }

    pub fn distance(&self, x: f64, y: f64) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.metric(x, y))
    }

    /// Distance without carrier checks.
    pub(crate) fn metric(&self, x: f64, y: f64) -> f64 {
        match self {
            MetricSpace::Interval(l) | MetricSpace::WarpedLine(l) => l.metric(x, y),
            MetricSpace::FinitePointSet(f) => f.metric(x, y),
            MetricSpace::GapSequence(_) => (x - y).abs(),
        }
    }

    /// Whether `x` is an accumulation point of the carrier; `None` when `x`
    /// is not a carrier point.
    pub fn is_non_isolated(&self, x: f64) -> Option<bool> {
        if !self.contains(x) {
            return None;
        }
        Some(match self {
            MetricSpace::Interval(_) | MetricSpace::WarpedLine(_) => true,
            MetricSpace::FinitePointSet(_) => false,
            MetricSpace::GapSequence(_) => x == 0.0,
        })
    }

    /// Whether the set of accumulation points is nonempty.
    pub fn has_non_isolated_points(&self) -> bool {
        !matches!(self, MetricSpace::FinitePointSet(_))
    }

    /// Hermeticity known in closed form for the model, if any.
    ///
    /// Both continuum models are isometric to a segment of the real line,
    /// whose hermeticity is 1.
    pub fn analytic_hermeticity(&self) -> Option<f64> {
        match self {
            MetricSpace::Interval(_) | MetricSpace::WarpedLine(_) => Some(1.0),
            _ => None,
        }
    }

    /// Deterministic stream of carrier points at metric resolution `h`.
    ///
    /// On the lines this walks the metric coordinate from one end to the
    /// other and always includes both ends; discrete models yield every
    /// point.
    pub fn candidates(&self, h: f64) -> Result<Vec<f64>> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::NonPositive {
                name: "resolution",
                value: h,
            });
        }
        Ok(match self {
            MetricSpace::Interval(l) | MetricSpace::WarpedLine(l) => {
                let (m0, m1) = l.coord_bounds();
                let steps = libm::ceil((m1 - m0) / h) as usize;
                let mut out = Vec::with_capacity(steps + 1);
                for i in 0..steps {
                    out.push(l.point(m0 + i as f64 * h));
                }
                out.push(l.hi());
                out.dedup();
                out
            }
            MetricSpace::FinitePointSet(f) => f.labels().to_vec(),
            MetricSpace::GapSequence(g) => g.points().to_vec(),
        })
    }
}
