//! JSON experiment configuration, schema version 1.
//!
//! Parsing rejects unknown keys. [`ExperimentConfig::plan`] then checks every
//! precondition of the core modules and resolves probes, radii and
//! parameters, without building a chain.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use twlip_core::lip::{RadiusGrid, Schedule, DEFAULT_R0, DEFAULT_RADII, DEFAULT_SAMPLES};
use twlip_core::tw::{validate_center, DEFAULT_DEPTH, DEFAULT_TOLERANCE};
use twlip_core::{ClosedSet, MetricSpace, Segment, TwParams, Warp};

use crate::error::{Context, HarnessError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub space: SpaceSpec,
    #[serde(default)]
    pub center: Option<CenterSpec>,
    #[serde(default)]
    pub params: Option<ParamsSpec>,
    #[serde(default = "default_depth")]
    pub depth: u32,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub probes: ProbeSpec,
    #[serde(default)]
    pub radii: RadiiSpec,
    /// Inclusive window `[lo, hi]` of schedule levels; tail levels if unset.
    #[serde(default)]
    pub schedule_levels: Option<[u32; 2]>,
    #[serde(default)]
    pub sampler: SamplerSpec,
    #[serde(default)]
    pub hermeticity: HermeticitySpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub point_cap: Option<usize>,
    /// Output directory, overridden by `--out`.
    #[serde(default)]
    pub output: Option<String>,
}

fn default_depth() -> u32 {
    DEFAULT_DEPTH
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    Interval {
        lo: f64,
        hi: f64,
    },
    WarpedLine {
        lo: f64,
        hi: f64,
        warp: String,
    },
    FinitePointSet {
        points: Vec<f64>,
        #[serde(default)]
        table: Option<Vec<Vec<f64>>>,
    },
    GapSequence {
        values: Vec<f64>,
    },
    FactorialGaps {
        terms: usize,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CenterSpec {
    /// Closed segments `[lo, hi]`.
    #[serde(default)]
    pub components: Vec<[f64; 2]>,
    #[serde(default)]
    pub points: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "regime", rename_all = "snake_case", deny_unknown_fields)]
pub enum ParamsSpec {
    Standard {
        a: f64,
        b: f64,
        c: f64,
    },
    General {
        a: f64,
        b: f64,
        c: f64,
    },
    DeriveHermetic {
        a: f64,
        b: f64,
        h: HSource,
        #[serde(default)]
        c: Option<f64>,
    },
}

/// Where the hermeticity used to derive the hermetic constants comes from.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum HSource {
    /// The closed form of the model.
    Analytic,
    Value { h: f64 },
    /// Estimated over the configured probes.
    Estimate,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    #[serde(default)]
    pub explicit: Vec<f64>,
    #[serde(default)]
    pub on_center: Option<CountSpec>,
    #[serde(default)]
    pub off_center: Option<OffCenterSpec>,
    /// Uniform in metric coordinates, drawn from the config seed.
    #[serde(default)]
    pub random: Option<CountSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CountSpec {
    pub count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OffCenterSpec {
    pub count: usize,
    /// Smallest admissible `d(x, A)`.
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RadiiSpec {
    #[serde(default = "default_r0")]
    pub r0: f64,
    #[serde(default = "default_radii")]
    pub count: usize,
    /// Radii per factor `a`.
    #[serde(default = "default_subdivisions")]
    pub subdivisions: u32,
}

fn default_r0() -> f64 {
    DEFAULT_R0
}

fn default_radii() -> usize {
    DEFAULT_RADII
}

fn default_subdivisions() -> u32 {
    1
}

impl Default for RadiiSpec {
    fn default() -> Self {
        RadiiSpec {
            r0: DEFAULT_R0,
            count: DEFAULT_RADII,
            subdivisions: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_true")]
    pub kinks: bool,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_true() -> bool {
    true
}

impl Default for SamplerSpec {
    fn default() -> Self {
        SamplerSpec {
            samples: DEFAULT_SAMPLES,
            kinks: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HermeticitySpec {
    #[serde(default = "default_r0")]
    pub r0: f64,
    #[serde(default = "default_radii")]
    pub count: usize,
}

impl Default for HermeticitySpec {
    fn default() -> Self {
        HermeticitySpec {
            r0: DEFAULT_R0,
            count: DEFAULT_RADII,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text).map_err(|source| HarnessError::Json {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn space(&self) -> Result<MetricSpace> {
        if self.version != SCHEMA_VERSION {
            return Err(HarnessError::invalid(
                "harness_cli",
                "version",
                format!("unsupported schema version {}, expected {SCHEMA_VERSION}", self.version),
            ));
        }
        let space = match &self.space {
            SpaceSpec::Interval { lo, hi } => MetricSpace::interval(*lo, *hi),
            SpaceSpec::WarpedLine { lo, hi, warp } => {
                let w = Warp::from_name(warp).ok_or_else(|| {
                    HarnessError::invalid(
                        "metric_space",
                        "space.warp",
                        format!("unknown warp {warp:?}, expected \"identity\" or \"cube\""),
                    )
                })?;
                MetricSpace::warped(*lo, *hi, w)
            }
            SpaceSpec::FinitePointSet { points, table } => match table {
                Some(t) => MetricSpace::finite_with_table(points.clone(), t.clone()),
                None => MetricSpace::finite(points.clone()),
            },
            SpaceSpec::GapSequence { values } => MetricSpace::gap_sequence(values.clone()),
            SpaceSpec::FactorialGaps { terms } => MetricSpace::factorial_gaps(*terms),
        };
        space.at("metric_space", "space")
    }

    /// Resolves the parts needed by the hermeticity verb only.
    pub fn probe_plan(&self) -> Result<(MetricSpace, Vec<f64>)> {
        let space = self.space()?;
        let center = match &self.center {
            Some(c) => Some(center_set(c, &space)?),
            None => None,
        };
        let probes = resolve_probes(&self.probes, &space, center.as_ref(), self.seed)?;
        Ok((space, probes))
    }

    /// Validates the whole config for a sweep.
    pub fn plan(&self) -> Result<Plan> {
        let space = self.space()?;
        let center_spec = self
            .center
            .as_ref()
            .ok_or_else(|| HarnessError::invalid("harness_cli", "center", "required by this command"))?;
        let center = center_set(center_spec, &space)?;
        validate_center(&space, &center).at("tw_function", "center")?;
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(HarnessError::invalid(
                "tw_function",
                "tolerance",
                format!("must be positive, got {}", self.tolerance),
            ));
        }
        let probes = resolve_probes(&self.probes, &space, Some(&center), self.seed)?;
        let params_spec = self
            .params
            .as_ref()
            .ok_or_else(|| HarnessError::invalid("harness_cli", "params", "required by this command"))?;
        let params = resolve_params(params_spec, &space, &probes, &self.hermeticity)?;
        let grid = RadiusGrid::aligned(
            params.a,
            self.radii.r0,
            self.radii.count,
            self.radii.subdivisions,
        )
        .at("lip_derivatives", "radii")?;
        if grid.len() < twlip_core::lip::MIN_PROFILE_LEN {
            return Err(HarnessError::invalid(
                "lip_derivatives",
                "radii.count",
                format!(
                    "{} radii given, at least {} are required",
                    grid.len(),
                    twlip_core::lip::MIN_PROFILE_LEN
                ),
            ));
        }
        let schedule = match params.regime {
            twlip_core::tw::Regime::General => None,
            _ => {
                let s = Schedule::for_params(&params).at("lip_derivatives", "params")?;
                Some(match self.schedule_levels {
                    Some([lo, hi]) if lo <= hi => s.with_levels(lo, hi),
                    Some([lo, hi]) => {
                        return Err(HarnessError::invalid(
                            "lip_derivatives",
                            "schedule_levels",
                            format!("empty window [{lo}, {hi}]"),
                        ))
                    }
                    None => s,
                })
            }
        };
        if self.sampler.samples == 0 {
            return Err(HarnessError::invalid("lip_derivatives", "sampler.samples", "must be positive"));
        }
        if self.workers == Some(0) {
            return Err(HarnessError::invalid("harness_cli", "workers", "must be positive"));
        }
        Ok(Plan {
            space,
            center,
            params,
            depth: self.depth,
            tolerance: self.tolerance,
            probes,
            grid,
            schedule,
            samples: self.sampler.samples,
            kinks: self.sampler.kinks,
            workers: self.workers.unwrap_or(1),
            point_cap: self.point_cap,
        })
    }
}

/// A validated experiment, ready to run.
#[derive(Clone, Debug)]
pub struct Plan {
    pub space: MetricSpace,
    pub center: ClosedSet,
    pub params: TwParams,
    pub depth: u32,
    pub tolerance: f64,
    pub probes: Vec<f64>,
    pub grid: RadiusGrid,
    pub schedule: Option<Schedule>,
    pub samples: usize,
    pub kinks: bool,
    pub workers: usize,
    pub point_cap: Option<usize>,
}

fn center_set(spec: &CenterSpec, space: &MetricSpace) -> Result<ClosedSet> {
    let parts = spec
        .components
        .iter()
        .map(|&[lo, hi]| Segment::new(lo, hi))
        .chain(spec.points.iter().map(|&p| Segment::point(p)));
    let set = ClosedSet::new(parts).at("metric_space", "center")?;
    set.validate_in(space).at("metric_space", "center")?;
    Ok(set)
}

fn resolve_params(
    spec: &ParamsSpec,
    space: &MetricSpace,
    probes: &[f64],
    herm: &HermeticitySpec,
) -> Result<TwParams> {
    let field = "params";
    match *spec {
        ParamsSpec::Standard { a, b, c } => TwParams::standard(a, b, c).at("tw_function", field),
        ParamsSpec::General { a, b, c } => TwParams::general(a, b, c).at("tw_function", field),
        ParamsSpec::DeriveHermetic { a, b, ref h, c } => {
            let h = match h {
                HSource::Analytic => space.analytic_hermeticity().ok_or_else(|| {
                    HarnessError::invalid(
                        "hermeticity",
                        "params.h",
                        format!("no closed form for a {}", space.kind_name()),
                    )
                })?,
                HSource::Value { h } => *h,
                HSource::Estimate => {
                    let sampler = twlip_core::lip::BallSampler::default();
                    let g = twlip_core::hermeticity::hermeticity_global(
                        space, probes, herm.r0, herm.count, &sampler,
                    )
                    .at("hermeticity", "params.h")?;
                    g.value.ok_or_else(|| {
                        HarnessError::invalid(
                            "hermeticity",
                            "params.h",
                            "H(X) is undefined because the space has no accumulation points",
                        )
                    })?
                }
            };
            TwParams::hermetic(a, b, h, c).at("tw_function", field)
        }
    }
}

fn resolve_probes(
    spec: &ProbeSpec,
    space: &MetricSpace,
    center: Option<&ClosedSet>,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = Vec::new();
    for &x in &spec.explicit {
        space.check(x).at("metric_space", "probes.explicit")?;
        out.push(x);
    }
    if let Some(c) = &spec.on_center {
        let center = center.ok_or_else(|| {
            HarnessError::invalid("harness_cli", "probes.on_center", "needs a center set")
        })?;
        out.extend(on_center_probes(center, c.count));
    }
    if let Some(o) = &spec.off_center {
        let center = center.ok_or_else(|| {
            HarnessError::invalid("harness_cli", "probes.off_center", "needs a center set")
        })?;
        out.extend(off_center_probes(space, center, o)?);
    }
    if let Some(r) = &spec.random {
        out.extend(random_probes(space, r.count, seed));
    }
    let mut seen: Vec<f64> = Vec::with_capacity(out.len());
    out.retain(|&x| {
        if seen.contains(&x) {
            false
        } else {
            seen.push(x);
            true
        }
    });
    Ok(out)
}

/// One probe per isolated point of `A`, the rest evenly spread over the
/// segments of `A` by length, ends included.
pub fn on_center_probes(center: &ClosedSet, count: usize) -> Vec<f64> {
    let points: Vec<f64> = center.parts().iter().filter(|s| s.is_point()).map(|s| s.lo).collect();
    let segs: Vec<Segment> = center.parts().iter().filter(|s| !s.is_point()).copied().collect();
    if segs.is_empty() {
        return points.into_iter().cycle().take(count.min(center.parts().len())).collect();
    }
    let k = count.saturating_sub(points.len());
    let total: f64 = segs.iter().map(|s| s.hi - s.lo).sum();
    let mut out = Vec::with_capacity(count);
    for i in 0..k {
        let mut t = if k == 1 { 0.0 } else { total * i as f64 / (k - 1) as f64 };
        let mut x = segs[segs.len() - 1].hi;
        for s in &segs {
            let w = s.hi - s.lo;
            if t <= w {
                x = (s.lo + t).min(s.hi);
                break;
            }
            t -= w;
        }
        out.push(x);
    }
    out.extend(points.iter().take(count));
    out
}

fn carrier_grid(space: &MetricSpace, n: usize) -> Vec<f64> {
    match space.line() {
        Some(line) => {
            let (c0, c1) = line.coord_bounds();
            (0..n)
                .map(|i| line.point(c0 + (c1 - c0) * i as f64 / (n - 1).max(1) as f64))
                .collect()
        }
        None => space.discrete_points().unwrap_or(&[]).to_vec(),
    }
}

/// `count` carrier points with `d(x, A) >= margin`, evenly chosen from a fine
/// grid of the carrier.
pub fn off_center_probes(
    space: &MetricSpace,
    center: &ClosedSet,
    spec: &OffCenterSpec,
) -> Result<Vec<f64>> {
    if spec.margin.is_nan() || spec.margin <= 0.0 {
        return Err(HarnessError::invalid(
            "harness_cli",
            "probes.off_center.margin",
            "must be positive",
        ));
    }
    let pool: Vec<f64> = carrier_grid(space, 64 * spec.count.max(1) + 1)
        .into_iter()
        .filter(|&x| center.distance(space, x).is_ok_and(|d| d >= spec.margin))
        .collect();
    if pool.len() < spec.count {
        return Err(HarnessError::invalid(
            "harness_cli",
            "probes.off_center",
            format!("only {} carrier points lie at distance >= {} from the center", pool.len(), spec.margin),
        ));
    }
    let n = spec.count;
    Ok((0..n)
        .map(|i| {
            let j = if n == 1 { pool.len() / 2 } else { i * (pool.len() - 1) / (n - 1) };
            pool[j]
        })
        .collect())
}

fn random_probes(space: &MetricSpace, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match space.line() {
        Some(line) => {
            let (c0, c1) = line.coord_bounds();
            (0..count).map(|_| line.point(rng.gen_range(c0..=c1))).collect()
        }
        None => {
            let pts = space.discrete_points().unwrap_or(&[]);
            if pts.is_empty() {
                return Vec::new();
            }
            (0..count).map(|_| pts[rng.gen_range(0..pts.len())]).collect()
        }
    }
}
