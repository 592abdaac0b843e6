//! Running a validated experiment and the report it produces.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;
use twlip_core::hermeticity::{hermeticity_global, HermeticityEstimate};
use twlip_core::lip::{
    classify_blowup, derivative_estimate, lip_profile, local_lip_estimate, BallSampler,
    BlowupVerdict, LipProfile, Schedule,
};
use twlip_core::nets::{verify_dense, verify_separated, DEFAULT_PROBE_DIVISOR};
use twlip_core::tw::{build_chain_with, ChainOptions, EvalResult};
use twlip_core::{MetricSpace, NetChain, TwParams};

use crate::config::{ExperimentConfig, Plan};
use crate::error::{Context, Result};

/// Allowance added to the off-center bound `b^n0/(b-1)` when comparing.
pub const BOUND_SLACK: f64 = 1e-6;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ExperimentReport {
    pub version: u32,
    pub space: String,
    pub params: ParamsEcho,
    pub depth: u32,
    pub tolerance: f64,
    pub schedule: Option<ScheduleEcho>,
    pub chain: ChainSummary,
    pub probes: Vec<ProbeReport>,
    pub summary: Summary,
    /// Wall-clock times; the only nondeterministic part of a report.
    pub timing: Timing,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ParamsEcho {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub regime: String,
    pub hermetic: Option<HermeticEcho>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct HermeticEcho {
    pub h: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub c_min: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ScheduleEcho {
    pub coefficient: f64,
    pub base: f64,
    pub unit: f64,
    pub levels: Option<[u32; 2]>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ChainSummary {
    pub levels: Vec<LevelSummary>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct LevelSummary {
    pub level: u32,
    /// `c/a^n`
    pub radius: f64,
    /// `1/a^n`
    pub epsilon: f64,
    pub net_points: usize,
    pub outside_components: usize,
    pub separated: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ProfileRow {
    pub radius: f64,
    pub lip_r: f64,
    pub samples: usize,
    pub kinks_used: usize,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct LevelResult {
    pub level: u32,
    /// Schedule value the observation was compared against.
    pub bound: f64,
    pub observed: f64,
    pub radii: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Verdict {
    pub blows_up: bool,
    pub levels: Vec<LevelResult>,
    pub growth_base: Option<f64>,
    pub growth_quality: Option<f64>,
}

/// Off-center check: near `x` the function equals `s_n0`, whose local
/// Lipschitz constant is at most `b^n0/(b-1)`.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct BoundCheck {
    pub n0: u32,
    pub bound: f64,
    pub radius: f64,
    pub local: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ProbeReport {
    pub x: f64,
    pub on_center: bool,
    pub distance_to_center: f64,
    pub value: f64,
    pub big: f64,
    pub little: f64,
    pub local: f64,
    pub tail_start: usize,
    pub verdict: Option<Verdict>,
    pub bound_check: Option<BoundCheck>,
    /// On the center: the schedule verdict; off it: not blowing up and
    /// within the bound.
    pub pass: bool,
    pub profile: Vec<ProfileRow>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Summary {
    pub probes: usize,
    pub on_center: usize,
    pub off_center: usize,
    pub passed: usize,
    pub failed: usize,
    pub all_pass: bool,
}

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct Timing {
    pub build_ms: f64,
    pub sweep_ms: f64,
    pub total_ms: f64,
}

pub fn params_echo(p: &TwParams) -> ParamsEcho {
    ParamsEcho {
        a: p.a,
        b: p.b,
        c: p.c,
        regime: p.regime_name().to_string(),
        hermetic: p.hermetic_constants().map(|k| HermeticEcho {
            h: k.h,
            lambda: k.lambda,
            alpha: k.alpha,
            c_min: k.c_min,
            gamma: k.gamma,
        }),
    }
}

pub fn chain_summary(chain: &NetChain) -> ChainSummary {
    ChainSummary {
        levels: chain
            .levels()
            .iter()
            .map(|l| LevelSummary {
                level: l.index(),
                radius: l.radius(),
                epsilon: l.epsilon(),
                net_points: l.net().len(),
                outside_components: l.outside().parts().len(),
                separated: verify_separated(chain.space(), l.net()).separated,
            })
            .collect(),
    }
}

/// Builds the chain of a plan.
pub fn build(plan: &Plan) -> Result<NetChain> {
    let mut options = ChainOptions::default();
    if let Some(cap) = plan.point_cap {
        options.point_cap = cap;
    }
    build_chain_with(&plan.space, &plan.center, &plan.params, plan.depth, options)
        .at("nets", "depth")
}

/// Smallest `n0` with `d(x, A) > c/a^n0`.
pub fn off_center_level(params: &TwParams, d: f64) -> u32 {
    let mut n = 0;
    while d <= params.c / params.scale(n) {
        n += 1;
    }
    n
}

fn verdict_of(v: &BlowupVerdict) -> Verdict {
    Verdict {
        blows_up: v.blows_up,
        levels: v
            .levels
            .iter()
            .map(|c| LevelResult {
                level: c.level,
                bound: c.bound,
                observed: c.observed,
                radii: c.radii,
                pass: c.pass,
            })
            .collect(),
        growth_base: v.growth_fit.map(|g| g.base),
        growth_quality: v.growth_fit.map(|g| g.quality),
    }
}

fn profile_rows(p: &LipProfile) -> Vec<ProfileRow> {
    let counts = p.sample_counts();
    (0..p.len())
        .map(|k| ProfileRow {
            radius: p.radii()[k],
            lip_r: p.values()[k],
            samples: counts[k],
            kinks_used: p.kinks_used()[k],
        })
        .collect()
}

fn probe_report(plan: &Plan, chain: &NetChain, x: f64) -> Result<ProbeReport> {
    let f = chain.function(plan.tolerance);
    let g = |u: f64| f.value(u);
    let space = &plan.space;
    let mut sampler = BallSampler::new(plan.samples);
    if plan.kinks && space.line().is_some() {
        sampler = sampler.with_kinks(chain);
    }
    let profile = lip_profile(&g, space, x, &plan.grid, &sampler).at("lip_derivatives", "probes")?;
    let est = derivative_estimate(space, &profile, None).at("lip_derivatives", "radii")?;
    let verdict = match &plan.schedule {
        Some(s) => Some(verdict_of(
            &classify_blowup(&profile, s).at("lip_derivatives", "radii")?,
        )),
        None => None,
    };
    let d = plan.center.distance(space, x).at("metric_space", "probes")?;
    let on_center = d == 0.0;
    let bound_check = if on_center {
        None
    } else {
        let p = &plan.params;
        let n0 = off_center_level(p, d);
        let radius = 0.5 * (d - p.c / p.scale(n0));
        let local = local_lip_estimate(&g, space, x, radius, &sampler).at("lip_derivatives", "probes")?;
        let bound = p.weight(n0) / (p.b - 1.0);
        Some(BoundCheck {
            n0,
            bound,
            radius,
            local,
            pass: local <= bound + BOUND_SLACK,
        })
    };
    let pass = match (&verdict, &bound_check) {
        (Some(v), None) => v.blows_up,
        (None, None) => true,
        (v, Some(b)) => b.pass && !v.as_ref().is_some_and(|v| v.blows_up),
    };
    Ok(ProbeReport {
        x,
        on_center,
        distance_to_center: d,
        value: profile.fx(),
        big: est.big,
        little: est.little,
        local: est.local,
        tail_start: est.tail_start,
        verdict,
        bound_check,
        pass,
        profile: profile_rows(&profile),
    })
}

/// Runs `job` on every item with `workers` threads, keeping input order.
pub fn parallel_map<T: Sync, R: Send>(
    items: &[T],
    workers: usize,
    job: impl Fn(&T) -> R + Sync,
) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = job(&items[i]);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every slot is filled"))
        .collect()
}

fn schedule_echo(s: &Schedule) -> ScheduleEcho {
    ScheduleEcho {
        coefficient: s.coefficient,
        base: s.b,
        unit: s.unit,
        levels: s.levels.map(|(lo, hi)| [lo, hi]),
    }
}

/// Validates `config`, builds the chain and sweeps every probe.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let plan = config.plan()?;
    run_plan(&plan)
}

pub fn run_plan(plan: &Plan) -> Result<ExperimentReport> {
    let start = Instant::now();
    let chain = build(plan)?;
    let built = Instant::now();
    let probes = parallel_map(&plan.probes, plan.workers, |&x| probe_report(plan, &chain, x))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let done = Instant::now();
    let passed = probes.iter().filter(|p| p.pass).count();
    let on_center = probes.iter().filter(|p| p.on_center).count();
    Ok(ExperimentReport {
        version: crate::config::SCHEMA_VERSION,
        space: plan.space.kind_name().to_string(),
        params: params_echo(&plan.params),
        depth: plan.depth,
        tolerance: plan.tolerance,
        schedule: plan.schedule.as_ref().map(schedule_echo),
        chain: chain_summary(&chain),
        summary: Summary {
            probes: probes.len(),
            on_center,
            off_center: probes.len() - on_center,
            passed,
            failed: probes.len() - passed,
            all_pass: passed == probes.len(),
        },
        probes,
        timing: Timing {
            build_ms: ms(built - start),
            sweep_ms: ms(done - built),
            total_ms: ms(done - start),
        },
    })
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Per-level net checks of a built chain, as run by the `build` verb.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct BuildReport {
    pub params: ParamsEcho,
    pub depth: u32,
    pub chain: ChainSummary,
    /// Density verified at resolution `ε/16` on every level.
    pub dense: Vec<bool>,
    /// `T_n ⊆ T_(n+1)` for consecutive levels.
    pub ascending: bool,
}

pub fn build_report(chain: &NetChain) -> Result<BuildReport> {
    let space = chain.space();
    let mut dense = Vec::new();
    for l in chain.levels() {
        let res = l.epsilon() / DEFAULT_PROBE_DIVISOR;
        dense.push(verify_dense(space, l.net(), res).at("nets", "depth")?.dense);
    }
    Ok(BuildReport {
        params: params_echo(chain.params()),
        depth: chain.depth(),
        chain: chain_summary(chain),
        dense,
        ascending: is_ascending(chain),
    })
}

/// `T_n ⊆ T_(n+1)`: net points stay targets, and the outside sets grow.
pub fn is_ascending(chain: &NetChain) -> bool {
    chain.levels().windows(2).all(|w| {
        w[0].net().points().iter().all(|&s| w[1].target_contains(s))
            && w[0].outside().is_subset_of(w[1].outside())
    })
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct EvalReport {
    pub x: f64,
    pub value: f64,
    pub truncation_bound: f64,
    pub levels_used: u32,
    pub exact: bool,
}

impl From<(f64, EvalResult)> for EvalReport {
    fn from((x, e): (f64, EvalResult)) -> Self {
        EvalReport {
            x,
            value: e.value,
            truncation_bound: e.truncation_bound,
            levels_used: e.levels_used,
            exact: e.exact,
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct HermeticityReport {
    pub space: String,
    pub value: Option<f64>,
    pub argmin: Option<f64>,
    pub undefined: bool,
    pub analytic: Option<f64>,
    pub probes: Vec<HermeticityProbe>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct HermeticityProbe {
    pub x: f64,
    pub liminf_estimate: f64,
    pub radii: Vec<f64>,
    pub ratios: Vec<f64>,
}

impl From<&HermeticityEstimate> for HermeticityProbe {
    fn from(e: &HermeticityEstimate) -> Self {
        HermeticityProbe {
            x: e.x,
            liminf_estimate: e.liminf_estimate,
            radii: e.radii.clone(),
            ratios: e.ratios.clone(),
        }
    }
}

/// Estimates `H(X)` over the configured probes, or over the whole discrete
/// carrier (or 17 evenly spaced points of a line) when none are given.
pub fn run_hermeticity(config: &ExperimentConfig) -> Result<HermeticityReport> {
    let (space, mut probes) = config.probe_plan()?;
    if probes.is_empty() {
        probes = default_hermeticity_probes(&space);
    }
    let sampler = BallSampler::new(config.sampler.samples);
    let g = hermeticity_global(
        &space,
        &probes,
        config.hermeticity.r0,
        config.hermeticity.count,
        &sampler,
    )
    .at("hermeticity", "probes")?;
    Ok(HermeticityReport {
        space: space.kind_name().to_string(),
        value: g.value,
        argmin: g.argmin,
        undefined: g.undefined,
        analytic: space.analytic_hermeticity(),
        probes: g.probes.iter().map(HermeticityProbe::from).collect(),
    })
}

fn default_hermeticity_probes(space: &MetricSpace) -> Vec<f64> {
    match space.line() {
        Some(line) => {
            let (c0, c1) = line.coord_bounds();
            (0..17).map(|i| line.point(c0 + (c1 - c0) * i as f64 / 16.0)).collect()
        }
        None => space.discrete_points().unwrap_or(&[]).to_vec(),
    }
}
