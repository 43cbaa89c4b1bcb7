//! Scheme runs and parameter sweeps.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::ThreadPool;
use risvec_core::placement::{self, Evaluator, Metric, Objective, PlacementResult};
use risvec_core::scenario::Instance;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::io::{ExperimentRecord, Scheme};
use crate::parallel::{CachedObjective, ParallelObjective};
use crate::trace;

/// Instances of `cfg`, with trace rows (if configured) replacing samples.
pub fn load_instances(cfg: &Config) -> Result<Vec<Instance>> {
    match &cfg.trace_path {
        Some(path) => trace::instances_with_trace(&cfg.scenario, &trace::read_trace(path, &cfg.scenario)?),
        None => Ok(cfg.scenario.generate_instances()),
    }
}

/// Runs one placement scheme. Wall time covers only the optimizer call.
pub fn run_scheme(cfg: &Config, instances: &[Instance], scheme: Scheme, pool: &ThreadPool) -> Result<(PlacementResult, f64)> {
    let ev = Evaluator::new(&cfg.scenario, instances)?;
    run_with(cfg, &ev, scheme, pool, &ParallelObjective::new(&ev, Metric::OptimalThroughput, pool))
}

/// Runs `scheme` with `optimal` scoring optimal-assignment throughput.
fn run_with(cfg: &Config, ev: &Evaluator, scheme: Scheme, pool: &ThreadPool, optimal: &dyn Objective) -> Result<(PlacementResult, f64)> {
    let set = &cfg.feasible_set;
    let xy = cfg.scenario.ris_xy;
    let start = Instant::now();
    let result = match scheme {
        Scheme::Op => placement::grid_search(set, xy, optimal),
        Scheme::Hc => placement::hill_climb(set, &cfg.hc, xy, optimal),
        Scheme::Gap => placement::genetic_search(set, &cfg.ga, xy, optimal),
        Scheme::Gop => placement::greedy_offload_placement(set, xy, &ParallelObjective::new(ev, Metric::GreedyThroughput, pool)),
        Scheme::Sumrate => placement::sumrate_placement(set, xy, &ParallelObjective::new(ev, Metric::SumRate, pool), optimal),
    }?;
    Ok((result, start.elapsed().as_secs_f64()))
}

/// Record of a scheme run; `wall_s` is zeroed unless `timing` is set so that
/// outputs stay byte-identical across runs.
pub fn record(scheme: Scheme, param: &str, value: f64, seed: u64, result: &PlacementResult, wall_s: f64, timing: bool) -> ExperimentRecord {
    ExperimentRecord {
        scheme,
        param: param.into(),
        value,
        throughput: result.avg_throughput,
        h_m: result.placement.altitude,
        theta_deg: result.placement.tilt_deg(),
        wall_s: if timing { wall_s } else { 0.0 },
        seed,
        evaluations: result.evaluations,
    }
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Number of equidistant servers.
    Servers,
    /// Per-server capacity `C_s`.
    Capacity,
    /// Vehicle arrival rate (1/s).
    ArrivalRate,
    /// Computing rate per task (FLOPS).
    Flops,
}

impl SweepParam {
    /// Name written in the `param` column.
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Servers => "servers",
            SweepParam::Capacity => "capacity",
            SweepParam::ArrivalRate => "arrival_rate",
            SweepParam::Flops => "flops",
        }
    }

    /// Configuration key the sweep overrides.
    pub fn key(self) -> &'static str {
        match self {
            SweepParam::Servers => "servers.count",
            SweepParam::Capacity => "servers.capacity",
            SweepParam::ArrivalRate => "traffic.arrival_rate_per_s",
            SweepParam::Flops => "system.flops_per_task",
        }
    }

    /// Default values: 2–7 servers, capacity 1–6, 0.3–0.9 arrivals/s,
    /// 5–40 TFLOPS.
    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepParam::Servers => (2..=7).map(f64::from).collect(),
            SweepParam::Capacity => (1..=6).map(f64::from).collect(),
            SweepParam::ArrivalRate => vec![0.3, 0.5, 0.7, 0.9],
            SweepParam::Flops => vec![5e12, 10e12, 20e12, 30e12, 40e12],
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, SweepParam::Servers | SweepParam::Capacity)
    }

    /// Override text setting this parameter to `value`.
    pub fn override_for(self, value: f64) -> Result<String> {
        if self.is_integer() {
            if value.fract() != 0.0 || value < 0.0 {
                return Err(Error::Config(format!("sweep {}: `{value}` is not a non-negative integer", self.name())));
            }
            Ok(format!("{}={}", self.key(), value as u64))
        } else {
            Ok(format!("{}={value:?}", self.key()))
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "servers" => Ok(SweepParam::Servers),
            "capacity" | "cs" => Ok(SweepParam::Capacity),
            "arrival" | "arrival_rate" => Ok(SweepParam::ArrivalRate),
            "flops" => Ok(SweepParam::Flops),
            _ => Err(Error::Config(format!("unknown sweep parameter `{s}` (servers, capacity, arrival, flops)"))),
        }
    }
}

/// Runs `schemes` at every value of `param`. Records are ordered by value,
/// then by scheme.
///
/// Without `timing`, the schemes at one value share optimal-throughput scores
/// of placements already evaluated; results are unchanged but the wall times
/// would no longer be comparable, so `timing` turns the sharing off.
pub fn sweep(
    cfg: &Config,
    param: SweepParam,
    values: &[f64],
    schemes: &[Scheme],
    pool: &ThreadPool,
    timing: bool,
) -> Result<Vec<ExperimentRecord>> {
    if param == SweepParam::Servers && cfg.has_server_list() {
        return Err(Error::Config("sweeping servers requires the equidistant layout (no servers.list)".into()));
    }
    let mut records = Vec::with_capacity(values.len() * schemes.len());
    for &value in values {
        let point = cfg.with_overrides(&[param.override_for(value)?])?;
        let instances = load_instances(&point)?;
        let ev = Evaluator::new(&point.scenario, &instances)?;
        let fresh = ParallelObjective::new(&ev, Metric::OptimalThroughput, pool);
        let shared = CachedObjective::new(&fresh);
        for &scheme in schemes {
            let optimal: &dyn Objective = if timing { &fresh } else { &shared };
            let (result, wall) = run_with(&point, &ev, scheme, pool, optimal)?;
            records.push(record(scheme, param.name(), value, point.scenario.master_seed, &result, wall, timing));
        }
    }
    Ok(records)
}
