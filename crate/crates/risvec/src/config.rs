//! TOML scenario files and dotted overrides.
//!
//! Loading layers three sources: the shipped urban defaults, an optional user
//! file merged over them table by table, and `key=value` overrides applied in
//! order (last wins). The merged document is then checked for unknown keys,
//! converted to SI units and validated.

use std::fs;
use std::path::{Path, PathBuf};

use risvec_core::placement::{FeasibleSet, GaParams, HcParams};
use risvec_core::scenario::{
    db_to_linear, dbm_to_watts, equidistant_servers, Direction, EstimatorParams, Lane, PlacementBounds, Point3,
    RoadGeometry, ScenarioConfig, Server, SystemParams, TaskSpec, ThetaRDenominator, TiltCrossTerm, SPEED_OF_LIGHT,
};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::{Error, Result};

/// The shipped default configuration.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/urban.toml");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    master_seed: u64,
    system: SystemSection,
    road: RoadSection,
    servers: ServersSection,
    ris: RisSection,
    placement: PlacementSection,
    task: TaskSection,
    traffic: TrafficSection,
    estimator: EstimatorSection,
    hc: HcSection,
    ga: GaSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    carrier_frequency_hz: f64,
    bandwidth_hz: f64,
    tx_power_w: f64,
    antenna_gain_product: f64,
    element_gain: f64,
    elements_rows: u32,
    elements_cols: u32,
    element_len_wavelengths: f64,
    element_wid_wavelengths: f64,
    element_len_m: Option<f64>,
    element_wid_m: Option<f64>,
    path_loss_exponent: f64,
    nlos_atten_vehicle_db: f64,
    nlos_atten_server_db: f64,
    env_a1: f64,
    env_a2: f64,
    noise_dbm: f64,
    flops_per_task: f64,
    completion_threshold: f64,
    grid_len_m: f64,
    theta_r_denominator: String,
    tilt_cross_term: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LaneEntry {
    center_y_m: f64,
    direction: i32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoadSection {
    x_min_m: f64,
    x_max_m: f64,
    vehicle_antenna_height_m: f64,
    lanes: Vec<LaneEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ServerEntry {
    x_m: f64,
    y_m: f64,
    z_m: f64,
    capacity: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ServersSection {
    count: usize,
    y_m: f64,
    z_m: f64,
    capacity: u32,
    list: Option<Vec<ServerEntry>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RisSection {
    x_m: f64,
    y_m: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlacementSection {
    h_min_m: f64,
    h_max_m: f64,
    theta_min_deg: f64,
    theta_max_deg: f64,
    step_h_m: f64,
    step_theta_deg: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskSection {
    data_bits: f64,
    workload_flops: f64,
    deadline_s: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrafficSection {
    arrival_rate_per_s: f64,
    snapshot_window_s: f64,
    speed_min_mps: f64,
    speed_max_mps: f64,
    num_instances: usize,
    trace_path: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EstimatorSection {
    enum_limit: usize,
    mc_samples: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HcSection {
    population: usize,
    stop_delta: f64,
    max_iters: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GaSection {
    population: usize,
    generations: usize,
    crossover_rate: f64,
    mutation_sigma_h_m: f64,
    mutation_sigma_theta_deg: f64,
    tournament_size: usize,
}

/// A loaded and validated configuration.
#[derive(Debug, Clone)]
pub struct Config {
    /// Scenario handed to the core library.
    pub scenario: ScenarioConfig,
    /// Search grid.
    pub feasible_set: FeasibleSet,
    /// Hill-climbing settings (seeded from the master seed).
    pub hc: HcParams,
    /// Genetic-search settings (seeded from the master seed).
    pub ga: GaParams,
    /// Optional vehicle trace overriding sampled instances.
    pub trace_path: Option<PathBuf>,
    explicit_servers: bool,
    document: Table,
}

impl Config {
    /// Shipped defaults.
    pub fn urban_default() -> Self {
        Self::load(None, &[]).expect("shipped config is valid")
    }

    /// Loads `path` (or only the defaults) and applies `overrides` of the
    /// form `section.key=value`, last wins.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut doc = parse_document(DEFAULT_CONFIG, "default config")?;
        if let Some(path) = path {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            merge(&mut doc, parse_document(&text, &path.display().to_string())?);
        }
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        Self::from_document(doc)
    }

    /// Re-derives the configuration with further overrides applied.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        let mut doc = self.document.clone();
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        Self::from_document(doc)
    }

    /// Same configuration with a different master seed.
    pub fn with_seed(&self, seed: u64) -> Result<Self> {
        self.with_overrides(&[format!("master_seed={seed}")])
    }

    /// Whether servers come from an explicit `servers.list`.
    pub fn has_server_list(&self) -> bool {
        self.explicit_servers
    }

    /// Canonical TOML text of the merged document.
    pub fn canonical(&self) -> String {
        toml::to_string(&self.document).expect("tables always serialize")
    }

    /// Hex SHA-256 of [`Config::canonical`].
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    fn from_document(doc: Table) -> Result<Self> {
        let file: FileConfig = Value::Table(doc.clone())
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().trim().to_string()))?;
        let (scenario, feasible_set, hc, ga) = convert(&file)?;
        scenario.validate()?;
        feasible_set.validate()?;
        if hc.population < 2 {
            return Err(Error::Config("invalid `hc.population`: at least two particles are required".into()));
        }
        if hc.max_iters == 0 {
            return Err(Error::Config("invalid `hc.max_iters`: must be at least 1".into()));
        }
        if ga.population < 2 || ga.tournament_size == 0 {
            return Err(Error::Config("invalid `ga.population`: need population >= 2 and tournament_size >= 1".into()));
        }
        if !(0.0..=1.0).contains(&ga.crossover_rate) {
            return Err(Error::Config("invalid `ga.crossover_rate`: must lie in [0, 1]".into()));
        }
        let explicit_servers = file.servers.list.is_some();
        Ok(Self { scenario, feasible_set, hc, ga, trace_path: file.traffic.trace_path, explicit_servers, document: doc })
    }
}

fn parse_document(text: &str, origin: &str) -> Result<Table> {
    text.parse::<Table>().map_err(|e| Error::Config(format!("{origin}: {}", e.message().trim())))
}

/// Recursively merges `top` into `base`; non-table values replace.
fn merge(base: &mut Table, top: Table) {
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Applies one `dotted.key=value` override. The value is read as a TOML
/// literal, falling back to a bare string.
pub fn apply_override(doc: &mut Table, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not of the form key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').map(str::trim).collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("override `{spec}` has an empty key")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let (last, parents) = keys.split_last().expect("nonempty");
    let mut table = doc;
    for k in parents {
        let entry = table.entry(k.to_string()).or_insert_with(|| Value::Table(Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{spec}`: `{k}` is not a table")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

fn invalid(field: &str, reason: &str) -> Error {
    Error::Config(format!("invalid `{field}`: {reason}"))
}

fn convert(f: &FileConfig) -> Result<(ScenarioConfig, FeasibleSet, HcParams, GaParams)> {
    let s = &f.system;
    let lambda = SPEED_OF_LIGHT / s.carrier_frequency_hz;
    let theta_r_denominator = match s.theta_r_denominator.as_str() {
        "dk" => ThetaRDenominator::Dk,
        "ds" => ThetaRDenominator::Ds,
        _ => return Err(invalid("system.theta_r_denominator", "expected \"dk\" or \"ds\"")),
    };
    let tilt_cross_term = match s.tilt_cross_term.as_str() {
        "as_published" => TiltCrossTerm::AsPublished,
        "corrected" => TiltCrossTerm::Corrected,
        _ => return Err(invalid("system.tilt_cross_term", "expected \"as_published\" or \"corrected\"")),
    };
    let system = SystemParams {
        carrier_frequency: s.carrier_frequency_hz,
        bandwidth: s.bandwidth_hz,
        tx_power: s.tx_power_w,
        antenna_gain_product: s.antenna_gain_product,
        element_gain: s.element_gain,
        elements_rows: s.elements_rows,
        elements_cols: s.elements_cols,
        element_len: s.element_len_m.unwrap_or(s.element_len_wavelengths * lambda),
        element_wid: s.element_wid_m.unwrap_or(s.element_wid_wavelengths * lambda),
        path_loss_exponent: s.path_loss_exponent,
        nlos_atten_vehicle: db_to_linear(s.nlos_atten_vehicle_db),
        nlos_atten_server: db_to_linear(s.nlos_atten_server_db),
        env_a1: s.env_a1,
        env_a2: s.env_a2,
        noise_power: dbm_to_watts(s.noise_dbm),
        flops_per_task: s.flops_per_task,
        completion_threshold: s.completion_threshold,
        grid_len: s.grid_len_m,
        theta_r_denominator,
        tilt_cross_term,
    };

    let lanes = f
        .road
        .lanes
        .iter()
        .map(|l| {
            Direction::from_sign(l.direction)
                .map(|direction| Lane { center_y: l.center_y_m, direction })
                .ok_or_else(|| invalid("road.lanes", "direction must be 1 or -1"))
        })
        .collect::<Result<Vec<_>>>()?;
    let road = RoadGeometry {
        x_min: f.road.x_min_m,
        x_max: f.road.x_max_m,
        lanes,
        vehicle_antenna_height: f.road.vehicle_antenna_height_m,
    };

    let sv = &f.servers;
    let servers = match &sv.list {
        Some(list) => list
            .iter()
            .enumerate()
            .map(|(id, e)| Server { id, position: Point3::new(e.x_m, e.y_m, e.z_m), capacity: e.capacity.unwrap_or(sv.capacity) })
            .collect(),
        None => equidistant_servers(sv.count, road.x_min, road.x_max, sv.y_m, sv.z_m, sv.capacity),
    };
    if servers.is_empty() {
        return Err(invalid("servers.count", "at least one server is required"));
    }

    let p = &f.placement;
    let bounds = PlacementBounds {
        h_min: p.h_min_m,
        h_max: p.h_max_m,
        theta_min: p.theta_min_deg.to_radians(),
        theta_max: p.theta_max_deg.to_radians(),
    };
    let feasible_set = FeasibleSet { bounds, step_h: p.step_h_m, step_theta: p.step_theta_deg.to_radians() };

    let scenario = ScenarioConfig {
        system,
        road,
        servers,
        ris_xy: (f.ris.x_m, f.ris.y_m),
        bounds,
        task: TaskSpec { data_bits: f.task.data_bits, workload_flops: f.task.workload_flops, deadline: f.task.deadline_s },
        arrival_rate: f.traffic.arrival_rate_per_s,
        snapshot_window: f.traffic.snapshot_window_s,
        speed_range: (f.traffic.speed_min_mps, f.traffic.speed_max_mps),
        num_instances: f.traffic.num_instances,
        master_seed: f.master_seed,
        estimator: EstimatorParams { enum_limit: f.estimator.enum_limit, mc_samples: f.estimator.mc_samples },
    };
    let hc = HcParams { population: f.hc.population, stop_delta: f.hc.stop_delta, max_iters: f.hc.max_iters, seed: f.master_seed };
    let ga = GaParams {
        population: f.ga.population,
        generations: f.ga.generations,
        crossover_rate: f.ga.crossover_rate,
        mutation_sigma: [f.ga.mutation_sigma_h_m, f.ga.mutation_sigma_theta_deg],
        tournament_size: f.ga.tournament_size,
        seed: f.master_seed,
    };
    Ok((scenario, feasible_set, hc, ga))
}
