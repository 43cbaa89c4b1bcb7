//! Plain-text vehicle traces.
//!
//! One CSV row per vehicle per instance with header
//! `instance_id,vehicle_id,x0_m,y0_m,speed_mps,direction,data_bits,flops,deadline_s`.

use std::collections::BTreeMap;
use std::path::Path;

use risvec_core::scenario::{Direction, Instance, Point3, ScenarioConfig, TaskSpec, Vehicle};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest vehicle id accepted in a trace (ids key per-pair random streams).
pub const MAX_VEHICLE_ID: usize = u16::MAX as usize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Row {
    instance_id: u64,
    vehicle_id: usize,
    x0_m: f64,
    y0_m: f64,
    speed_mps: f64,
    direction: i32,
    data_bits: f64,
    flops: f64,
    deadline_s: f64,
}

/// Writes every vehicle of `instances`.
pub fn write_trace(instances: &[Instance], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for inst in instances {
        for v in &inst.vehicles {
            let row = Row {
                instance_id: inst.index,
                vehicle_id: v.id,
                x0_m: v.position.x,
                y0_m: v.position.y,
                speed_mps: v.speed,
                direction: v.direction.sign() as i32,
                data_bits: v.task.data_bits,
                flops: v.task.workload_flops,
                deadline_s: v.task.deadline,
            };
            w.serialize(row).map_err(|e| Error::csv(path, e))?;
        }
    }
    if instances.iter().all(|i| i.vehicles.is_empty()) {
        w.write_record(["instance_id", "vehicle_id", "x0_m", "y0_m", "speed_mps", "direction", "data_bits", "flops", "deadline_s"])
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a trace into instances keyed by `instance_id`, each holding its
/// vehicles in `vehicle_id` order. Every row must sit on a lane of `cfg`
/// with the lane's direction, inside the road, with a valid task.
pub fn read_trace(path: &Path, cfg: &ScenarioConfig) -> Result<BTreeMap<u64, Instance>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut out: BTreeMap<u64, Instance> = BTreeMap::new();
    for (line, row) in r.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let bad = |what: &str| Error::Config(format!("{}: row {}: {what}", path.display(), line + 1));
        let direction = Direction::from_sign(row.direction).ok_or_else(|| bad("direction must be 1 or -1"))?;
        let on_lane = cfg
            .road
            .lanes
            .iter()
            .any(|l| (l.center_y - row.y0_m).abs() < 1e-6 && l.direction == direction);
        if !on_lane {
            return Err(bad("y0_m and direction do not match any lane"));
        }
        if !(row.x0_m >= cfg.road.x_min && row.x0_m <= cfg.road.x_max) {
            return Err(bad("x0_m lies outside the road"));
        }
        if !(row.speed_mps.is_finite() && row.speed_mps > 0.0) {
            return Err(bad("speed_mps must be strictly positive"));
        }
        if row.vehicle_id > MAX_VEHICLE_ID {
            return Err(bad("vehicle_id is too large"));
        }
        let task = TaskSpec { data_bits: row.data_bits, workload_flops: row.flops, deadline: row.deadline_s };
        task.validate().map_err(|e| bad(&e.to_string()))?;
        let inst = out
            .entry(row.instance_id)
            .or_insert_with(|| Instance { index: row.instance_id, vehicles: Vec::new() });
        if inst.vehicles.iter().any(|v| v.id == row.vehicle_id) {
            return Err(bad("duplicate vehicle_id within an instance"));
        }
        inst.vehicles.push(Vehicle {
            id: row.vehicle_id,
            position: Point3::new(row.x0_m, row.y0_m, cfg.road.vehicle_antenna_height),
            speed: row.speed_mps,
            direction,
            task,
        });
    }
    for inst in out.values_mut() {
        inst.vehicles.sort_by_key(|v| v.id);
    }
    Ok(out)
}

/// Sampled instances with every instance present in `trace` replaced.
/// Trace instances must have ids below `cfg.num_instances`.
pub fn instances_with_trace(cfg: &ScenarioConfig, trace: &BTreeMap<u64, Instance>) -> Result<Vec<Instance>> {
    let mut instances = cfg.generate_instances();
    for (&id, inst) in trace {
        let slot = instances
            .get_mut(id as usize)
            .ok_or_else(|| Error::Config(format!("trace instance_id {id} is not below traffic.num_instances")))?;
        *slot = inst.clone();
    }
    Ok(instances)
}
