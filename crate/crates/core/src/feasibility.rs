//! Latency budgets and the probabilistic task-completion mask.

use alloc::vec::Vec;

use rand::Rng;

use crate::channel::{self, LinkState};
use crate::error::{Error, Result};
use crate::mobility;
use crate::rng::{self, Domain};
use crate::scenario::{EstimatorParams, Instance, Placement, Point3, Server, SystemParams, TaskSpec, Vehicle};

/// Everything that decides whether one vehicle can upload its task to one
/// server in time.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    /// Server-side execution time (s).
    pub compute_latency: f64,
    /// Time left for the upload (s); may be negative.
    pub max_comm_time: f64,
    /// Time spent in each trajectory cell (s).
    pub sojourn_time: f64,
    /// Number of whole cells crossed during the upload, `L_k`.
    pub grid_budget: usize,
    /// Both-hops-LoS received power per cell (W).
    pub per_grid_los_power: Vec<f64>,
    /// LoS probability of the RIS–server hop.
    pub server_los_prob: f64,
    /// LoS probability of the vehicle–RIS hop per cell.
    pub per_grid_los_prob: Vec<f64>,
}

/// Execution time of `task` at `flops` operations per second.
pub fn compute_latency(task: &TaskSpec, flops: f64) -> f64 {
    task.workload_flops / flops
}

/// Whole cells traversable before the deadline, `⌊(T − t_comp) / t_k⌋`, or 0
/// when execution alone exhausts the deadline.
pub fn grid_budget(task: &TaskSpec, vehicle: &Vehicle, params: &SystemParams) -> usize {
    let window = task.deadline - compute_latency(task, params.flops_per_task);
    cells_within(window, mobility::sojourn_time(params.grid_len, vehicle.speed))
}

fn cells_within(window: f64, sojourn: f64) -> usize {
    if !(window > 0.0) || !(sojourn > 0.0) {
        return 0;
    }
    // Relative slack keeps exact multiples (0.1 / 0.05) from rounding down.
    let ratio = window / sojourn;
    libm::floor(ratio * (1.0 + 1e-12)) as usize
}

/// Elevation-dependent LoS probability of the hop between the RIS and `point`.
pub fn hop_los_probability(placement: &Placement, point: Point3, params: &SystemParams) -> Result<f64> {
    let elevation = channel::elevation_angle_deg(placement, point)?;
    Ok(channel::los_probability(elevation, params.env_a1, params.env_a2))
}

/// Builds the budget of the `(vehicle, server)` pair under `placement`.
pub fn link_budget(vehicle: &Vehicle, server: &Server, placement: &Placement, params: &SystemParams) -> Result<LinkBudget> {
    let t_comp = compute_latency(&vehicle.task, params.flops_per_task);
    let max_comm_time = vehicle.task.deadline - t_comp;
    let cells = grid_budget(&vehicle.task, vehicle, params);
    let path = mobility::grid_path(vehicle, params.grid_len, cells);
    let mut per_grid_los_power = Vec::with_capacity(cells);
    let mut per_grid_los_prob = Vec::with_capacity(cells);
    for &(x, y) in &path.cells {
        let pos = Point3::new(x, y, vehicle.position.z);
        let geom = channel::link_geometry(placement, pos, server.position, params.theta_r_denominator, params.tilt_cross_term)?;
        per_grid_los_power.push(channel::cascaded_rx_power_los(params, &geom));
        per_grid_los_prob.push(hop_los_probability(placement, pos, params)?);
    }
    Ok(LinkBudget {
        compute_latency: t_comp,
        max_comm_time,
        sojourn_time: path.sojourn_time,
        grid_budget: cells,
        per_grid_los_power,
        server_los_prob: hop_los_probability(placement, server.position, params)?,
        per_grid_los_prob,
    })
}

fn cell_bits(budget: &LinkBudget, l: usize, state: LinkState, params: &SystemParams) -> f64 {
    let w = channel::state_weight(state, params.nlos_atten_vehicle, params.nlos_atten_server);
    budget.sojourn_time * channel::link_rate(w * budget.per_grid_los_power[l], params)
}

/// Bits uploaded over the budget's cells for one joint channel realisation.
pub fn uploadable_data(state_c: bool, states_a: &[bool], budget: &LinkBudget, params: &SystemParams) -> Result<f64> {
    if states_a.len() != budget.grid_budget || budget.per_grid_los_power.len() != budget.grid_budget {
        return Err(Error::Contract("one vehicle-hop state per budget cell is required"));
    }
    Ok(states_a
        .iter()
        .enumerate()
        .map(|(l, &a)| cell_bits(budget, l, LinkState { vehicle_ris: a, ris_server: state_c }, params))
        .sum())
}

/// Exact `P[D ≥ data_bits]` by summing over every joint LoS realisation of the
/// server hop and the per-cell vehicle hops.
///
/// Branches whose outcome is already decided (the target is unreachable, or
/// reached even if every remaining cell is NLoS) are summed as a block.
pub fn completion_probability_exact(budget: &LinkBudget, data_bits: f64, params: &SystemParams, enum_limit: usize) -> Result<f64> {
    let cells = budget.grid_budget;
    if cells > enum_limit {
        return Err(Error::EnumLimitExceeded { cells, limit: enum_limit });
    }
    if budget.per_grid_los_power.len() != cells || budget.per_grid_los_prob.len() != cells {
        return Err(Error::Contract("budget vectors must have one entry per cell"));
    }
    if data_bits <= 0.0 {
        return Ok(1.0);
    }
    let mut total = 0.0;
    for c in [true, false] {
        let p_c = if c { budget.server_los_prob } else { 1.0 - budget.server_los_prob };
        if p_c == 0.0 {
            continue;
        }
        let hi: Vec<f64> = (0..cells).map(|l| cell_bits(budget, l, LinkState { vehicle_ris: true, ris_server: c }, params)).collect();
        let lo: Vec<f64> = (0..cells).map(|l| cell_bits(budget, l, LinkState { vehicle_ris: false, ris_server: c }, params)).collect();
        let mut suffix_hi = alloc::vec![0.0; cells + 1];
        let mut suffix_lo = alloc::vec![0.0; cells + 1];
        for l in (0..cells).rev() {
            suffix_hi[l] = suffix_hi[l + 1] + hi[l];
            suffix_lo[l] = suffix_lo[l + 1] + lo[l];
        }
        let walk = Walk { hi: &hi, lo: &lo, suffix_hi: &suffix_hi, suffix_lo: &suffix_lo, p_los: &budget.per_grid_los_prob, target: data_bits };
        total += p_c * walk.success(0, 0.0);
    }
    Ok(total.clamp(0.0, 1.0))
}

struct Walk<'a> {
    hi: &'a [f64],
    lo: &'a [f64],
    suffix_hi: &'a [f64],
    suffix_lo: &'a [f64],
    p_los: &'a [f64],
    target: f64,
}

impl Walk<'_> {
    /// Probability that cells `l..` lift `partial` to the target.
    fn success(&self, l: usize, partial: f64) -> f64 {
        if partial + self.suffix_lo[l] >= self.target {
            return 1.0;
        }
        if partial + self.suffix_hi[l] < self.target {
            return 0.0;
        }
        // Here l < cells: with no cells left both suffixes are 0 and one test fired.
        let p = self.p_los[l];
        let mut acc = 0.0;
        if p > 0.0 {
            acc += p * self.success(l + 1, partial + self.hi[l]);
        }
        if p < 1.0 {
            acc += (1.0 - p) * self.success(l + 1, partial + self.lo[l]);
        }
        acc
    }
}

/// Monte Carlo estimate of `P[D ≥ data_bits]` from `samples` joint draws.
pub fn completion_probability_mc<R: Rng + ?Sized>(
    budget: &LinkBudget,
    data_bits: f64,
    params: &SystemParams,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Contract("at least one Monte Carlo sample is required"));
    }
    let cells = budget.grid_budget;
    if budget.per_grid_los_power.len() != cells || budget.per_grid_los_prob.len() != cells {
        return Err(Error::Contract("budget vectors must have one entry per cell"));
    }
    let mut tables: [Vec<[f64; 2]>; 2] = [Vec::with_capacity(cells), Vec::with_capacity(cells)];
    for (ci, c) in [false, true].into_iter().enumerate() {
        for l in 0..cells {
            tables[ci].push([
                cell_bits(budget, l, LinkState { vehicle_ris: false, ris_server: c }, params),
                cell_bits(budget, l, LinkState { vehicle_ris: true, ris_server: c }, params),
            ]);
        }
    }
    let mut hits = 0usize;
    for _ in 0..samples {
        let c = rng.random::<f64>() < budget.server_los_prob;
        let table = &tables[c as usize];
        let mut bits = 0.0;
        for (l, &p) in budget.per_grid_los_prob.iter().enumerate() {
            let a = rng.random::<f64>() < p;
            bits += table[l][a as usize];
        }
        if bits >= data_bits {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples as f64)
}

/// Completion probability of one pair: exact up to the enumeration limit,
/// Monte Carlo on the `(instance, vehicle, server)` stream beyond it.
pub fn completion_probability(
    budget: &LinkBudget,
    data_bits: f64,
    params: &SystemParams,
    estimator: &EstimatorParams,
    master_seed: u64,
    pair: (u64, usize, usize),
) -> Result<f64> {
    if budget.grid_budget <= estimator.enum_limit {
        completion_probability_exact(budget, data_bits, params, estimator.enum_limit)
    } else {
        let mut rng = rng::stream(master_seed, Domain::Completion, rng::pair_stream(pair.0, pair.1, pair.2));
        completion_probability_mc(budget, data_bits, params, estimator.mc_samples, &mut rng)
    }
}

/// Whether a completion probability clears the threshold. A pair that can
/// never succeed is infeasible whatever the threshold.
pub fn meets_threshold(probability: f64, eta: f64) -> bool {
    probability > 0.0 && probability >= eta
}

/// Row-major `K × S` feasibility indicator `q` of one instance.
pub fn feasibility_mask(
    instance: &Instance,
    servers: &[Server],
    placement: &Placement,
    params: &SystemParams,
    estimator: &EstimatorParams,
    master_seed: u64,
) -> Result<Vec<bool>> {
    let mut mask = Vec::with_capacity(instance.vehicles.len() * servers.len());
    for v in &instance.vehicles {
        for s in servers {
            let budget = link_budget(v, s, placement, params)?;
            let p = completion_probability(&budget, v.task.data_bits, params, estimator, master_seed, (instance.index, v.id, s.id))?;
            mask.push(meets_threshold(p, params.completion_threshold));
        }
    }
    Ok(mask)
}
