//! RIS placement search.
//!
//! Every search is written against [`Objective`], which scores a batch of
//! placements. [`Evaluator`] supplies the three scores used here (optimal
//! assignment throughput, greedy assignment throughput and expected sum
//! rate); callers that want multi-threading wrap it in their own
//! [`Objective`]. Searches only consume scores in a fixed order, so the result
//! never depends on how a batch was scheduled.

use alloc::vec::Vec;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::assignment::{self, AssignmentProblem};
use crate::channel::{self, LinkState};
use crate::error::{Error, Result};
use crate::feasibility;
use crate::rng::{self, Domain};
use crate::scenario::{uniform, Instance, Placement, PlacementBounds, ScenarioConfig};

/// What a placement is scored by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Mean tasks served per instance under the optimal assignment.
    OptimalThroughput,
    /// Mean tasks served per instance under the nearest-server greedy assignment.
    GreedyThroughput,
    /// Mean expected uploadable bits summed over every vehicle–server pair.
    SumRate,
}

/// Scores placements. Larger is better.
pub trait Objective {
    /// Scores one placement.
    fn evaluate(&self, placement: &Placement) -> Result<f64>;

    /// Scores a batch; the output is index-aligned with `placements`.
    fn evaluate_batch(&self, placements: &[Placement]) -> Result<Vec<f64>> {
        placements.iter().map(|p| self.evaluate(p)).collect()
    }
}

impl<O: Objective + ?Sized> Objective for &O {
    fn evaluate(&self, placement: &Placement) -> Result<f64> {
        (**self).evaluate(placement)
    }

    fn evaluate_batch(&self, placements: &[Placement]) -> Result<Vec<f64>> {
        (**self).evaluate_batch(placements)
    }
}

/// Scores placements of one scenario over a fixed set of instances.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    cfg: &'a ScenarioConfig,
    instances: &'a [Instance],
}

impl<'a> Evaluator<'a> {
    /// Evaluator over `instances`, which must be nonempty.
    pub fn new(cfg: &'a ScenarioConfig, instances: &'a [Instance]) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::Contract("at least one instance is required"));
        }
        Ok(Self { cfg, instances })
    }

    /// Scenario.
    pub fn config(&self) -> &ScenarioConfig {
        self.cfg
    }

    /// Instances.
    pub fn instances(&self) -> &[Instance] {
        self.instances
    }

    /// Feasibility mask of instance `i` (position in the slice).
    pub fn mask(&self, i: usize, placement: &Placement) -> Result<Vec<bool>> {
        let cfg = self.cfg;
        feasibility::feasibility_mask(&self.instances[i], &cfg.servers, placement, &cfg.system, &cfg.estimator, cfg.master_seed)
    }

    /// Assignment problem of instance `i`.
    pub fn problem(&self, i: usize, placement: &Placement) -> Result<AssignmentProblem> {
        let k = self.instances[i].vehicles.len();
        let caps = self.cfg.servers.iter().map(|s| s.capacity).collect();
        AssignmentProblem::new(k, self.cfg.servers.len(), self.mask(i, placement)?, caps)
    }

    /// Score of instance `i` alone.
    pub fn instance_value(&self, i: usize, placement: &Placement, metric: Metric) -> Result<f64> {
        match metric {
            Metric::OptimalThroughput => Ok(assignment::solve_optimal(&self.problem(i, placement)?)?.objective as f64),
            Metric::GreedyThroughput => {
                let problem = self.problem(i, placement)?;
                let distances: Vec<f64> = self.instances[i]
                    .vehicles
                    .iter()
                    .flat_map(|v| self.cfg.servers.iter().map(move |s| v.position.distance(&s.position)))
                    .collect();
                Ok(assignment::solve_greedy_nearest(&problem, &distances)?.objective as f64)
            }
            Metric::SumRate => self.instance_sum_rate(i, placement),
        }
    }

    fn instance_sum_rate(&self, i: usize, placement: &Placement) -> Result<f64> {
        let p = &self.cfg.system;
        let mut total = 0.0;
        for v in &self.instances[i].vehicles {
            for s in &self.cfg.servers {
                let b = feasibility::link_budget(v, s, placement, p)?;
                let p_c = b.server_los_prob;
                for (power, &p_a) in b.per_grid_los_power.iter().zip(&b.per_grid_los_prob) {
                    let w = |a, c| channel::state_weight(LinkState { vehicle_ris: a, ris_server: c }, p.nlos_atten_vehicle, p.nlos_atten_server);
                    let mean_w = p_a * p_c * w(true, true)
                        + (1.0 - p_a) * (1.0 - p_c) * w(false, false)
                        + (1.0 - p_a) * p_c * w(false, true)
                        + p_a * (1.0 - p_c) * w(true, false);
                    total += b.sojourn_time * channel::link_rate(mean_w * power, p);
                }
            }
        }
        Ok(total)
    }

    /// Mean of [`Evaluator::instance_value`] over all instances, summed in
    /// instance order.
    pub fn evaluate(&self, placement: &Placement, metric: Metric) -> Result<f64> {
        let mut total = 0.0;
        for i in 0..self.instances.len() {
            total += self.instance_value(i, placement, metric)?;
        }
        Ok(total / self.instances.len() as f64)
    }

    /// Optimal assignments of every instance at `placement`.
    pub fn assignments(&self, placement: &Placement) -> Result<Vec<assignment::Assignment>> {
        (0..self.instances.len()).map(|i| assignment::solve_optimal(&self.problem(i, placement)?)).collect()
    }

    /// This evaluator as an [`Objective`] for `metric`.
    pub fn objective(&self, metric: Metric) -> MetricObjective<'_, 'a> {
        MetricObjective { evaluator: self, metric }
    }
}

/// Single-threaded [`Objective`] backed by an [`Evaluator`].
#[derive(Debug, Clone, Copy)]
pub struct MetricObjective<'e, 'a> {
    /// Scenario evaluator.
    pub evaluator: &'e Evaluator<'a>,
    /// Score.
    pub metric: Metric,
}

impl Objective for MetricObjective<'_, '_> {
    fn evaluate(&self, placement: &Placement) -> Result<f64> {
        self.evaluator.evaluate(placement, self.metric)
    }
}

/// Discretised search box: altitudes `H_min, H_min + Δh, …, H_max` and tilts
/// `θ_min, θ_min + Δθ, …, θ_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleSet {
    /// Continuous bounds.
    pub bounds: PlacementBounds,
    /// Altitude step `Δh` (m).
    pub step_h: f64,
    /// Tilt step `Δθ` (rad).
    pub step_theta: f64,
}

impl FeasibleSet {
    /// 1 m × 1° grid over `bounds`.
    pub fn unit_steps(bounds: PlacementBounds) -> Self {
        Self { bounds, step_h: 1.0, step_theta: 1f64.to_radians() }
    }

    /// Checks steps and bounds.
    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        if !(self.step_h > 0.0 && self.step_theta > 0.0) {
            return Err(Error::Invalid { field: "search.step", reason: "grid steps must be strictly positive" });
        }
        Ok(())
    }

    fn last_index(lo: f64, hi: f64, step: f64) -> usize {
        libm::floor((hi - lo) / step + 1e-9) as usize
    }

    fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        (0..=Self::last_index(lo, hi, step)).map(|i| Self::value(lo, hi, step, i)).collect()
    }

    fn value(lo: f64, hi: f64, step: f64, i: usize) -> f64 {
        (lo + i as f64 * step).min(hi)
    }

    fn nearest(lo: f64, hi: f64, step: f64, x: f64) -> usize {
        let i = libm::round((x - lo) / step).max(0.0) as usize;
        i.min(Self::last_index(lo, hi, step))
    }

    /// Grid point nearest to `altitude` (m) and `tilt_deg`, clamped to the box.
    /// The result is bitwise equal to the matching entry of [`FeasibleSet::points`].
    pub fn snap(&self, ris_xy: (f64, f64), altitude: f64, tilt_deg: f64) -> Placement {
        let b = self.bounds;
        let ih = Self::nearest(b.h_min, b.h_max, self.step_h, altitude);
        let it = Self::nearest(b.theta_min, b.theta_max, self.step_theta, tilt_deg.to_radians());
        Placement {
            ris_xy,
            altitude: Self::value(b.h_min, b.h_max, self.step_h, ih),
            tilt: Self::value(b.theta_min, b.theta_max, self.step_theta, it),
        }
    }

    /// Altitude axis.
    pub fn altitudes(&self) -> Vec<f64> {
        Self::axis(self.bounds.h_min, self.bounds.h_max, self.step_h)
    }

    /// Tilt axis (rad).
    pub fn tilts(&self) -> Vec<f64> {
        Self::axis(self.bounds.theta_min, self.bounds.theta_max, self.step_theta)
    }

    /// Every grid point in scan order: altitude-major, tilt-minor.
    pub fn points(&self, ris_xy: (f64, f64)) -> Vec<Placement> {
        let tilts = self.tilts();
        self.altitudes()
            .into_iter()
            .flat_map(|altitude| tilts.iter().map(move |&tilt| Placement { ris_xy, altitude, tilt }))
            .collect()
    }

    /// `|ℋ| · |Θ|`.
    pub fn len(&self) -> usize {
        self.altitudes().len() * self.tilts().len()
    }

    /// Always false for a validated set.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Outcome of a placement search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacementResult {
    /// Chosen placement.
    pub placement: Placement,
    /// Score reported for it (tasks per instance unless stated otherwise).
    pub avg_throughput: f64,
    /// Number of placement evaluations performed.
    pub evaluations: usize,
}

/// One cell of a throughput surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    /// Altitude (m).
    pub altitude_m: f64,
    /// Tilt (degrees).
    pub tilt_deg: f64,
    /// Score.
    pub avg_throughput: f64,
}

/// Scores every grid point and returns the surface in scan order together
/// with the first maximiser.
pub fn grid_surface<O: Objective + ?Sized>(set: &FeasibleSet, ris_xy: (f64, f64), objective: &O) -> Result<(PlacementResult, Vec<SurfacePoint>)> {
    set.validate()?;
    let points = set.points(ris_xy);
    let scores = objective.evaluate_batch(&points)?;
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    let surface = points
        .iter()
        .zip(&scores)
        .map(|(p, &avg_throughput)| SurfacePoint { altitude_m: p.altitude, tilt_deg: p.tilt_deg(), avg_throughput })
        .collect();
    let result = PlacementResult { placement: points[best], avg_throughput: scores[best], evaluations: points.len() };
    Ok((result, surface))
}

/// Exhaustive search of the feasible set.
pub fn grid_search<O: Objective + ?Sized>(set: &FeasibleSet, ris_xy: (f64, f64), objective: &O) -> Result<PlacementResult> {
    grid_surface(set, ris_xy, objective).map(|(r, _)| r)
}

/// Grid search scored by greedy assignment throughput. The reported value
/// is the greedy throughput at the chosen placement.
pub fn greedy_offload_placement<O: Objective + ?Sized>(set: &FeasibleSet, ris_xy: (f64, f64), greedy: &O) -> Result<PlacementResult> {
    grid_search(set, ris_xy, greedy)
}

/// Grid search scored by expected sum rate. The reported value is the
/// `report` score (optimal-assignment throughput) at the chosen placement.
pub fn sumrate_placement<R, O>(set: &FeasibleSet, ris_xy: (f64, f64), sum_rate: &R, report: &O) -> Result<PlacementResult>
where
    R: Objective + ?Sized,
    O: Objective + ?Sized,
{
    let chosen = grid_search(set, ris_xy, sum_rate)?;
    let throughput = report.evaluate(&chosen.placement)?;
    Ok(PlacementResult { avg_throughput: throughput, evaluations: chosen.evaluations + 1, ..chosen })
}

/// Adaptive hill-climbing settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HcParams {
    /// Number of particles `J` (at least 2).
    pub population: usize,
    /// Stop once the last step bound falls to this value (metres / degrees).
    pub stop_delta: f64,
    /// Iteration cap `N_ite`.
    pub max_iters: usize,
    /// Seed of the particle stream.
    pub seed: u64,
}

impl Default for HcParams {
    fn default() -> Self {
        Self { population: 96, stop_delta: 0.5, max_iters: 40, seed: 1 }
    }
}

/// Particle coordinates: altitude in metres, tilt in degrees.
type Coords = [f64; 2];

fn coord_bounds(set: &FeasibleSet) -> [(f64, f64); 2] {
    let b = set.bounds;
    [(b.h_min, b.h_max), (b.theta_min.to_degrees(), b.theta_max.to_degrees())]
}

fn to_placement(set: &FeasibleSet, ris_xy: (f64, f64), c: Coords) -> Placement {
    set.snap(ris_xy, c[0], c[1])
}

/// Adaptive-step hill climbing over the box of `set`.
///
/// `J` particles start uniformly in the box. In every iteration each particle
/// picks a random partner; for each coordinate the step bound is the distance
/// between the two, and a uniform step within that bound is proposed and
/// clamped to the box. Particles move continuously but are scored at their
/// nearest grid point, so the grid optimum bounds the result. A proposal
/// replaces the particle only if it scores strictly higher. The loop stops
/// when the step bound of the last coordinate drawn in an iteration is at most
/// `stop_delta`, or after `max_iters` iterations. The best particle ever
/// scored is returned.
///
/// `evaluations = J + proposals`.
pub fn hill_climb<O: Objective + ?Sized>(set: &FeasibleSet, hc: &HcParams, ris_xy: (f64, f64), objective: &O) -> Result<PlacementResult> {
    set.validate()?;
    if hc.population < 2 {
        return Err(Error::Invalid { field: "hc.population", reason: "at least two particles are required" });
    }
    if hc.max_iters == 0 {
        return Err(Error::Invalid { field: "hc.max_iters", reason: "must be at least 1" });
    }
    let bounds = coord_bounds(set);
    let mut rng = rng::stream(hc.seed, Domain::HillClimb, 0);
    let mut particles: Vec<Coords> =
        (0..hc.population).map(|_| [uniform(&mut rng, bounds[0].0, bounds[0].1), uniform(&mut rng, bounds[1].0, bounds[1].1)]).collect();
    let initial: Vec<Placement> = particles.iter().map(|&c| to_placement(set, ris_xy, c)).collect();
    let mut scores = objective.evaluate_batch(&initial)?;
    let mut evaluations = particles.len();
    let best = first_max(&scores);
    let (mut best_coords, mut best_score) = (particles[best], scores[best]);

    let mut step_bound = f64::INFINITY;
    let mut iteration = 1;
    while step_bound > hc.stop_delta && iteration <= hc.max_iters {
        iteration += 1;
        for j in 0..particles.len() {
            let partner = loop {
                let m = rng.random_range(0..particles.len());
                if m != j {
                    break m;
                }
            };
            let mut target = particles[j];
            for (kappa, &(lo, hi)) in bounds.iter().enumerate() {
                step_bound = (particles[j][kappa] - particles[partner][kappa]).abs();
                let r = uniform(&mut rng, -step_bound, step_bound);
                target[kappa] = (particles[j][kappa] + r).clamp(lo, hi);
            }
            let score = objective.evaluate(&to_placement(set, ris_xy, target))?;
            evaluations += 1;
            if score > scores[j] {
                particles[j] = target;
                scores[j] = score;
                if score > best_score {
                    best_coords = target;
                    best_score = score;
                }
            }
        }
    }
    Ok(PlacementResult { placement: to_placement(set, ris_xy, best_coords), avg_throughput: best_score, evaluations })
}

fn first_max(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Real-coded genetic search settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaParams {
    /// Population size (at least 2).
    pub population: usize,
    /// Number of generations.
    pub generations: usize,
    /// Probability that a child is produced by crossover rather than copied.
    pub crossover_rate: f64,
    /// Gaussian mutation standard deviation per coordinate (metres, degrees).
    pub mutation_sigma: [f64; 2],
    /// Tournament size.
    pub tournament_size: usize,
    /// Seed of the search stream.
    pub seed: u64,
}

impl GaParams {
    /// Population 20, 30 generations, crossover 0.9, σ = 5 % of each range,
    /// tournaments of 3.
    pub fn for_set(set: &FeasibleSet, seed: u64) -> Self {
        let b = coord_bounds(set);
        Self {
            population: 20,
            generations: 30,
            crossover_rate: 0.9,
            mutation_sigma: [0.05 * (b[0].1 - b[0].0), 0.05 * (b[1].1 - b[1].0)],
            tournament_size: 3,
            seed,
        }
    }
}

/// BLX-α blend extension.
const BLEND_ALPHA: f64 = 0.5;

/// Genetic search with tournament selection, blend crossover, Gaussian
/// mutation and one elite. Genes are continuous; each individual is scored
/// at its nearest grid point of `set`.
///
/// `evaluations = population + generations · (population − 1)`.
pub fn genetic_search<O: Objective + ?Sized>(set: &FeasibleSet, ga: &GaParams, ris_xy: (f64, f64), objective: &O) -> Result<PlacementResult> {
    set.validate()?;
    if ga.population < 2 {
        return Err(Error::Invalid { field: "ga.population", reason: "at least two individuals are required" });
    }
    if ga.tournament_size == 0 {
        return Err(Error::Invalid { field: "ga.tournament_size", reason: "must be at least 1" });
    }
    let bounds = coord_bounds(set);
    let mut rng = rng::stream(ga.seed, Domain::Genetic, 0);
    let mut pop: Vec<Coords> = (0..ga.population)
        .map(|_| [uniform(&mut rng, bounds[0].0, bounds[0].1), uniform(&mut rng, bounds[1].0, bounds[1].1)])
        .collect();
    let mut fitness = objective.evaluate_batch(&pop.iter().map(|&c| to_placement(set, ris_xy, c)).collect::<Vec<_>>())?;
    let mut evaluations = pop.len();
    let normals: Vec<Option<Normal<f64>>> = ga.mutation_sigma.iter().map(|&s| Normal::new(0.0, s).ok().filter(|_| s > 0.0)).collect();
    let indices: Vec<usize> = (0..ga.population).collect();

    for _ in 0..ga.generations {
        let elite = first_max(&fitness);
        let mut children: Vec<Coords> = Vec::with_capacity(ga.population - 1);
        while children.len() < ga.population - 1 {
            let a = tournament(&indices, &fitness, ga.tournament_size, &mut rng);
            let b = tournament(&indices, &fitness, ga.tournament_size, &mut rng);
            let mut child = pop[a];
            if rng.random::<f64>() < ga.crossover_rate {
                for kappa in 0..2 {
                    let (lo, hi) = (pop[a][kappa].min(pop[b][kappa]), pop[a][kappa].max(pop[b][kappa]));
                    let spread = BLEND_ALPHA * (hi - lo);
                    child[kappa] = uniform(&mut rng, lo - spread, hi + spread);
                }
            }
            for (kappa, n) in normals.iter().enumerate() {
                if let Some(n) = n {
                    child[kappa] += n.sample(&mut rng);
                }
                child[kappa] = child[kappa].clamp(bounds[kappa].0, bounds[kappa].1);
            }
            children.push(child);
        }
        let child_fitness = objective.evaluate_batch(&children.iter().map(|&c| to_placement(set, ris_xy, c)).collect::<Vec<_>>())?;
        evaluations += children.len();
        let mut next = Vec::with_capacity(ga.population);
        let mut next_fitness = Vec::with_capacity(ga.population);
        next.push(pop[elite]);
        next_fitness.push(fitness[elite]);
        next.extend(children);
        next_fitness.extend(child_fitness);
        pop = next;
        fitness = next_fitness;
    }
    let best = first_max(&fitness);
    Ok(PlacementResult { placement: to_placement(set, ris_xy, pop[best]), avg_throughput: fitness[best], evaluations })
}

fn tournament<R: Rng + ?Sized>(indices: &[usize], fitness: &[f64], size: usize, rng: &mut R) -> usize {
    let mut winner = *indices.choose(rng).expect("nonempty population");
    for _ in 1..size {
        let c = *indices.choose(rng).expect("nonempty population");
        if fitness[c] > fitness[winner] {
            winner = c;
        }
    }
    winner
}
