//! Scenario description and seeded snapshot generation.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// A point in the road frame (metres). `x` runs along the road, `y` across it,
/// `z` is height above ground.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    /// Along-road coordinate.
    pub x: f64,
    /// Cross-road coordinate.
    pub y: f64,
    /// Height.
    pub z: f64,
}

impl Point3 {
    /// Builds a point.
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Euclidean distance.
    pub fn distance(&self, other: &Point3) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        libm::sqrt(dx * dx + dy * dy + dz * dz)
    }
}

/// Which distance normalises the RIS→server elevation cosine.
///
/// The published angle expression divides by the vehicle–RIS distance; the
/// dimensionally expected choice is the RIS–server distance. Both are kept so
/// results can be compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaRDenominator {
    /// Vehicle–RIS distance `d_k`, as published.
    #[default]
    Dk,
    /// RIS–server distance `d_s`.
    Ds,
}

/// Cross-road term used in the tilt-rotated azimuth intermediates `d̃2`/`d̃4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiltCrossTerm {
    /// `(y − h_R)`, as published.
    #[default]
    AsPublished,
    /// `(y − y_R)`.
    Corrected,
}

/// Physical and channel constants.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Carrier frequency (Hz).
    pub carrier_frequency: f64,
    /// Per-vehicle channel bandwidth (Hz).
    pub bandwidth: f64,
    /// Vehicle transmit power (W).
    pub tx_power: f64,
    /// Product of vehicle and server antenna gains.
    pub antenna_gain_product: f64,
    /// Gain of one RIS element.
    pub element_gain: f64,
    /// Element rows `M_r`.
    pub elements_rows: u32,
    /// Element columns `M_l`.
    pub elements_cols: u32,
    /// Element length `b` (m).
    pub element_len: f64,
    /// Element width `d` (m).
    pub element_wid: f64,
    /// Path-loss exponent.
    pub path_loss_exponent: f64,
    /// Extra NLoS power attenuation of the vehicle–RIS hop (linear).
    pub nlos_atten_vehicle: f64,
    /// Extra NLoS power attenuation of the RIS–server hop (linear).
    pub nlos_atten_server: f64,
    /// Environment constant `A1` of the LoS probability model.
    pub env_a1: f64,
    /// Environment constant `A2` of the LoS probability model.
    pub env_a2: f64,
    /// Noise power (W).
    pub noise_power: f64,
    /// Computing rate allotted to each task (FLOPS).
    pub flops_per_task: f64,
    /// Minimum acceptable completion probability `η`.
    pub completion_threshold: f64,
    /// Trajectory grid length `Δ_d` (m).
    pub grid_len: f64,
    /// Normaliser of the server elevation cosine.
    pub theta_r_denominator: ThetaRDenominator,
    /// Cross-road term of the azimuth intermediates.
    pub tilt_cross_term: TiltCrossTerm,
}

impl SystemParams {
    /// Carrier wavelength (m).
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// Urban defaults: 5.9 GHz, 20 MHz, `G_tG_r = 100`, `G = 8`, 200×200
    /// elements of λ/5, `α = 2.7`, −20 dB NLoS attenuation,
    /// `A1 = 11.95`, `A2 = 0.136`, −100 dBm noise, 20 TFLOPS, `η = 0.75`.
    pub fn urban_default() -> Self {
        let carrier_frequency = 5.9e9;
        let lambda = SPEED_OF_LIGHT / carrier_frequency;
        Self {
            carrier_frequency,
            bandwidth: 20e6,
            tx_power: 0.2,
            antenna_gain_product: 100.0,
            element_gain: 8.0,
            elements_rows: 200,
            elements_cols: 200,
            element_len: lambda / 5.0,
            element_wid: lambda / 5.0,
            path_loss_exponent: 2.7,
            nlos_atten_vehicle: db_to_linear(-20.0),
            nlos_atten_server: db_to_linear(-20.0),
            env_a1: 11.95,
            env_a2: 0.136,
            noise_power: dbm_to_watts(-100.0),
            flops_per_task: 20e12,
            completion_threshold: 0.75,
            grid_len: 1.0,
            theta_r_denominator: ThetaRDenominator::Dk,
            tilt_cross_term: TiltCrossTerm::AsPublished,
        }
    }

    /// Checks every invariant, reporting the first violation.
    pub fn validate(&self) -> Result<()> {
        let positive: [(&'static str, f64); 14] = [
            ("system.carrier_frequency_hz", self.carrier_frequency),
            ("system.bandwidth_hz", self.bandwidth),
            ("system.tx_power_w", self.tx_power),
            ("system.antenna_gain_product", self.antenna_gain_product),
            ("system.element_gain", self.element_gain),
            ("system.element_len_m", self.element_len),
            ("system.element_wid_m", self.element_wid),
            ("system.path_loss_exponent", self.path_loss_exponent),
            ("system.env_a1", self.env_a1),
            ("system.env_a2", self.env_a2),
            ("system.noise_dbm", self.noise_power),
            ("system.flops_per_task", self.flops_per_task),
            ("system.grid_len_m", self.grid_len),
            ("system.nlos_atten_vehicle_db", self.nlos_atten_vehicle),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Invalid { field, reason: "must be finite and strictly positive" });
            }
        }
        for (field, v) in [
            ("system.nlos_atten_vehicle_db", self.nlos_atten_vehicle),
            ("system.nlos_atten_server_db", self.nlos_atten_server),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Invalid { field, reason: "linear attenuation must lie in (0, 1)" });
            }
        }
        if !(self.completion_threshold > 0.0 && self.completion_threshold < 1.0) {
            return Err(Error::Invalid { field: "system.completion_threshold", reason: "must lie in (0, 1)" });
        }
        if self.elements_rows == 0 {
            return Err(Error::Invalid { field: "system.elements_rows", reason: "must be at least 1" });
        }
        if self.elements_cols == 0 {
            return Err(Error::Invalid { field: "system.elements_cols", reason: "must be at least 1" });
        }
        Ok(())
    }
}

/// `10^(db/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Travel direction along `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Towards `+x`.
    Forward,
    /// Towards `−x`.
    Backward,
}

impl Direction {
    /// `+1.0` or `−1.0`.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    /// Parses `+1`/`-1`.
    pub fn from_sign(sign: i32) -> Option<Self> {
        match sign {
            1 => Some(Direction::Forward),
            -1 => Some(Direction::Backward),
            _ => None,
        }
    }
}

/// One traffic lane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lane {
    /// Cross-road coordinate of the lane centre (m).
    pub center_y: f64,
    /// Travel direction.
    pub direction: Direction,
}

/// Straight multi-lane road segment.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadGeometry {
    /// Start of the segment (m).
    pub x_min: f64,
    /// End of the segment (m).
    pub x_max: f64,
    /// Lanes.
    pub lanes: Vec<Lane>,
    /// Height of vehicle antennas `z_k` (m).
    pub vehicle_antenna_height: f64,
}

impl RoadGeometry {
    /// Four 4 m lanes from −100 m to 100 m, two per direction, centred on `y = 0`.
    pub fn four_lane_urban() -> Self {
        Self {
            x_min: -100.0,
            x_max: 100.0,
            lanes: alloc::vec![
                Lane { center_y: -6.0, direction: Direction::Forward },
                Lane { center_y: -2.0, direction: Direction::Forward },
                Lane { center_y: 2.0, direction: Direction::Backward },
                Lane { center_y: 6.0, direction: Direction::Backward },
            ],
            vehicle_antenna_height: 0.0,
        }
    }

    /// Checks `x_min < x_max` and that at least one lane exists.
    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_min < self.x_max) {
            return Err(Error::Invalid { field: "road.x_min_m", reason: "must be finite and below road.x_max_m" });
        }
        if self.lanes.is_empty() {
            return Err(Error::Invalid { field: "road.lanes", reason: "at least one lane is required" });
        }
        if !self.vehicle_antenna_height.is_finite() {
            return Err(Error::Invalid { field: "road.vehicle_antenna_height_m", reason: "must be finite" });
        }
        Ok(())
    }
}

/// An edge server.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Server {
    /// Index within the scenario.
    pub id: usize,
    /// Transceiver position.
    pub position: Point3,
    /// Maximum number of concurrent tasks `C_s`.
    pub capacity: u32,
}

/// `count` servers with capacity `capacity`, spaced evenly over `[x_min, x_max]`
/// at cross-road offset `y` and height `z`.
pub fn equidistant_servers(count: usize, x_min: f64, x_max: f64, y: f64, z: f64, capacity: u32) -> Vec<Server> {
    let spacing = (x_max - x_min) / count.max(1) as f64;
    (0..count)
        .map(|id| Server {
            id,
            position: Point3::new(x_min + (id as f64 + 0.5) * spacing, y, z),
            capacity,
        })
        .collect()
}

/// RIS pose: fixed horizontal position, searched altitude and downward tilt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    /// Horizontal position `(x_R, y_R)` (m).
    pub ris_xy: (f64, f64),
    /// Altitude `h_R` (m).
    pub altitude: f64,
    /// Tilt `θ_R` (rad); 0 faces the road horizontally, π/2 faces the ground.
    pub tilt: f64,
}

impl Placement {
    /// Builds a placement with the tilt given in degrees.
    pub fn from_degrees(ris_xy: (f64, f64), altitude: f64, tilt_deg: f64) -> Self {
        Self { ris_xy, altitude, tilt: tilt_deg.to_radians() }
    }

    /// RIS centre.
    pub fn position(&self) -> Point3 {
        Point3::new(self.ris_xy.0, self.ris_xy.1, self.altitude)
    }

    /// Tilt in degrees.
    pub fn tilt_deg(&self) -> f64 {
        self.tilt.to_degrees()
    }
}

/// Box constraints on altitude and tilt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacementBounds {
    /// `H_min` (m).
    pub h_min: f64,
    /// `H_max` (m).
    pub h_max: f64,
    /// Lower tilt bound (rad), at least 0.
    pub theta_min: f64,
    /// Upper tilt bound (rad), at most π/2.
    pub theta_max: f64,
}

impl PlacementBounds {
    /// `[0, 90] m × [0, π/2]`.
    pub fn urban_default() -> Self {
        Self { h_min: 0.0, h_max: 90.0, theta_min: 0.0, theta_max: FRAC_PI_2 }
    }

    /// Checks ordering and the `[0, π/2]` tilt range.
    pub fn validate(&self) -> Result<()> {
        if !(self.h_min.is_finite() && self.h_max.is_finite() && self.h_min <= self.h_max) {
            return Err(Error::Invalid { field: "placement.h_min_m", reason: "must be finite and not above placement.h_max_m" });
        }
        if !(self.theta_min >= 0.0 && self.theta_max <= FRAC_PI_2 + 1e-12 && self.theta_min <= self.theta_max) {
            return Err(Error::Invalid { field: "placement.theta_min_deg", reason: "tilt bounds must satisfy 0 <= min <= max <= 90" });
        }
        Ok(())
    }

    /// Whether `p` lies inside the box.
    pub fn contains(&self, p: &Placement) -> bool {
        p.altitude >= self.h_min - 1e-9
            && p.altitude <= self.h_max + 1e-9
            && p.tilt >= self.theta_min - 1e-12
            && p.tilt <= self.theta_max + 1e-12
    }
}

/// Task tuple `(D_k, F_k, T_k^th)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskSpec {
    /// Input size (bits).
    pub data_bits: f64,
    /// Total workload (FLOPs), input size times per-bit workload.
    pub workload_flops: f64,
    /// Deadline (s).
    pub deadline: f64,
}

impl TaskSpec {
    /// Object detection on two frames: 2 × 89.7 GFLOPs, 0.1 s deadline,
    /// 40 Mbit upload.
    pub fn detection_default() -> Self {
        Self { data_bits: 40e6, workload_flops: 2.0 * 89.7e9, deadline: 0.1 }
    }

    /// Checks every field is strictly positive.
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("task.data_bits", self.data_bits),
            ("task.workload_flops", self.workload_flops),
            ("task.deadline_s", self.deadline),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Invalid { field, reason: "must be finite and strictly positive" });
            }
        }
        Ok(())
    }
}

/// A vehicle with its pending task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vehicle {
    /// Index within its instance.
    pub id: usize,
    /// Position when the offloading request is issued.
    pub position: Point3,
    /// Constant speed (m/s).
    pub speed: f64,
    /// Travel direction.
    pub direction: Direction,
    /// Task to offload.
    pub task: TaskSpec,
}

/// One traffic snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    /// Index `n`.
    pub index: u64,
    /// Vehicles present.
    pub vehicles: Vec<Vehicle>,
}

/// Settings of the completion-probability estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorParams {
    /// Largest trajectory length enumerated exactly.
    pub enum_limit: usize,
    /// Monte Carlo draws per pair beyond the limit.
    pub mc_samples: usize,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self { enum_limit: 16, mc_samples: 10_000 }
    }
}

/// Everything needed to generate and score a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Physical constants.
    pub system: SystemParams,
    /// Road layout.
    pub road: RoadGeometry,
    /// Edge servers.
    pub servers: Vec<Server>,
    /// Fixed horizontal RIS position.
    pub ris_xy: (f64, f64),
    /// Search box.
    pub bounds: PlacementBounds,
    /// Task carried by sampled vehicles.
    pub task: TaskSpec,
    /// Vehicle arrivals per second.
    pub arrival_rate: f64,
    /// Snapshot window (s); the mean vehicle count is `arrival_rate × window`.
    pub snapshot_window: f64,
    /// Speed range `(v_min, v_max)` (m/s).
    pub speed_range: (f64, f64),
    /// Number of instances `N`.
    pub num_instances: usize,
    /// Seed every random stream is derived from.
    pub master_seed: u64,
    /// Completion-probability estimator settings.
    pub estimator: EstimatorParams,
}

impl ScenarioConfig {
    /// Urban four-server scenario.
    pub fn urban_default() -> Self {
        let road = RoadGeometry::four_lane_urban();
        let servers = equidistant_servers(4, road.x_min, road.x_max, 12.0, 6.0, 4);
        Self {
            system: SystemParams::urban_default(),
            road,
            servers,
            ris_xy: (0.0, -12.0),
            bounds: PlacementBounds::urban_default(),
            task: TaskSpec::detection_default(),
            arrival_rate: 0.7,
            snapshot_window: 20.0,
            speed_range: (40.0 / 3.6, 72.0 / 3.6),
            num_instances: 100,
            master_seed: 1,
            estimator: EstimatorParams::default(),
        }
    }

    /// Checks every invariant and reports the first violation.
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.road.validate()?;
        self.bounds.validate()?;
        self.task.validate()?;
        for (i, s) in self.servers.iter().enumerate() {
            if s.id != i {
                return Err(Error::Invalid { field: "servers", reason: "server ids must be 0..S in order" });
            }
            if !(s.position.x.is_finite() && s.position.y.is_finite() && s.position.z.is_finite()) {
                return Err(Error::Invalid { field: "servers", reason: "positions must be finite" });
            }
        }
        if !(self.arrival_rate.is_finite() && self.arrival_rate >= 0.0) {
            return Err(Error::Invalid { field: "traffic.arrival_rate_per_s", reason: "must be finite and non-negative" });
        }
        if !(self.snapshot_window.is_finite() && self.snapshot_window > 0.0) {
            return Err(Error::Invalid { field: "traffic.snapshot_window_s", reason: "must be strictly positive" });
        }
        let (lo, hi) = self.speed_range;
        if !(lo > 0.0 && lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Invalid { field: "traffic.speed_min_mps", reason: "need 0 < v_min <= v_max" });
        }
        if self.num_instances == 0 {
            return Err(Error::Invalid { field: "traffic.num_instances", reason: "must be at least 1" });
        }
        if self.estimator.mc_samples == 0 {
            return Err(Error::Invalid { field: "estimator.mc_samples", reason: "must be at least 1" });
        }
        Ok(())
    }

    /// Sum of server capacities.
    pub fn total_capacity(&self) -> u64 {
        self.servers.iter().map(|s| s.capacity as u64).sum()
    }

    /// Generates instance `n`. Depends only on `(master_seed, n)` and the
    /// sampling parameters.
    pub fn generate_instance(&self, n: u64) -> Instance {
        let mut rng = rng::stream(self.master_seed, Domain::Instances, n);
        let mean = self.arrival_rate * self.snapshot_window;
        let count = if mean > 0.0 {
            // Poisson::new only rejects non-positive or non-finite means.
            Poisson::new(mean).map(|p| p.sample(&mut rng) as usize).unwrap_or(0)
        } else {
            0
        };
        let (v_lo, v_hi) = self.speed_range;
        let vehicles = (0..count)
            .map(|id| {
                let lane = self.road.lanes[rng.random_range(0..self.road.lanes.len())];
                let x = uniform(&mut rng, self.road.x_min, self.road.x_max);
                let speed = uniform(&mut rng, v_lo, v_hi);
                Vehicle {
                    id,
                    position: Point3::new(x, lane.center_y, self.road.vehicle_antenna_height),
                    speed,
                    direction: lane.direction,
                    task: self.task,
                }
            })
            .collect();
        Instance { index: n, vehicles }
    }

    /// Generates all `N` instances.
    pub fn generate_instances(&self) -> Vec<Instance> {
        (0..self.num_instances as u64).map(|n| self.generate_instance(n)).collect()
    }
}

/// Uniform draw on `[lo, hi]`; returns `lo` for an empty interval.
pub(crate) fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
