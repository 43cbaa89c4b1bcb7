//! Trajectory grid cells.

use alloc::vec::Vec;

use crate::scenario::Vehicle;

/// Cells a vehicle crosses, in travel order, and the time spent in each.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    /// Cell centres `(x, y)` (m). Cell 0 is the vehicle's initial position.
    pub cells: Vec<(f64, f64)>,
    /// Sojourn time per cell `Δ_d / v` (s).
    pub sojourn_time: f64,
}

/// Sojourn time in one cell.
pub fn sojourn_time(delta_d: f64, speed: f64) -> f64 {
    delta_d / speed
}

/// The first `max_cells` cells of `vehicle`'s straight-line trajectory.
///
/// Cells past the end of the road are still produced.
pub fn grid_path(vehicle: &Vehicle, delta_d: f64, max_cells: usize) -> GridPath {
    let step = vehicle.direction.sign() * delta_d;
    let cells = (0..max_cells)
        .map(|l| (vehicle.position.x + l as f64 * step, vehicle.position.y))
        .collect();
    GridPath { cells, sojourn_time: sojourn_time(delta_d, vehicle.speed) }
}
