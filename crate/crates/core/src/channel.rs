//! Cascaded vehicle–RIS–server channel.
//!
//! All functions are pure. Powers are linear watts.

use core::f64::consts::{FRAC_PI_2, PI};

use libm::{acos, atan2, cos, exp, log2, pow, sin, sqrt};

use crate::error::{Error, Result};
use crate::scenario::{Placement, Point3, SystemParams, ThetaRDenominator, TiltCrossTerm};

/// Distances are floored here before they are used as divisors.
pub const MIN_DISTANCE: f64 = 1e-9;

/// Below this the array-factor denominator is treated as its limit.
pub const SINC_LIMIT_EPS: f64 = 1e-12;

/// LoS (`true`) / NLoS (`false`) state of both hops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkState {
    /// Vehicle–RIS hop `a`.
    pub vehicle_ris: bool,
    /// RIS–server hop `c`.
    pub ris_server: bool,
}

/// Elevation and azimuth angles of one vehicle cell and one server seen from
/// the tilted RIS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// Vehicle–RIS distance (m).
    pub d_k: f64,
    /// RIS–server distance (m).
    pub d_s: f64,
    /// Elevation of the vehicle from the RIS broadside (rad).
    pub theta_t: f64,
    /// Elevation of the server from the RIS broadside (rad).
    pub theta_r: f64,
    /// Azimuth of the vehicle (rad).
    pub phi_t: f64,
    /// Azimuth of the server (rad).
    pub phi_r: f64,
    /// Tilt-rotated intermediates `d̃1..d̃4` (m).
    pub aux: [f64; 4],
}

/// Elevation angle in degrees of the RIS seen from `point`:
/// `atan((h_R − z) / horizontal distance)`.
pub fn elevation_angle_deg(ris: &Placement, point: Point3) -> Result<f64> {
    let dx = ris.ris_xy.0 - point.x;
    let dy = ris.ris_xy.1 - point.y;
    let horizontal = sqrt(dx * dx + dy * dy);
    let dz = ris.altitude - point.z;
    if horizontal == 0.0 && dz == 0.0 {
        return Err(Error::DegenerateGeometry);
    }
    Ok(atan2(dz, horizontal).to_degrees())
}

/// Logistic LoS probability of an elevation angle given in degrees.
pub fn los_probability(elevation_deg: f64, a1: f64, a2: f64) -> f64 {
    1.0 / (1.0 + a1 * exp(-a2 * (elevation_deg - a1)))
}

/// Normalised element power pattern `cos³θ` on `[0, π/2]`, zero behind the surface.
pub fn radiation_pattern(theta: f64) -> f64 {
    if (0.0..=FRAC_PI_2).contains(&theta) {
        let c = cos(theta).max(0.0);
        c * c * c
    } else {
        0.0
    }
}

fn clamped_acos(x: f64) -> f64 {
    acos(x.clamp(-1.0, 1.0))
}

/// Angles and distances between the RIS, one vehicle position and one server.
///
/// Uses the published expressions, including the absolute values in the
/// elevation cosines; [`SystemParams::theta_r_denominator`] and
/// [`SystemParams::tilt_cross_term`] select between the published and the
/// dimensionally consistent variants of two terms.
pub fn link_geometry(
    ris: &Placement,
    vehicle: Point3,
    server: Point3,
    theta_r_denominator: ThetaRDenominator,
    tilt_cross_term: TiltCrossTerm,
) -> Result<LinkGeometry> {
    let r = ris.position();
    if vehicle == r || server == r {
        return Err(Error::DegenerateGeometry);
    }
    let (x_r, y_r, h_r) = (r.x, r.y, r.z);
    let (ct, st) = (cos(ris.tilt), sin(ris.tilt));
    let d_k = vehicle.distance(&r).max(MIN_DISTANCE);
    let d_s = server.distance(&r).max(MIN_DISTANCE);

    let theta_t = clamped_acos((ct * (y_r - vehicle.y).abs() + st * (h_r - vehicle.z).abs()) / d_k);
    let denom_r = match theta_r_denominator {
        ThetaRDenominator::Dk => d_k,
        ThetaRDenominator::Ds => d_s,
    };
    let theta_r = clamped_acos((ct * (y_r - server.y).abs() + st * (h_r - server.z).abs()) / denom_r);

    let cross = |y: f64| match tilt_cross_term {
        TiltCrossTerm::AsPublished => y - h_r,
        TiltCrossTerm::Corrected => y - y_r,
    };
    let d1 = (vehicle.y - y_r) - (vehicle.y - y_r) * ct * ct - (vehicle.z - h_r) * ct * st;
    let d2 = (vehicle.z - h_r) - cross(vehicle.y) * ct * st - (vehicle.z - h_r) * st * st;
    let d3 = (server.y - y_r) - (server.y - y_r) * ct * ct - (server.z - h_r) * ct * st;
    let d4 = (server.z - h_r) - cross(server.y) * ct * st - (server.z - h_r) * st * st;

    let azimuth = |dx: f64, a: f64, b: f64| {
        let norm = sqrt(dx * dx + a * a + b * b).max(MIN_DISTANCE);
        clamped_acos(dx / norm)
    };
    let phi_t = azimuth(vehicle.x - x_r, d1, d2);
    let phi_r = azimuth(server.x - x_r, d3, d4);

    Ok(LinkGeometry { d_k, d_s, theta_t, theta_r, phi_t, phi_r, aux: [d1, d2, d3, d4] })
}

/// Array-factor ratio of one RIS axis with `elements` elements at phase
/// argument `x`: `M·sinc(Mx)/sinc(x) = sin(Mx)/sin(x)`, with `sinc(x) = sin x / x`.
///
/// At specular alignment (`|x·sin x|` below [`SINC_LIMIT_EPS`]) the ratio is
/// its limit `M`. Its magnitude never exceeds `M`.
pub fn sinc_ratio(elements: u32, x: f64) -> f64 {
    let m = elements as f64;
    let s = sin(x);
    if (x * s).abs() < SINC_LIMIT_EPS {
        return m;
    }
    (sin(m * x) / s).clamp(-m, m)
}

/// Received power at the server when both hops are LoS.
pub fn cascaded_rx_power_los(params: &SystemParams, geom: &LinkGeometry) -> f64 {
    let lambda = params.wavelength();
    let f_t = radiation_pattern(geom.theta_t);
    let f_r = radiation_pattern(geom.theta_r);
    if f_t == 0.0 || f_r == 0.0 {
        return 0.0;
    }
    let (mr, ml) = (params.elements_rows as f64, params.elements_cols as f64);
    let prefactor = params.tx_power
        * params.antenna_gain_product
        * params.element_gain
        * mr
        * mr
        * ml
        * ml
        * params.element_len
        * params.element_wid
        * lambda
        * lambda
        * f_t
        * f_r
        / (64.0 * PI * PI * PI * pow(geom.d_k, params.path_loss_exponent) * pow(geom.d_s, params.path_loss_exponent));

    let (st, sr) = (sin(geom.theta_t), sin(geom.theta_r));
    let u = st * cos(geom.phi_t) + sr * cos(geom.phi_r);
    let v = st * sin(geom.phi_t) + sr * sin(geom.phi_r);
    let row = sinc_ratio(params.elements_rows, PI / lambda * u * params.element_len);
    let col = sinc_ratio(params.elements_cols, PI / lambda * v * params.element_wid);
    let af = row * col;
    prefactor * af * af
}

/// Channel-state weight `ω(a, c)` scaling the LoS power.
pub fn state_weight(state: LinkState, xi_k: f64, xi_s: f64) -> f64 {
    match (state.vehicle_ris, state.ris_server) {
        (true, true) => 1.0,
        (false, false) => xi_k * xi_s,
        (false, true) => xi_k,
        (true, false) => xi_s,
    }
}

/// Shannon rate `B log2(1 + P/n0)` (bit/s).
pub fn link_rate(rx_power: f64, params: &SystemParams) -> f64 {
    params.bandwidth * log2(1.0 + rx_power.max(0.0) / params.noise_power)
}
