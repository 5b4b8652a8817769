//! UAV energy consumption and sensor-to-UAV link model.
//!
//! Everything here is a pure function of immutable parameter records. The
//! energy side integrates computation, communication/sensing and flight power
//! as constant-power rectangles over a time step. The radio side maps a 3D
//! distance to a probability of receiving a sensor packet intact:
//! distance -> path loss -> SINR -> BPSK bit error rate -> packet loss rate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Airframe, compute and battery constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsParams {
    /// kg
    pub uav_mass: f64,
    /// m/s²
    pub gravity: f64,
    /// kg/m³
    pub air_density: f64,
    /// Air viscosity (drag) coefficient.
    pub viscosity_coeff: f64,
    pub propeller_count: u32,
    /// m
    pub propeller_radius: f64,
    /// Mechanical efficiency in (0, 1].
    pub mech_efficiency: f64,
    /// m²
    pub fuselage_area: f64,
    /// W
    pub static_power: f64,
    /// F
    pub load_capacitance: f64,
    /// V
    pub voltage: f64,
    /// Hz
    pub clock_freq: f64,
    /// Switching activity factor in (0, 1].
    pub activity_factor: f64,
    /// Communication and sensing power in watts (30 dBm).
    pub comm_sense_power: f64,
    /// Speeds below this are treated as hovering at this speed (m/s).
    pub hover_speed_threshold: f64,
    /// J
    pub battery_capacity: f64,
    /// m/s². Recorded for completeness; no dynamics constraint uses it.
    pub max_acceleration: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            uav_mass: 1.0,
            gravity: 9.8,
            air_density: 1.225,
            viscosity_coeff: 0.5,
            propeller_count: 4,
            propeller_radius: 0.1,
            mech_efficiency: 0.8,
            fuselage_area: 0.01,
            static_power: 4.0,
            load_capacitance: 6.4e-9,
            voltage: 5.0,
            clock_freq: 200e6,
            activity_factor: 0.5,
            comm_sense_power: dbm_to_watts(30.0),
            hover_speed_threshold: 0.1,
            battery_capacity: 51840.0,
            max_acceleration: 20.0 * std::f64::consts::SQRT_2,
        }
    }
}

impl PhysicsParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("uav_mass", self.uav_mass),
            ("gravity", self.gravity),
            ("air_density", self.air_density),
            ("viscosity_coeff", self.viscosity_coeff),
            ("propeller_radius", self.propeller_radius),
            ("mech_efficiency", self.mech_efficiency),
            ("fuselage_area", self.fuselage_area),
            ("static_power", self.static_power),
            ("load_capacitance", self.load_capacitance),
            ("voltage", self.voltage),
            ("clock_freq", self.clock_freq),
            ("activity_factor", self.activity_factor),
            ("comm_sense_power", self.comm_sense_power),
            ("hover_speed_threshold", self.hover_speed_threshold),
            ("battery_capacity", self.battery_capacity),
            ("max_acceleration", self.max_acceleration),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(
                    format!("physics.{name}"),
                    format!("must be finite and > 0, got {value}"),
                ));
            }
        }
        if self.propeller_count == 0 {
            return Err(Error::config("physics.propeller_count", "must be >= 1"));
        }
        if self.mech_efficiency > 1.0 {
            return Err(Error::config("physics.mech_efficiency", "must be in (0, 1]"));
        }
        if self.activity_factor > 1.0 {
            return Err(Error::config("physics.activity_factor", "must be in (0, 1]"));
        }
        Ok(())
    }
}

/// Radio link constants for sensor uplinks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommParams {
    pub tx_power_dbm: f64,
    pub antenna_gain_dbi: f64,
    pub carrier_freq_hz: f64,
    pub light_speed: f64,
    pub packet_length_bits: u32,
    pub boltzmann: f64,
    pub temperature_k: f64,
    pub bandwidth_hz: f64,
}

impl Default for CommParams {
    fn default() -> Self {
        Self {
            tx_power_dbm: 17.0,
            antenna_gain_dbi: 0.0,
            carrier_freq_hz: 2.8e9,
            light_speed: 3e8,
            // 20-byte packets
            packet_length_bits: 160,
            boltzmann: 1.38e-23,
            temperature_k: 298.0,
            bandwidth_hz: 20e6,
        }
    }
}

impl CommParams {
    pub fn validate(&self) -> Result<()> {
        if !self.tx_power_dbm.is_finite() {
            return Err(Error::config("comm.tx_power_dbm", "must be finite"));
        }
        if !self.antenna_gain_dbi.is_finite() {
            return Err(Error::config("comm.antenna_gain_dbi", "must be finite"));
        }
        for (name, value) in [
            ("carrier_freq_hz", self.carrier_freq_hz),
            ("light_speed", self.light_speed),
            ("boltzmann", self.boltzmann),
            ("temperature_k", self.temperature_k),
            ("bandwidth_hz", self.bandwidth_hz),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(
                    format!("comm.{name}"),
                    format!("must be finite and > 0, got {value}"),
                ));
            }
        }
        if self.packet_length_bits == 0 {
            return Err(Error::config("comm.packet_length_bits", "must be >= 1"));
        }
        Ok(())
    }
}

/// Cumulative (or per-step) energy split by consumer, in joules.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub e_cmp: f64,
    pub e_cs: f64,
    pub e_fly: f64,
    pub total: f64,
}

impl EnergyLedger {
    pub fn new(e_cmp: f64, e_cs: f64, e_fly: f64) -> Self {
        Self {
            e_cmp,
            e_cs,
            e_fly,
            total: e_cmp + e_cs + e_fly,
        }
    }

    /// Adds `delta` component-wise; `total` is re-derived from the components.
    pub fn accumulate(&mut self, delta: &EnergyLedger) {
        self.e_cmp += delta.e_cmp;
        self.e_cs += delta.e_cs;
        self.e_fly += delta.e_fly;
        self.total = self.e_cmp + self.e_cs + self.e_fly;
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.e_cmp * factor, self.e_cs * factor, self.e_fly * factor)
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Frontal area `A_surf + n_prp·π·R_prp²` in m².
pub fn frontal_area(p: &PhysicsParams) -> f64 {
    p.fuselage_area + f64::from(p.propeller_count) * PI * p.propeller_radius.powi(2)
}

/// Returns `(c1, c2)`: the drag coefficient (kg/m) and lift-induced
/// coefficient (kg·m) of the flight power model.
pub fn drag_lift_coefficients(p: &PhysicsParams) -> (f64, f64) {
    let c1 = 0.5 * p.air_density * frontal_area(p) * p.viscosity_coeff;
    let rotor_disk = f64::from(p.propeller_count) * PI * p.propeller_radius.powi(2);
    let c2 = p.uav_mass.powi(2) / (p.mech_efficiency * p.air_density * rotor_disk);
    (c1, c2)
}

/// Flight power in watts for planar velocity `v = (vx, vy)` m/s.
///
/// The speed is floored at `hover_speed_threshold`, which keeps the
/// `|v|⁻³` term bounded while hovering.
pub fn flight_power(v: [f64; 2], p: &PhysicsParams) -> f64 {
    let (c1, c2) = drag_lift_coefficients(p);
    let sq = v[0] * v[0] + v[1] * v[1];
    let speed = sq.sqrt().max(p.hover_speed_threshold);
    c1 * speed * speed + c2 * sq / speed.powi(3) + p.uav_mass * p.gravity * speed
}

/// Static plus dynamic (`C·V²·f·α`) computing power in watts.
pub fn computation_power(p: &PhysicsParams) -> f64 {
    p.static_power + p.load_capacitance * p.voltage * p.voltage * p.clock_freq * p.activity_factor
}

/// Energy consumed over one step of `dt` seconds at constant velocity `v`.
pub fn step_energy(v: [f64; 2], dt: f64, p: &PhysicsParams) -> Result<EnergyLedger> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("time step must be > 0, got {dt}")));
    }
    Ok(EnergyLedger::new(
        computation_power(p) * dt,
        p.comm_sense_power * dt,
        flight_power(v, p) * dt,
    ))
}

/// Battery left after `cumulative` joules. Negative means the battery is out.
pub fn remaining_battery(capacity: f64, cumulative: f64) -> f64 {
    capacity - cumulative
}

/// Thermal noise power `k_B·T·Bw` in watts.
pub fn thermal_noise(c: &CommParams) -> f64 {
    c.boltzmann * c.temperature_k * c.bandwidth_hz
}

/// Free-space loss plus a distance-dependent excess term, in dB.
///
/// The free-space term takes the carrier in Hz; the excess term
/// `0.2·f^0.3·d^0.6` takes it in GHz.
pub fn path_loss_db(dist: f64, c: &CommParams) -> Result<f64> {
    if !(dist > 0.0) || !dist.is_finite() {
        return Err(Error::Domain(format!("distance must be > 0, got {dist}")));
    }
    let fspl = 20.0 * (4.0 * PI * c.carrier_freq_hz * dist / c.light_speed).log10();
    let f_ghz = c.carrier_freq_hz / 1e9;
    let excess = 0.2 * f_ghz.powf(0.3) * dist.powf(0.6);
    Ok(fspl + excess)
}

/// Linear signal-to-noise ratio for a link with the given path loss.
/// The received power is formed in dBm and converted to watts before the
/// division by thermal noise.
pub fn sinr_linear(c: &CommParams, pl_db: f64) -> f64 {
    let rx_dbm = c.tx_power_dbm + c.antenna_gain_dbi - pl_db;
    dbm_to_watts(rx_dbm) / thermal_noise(c)
}

/// BPSK bit error rate `Q(√(2·sinr))` with `Q(x) ≈ ½·exp(−x²/2)`.
pub fn ber_bpsk(sinr: f64) -> f64 {
    (0.5 * (-sinr.max(0.0)).exp()).clamp(0.0, 0.5)
}

/// Probability that at least one of `l_bits` bits is corrupted.
pub fn packet_loss_rate(ber: f64, l_bits: u32) -> f64 {
    let ber = ber.clamp(0.0, 1.0);
    // exp(L·ln(1−ber)) keeps precision for tiny error rates
    let ok = (f64::from(l_bits) * (-ber).ln_1p()).exp();
    (1.0 - ok).clamp(0.0, 1.0)
}

/// Smallest distance fed to the path-loss model, in meters.
pub const MIN_LINK_DISTANCE: f64 = 1.0;

/// Probability that a sensor packet sent from `sensor_pos` reaches a UAV at
/// `uav_pos` (both 3D, meters).
pub fn collection_probability(uav_pos: [f64; 3], sensor_pos: [f64; 3], c: &CommParams) -> f64 {
    let dist = uav_pos
        .iter()
        .zip(sensor_pos.iter())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
        .max(MIN_LINK_DISTANCE);
    // dist >= 1 so the domain check cannot fail
    let pl = path_loss_db(dist, c).unwrap_or(f64::INFINITY);
    let ber = ber_bpsk(sinr_linear(c, pl));
    1.0 - packet_loss_rate(ber, c.packet_length_bits)
}
