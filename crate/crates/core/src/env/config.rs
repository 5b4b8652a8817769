use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{CommParams, PhysicsParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridGeometry {
    /// Cells per side.
    pub grid_count: usize,
    /// Side length of one cell in meters.
    pub cell_size: f64,
    /// Flight altitude in meters.
    pub altitude: f64,
    /// Side of the square field of view, in cells (odd).
    pub fov_cells: usize,
    /// UAVs closer than this (meters) are penalized.
    pub uav_sep_threshold: f64,
}

impl Default for GridGeometry {
    fn default() -> Self {
        Self {
            grid_count: 20,
            cell_size: 20.0,
            altitude: 20.0,
            fov_cells: 3,
            uav_sep_threshold: 20.0 * std::f64::consts::SQRT_2,
        }
    }
}

impl GridGeometry {
    pub fn cells(&self) -> usize {
        self.grid_count * self.grid_count
    }

    pub fn side_m(&self) -> f64 {
        self.grid_count as f64 * self.cell_size
    }

    pub fn diagonal_m(&self) -> f64 {
        self.side_m() * std::f64::consts::SQRT_2
    }

    pub fn index(&self, cell: (usize, usize)) -> usize {
        cell.0 * self.grid_count + cell.1
    }

    pub fn cell_of(&self, index: usize) -> (usize, usize) {
        (index / self.grid_count, index % self.grid_count)
    }

    pub fn in_bounds(&self, row: i64, col: i64) -> bool {
        let n = self.grid_count as i64;
        (0..n).contains(&row) && (0..n).contains(&col)
    }

    /// Planar position `(x, y)` of a cell center in meters; `y` grows with the row.
    pub fn center(&self, cell: (usize, usize)) -> [f64; 2] {
        [
            (cell.1 as f64 + 0.5) * self.cell_size,
            (cell.0 as f64 + 0.5) * self.cell_size,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_count < 2 {
            return Err(Error::config("geometry.grid_count", "must be >= 2"));
        }
        if self.fov_cells == 0 || self.fov_cells.is_multiple_of(2) {
            return Err(Error::config("geometry.fov_cells", "must be odd and >= 1"));
        }
        if !(self.cell_size > 0.0 && self.cell_size.is_finite()) {
            return Err(Error::config("geometry.cell_size", "must be > 0"));
        }
        if !(self.altitude >= 0.0 && self.altitude.is_finite()) {
            return Err(Error::config("geometry.altitude", "must be >= 0"));
        }
        if !(self.uav_sep_threshold >= 0.0 && self.uav_sep_threshold.is_finite()) {
            return Err(Error::config("geometry.uav_sep_threshold", "must be >= 0"));
        }
        Ok(())
    }
}

/// Episode and world-generation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    pub n_uavs: usize,
    pub n_sensors: usize,
    /// Steps per episode.
    pub max_steps: usize,
    /// Seconds per step.
    pub dt: f64,
    pub weed_clusters: usize,
    /// Cluster spread as a fraction of the grid side, sampled uniformly.
    pub weed_spread_min: f64,
    pub weed_spread_max: f64,
    /// Densities below this are cleared to zero (no weed).
    pub weed_threshold: f64,
    pub weed_types: u8,
    /// Sensors with a lower collection probability are out of range.
    pub collect_prob_floor: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            n_uavs: 4,
            n_sensors: 40,
            max_steps: 200,
            dt: 1.0,
            weed_clusters: 4,
            weed_spread_min: 0.08,
            weed_spread_max: 0.18,
            weed_threshold: 0.25,
            weed_types: 3,
            collect_prob_floor: 0.01,
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self, geometry: &GridGeometry) -> Result<()> {
        if self.n_uavs == 0 {
            return Err(Error::config("scenario.n_uavs", "must be >= 1"));
        }
        if self.n_uavs + self.n_sensors > geometry.cells() {
            return Err(Error::config(
                "scenario.n_sensors",
                format!(
                    "{} UAVs + {} sensors exceed the {} cells of the grid",
                    self.n_uavs,
                    self.n_sensors,
                    geometry.cells()
                ),
            ));
        }
        if self.max_steps == 0 {
            return Err(Error::config("scenario.max_steps", "must be >= 1"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("scenario.dt", "must be > 0"));
        }
        if !(self.weed_spread_min > 0.0 && self.weed_spread_min <= self.weed_spread_max) {
            return Err(Error::config(
                "scenario.weed_spread_min",
                "must be > 0 and <= weed_spread_max",
            ));
        }
        if !(0.0..1.0).contains(&self.weed_threshold) {
            return Err(Error::config("scenario.weed_threshold", "must be in [0, 1)"));
        }
        if self.weed_types == 0 {
            return Err(Error::config("scenario.weed_types", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.collect_prob_floor) {
            return Err(Error::config("scenario.collect_prob_floor", "must be in [0, 1]"));
        }
        Ok(())
    }
}

/// Reward magnitudes. Penalties are stored positive and subtracted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardWeights {
    pub p_out: f64,
    pub p_bat: f64,
    /// Per meter of separation deficit.
    pub p_clo_coeff: f64,
    pub i_weed: f64,
    pub i_data: f64,
    pub i_exploit: f64,
    pub i_explore: f64,
    pub b_const: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            p_out: 10.0,
            p_bat: 10.0,
            p_clo_coeff: 0.1,
            i_weed: 2.0,
            i_data: 2.0,
            i_exploit: 0.05,
            i_explore: 0.1,
            b_const: 0.1,
        }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("p_out", self.p_out),
            ("p_bat", self.p_bat),
            ("p_clo_coeff", self.p_clo_coeff),
            ("i_weed", self.i_weed),
            ("i_data", self.i_data),
            ("i_exploit", self.i_exploit),
            ("i_explore", self.i_explore),
            ("b_const", self.b_const),
        ] {
            if !v.is_finite() {
                return Err(Error::config(format!("reward.{name}"), "must be finite"));
            }
        }
        Ok(())
    }
}

/// Everything the farm simulator needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FarmConfig {
    pub geometry: GridGeometry,
    pub scenario: ScenarioParams,
    pub physics: PhysicsParams,
    pub comm: CommParams,
    pub reward: RewardWeights,
}

impl FarmConfig {
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.scenario.validate(&self.geometry)?;
        self.physics.validate()?;
        self.comm.validate()?;
        self.reward.validate()
    }
}
