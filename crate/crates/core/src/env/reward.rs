use serde::{Deserialize, Serialize};

use super::config::RewardWeights;

/// What happened to one UAV during a step, as far as the reward cares.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UavStepEvents {
    pub boundary_hit: bool,
    pub outage: bool,
    /// Planar distance to the closest other live UAV, if any.
    pub nearest_uav_dist: Option<f64>,
    pub recognized_weed: bool,
    pub collected: bool,
    /// Moved strictly closer to the nearest known uncollected sensor.
    pub exploit: bool,
    /// Moved in the compass direction of the known uncollected sensors.
    pub explore: bool,
}

/// Signed contribution of every reward term; `total()` is their sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardTerms {
    pub out: f64,
    pub bat: f64,
    pub clo: f64,
    pub weed: f64,
    pub data: f64,
    pub exploit: f64,
    pub explore: f64,
    pub bonus: f64,
}

impl RewardTerms {
    pub fn total(&self) -> f64 {
        self.out
            + self.bat
            + self.clo
            + self.weed
            + self.data
            + self.exploit
            + self.explore
            + self.bonus
    }
}

/// Separation deficit `max(0, threshold − distance)` in meters.
pub fn separation_deficit(nearest_uav_dist: Option<f64>, threshold: f64) -> f64 {
    nearest_uav_dist.map_or(0.0, |d| (threshold - d).max(0.0))
}

pub fn compute_reward(ev: &UavStepEvents, sep_threshold: f64, w: &RewardWeights) -> RewardTerms {
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    RewardTerms {
        out: -w.p_out * flag(ev.boundary_hit),
        bat: -w.p_bat * flag(ev.outage),
        clo: -w.p_clo_coeff * separation_deficit(ev.nearest_uav_dist, sep_threshold),
        weed: w.i_weed * flag(ev.recognized_weed),
        data: w.i_data * flag(ev.collected),
        exploit: w.i_exploit * flag(ev.exploit),
        explore: w.i_explore * flag(ev.explore),
        bonus: w.b_const,
    }
}
