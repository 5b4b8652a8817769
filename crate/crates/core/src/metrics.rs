use serde::{Deserialize, Serialize};

/// Task metrics for one finished episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub algorithm: String,
    pub seed: u64,
    pub episode: usize,
    pub agents: usize,
    /// Energy drawn from all batteries, J.
    pub energy_j: f64,
    /// Recognized weed cells over all weed cells; 100 for a weed-free map.
    pub recognition_pct: f64,
    pub collection_pct: f64,
    pub completion_s: f64,
    /// Mean per-decision latency, ms. Wall-clock, so never written to the
    /// deterministic CSV outputs.
    #[serde(skip)]
    pub inference_ms: f64,
}

impl EpisodeMetrics {
    /// Checks the percentage and energy bounds for a fleet with batteries of
    /// `battery_capacity` joules.
    pub fn check_bounds(&self, battery_capacity: f64) -> Result<(), String> {
        for (name, v) in [
            ("recognition_pct", self.recognition_pct),
            ("collection_pct", self.collection_pct),
        ] {
            if !(0.0..=100.0).contains(&v) {
                return Err(format!("{name} = {v} outside [0, 100]"));
            }
        }
        let cap = self.agents as f64 * battery_capacity;
        if !(self.energy_j >= 0.0 && self.energy_j <= cap * (1.0 + 1e-12)) {
            return Err(format!("energy_j = {} outside [0, {cap}]", self.energy_j));
        }
        Ok(())
    }
}
