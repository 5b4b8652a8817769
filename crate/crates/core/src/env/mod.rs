//! Farmland grid world: UAVs fly between cells, recognize weeds in the cell
//! below them, and pull data from ground sensors over a lossy radio link.

mod action;
mod config;
mod observe;
mod reward;
mod sim;
mod weeds;

pub use action::{Action, NUM_ACTIONS};
pub use config::{FarmConfig, GridGeometry, RewardWeights, ScenarioParams};
pub use observe::observation_len;
pub use reward::{compute_reward, separation_deficit, RewardTerms, UavStepEvents};
pub use sim::FarmSim;
pub use weeds::WeedMap;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::EpisodeMetrics;
use crate::physics::{self, EnergyLedger};
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorNode {
    pub id: usize,
    /// Planar position in meters.
    pub position: [f64; 2],
    pub cell: (usize, usize),
    pub collected: bool,
}

/// One UAV's view of the fleet's shared knowledge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnownMap {
    /// Cells that have been flown over (and so recognized).
    pub surveyed: Vec<bool>,
    /// Weed cells seen inside some field of view.
    pub weed_seen: Vec<bool>,
    pub discovered: Vec<bool>,
    pub collected: Vec<bool>,
}

impl KnownMap {
    fn empty(cells: usize, sensors: usize) -> Self {
        Self {
            surveyed: vec![false; cells],
            weed_seen: vec![false; cells],
            discovered: vec![false; sensors],
            collected: vec![false; sensors],
        }
    }

    fn union_with(&mut self, other: &KnownMap) {
        for (a, b) in [
            (&mut self.surveyed, &other.surveyed),
            (&mut self.weed_seen, &other.weed_seen),
            (&mut self.discovered, &other.discovered),
            (&mut self.collected, &other.collected),
        ] {
            for (x, &y) in a.iter_mut().zip(b) {
                *x |= y;
            }
        }
    }

    /// Sensors known to exist and not yet collected.
    pub fn pending_sensors(&self) -> impl Iterator<Item = usize> + '_ {
        self.discovered
            .iter()
            .zip(&self.collected)
            .enumerate()
            .filter(|(_, (&d, &c))| d && !c)
            .map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UavState {
    pub id: usize,
    pub cell: (usize, usize),
    pub energy: EnergyLedger,
    pub alive: bool,
    pub known: KnownMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EnvEvent {
    Recognized {
        uav: usize,
        cell: (usize, usize),
        density: f64,
        type_id: u8,
    },
    Collected {
        uav: usize,
        sensor: usize,
    },
    BoundaryHit {
        uav: usize,
    },
    BatteryOutage {
        uav: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    TimeLimit,
    AllDead,
    TasksComplete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UavOutcome {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub terms: RewardTerms,
    /// The UAV will not act again this episode.
    pub done: bool,
    /// The UAV was alive at the start of the step.
    pub acted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub uavs: Vec<UavOutcome>,
    pub episode_done: bool,
    pub termination: Option<Termination>,
    pub events: Vec<EnvEvent>,
}

#[derive(Debug, Clone)]
pub struct FarmEnv {
    config: FarmConfig,
    pub weeds: WeedMap,
    pub sensors: Vec<SensorNode>,
    pub uavs: Vec<UavState>,
    /// Collection probability from each cell center (row-major) to each sensor.
    link: Vec<f64>,
    t: usize,
    termination: Option<Termination>,
}

impl FarmEnv {
    /// Fresh episode whose layout and start cells both derive from `seed`.
    pub fn reset(config: &FarmConfig, seed: u64) -> Result<Self> {
        Self::reset_with_layout(config, seed, seed)
    }

    /// Weed map and sensors come from `layout_seed`; UAV start cells from
    /// `start_seed`. Sensors and UAVs occupy pairwise distinct cells.
    pub fn reset_with_layout(config: &FarmConfig, layout_seed: u64, start_seed: u64) -> Result<Self> {
        config.validate()?;
        let g = &config.geometry;
        let s = &config.scenario;
        let cells = g.cells();

        let mut layout_rng = stream(layout_seed, 0x1A40);
        let weeds = WeedMap::generate(g, s, &mut layout_rng);
        let sensor_cells = sample(&mut layout_rng, cells, s.n_sensors).into_vec();
        let sensors: Vec<SensorNode> = sensor_cells
            .iter()
            .enumerate()
            .map(|(id, &idx)| {
                let cell = g.cell_of(idx);
                let position = [
                    (cell.1 as f64 + layout_rng.gen::<f64>()) * g.cell_size,
                    (cell.0 as f64 + layout_rng.gen::<f64>()) * g.cell_size,
                ];
                SensorNode {
                    id,
                    position,
                    cell,
                    collected: false,
                }
            })
            .collect();

        let mut occupied = vec![false; cells];
        for &idx in &sensor_cells {
            occupied[idx] = true;
        }
        let free: Vec<usize> = (0..cells).filter(|&i| !occupied[i]).collect();
        let mut start_rng = stream(start_seed, 0x57A7);
        let starts = sample(&mut start_rng, free.len(), s.n_uavs).into_vec();
        let uavs = starts
            .iter()
            .enumerate()
            .map(|(id, &k)| UavState {
                id,
                cell: g.cell_of(free[k]),
                energy: EnergyLedger::default(),
                alive: true,
                known: KnownMap::empty(cells, s.n_sensors),
            })
            .collect();

        let link = Self::link_table(config, &sensors);
        Ok(Self {
            config: config.clone(),
            weeds,
            sensors,
            uavs,
            link,
            t: 0,
            termination: None,
        })
    }

    /// Builds an environment from explicit parts. Used by tests and tools that
    /// need hand-made layouts.
    pub fn from_parts(
        config: &FarmConfig,
        weeds: WeedMap,
        sensor_positions: Vec<[f64; 2]>,
        uav_cells: Vec<(usize, usize)>,
    ) -> Result<Self> {
        config.validate()?;
        let g = &config.geometry;
        if weeds.density.len() != g.cells() {
            return Err(Error::contract("weed map size does not match the grid"));
        }
        let side = g.side_m();
        let sensors = sensor_positions
            .into_iter()
            .enumerate()
            .map(|(id, p)| {
                if !(0.0..side).contains(&p[0]) || !(0.0..side).contains(&p[1]) {
                    return Err(Error::contract(format!("sensor {id} outside the farmland")));
                }
                let cell = ((p[1] / g.cell_size) as usize, (p[0] / g.cell_size) as usize);
                Ok(SensorNode {
                    id,
                    position: p,
                    cell,
                    collected: false,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let n_sensors = sensors.len();
        let uavs = uav_cells
            .into_iter()
            .enumerate()
            .map(|(id, cell)| {
                if !g.in_bounds(cell.0 as i64, cell.1 as i64) {
                    return Err(Error::contract(format!("UAV {id} starts outside the grid")));
                }
                Ok(UavState {
                    id,
                    cell,
                    energy: EnergyLedger::default(),
                    alive: true,
                    known: KnownMap::empty(g.cells(), n_sensors),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut config = config.clone();
        config.scenario.n_uavs = uavs.len();
        config.scenario.n_sensors = n_sensors;
        let link = Self::link_table(&config, &sensors);
        Ok(Self {
            config,
            weeds,
            sensors,
            uavs,
            link,
            t: 0,
            termination: None,
        })
    }

    fn link_table(config: &FarmConfig, sensors: &[SensorNode]) -> Vec<f64> {
        let g = &config.geometry;
        let mut link = Vec::with_capacity(g.cells() * sensors.len());
        for idx in 0..g.cells() {
            let c = g.center(g.cell_of(idx));
            for s in sensors {
                link.push(physics::collection_probability(
                    [c[0], c[1], g.altitude],
                    [s.position[0], s.position[1], 0.0],
                    &config.comm,
                ));
            }
        }
        link
    }

    pub fn config(&self) -> &FarmConfig {
        &self.config
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.config.geometry
    }

    pub fn time_step(&self) -> usize {
        self.t
    }

    pub fn is_done(&self) -> bool {
        self.termination.is_some()
    }

    pub fn termination(&self) -> Option<Termination> {
        self.termination
    }

    pub fn n_uavs(&self) -> usize {
        self.uavs.len()
    }

    /// Collection probability for a UAV hovering over `cell`.
    pub fn link_probability(&self, cell: (usize, usize), sensor: usize) -> f64 {
        self.link[self.geometry().index(cell) * self.sensors.len() + sensor]
    }

    fn sensor_in_range(&self, cell: (usize, usize), sensor: usize) -> bool {
        let p = self.link_probability(cell, sensor);
        p > 0.0 && p >= self.config.scenario.collect_prob_floor
    }

    /// Nearest (3D) uncollected sensor that is within radio range of `cell`.
    pub fn nearest_connectable(&self, cell: (usize, usize)) -> Option<usize> {
        let here = self.geometry().center(cell);
        self.sensors
            .iter()
            .filter(|s| !s.collected && self.sensor_in_range(cell, s.id))
            .min_by(|a, b| {
                planar_dist(here, a.position)
                    .total_cmp(&planar_dist(here, b.position))
                    .then(a.id.cmp(&b.id))
            })
            .map(|s| s.id)
    }

    /// Compass octant from `cell` to the centroid of `known`'s pending sensors.
    pub fn sensor_direction(&self, cell: (usize, usize), known: &KnownMap) -> Option<Action> {
        let (sum, n) = known
            .pending_sensors()
            .fold(([0.0, 0.0], 0usize), |(acc, n), i| {
                let p = self.sensors[i].position;
                ([acc[0] + p[0], acc[1] + p[1]], n + 1)
            });
        if n == 0 {
            return None;
        }
        let here = self.geometry().center(cell);
        let centroid = [sum[0] / n as f64, sum[1] / n as f64];
        // y grows southward in meters, so north is -y
        Action::octant(centroid[0] - here[0], here[1] - centroid[1])
    }

    /// Planar distance from `cell` to the closest of `known`'s pending sensors.
    fn pending_sensor_distance(&self, cell: (usize, usize), known: &KnownMap) -> Option<f64> {
        let here = self.geometry().center(cell);
        known
            .pending_sensors()
            .map(|i| planar_dist(here, self.sensors[i].position))
            .min_by(f64::total_cmp)
    }

    /// Planar distance from UAV `id` to the closest other live UAV.
    pub fn nearest_uav(&self, id: usize) -> Option<(usize, f64)> {
        let g = self.geometry();
        let here = g.center(self.uavs[id].cell);
        self.uavs
            .iter()
            .filter(|u| u.id != id && u.alive)
            .map(|u| (u.id, planar_dist(here, g.center(u.cell))))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
    }

    pub fn remaining_battery(&self, id: usize) -> f64 {
        physics::remaining_battery(self.config.physics.battery_capacity, self.uavs[id].energy.total)
    }

    /// Makes every UAV's knowledge the union of the fleet's.
    pub fn broadcast_merge(&mut self) {
        let Some(first) = self.uavs.first() else {
            return;
        };
        let mut merged = first.known.clone();
        for u in &self.uavs[1..] {
            merged.union_with(&u.known);
        }
        for u in &mut self.uavs {
            u.known.clone_from(&merged);
        }
    }

    /// Advances the world by one time step.
    ///
    /// `actions[i]` is the move for UAV `i`: `Some` for a live UAV, `None`
    /// to hover in place. Passing `Some` for a dead UAV is an error.
    pub fn step<R: Rng + ?Sized>(&mut self, actions: &[Option<Action>], rng: &mut R) -> Result<StepOutcome> {
        if self.is_done() {
            return Err(Error::contract("step called on a finished episode"));
        }
        if actions.len() != self.uavs.len() {
            return Err(Error::contract(format!(
                "expected {} actions, got {}",
                self.uavs.len(),
                actions.len()
            )));
        }
        for (u, a) in self.uavs.iter().zip(actions) {
            if !u.alive && a.is_some() {
                return Err(Error::contract(format!("UAV {} is out of battery and cannot act", u.id)));
            }
        }

        let g = self.config.geometry.clone();
        let dt = self.config.scenario.dt;
        let capacity = self.config.physics.battery_capacity;
        let n = self.uavs.len();
        let mut events = Vec::new();
        let mut step_events = vec![UavStepEvents::default(); n];
        let acted: Vec<bool> = self.uavs.iter().map(|u| u.alive).collect();

        for id in 0..n {
            if !acted[id] {
                continue;
            }
            let action = actions[id];
            let start = self.uavs[id].cell;
            let pending_before = self.pending_sensor_distance(start, &self.uavs[id].known);
            let target_dir = self.sensor_direction(start, &self.uavs[id].known);
            let ev = &mut step_events[id];

            // move
            let mut velocity = [0.0, 0.0];
            if let Some(a) = action {
                let (dr, dc) = a.offset();
                let (r, c) = (start.0 as i64 + dr, start.1 as i64 + dc);
                if g.in_bounds(r, c) {
                    self.uavs[id].cell = (r as usize, c as usize);
                    velocity = a.velocity(g.cell_size, dt);
                } else {
                    ev.boundary_hit = true;
                    events.push(EnvEvent::BoundaryHit { uav: id });
                }
            }
            let cell = self.uavs[id].cell;

            // energy
            let mut delta = physics::step_energy(velocity, dt, &self.config.physics)?;
            let left = physics::remaining_battery(capacity, self.uavs[id].energy.total);
            if delta.total >= left {
                // the battery can only give what it has left
                delta = delta.scaled(left.max(0.0) / delta.total);
                self.uavs[id].energy.accumulate(&delta);
                self.uavs[id].alive = false;
                ev.outage = true;
                events.push(EnvEvent::BatteryOutage { uav: id });
                continue;
            }
            self.uavs[id].energy.accumulate(&delta);

            if let (Some(a), Some(dir)) = (action, target_dir) {
                ev.explore = a == dir;
            }
            if let Some(before) = pending_before {
                let after = self.pending_sensor_distance(cell, &self.uavs[id].known);
                ev.exploit = after.is_some_and(|d| d < before);
            }

            // recognition of the cell below
            let idx = g.index(cell);
            self.uavs[id].known.surveyed[idx] = true;
            if self.weeds.is_weed(idx) && !self.weeds.recognized[idx] {
                self.weeds.recognized[idx] = true;
                ev.recognized_weed = true;
                events.push(EnvEvent::Recognized {
                    uav: id,
                    cell,
                    density: self.weeds.density[idx],
                    type_id: self.weeds.type_id[idx],
                });
            }

            // data collection: one attempt on the nearest sensor in range
            for s in 0..self.sensors.len() {
                if self.sensor_in_range(cell, s) {
                    self.uavs[id].known.discovered[s] = true;
                }
            }
            if let Some(s) = self.nearest_connectable(cell) {
                let p = self.link_probability(cell, s);
                if rng.gen::<f64>() < p {
                    self.sensors[s].collected = true;
                    self.uavs[id].known.collected[s] = true;
                    ev.collected = true;
                    events.push(EnvEvent::Collected { uav: id, sensor: s });
                }
            }

            // field-of-view sensing
            let half = (g.fov_cells / 2) as i64;
            for dr in -half..=half {
                for dc in -half..=half {
                    let (r, c) = (cell.0 as i64 + dr, cell.1 as i64 + dc);
                    if g.in_bounds(r, c) {
                        let j = g.index((r as usize, c as usize));
                        if self.weeds.is_weed(j) {
                            self.uavs[id].known.weed_seen[j] = true;
                        }
                    }
                }
            }
        }

        self.broadcast_merge();
        self.t += 1;

        let w = self.config.reward.clone();
        let mut rewards = vec![RewardTerms::default(); n];
        for id in 0..n {
            if acted[id] {
                step_events[id].nearest_uav_dist = self.nearest_uav(id).map(|(_, d)| d);
                rewards[id] = compute_reward(&step_events[id], g.uav_sep_threshold, &w);
            }
        }

        self.termination = if self.uavs.iter().all(|u| !u.alive) {
            Some(Termination::AllDead)
        } else if self.weeds.all_recognized() && self.sensors.iter().all(|s| s.collected) {
            Some(Termination::TasksComplete)
        } else if self.t >= self.config.scenario.max_steps {
            Some(Termination::TimeLimit)
        } else {
            None
        };
        let episode_done = self.termination.is_some();

        let uavs = (0..n)
            .map(|id| UavOutcome {
                observation: self.encode_observation(id),
                reward: rewards[id].total(),
                terms: rewards[id],
                done: episode_done || !self.uavs[id].alive,
                acted: acted[id],
            })
            .collect();
        debug_assert!(self.uavs.iter().all(|u| g.in_bounds(u.cell.0 as i64, u.cell.1 as i64)));
        Ok(StepOutcome {
            uavs,
            episode_done,
            termination: self.termination,
            events,
        })
    }

    /// Observation vector for a live UAV.
    pub fn observe(&self, id: usize) -> Result<Vec<f64>> {
        match self.uavs.get(id) {
            None => Err(Error::contract(format!("no UAV with id {id}"))),
            Some(u) if !u.alive => Err(Error::contract(format!("UAV {id} is out of battery"))),
            Some(_) => Ok(self.encode_observation(id)),
        }
    }

    pub fn episode_metrics(&self, algorithm: &str, seed: u64, episode: usize) -> Result<EpisodeMetrics> {
        if !self.is_done() {
            return Err(Error::contract("episode metrics requested before the episode ended"));
        }
        let capacity = self.config.physics.battery_capacity;
        let weed_cells = self.weeds.weed_cells();
        let recognition_pct = if weed_cells == 0 {
            100.0
        } else {
            100.0 * self.weeds.recognized_weed_cells() as f64 / weed_cells as f64
        };
        let collection_pct = if self.sensors.is_empty() {
            100.0
        } else {
            100.0 * self.sensors.iter().filter(|s| s.collected).count() as f64 / self.sensors.len() as f64
        };
        Ok(EpisodeMetrics {
            algorithm: algorithm.to_string(),
            seed,
            episode,
            agents: self.uavs.len(),
            energy_j: self.uavs.iter().map(|u| u.energy.total.min(capacity)).sum(),
            recognition_pct,
            collection_pct,
            completion_s: self.t as f64 * self.config.scenario.dt,
            inference_ms: 0.0,
        })
    }
}

pub(crate) fn planar_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests;
