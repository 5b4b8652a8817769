//! Full-knowledge route planners. Each planner splits the weed and sensor
//! cells among the UAVs, orders every UAV's share as an open tour, and the
//! resulting moves are replayed through the simulator.

mod aco;
mod ga;
mod pso;
mod tour;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use aco::AcoParams;
pub use ga::GaParams;
pub use pso::PsoParams;
pub use tour::{brute_force, chebyshev, tour_cost, Cell, TourSearch};

use crate::env::{Action, FarmEnv, FarmSim};
use crate::error::{Error, Result};
use crate::metrics::EpisodeMetrics;
use crate::physics;
use crate::rl::{JointStep, MultiAgentEnv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Planner {
    Aco,
    Pso,
    Ga,
}

impl Planner {
    pub const ALL: [Planner; 3] = [Planner::Aco, Planner::Pso, Planner::Ga];

    pub fn name(self) -> &'static str {
        match self {
            Planner::Aco => "aco",
            Planner::Pso => "pso",
            Planner::Ga => "ga",
        }
    }
}

impl fmt::Display for Planner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Planner {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown planner `{s}` (expected aco, pso or ga)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    /// Weed cells at or below this density are not targeted.
    pub min_weed_density: f64,
    pub kmeans_iterations: usize,
    pub aco: AcoParams,
    pub pso: PsoParams,
    pub ga: GaParams,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            min_weed_density: 0.0,
            kmeans_iterations: 20,
            aco: AcoParams::default(),
            pso: PsoParams::default(),
            ga: GaParams::default(),
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.min_weed_density) {
            return Err(Error::config("baseline.min_weed_density", "must be in [0, 1)"));
        }
        if self.aco.ants == 0 {
            return Err(Error::config("baseline.aco.ants", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.aco.evaporation) {
            return Err(Error::config("baseline.aco.evaporation", "must be in [0, 1]"));
        }
        if self.pso.particles == 0 {
            return Err(Error::config("baseline.pso.particles", "must be >= 1"));
        }
        if self.ga.population < 2 {
            return Err(Error::config("baseline.ga.population", "must be >= 2"));
        }
        if !(0.0..=1.0).contains(&self.ga.mutation_rate) {
            return Err(Error::config("baseline.ga.mutation_rate", "must be in [0, 1]"));
        }
        Ok(())
    }
}

/// What a planner is asked to cover.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanningInstance {
    pub grid_count: usize,
    pub targets: Vec<Cell>,
    pub starts: Vec<Cell>,
    /// Moves available to each UAV.
    pub step_budget: usize,
    /// Joules available to each UAV.
    pub energy_budget: f64,
}

impl PlanningInstance {
    /// Targets every weed cell above `min_weed_density` and every sensor
    /// cell of a freshly reset environment.
    pub fn from_env(env: &FarmEnv, min_weed_density: f64) -> Self {
        let g = env.geometry();
        let mut targets: Vec<Cell> = (0..g.cells())
            .filter(|&i| env.weeds.density[i] > min_weed_density)
            .map(|i| g.cell_of(i))
            .collect();
        targets.extend(env.sensors.iter().map(|s| s.cell));
        targets.sort_unstable();
        targets.dedup();
        Self {
            grid_count: g.grid_count,
            targets,
            starts: env.uavs.iter().map(|u| u.cell).collect(),
            step_budget: env.config().scenario.max_steps,
            energy_budget: env.config().physics.battery_capacity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid_count;
        if let Some(c) = self.targets.iter().chain(&self.starts).find(|c| c.0 >= n || c.1 >= n) {
            return Err(Error::contract(format!("cell {c:?} outside a {n}x{n} grid")));
        }
        if self.starts.is_empty() || self.step_budget == 0 || !(self.energy_budget > 0.0) {
            return Err(Error::contract("planning needs at least one UAV and positive budgets"));
        }
        Ok(())
    }
}

fn sq_dist(a: Cell, b: [f64; 2]) -> f64 {
    (a.0 as f64 - b[0]).powi(2) + (a.1 as f64 - b[1]).powi(2)
}

/// Splits the targets into one spatial cluster per UAV, with cluster sizes
/// differing by at most one, and hands each UAV the cluster closest to its
/// start. The result is a partition of the target set.
pub fn assign_targets<R: Rng + ?Sized>(inst: &PlanningInstance, iterations: usize, rng: &mut R) -> Vec<Vec<Cell>> {
    let k = inst.starts.len();
    let t = inst.targets.len();
    if k == 1 || t == 0 {
        let mut out = vec![Vec::new(); k];
        out[0] = inst.targets.clone();
        return out;
    }
    let (floor, rem) = (t / k, t % k);

    // k-means++ seeding
    let mut centers: Vec<[f64; 2]> = Vec::with_capacity(k);
    let first = inst.targets[rng.gen_range(0..t)];
    centers.push([first.0 as f64, first.1 as f64]);
    while centers.len() < k {
        let d: Vec<f64> = inst
            .targets
            .iter()
            .map(|&c| centers.iter().map(|&m| sq_dist(c, m)).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = d.iter().sum();
        let pick = if total > 0.0 {
            let mut x = rng.gen::<f64>() * total;
            d.iter()
                .position(|&w| {
                    x -= w;
                    x < 0.0
                })
                .unwrap_or(t - 1)
        } else {
            rng.gen_range(0..t)
        };
        let c = inst.targets[pick];
        centers.push([c.0 as f64, c.1 as f64]);
    }

    let mut labels = vec![usize::MAX; t];
    for _ in 0..iterations.max(1) {
        // capacity-limited greedy assignment in order of distance
        let mut pairs: Vec<(f64, usize, usize)> = (0..t)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .map(|(i, j)| (sq_dist(inst.targets[i], centers[j]), i, j))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut next = vec![usize::MAX; t];
        let mut size = vec![0; k];
        let mut big = 0;
        for (_, i, j) in pairs {
            if next[i] != usize::MAX {
                continue;
            }
            let fits = size[j] < floor || (size[j] == floor && big < rem);
            if fits {
                if size[j] == floor {
                    big += 1;
                }
                next[i] = j;
                size[j] += 1;
            }
        }
        let stable = next == labels;
        labels = next;
        for (j, c) in centers.iter_mut().enumerate() {
            let members: Vec<Cell> = (0..t).filter(|&i| labels[i] == j).map(|i| inst.targets[i]).collect();
            if !members.is_empty() {
                let m = members.len() as f64;
                *c = [
                    members.iter().map(|p| p.0 as f64).sum::<f64>() / m,
                    members.iter().map(|p| p.1 as f64).sum::<f64>() / m,
                ];
            }
        }
        if stable {
            break;
        }
    }

    let uav_for_cluster = match_clusters(&inst.starts, &centers);
    let mut out = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        out[uav_for_cluster[l]].push(inst.targets[i]);
    }
    out
}

/// Cluster-to-UAV matching minimising the summed start-to-centroid
/// distance; exhaustive for small fleets, greedy otherwise.
fn match_clusters(starts: &[Cell], centers: &[[f64; 2]]) -> Vec<usize> {
    let k = starts.len();
    let cost = |c: usize, u: usize| sq_dist(starts[u], centers[c]).sqrt();
    if k <= 7 {
        let mut perm: Vec<usize> = (0..k).collect();
        let mut best = (perm.clone(), f64::INFINITY);
        permute(&mut perm, 0, &mut |p| {
            let c: f64 = p.iter().enumerate().map(|(cl, &u)| cost(cl, u)).sum();
            if c < best.1 {
                best = (p.to_vec(), c);
            }
        });
        return best.0;
    }
    let mut taken = vec![false; k];
    (0..k)
        .map(|cl| {
            let u = (0..k)
                .filter(|&u| !taken[u])
                .min_by(|&a, &b| cost(cl, a).total_cmp(&cost(cl, b)))
                .expect("a free UAV");
            taken[u] = true;
            u
        })
        .collect()
}

fn permute(v: &mut Vec<usize>, i: usize, f: &mut impl FnMut(&[usize])) {
    if i == v.len() {
        f(v);
        return;
    }
    for j in i..v.len() {
        v.swap(i, j);
        permute(v, i + 1, f);
        v.swap(i, j);
    }
}

/// King moves from `a` to `b`: diagonal steps first, then straight ones.
pub fn king_path(a: Cell, b: Cell) -> Vec<Action> {
    let (mut r, mut c) = (a.0 as i64, a.1 as i64);
    let (tr, tc) = (b.0 as i64, b.1 as i64);
    let mut moves = Vec::with_capacity(chebyshev(a, b));
    while (r, c) != (tr, tc) {
        let (dr, dc) = ((tr - r).signum(), (tc - c).signum());
        moves.push(Action::from_offset(dr, dc).expect("unit king move"));
        r += dr;
        c += dc;
    }
    moves
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutePlan {
    pub planner: Planner,
    /// Targets in visiting order, per UAV.
    pub routes: Vec<Vec<Cell>>,
    /// Moves to execute, per UAV, already cut to the step and energy budgets.
    /// `None` hovers for one step.
    pub actions: Vec<Vec<Option<Action>>>,
    /// Best-so-far tour cost after each iteration, per UAV.
    pub histories: Vec<Vec<f64>>,
}

impl RoutePlan {
    pub fn empty(planner: Planner, n_uavs: usize) -> Self {
        Self {
            planner,
            routes: vec![Vec::new(); n_uavs],
            actions: vec![Vec::new(); n_uavs],
            histories: vec![Vec::new(); n_uavs],
        }
    }
}

/// Orders one UAV's targets as an open tour from `start`.
pub fn order_targets<R: Rng + ?Sized>(
    planner: Planner,
    start: Cell,
    targets: &[Cell],
    cfg: &BaselineConfig,
    rng: &mut R,
) -> (Vec<Cell>, TourSearch) {
    let dist = tour::distance_matrix(start, targets);
    let search = match planner {
        Planner::Aco => aco::search(&dist, &cfg.aco, rng),
        Planner::Pso => pso::search(&dist, &cfg.pso, rng),
        Planner::Ga => ga::search(&dist, &cfg.ga, rng),
    };
    (search.order.iter().map(|&i| targets[i]).collect(), search)
}

/// Cuts a move list so that it fits `step_budget` moves and the energy of
/// flying them stays below `energy_budget`.
fn truncate_to_budget(moves: &mut Vec<Option<Action>>, inst: &PlanningInstance, cell_size: f64, dt: f64, p: &physics::PhysicsParams) -> Result<()> {
    moves.truncate(inst.step_budget);
    let mut used = 0.0;
    for (k, a) in moves.iter().enumerate() {
        let v = a.map_or([0.0, 0.0], |a| a.velocity(cell_size, dt));
        used += physics::step_energy(v, dt, p)?.total;
        if used >= inst.energy_budget {
            moves.truncate(k);
            break;
        }
    }
    Ok(())
}

/// Plans routes for every UAV of the instance.
pub fn plan<R: Rng + ?Sized>(
    planner: Planner,
    inst: &PlanningInstance,
    env: &FarmEnv,
    cfg: &BaselineConfig,
    rng: &mut R,
) -> Result<RoutePlan> {
    inst.validate()?;
    let shares = assign_targets(inst, cfg.kmeans_iterations, rng);
    let mut out = RoutePlan::empty(planner, inst.starts.len());
    let scenario = &env.config().scenario;
    let cell_size = env.geometry().cell_size;
    for (u, share) in shares.iter().enumerate() {
        let start = inst.starts[u];
        let (route, search) = order_targets(planner, start, share, cfg, rng);
        let mut moves = Vec::new();
        let mut here = start;
        for &c in &route {
            if c == here {
                // recognition happens on arrival, so stay a step on a target underneath
                moves.push(None);
            }
            moves.extend(king_path(here, c).into_iter().map(Some));
            here = c;
        }
        truncate_to_budget(&mut moves, inst, cell_size, scenario.dt, &env.config().physics)?;
        out.routes[u] = route;
        out.actions[u] = moves;
        out.histories[u] = search.history;
    }
    Ok(out)
}

/// Replays a plan through `sim`, which must have just been reset. UAVs
/// hover once their moves run out. Returns the episode's metrics.
pub fn execute_plan<F>(
    sim: &mut FarmSim,
    plan: &RoutePlan,
    algorithm: &str,
    seed: u64,
    episode: usize,
    mut on_step: F,
) -> Result<EpisodeMetrics>
where
    F: FnMut(&FarmSim, usize, &[Option<Action>], &JointStep) -> Result<()>,
{
    let n = sim.env().n_uavs();
    if plan.actions.len() != n {
        return Err(Error::contract(format!("plan for {} UAVs, environment has {n}", plan.actions.len())));
    }
    if sim.env().time_step() != 0 {
        return Err(Error::contract("plan executed on an environment that is not freshly reset"));
    }
    for t in 0.. {
        let actions: Vec<Option<Action>> = (0..n)
            .map(|u| {
                if !sim.env().uavs[u].alive {
                    return Ok(None);
                }
                let Some(&Some(a)) = plan.actions[u].get(t) else {
                    return Ok(None);
                };
                let (r, c) = sim.env().uavs[u].cell;
                let (dr, dc) = a.offset();
                if !sim.env().geometry().in_bounds(r as i64 + dr, c as i64 + dc) {
                    return Err(Error::contract(format!("plan moves UAV {u} off the grid at step {t}")));
                }
                Ok(Some(a))
            })
            .collect::<Result<_>>()?;
        let step = sim.step_joint(&actions)?;
        on_step(sim, t, &actions, &step)?;
        if step.episode_done {
            break;
        }
    }
    sim.env().episode_metrics(algorithm, seed, episode)
}
