use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tour::{perm_cost, polish, TourSearch};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoParams {
    pub particles: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            particles: 32,
            iterations: 100,
            inertia: 0.7,
            cognitive: 1.5,
            social: 1.5,
        }
    }
}

/// Visiting order encoded by a key vector: targets sorted by ascending key.
fn decode(keys: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)));
    order
}

/// Rewrites `keys` so that they decode to `order`, keeping the particle's
/// own key values.
fn encode_into(order: &[usize], keys: &mut [f64]) {
    let mut sorted = keys.to_vec();
    sorted.sort_by(f64::total_cmp);
    for (rank, &t) in order.iter().enumerate() {
        keys[t] = sorted[rank];
    }
}

/// Particle swarm search over random-key encodings of the visiting order,
/// where each decoded tour is improved by local search and written back
/// into the particle.
pub(crate) fn search<R: Rng + ?Sized>(dist: &[Vec<f64>], p: &PsoParams, rng: &mut R) -> TourSearch {
    let n = dist.len() - 1;
    if n <= 1 {
        return TourSearch::trivial(n, dist);
    }
    let mut pos: Vec<Vec<f64>> = (0..p.particles).map(|_| (0..n).map(|_| rng.gen()).collect()).collect();
    let mut vel: Vec<Vec<f64>> = (0..p.particles).map(|_| (0..n).map(|_| rng.gen_range(-0.1..0.1)).collect()).collect();
    let mut pbest = pos.clone();
    let mut pbest_cost: Vec<f64> = pos.iter().map(|x| perm_cost(dist, &decode(x))).collect();
    let g = (0..p.particles).min_by(|&a, &b| pbest_cost[a].total_cmp(&pbest_cost[b])).unwrap_or(0);
    let mut gbest = pbest[g].clone();
    let mut gbest_cost = pbest_cost[g];
    let mut history = Vec::with_capacity(p.iterations);
    for _ in 0..p.iterations {
        for k in 0..p.particles {
            for d in 0..n {
                let (r1, r2): (f64, f64) = (rng.gen(), rng.gen());
                vel[k][d] = p.inertia * vel[k][d]
                    + p.cognitive * r1 * (pbest[k][d] - pos[k][d])
                    + p.social * r2 * (gbest[d] - pos[k][d]);
                vel[k][d] = vel[k][d].clamp(-1.0, 1.0);
                pos[k][d] += vel[k][d];
            }
            let mut order = decode(&pos[k]);
            let cost = polish(dist, &mut order);
            encode_into(&order, &mut pos[k]);
            if cost < pbest_cost[k] {
                pbest_cost[k] = cost;
                pbest[k] = pos[k].clone();
                if cost < gbest_cost {
                    gbest_cost = cost;
                    gbest = pos[k].clone();
                }
            }
        }
        history.push(gbest_cost);
    }
    TourSearch {
        order: decode(&gbest),
        cost: gbest_cost,
        history,
    }
}
