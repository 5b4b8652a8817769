use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tour::{perm_cost, TourSearch};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcoParams {
    pub ants: usize,
    pub iterations: usize,
    /// Fraction of pheromone lost per iteration.
    pub evaporation: f64,
    /// Pheromone exponent.
    pub alpha: f64,
    /// Heuristic (inverse distance) exponent.
    pub beta: f64,
}

impl Default for AcoParams {
    fn default() -> Self {
        Self {
            ants: 32,
            iterations: 100,
            evaporation: 0.5,
            alpha: 1.0,
            beta: 2.0,
        }
    }
}

/// Ant colony search for the cheapest open tour from node 0 over nodes
/// `1..dist.len()`.
pub(crate) fn search<R: Rng + ?Sized>(dist: &[Vec<f64>], p: &AcoParams, rng: &mut R) -> TourSearch {
    let n = dist.len() - 1;
    if n <= 1 {
        return TourSearch::trivial(n, dist);
    }
    let nodes = n + 1;
    let eta: Vec<Vec<f64>> = dist
        .iter()
        .map(|row| row.iter().map(|d| (1.0 / (d + 0.1)).powf(p.beta)).collect())
        .collect();
    let mut tau = vec![vec![1.0f64; nodes]; nodes];
    let mut best = TourSearch::trivial(n, dist);
    best.history.clear();
    let mut weights = vec![0.0; nodes];
    for _ in 0..p.iterations {
        let mut tours = Vec::with_capacity(p.ants);
        for _ in 0..p.ants {
            let mut visited = vec![false; nodes];
            visited[0] = true;
            let mut here = 0;
            let mut order = Vec::with_capacity(n);
            for _ in 0..n {
                let mut total = 0.0;
                for j in 1..nodes {
                    weights[j] = if visited[j] { 0.0 } else { tau[here][j].powf(p.alpha) * eta[here][j] };
                    total += weights[j];
                }
                let mut pick = rng.gen::<f64>() * total;
                let mut next = (1..nodes).rev().find(|&j| !visited[j]).expect("an unvisited node");
                for j in 1..nodes {
                    if weights[j] > 0.0 {
                        if pick < weights[j] {
                            next = j;
                            break;
                        }
                        pick -= weights[j];
                    }
                }
                visited[next] = true;
                order.push(next - 1);
                here = next;
            }
            let cost = perm_cost(dist, &order);
            if cost < best.cost {
                best.cost = cost;
                best.order = order.clone();
            }
            tours.push((order, cost));
        }
        for row in tau.iter_mut() {
            for t in row.iter_mut() {
                *t *= 1.0 - p.evaporation;
            }
        }
        for (order, cost) in &tours {
            let deposit = 1.0 / cost.max(1.0);
            let mut here = 0;
            for &t in order {
                tau[here][t + 1] += deposit;
                here = t + 1;
            }
        }
        best.history.push(best.cost);
    }
    best
}
