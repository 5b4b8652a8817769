use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tour::{perm_cost, TourSearch};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    /// Per-gene probability of a swap with a random position.
    pub mutation_rate: f64,
    pub tournament: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population: 64,
            generations: 100,
            mutation_rate: 0.1,
            tournament: 3,
        }
    }
}

/// Order crossover: copies `a[i..j]` into the child and fills the rest in
/// the order the genes appear in `b`, starting after `j`.
pub(crate) fn order_crossover(a: &[usize], b: &[usize], i: usize, j: usize) -> Vec<usize> {
    let n = a.len();
    let mut child = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for k in i..j {
        child[k] = a[k];
        used[a[k]] = true;
    }
    let mut slot = j % n;
    for k in 0..n {
        let gene = b[(j + k) % n];
        if !used[gene] {
            while child[slot] != usize::MAX {
                slot = (slot + 1) % n;
            }
            child[slot] = gene;
            used[gene] = true;
        }
    }
    child
}

/// Genetic search over permutation chromosomes with one elite survivor.
pub(crate) fn search<R: Rng + ?Sized>(dist: &[Vec<f64>], p: &GaParams, rng: &mut R) -> TourSearch {
    let n = dist.len() - 1;
    if n <= 1 {
        return TourSearch::trivial(n, dist);
    }
    let mut pop: Vec<Vec<usize>> = (0..p.population)
        .map(|_| {
            let mut g: Vec<usize> = (0..n).collect();
            g.shuffle(rng);
            g
        })
        .collect();
    let mut cost: Vec<f64> = pop.iter().map(|g| perm_cost(dist, g)).collect();
    let best_of = |cost: &[f64]| (0..cost.len()).min_by(|&a, &b| cost[a].total_cmp(&cost[b])).unwrap_or(0);
    let b = best_of(&cost);
    let mut best = (pop[b].clone(), cost[b]);
    let mut history = Vec::with_capacity(p.generations);
    for _ in 0..p.generations {
        let tournament = |rng: &mut R| {
            let mut w = rng.gen_range(0..pop.len());
            for _ in 1..p.tournament.max(1) {
                let c = rng.gen_range(0..pop.len());
                if cost[c] < cost[w] {
                    w = c;
                }
            }
            w
        };
        let mut next = vec![best.0.clone()];
        while next.len() < p.population {
            let (pa, pb) = (tournament(rng), tournament(rng));
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(i + 1..=n);
            let mut child = order_crossover(&pop[pa], &pop[pb], i, j);
            for x in 0..n {
                if rng.gen::<f64>() < p.mutation_rate {
                    let y = rng.gen_range(0..n);
                    child.swap(x, y);
                }
            }
            next.push(child);
        }
        pop = next;
        cost = pop.iter().map(|g| perm_cost(dist, g)).collect();
        let b = best_of(&cost);
        if cost[b] < best.1 {
            best = (pop[b].clone(), cost[b]);
        }
        history.push(best.1);
    }
    TourSearch {
        order: best.0,
        cost: best.1,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_crossover_keeps_a_permutation() {
        let a = [0, 1, 2, 3, 4, 5, 6, 7];
        let b = [7, 6, 5, 4, 3, 2, 1, 0];
        let child = order_crossover(&a, &b, 2, 5);
        assert_eq!(&child[2..5], &[2, 3, 4]);
        assert_eq!(child, vec![6, 5, 2, 3, 4, 1, 0, 7]);
        let mut sorted = child.clone();
        sorted.sort();
        assert_eq!(sorted, (0..8).collect::<Vec<_>>());
    }
}
