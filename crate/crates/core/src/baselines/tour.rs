//! Open tours over grid cells under the king-move metric.

pub type Cell = (usize, usize);

pub fn chebyshev(a: Cell, b: Cell) -> usize {
    a.0.abs_diff(b.0).max(a.1.abs_diff(b.1))
}

/// Moves needed to visit `order` starting from `start`, without returning.
pub fn tour_cost(start: Cell, order: &[Cell]) -> usize {
    let mut cost = 0;
    let mut here = start;
    for &c in order {
        cost += chebyshev(here, c);
        here = c;
    }
    cost
}

/// Distance matrix with the start as node 0 and targets as nodes 1..=n.
pub(crate) fn distance_matrix(start: Cell, targets: &[Cell]) -> Vec<Vec<f64>> {
    let nodes: Vec<Cell> = std::iter::once(start).chain(targets.iter().copied()).collect();
    nodes
        .iter()
        .map(|&a| nodes.iter().map(|&b| chebyshev(a, b) as f64).collect())
        .collect()
}

/// Cost of visiting targets in index order `perm` (indices into targets).
pub(crate) fn perm_cost(dist: &[Vec<f64>], perm: &[usize]) -> f64 {
    let mut cost = 0.0;
    let mut here = 0;
    for &t in perm {
        cost += dist[here][t + 1];
        here = t + 1;
    }
    cost
}

/// Segment-reversal local search on an open tour, run until no reversal
/// shortens it. Distances must be symmetric.
pub(crate) fn polish(dist: &[Vec<f64>], order: &mut [usize]) -> f64 {
    let n = order.len();
    let node = |order: &[usize], k: usize| order[k] + 1;
    loop {
        let mut improved = false;
        for i in 0..n {
            let prev = if i == 0 { 0 } else { node(order, i - 1) };
            for j in i + 1..n {
                let (a, b) = (node(order, i), node(order, j));
                let mut delta = dist[prev][b] - dist[prev][a];
                if j + 1 < n {
                    let next = node(order, j + 1);
                    delta += dist[a][next] - dist[b][next];
                }
                if delta < -1e-12 {
                    order[i..=j].reverse();
                    improved = true;
                }
            }
        }
        if !improved {
            return perm_cost(dist, order);
        }
    }
}

/// Best order found by a planner, and its best-so-far cost after each
/// iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TourSearch {
    pub order: Vec<usize>,
    pub cost: f64,
    pub history: Vec<f64>,
}

impl TourSearch {
    pub(crate) fn trivial(n: usize, dist: &[Vec<f64>]) -> Self {
        let order: Vec<usize> = (0..n).collect();
        let cost = perm_cost(dist, &order);
        Self {
            order,
            cost,
            history: vec![cost],
        }
    }
}

/// Exhaustive search over all visiting orders; meant for small instances.
pub fn brute_force(start: Cell, targets: &[Cell]) -> (Vec<Cell>, usize) {
    fn rec(start: Cell, rest: &mut Vec<Cell>, prefix: &mut Vec<Cell>, best: &mut (Vec<Cell>, usize)) {
        if rest.is_empty() {
            let c = tour_cost(start, prefix);
            if c < best.1 {
                *best = (prefix.clone(), c);
            }
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            prefix.push(x);
            rec(start, rest, prefix, best);
            prefix.pop();
            rest.insert(i, x);
        }
    }
    let mut best = (targets.to_vec(), usize::MAX);
    rec(start, &mut targets.to_vec(), &mut Vec::new(), &mut best);
    if targets.is_empty() {
        best.1 = 0;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn king_move_distances() {
        assert_eq!(chebyshev((0, 0), (3, 5)), 5);
        assert_eq!(chebyshev((4, 1), (1, 1)), 3);
        assert_eq!(tour_cost((0, 0), &[(2, 2), (2, 5), (0, 0)]), 2 + 3 + 5);
        assert_eq!(tour_cost((1, 1), &[]), 0);
    }

    #[test]
    fn polish_untangles_a_crossing() {
        let start = (0, 0);
        let targets = [(0, 6), (0, 2), (0, 4)];
        let dist = distance_matrix(start, &targets);
        let mut order = vec![0, 1, 2];
        assert_eq!(polish(&dist, &mut order), 6.0);
        assert_eq!(order, vec![1, 2, 0]);
    }

    #[test]
    fn brute_force_finds_the_line_order() {
        let (order, cost) = brute_force((0, 0), &[(0, 6), (0, 2), (0, 4)]);
        assert_eq!(order, vec![(0, 2), (0, 4), (0, 6)]);
        assert_eq!(cost, 6);
    }
}
