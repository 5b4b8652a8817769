//! Synthetic clustered weed maps.

use rand::Rng;

use super::config::{GridGeometry, ScenarioParams};

#[derive(Debug, Clone, PartialEq)]
pub struct WeedMap {
    /// Row-major density in [0, 1]; zero means no weed.
    pub density: Vec<f64>,
    /// 0 for weed-free cells, 1..=weed_types otherwise.
    pub type_id: Vec<u8>,
    pub recognized: Vec<bool>,
}

impl WeedMap {
    /// Sum of Gaussian bumps around `weed_clusters` random centers, capped at 1
    /// and zeroed below `weed_threshold`. A cell's type is that of the cluster
    /// contributing most to it.
    pub fn generate<R: Rng + ?Sized>(
        geometry: &GridGeometry,
        scenario: &ScenarioParams,
        rng: &mut R,
    ) -> Self {
        let n = geometry.grid_count;
        let side = n as f64;
        let clusters: Vec<([f64; 2], f64, f64)> = (0..scenario.weed_clusters)
            .map(|_| {
                let center = [rng.gen_range(0.0..side), rng.gen_range(0.0..side)];
                let spread = side
                    * if scenario.weed_spread_max > scenario.weed_spread_min {
                        rng.gen_range(scenario.weed_spread_min..scenario.weed_spread_max)
                    } else {
                        scenario.weed_spread_min
                    };
                let amplitude = rng.gen_range(0.7..1.0);
                (center, spread, amplitude)
            })
            .collect();

        let mut density = vec![0.0; n * n];
        let mut type_id = vec![0u8; n * n];
        for idx in 0..n * n {
            let (r, c) = geometry.cell_of(idx);
            let (y, x) = (r as f64 + 0.5, c as f64 + 0.5);
            let mut total = 0.0;
            let mut best = (0usize, 0.0f64);
            for (k, (center, spread, amplitude)) in clusters.iter().enumerate() {
                let d2 = (x - center[0]).powi(2) + (y - center[1]).powi(2);
                let contrib = amplitude * (-d2 / (2.0 * spread * spread)).exp();
                total += contrib;
                if contrib > best.1 {
                    best = (k, contrib);
                }
            }
            let d = total.min(1.0);
            if d >= scenario.weed_threshold && d > 0.0 {
                density[idx] = d;
                type_id[idx] = (best.0 % scenario.weed_types as usize) as u8 + 1;
            }
        }
        Self {
            recognized: vec![false; n * n],
            density,
            type_id,
        }
    }

    /// A map with the given densities and every weed of type 1.
    pub fn from_density(density: Vec<f64>) -> Self {
        let type_id = density.iter().map(|&d| u8::from(d > 0.0)).collect();
        Self {
            recognized: vec![false; density.len()],
            density,
            type_id,
        }
    }

    pub fn is_weed(&self, idx: usize) -> bool {
        self.density[idx] > 0.0
    }

    pub fn weed_cells(&self) -> usize {
        self.density.iter().filter(|&&d| d > 0.0).count()
    }

    pub fn recognized_weed_cells(&self) -> usize {
        self.density
            .iter()
            .zip(&self.recognized)
            .filter(|(&d, &r)| d > 0.0 && r)
            .count()
    }

    pub fn all_recognized(&self) -> bool {
        self.recognized_weed_cells() == self.weed_cells()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn densities_in_unit_interval_and_types_consistent() {
        let g = GridGeometry::default();
        let s = ScenarioParams::default();
        for seed in 0..20 {
            let map = WeedMap::generate(&g, &s, &mut ChaCha8Rng::seed_from_u64(seed));
            assert_eq!(map.density.len(), 400);
            for (d, t) in map.density.iter().zip(&map.type_id) {
                assert!((0.0..=1.0).contains(d));
                assert_eq!(*d > 0.0, *t > 0);
                assert!(*t <= s.weed_types);
                assert!(*d == 0.0 || *d >= s.weed_threshold);
            }
            assert!(map.weed_cells() > 0, "seed {seed} produced an empty map");
            assert!(map.weed_cells() < 400);
        }
    }

    #[test]
    fn generation_is_seeded() {
        let g = GridGeometry::default();
        let s = ScenarioParams::default();
        let a = WeedMap::generate(&g, &s, &mut ChaCha8Rng::seed_from_u64(3));
        let b = WeedMap::generate(&g, &s, &mut ChaCha8Rng::seed_from_u64(3));
        let c = WeedMap::generate(&g, &s, &mut ChaCha8Rng::seed_from_u64(4));
        assert_eq!(a, b);
        assert_ne!(a.density, c.density);
    }

    #[test]
    fn no_clusters_means_no_weeds() {
        let g = GridGeometry::default();
        let s = ScenarioParams {
            weed_clusters: 0,
            ..Default::default()
        };
        let map = WeedMap::generate(&g, &s, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(map.weed_cells(), 0);
        assert!(map.all_recognized());
    }
}
