use super::{planar_dist, FarmEnv, NUM_ACTIONS};

/// Observation layout, in order:
///
/// | slots      | content                                                   |
/// |------------|-----------------------------------------------------------|
/// | 2          | own row, col scaled to [0, 1]                             |
/// | fov²       | per FoV cell: -1 outside the farm, 1 unrecognized weed, 0 |
/// | 1          | weed density of the cell below                            |
/// | 3          | nearest connectable sensor: dx, dy / side, dist / diag    |
/// | 8          | one-hot octant toward known pending sensors (all 0: none) |
/// | 3          | nearest live UAV: dx, dy / side, dist / diag              |
/// | 1          | remaining battery fraction                                |
///
/// Missing sensor or UAV targets encode as `(0, 0, -1)`.
pub fn observation_len(fov_cells: usize) -> usize {
    2 + fov_cells * fov_cells + 1 + 3 + NUM_ACTIONS + 3 + 1
}

impl FarmEnv {
    pub(super) fn encode_observation(&self, id: usize) -> Vec<f64> {
        let g = self.geometry();
        let uav = &self.uavs[id];
        let (row, col) = uav.cell;
        let last = (g.grid_count - 1) as f64;
        let side = g.side_m();
        let diag = g.diagonal_m();
        let here = g.center(uav.cell);

        let mut obs = Vec::with_capacity(observation_len(g.fov_cells));
        obs.push(row as f64 / last);
        obs.push(col as f64 / last);

        let half = (g.fov_cells / 2) as i64;
        for dr in -half..=half {
            for dc in -half..=half {
                let (r, c) = (row as i64 + dr, col as i64 + dc);
                let flag = if !g.in_bounds(r, c) {
                    -1.0
                } else {
                    let j = g.index((r as usize, c as usize));
                    if self.weeds.is_weed(j) && !uav.known.surveyed[j] {
                        1.0
                    } else {
                        0.0
                    }
                };
                obs.push(flag);
            }
        }

        obs.push(self.weeds.density[g.index(uav.cell)]);

        match self.nearest_connectable(uav.cell) {
            Some(s) => {
                let p = self.sensors[s].position;
                obs.push((p[0] - here[0]) / side);
                obs.push((p[1] - here[1]) / side);
                obs.push(planar_dist(here, p) / diag);
            }
            None => obs.extend_from_slice(&[0.0, 0.0, -1.0]),
        }

        let mut octant = [0.0; NUM_ACTIONS];
        if let Some(dir) = self.sensor_direction(uav.cell, &uav.known) {
            octant[dir.index()] = 1.0;
        }
        obs.extend_from_slice(&octant);

        match self.nearest_uav(id) {
            Some((other, d)) => {
                let p = g.center(self.uavs[other].cell);
                obs.push((p[0] - here[0]) / side);
                obs.push((p[1] - here[1]) / side);
                obs.push(d / diag);
            }
            None => obs.extend_from_slice(&[0.0, 0.0, -1.0]),
        }

        let capacity = self.config.physics.battery_capacity;
        obs.push((self.remaining_battery(id) / capacity).clamp(0.0, 1.0));
        obs
    }
}
