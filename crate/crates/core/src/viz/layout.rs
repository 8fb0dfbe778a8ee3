use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::MultivariateNetwork;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayoutOptions {
    pub iterations: usize,
    pub seed: u64,
    /// Pull toward the centroid, keeps disconnected parts in view.
    pub gravity: f64,
}

impl Default for LayoutOptions {
    fn default() -> Self {
        Self {
            iterations: 300,
            seed: 0,
            gravity: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub node_ids: Vec<String>,
    pub positions: Vec<[f64; 2]>,
}

/// Fruchterman–Reingold force-directed placement with linear cooling,
/// centered on the centroid. Ideal edge length is 1.
pub fn force_layout(net: &MultivariateNetwork, opts: &LayoutOptions) -> Layout {
    let n = net.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let side = (n as f64).sqrt();
    let mut pos: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.random_range(-0.5..0.5) * side, rng.random_range(-0.5..0.5) * side])
        .collect();

    let t0 = 0.1 * side.max(1.0);
    let mut disp = vec![[0.0f64; 2]; n];
    for it in 0..opts.iterations {
        let temp = t0 * (1.0 - it as f64 / opts.iterations as f64);
        disp.iter_mut().for_each(|d| *d = [0.0, 0.0]);

        for i in 0..n {
            for j in (i + 1)..n {
                let dx = pos[i][0] - pos[j][0];
                let dy = pos[i][1] - pos[j][1];
                let dist2 = (dx * dx + dy * dy).max(1e-4);
                // k² / d along the unit vector = k² · d / d²
                let fx = dx / dist2;
                let fy = dy / dist2;
                disp[i][0] += fx;
                disp[i][1] += fy;
                disp[j][0] -= fx;
                disp[j][1] -= fy;
            }
        }
        for &(a, b) in net.links() {
            let dx = pos[a][0] - pos[b][0];
            let dy = pos[a][1] - pos[b][1];
            let dist = (dx * dx + dy * dy).sqrt();
            // d² / k along the unit vector = d · (dx, dy)
            disp[a][0] -= dx * dist;
            disp[a][1] -= dy * dist;
            disp[b][0] += dx * dist;
            disp[b][1] += dy * dist;
        }
        for i in 0..n {
            disp[i][0] -= opts.gravity * pos[i][0];
            disp[i][1] -= opts.gravity * pos[i][1];
            let len = (disp[i][0].powi(2) + disp[i][1].powi(2)).sqrt();
            if len > 0.0 {
                let step = len.min(temp) / len;
                pos[i][0] += disp[i][0] * step;
                pos[i][1] += disp[i][1] * step;
            }
        }
    }

    if n > 0 {
        let cx = pos.iter().map(|p| p[0]).sum::<f64>() / n as f64;
        let cy = pos.iter().map(|p| p[1]).sum::<f64>() / n as f64;
        for p in &mut pos {
            p[0] -= cx;
            p[1] -= cy;
        }
    }
    Layout {
        node_ids: net.node_ids().to_vec(),
        positions: pos,
    }
}
