//! Topographic peak finding on a far-field pattern grid.
//!
//! Cells are swept in descending level order while a union-find grows
//! connected above-level regions; when a region first touches a region
//! holding a higher summit, the lower summit's prominence is fixed at its
//! height above that saddle. φ wraps around; equal-valued plateaus collapse
//! to their first cell in (θ, φ) order, so the φ-degenerate θ = 0 ring
//! reports a single peak.

use super::farfield::FarFieldPattern;

/// One detected lobe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub sigma_dbsm: f64,
    pub prominence_db: f64,
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, i: u32) -> u32 {
        let mut root = i;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = i;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    fn link(&mut self, child: u32, root: u32) {
        let c = self.find(child);
        self.parent[c as usize] = root;
    }
}

/// Local maxima with topographic prominence of at least
/// `min_prominence_db`, sorted by σ descending (ties: smaller θ, then
/// smaller φ). The global maximum's prominence is measured from the grid
/// minimum. Expects a grid with θ and φ steps of at most 1°.
pub fn find_peaks(pattern: &FarFieldPattern, min_prominence_db: f64) -> Vec<Peak> {
    let nt = pattern.theta_deg.len();
    let np = pattern.phi_deg.len();
    let n = nt * np;
    if n == 0 {
        return Vec::new();
    }
    let sigma = &pattern.sigma_dbsm;
    let sigma_min = sigma.iter().cloned().fold(f64::INFINITY, f64::min);

    // Descending level order; ties resolve by grid position so plateau
    // representatives are deterministic.
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&a, &b| {
        sigma[b as usize]
            .partial_cmp(&sigma[a as usize])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut rank = vec![0u32; n];
    for (pos, &cell) in order.iter().enumerate() {
        rank[cell as usize] = pos as u32;
    }

    let mut dsu = DisjointSet::new(n);
    // Summit cell of each component root.
    let summit: Vec<u32> = (0..n as u32).collect();
    let mut processed = vec![false; n];
    let mut peaks: Vec<(u32, f64)> = Vec::new(); // (summit cell, prominence)

    let mut neighbor_roots: Vec<u32> = Vec::with_capacity(8);
    for &cell in &order {
        let (it, ip) = ((cell as usize) / np, (cell as usize) % np);
        neighbor_roots.clear();
        for dt in -1i64..=1 {
            let t = it as i64 + dt;
            if t < 0 || t >= nt as i64 {
                continue;
            }
            for dp in -1i64..=1 {
                if dt == 0 && dp == 0 {
                    continue;
                }
                let p = (ip as i64 + dp).rem_euclid(np as i64);
                let idx = (t as usize) * np + p as usize;
                if processed[idx] {
                    let r = dsu.find(idx as u32);
                    if !neighbor_roots.contains(&r) {
                        neighbor_roots.push(r);
                    }
                }
            }
        }
        if neighbor_roots.is_empty() {
            // New summit.
            processed[cell as usize] = true;
            continue;
        }
        // Winner: the component with the highest summit (earliest in order).
        let &winner = neighbor_roots
            .iter()
            .min_by_key(|&&r| rank[summit[r as usize] as usize])
            .unwrap();
        let level = sigma[cell as usize];
        for &r in &neighbor_roots {
            if r != winner {
                // This saddle closes off the lower summit's contour.
                let s = summit[r as usize];
                let prominence = sigma[s as usize] - level;
                if prominence >= min_prominence_db {
                    peaks.push((s, prominence));
                }
                dsu.link(r, winner);
            }
        }
        dsu.link(cell, winner);
        processed[cell as usize] = true;
    }

    // Surviving components (usually just the one holding the global max).
    let mut roots_done: Vec<u32> = Vec::new();
    for cell in 0..n as u32 {
        let r = dsu.find(cell);
        if !roots_done.contains(&r) {
            roots_done.push(r);
            let s = summit[r as usize];
            let prominence = sigma[s as usize] - sigma_min;
            if prominence >= min_prominence_db {
                peaks.push((s, prominence));
            }
        }
    }

    let mut out: Vec<Peak> = peaks
        .into_iter()
        .map(|(cell, prominence)| {
            let (it, ip) = ((cell as usize) / np, (cell as usize) % np);
            Peak {
                theta_deg: pattern.theta_deg[it],
                phi_deg: pattern.phi_deg[ip],
                sigma_dbsm: sigma[cell as usize],
                prominence_db: prominence,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        b.sigma_dbsm
            .partial_cmp(&a.sigma_dbsm)
            .unwrap()
            .then(a.theta_deg.partial_cmp(&b.theta_deg).unwrap())
            .then(a.phi_deg.partial_cmp(&b.phi_deg).unwrap())
    });
    out
}
