//! Exact minimum-cost transportation via successive shortest paths.
//!
//! The network is the complete bipartite graph from supplies to demands with
//! uncapacitated arcs of nonnegative cost. Each round runs a dense Dijkstra
//! over reduced costs (Johnson potentials) from every supply node with mass
//! left, then pushes the bottleneck amount along the cheapest path to a
//! demand node with mass left. Backward residual arcs carry negative cost
//! and are what let later rounds reroute earlier flow.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Mass below this is treated as exhausted.
const MASS_EPS: f64 = 1e-13;

/// Optimal flows and their total cost.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    pub flows: BTreeMap<(usize, usize), f64>,
    pub cost: f64,
}

impl FlowSolution {
    pub fn row_sums(&self, rows: usize) -> Vec<f64> {
        let mut out = vec![0.0; rows];
        for (&(i, _), &f) in &self.flows {
            out[i] += f;
        }
        out
    }

    pub fn col_sums(&self, cols: usize) -> Vec<f64> {
        let mut out = vec![0.0; cols];
        for (&(_, j), &f) in &self.flows {
            out[j] += f;
        }
        out
    }
}

/// Solves `min Σ F_ij C_ij` s.t. `Σ_j F_ij = supply_i`, `Σ_i F_ij = demand_j`,
/// `F ≥ 0`. `cost` is row-major `supply.len() × demand.len()`.
///
/// Supplies and demands must be nonnegative with equal totals (up to
/// rounding); a total mismatch greater than `1e-9` relative is rejected.
pub fn transport(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<FlowSolution> {
    let (m, n) = (supply.len(), demand.len());
    if cost.len() != m * n {
        return Err(Error::DimensionMismatch {
            expected: m * n,
            found: cost.len(),
        });
    }
    if supply.iter().chain(demand).any(|&w| !(w >= 0.0 && w.is_finite())) {
        return Err(Error::invalid("transport masses must be finite and nonnegative"));
    }
    if cost.iter().any(|&c| !(c >= 0.0 && c.is_finite())) {
        return Err(Error::invalid("transport costs must be finite and nonnegative"));
    }
    let (total_s, total_d): (f64, f64) = (supply.iter().sum(), demand.iter().sum());
    if (total_s - total_d).abs() > 1e-9 * total_s.max(total_d).max(1.0) {
        return Err(Error::invalid(format!(
            "unbalanced transport problem: supply {total_s} vs demand {total_d}"
        )));
    }

    let mut left_s = supply.to_vec();
    let mut left_d = demand.to_vec();
    // flow[i * n + j]
    let mut flow = vec![0.0; m * n];
    // nodes: 0..m supplies, m..m+n demands
    let nodes = m + n;
    let mut potential = vec![0.0f64; nodes];
    let mut dist = vec![f64::INFINITY; nodes];
    let mut prev = vec![usize::MAX; nodes];
    let mut done = vec![false; nodes];

    // Each round either exhausts a supply, a demand or a backward arc;
    // the cap only guards against floating-point pathologies.
    let max_rounds = 4 * (m * n + nodes) + 16;
    for _ in 0..max_rounds {
        if left_s.iter().all(|&s| s <= MASS_EPS) || left_d.iter().all(|&d| d <= MASS_EPS) {
            break;
        }
        dist.fill(f64::INFINITY);
        prev.fill(usize::MAX);
        done.fill(false);
        // Virtual source arcs s -> i have reduced cost -potential[i] >= 0.
        for i in 0..m {
            if left_s[i] > MASS_EPS {
                dist[i] = (-potential[i]).max(0.0);
            }
        }

        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for v in 0..nodes {
                if !done[v] && dist[v] < best {
                    best = dist[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            if u < m {
                // forward arcs u -> m + j
                for j in 0..n {
                    let v = m + j;
                    if done[v] {
                        continue;
                    }
                    let rc = (cost[u * n + j] + potential[u] - potential[v]).max(0.0);
                    if dist[u] + rc < dist[v] {
                        dist[v] = dist[u] + rc;
                        prev[v] = u;
                    }
                }
            } else {
                // backward arcs (m + j) -> i where flow[i][j] > 0
                let j = u - m;
                for i in 0..m {
                    if done[i] || flow[i * n + j] <= MASS_EPS {
                        continue;
                    }
                    let rc = (-cost[i * n + j] + potential[u] - potential[i]).max(0.0);
                    if dist[u] + rc < dist[i] {
                        dist[i] = dist[u] + rc;
                        prev[i] = u;
                    }
                }
            }
        }

        let target = (0..n)
            .filter(|&j| left_d[j] > MASS_EPS && dist[m + j].is_finite())
            .map(|j| (j, dist[m + j] + potential[m + j]))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(j, _)| j);
        let Some(jt) = target else {
            return Err(Error::invalid("transport solver found no augmenting path"));
        };

        // bottleneck along the path
        let mut amount = left_d[jt];
        let mut v = m + jt;
        while prev[v] != usize::MAX {
            let u = prev[v];
            if u >= m {
                // backward arc u=(m+j) -> v=i
                amount = amount.min(flow[v * n + (u - m)]);
            }
            v = u;
        }
        let start = v;
        amount = amount.min(left_s[start]);

        let mut v = m + jt;
        while prev[v] != usize::MAX {
            let u = prev[v];
            if u < m {
                flow[u * n + (v - m)] += amount;
            } else {
                let cell = &mut flow[v * n + (u - m)];
                *cell -= amount;
                if *cell < MASS_EPS {
                    *cell = 0.0;
                }
            }
            v = u;
        }
        left_s[start] -= amount;
        left_d[jt] -= amount;

        let reach_max = dist
            .iter()
            .copied()
            .filter(|d| d.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        for v in 0..nodes {
            potential[v] += if dist[v].is_finite() { dist[v] } else { reach_max };
        }
    }

    let mut flows = BTreeMap::new();
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..n {
            let f = flow[i * n + j];
            if f > 0.0 {
                flows.insert((i, j), f);
                total += f * cost[i * n + j];
            }
        }
    }
    Ok(FlowSolution { flows, cost: total })
}
