//! Greedy modularity clustering (local moving plus aggregation).
//!
//! Gains are compared in exact integer arithmetic, so results depend only on
//! the visiting order drawn from the seed. A node moves only on a strict
//! improvement; among equally good targets the community founded by the
//! lexicographically smallest institution wins.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::CoauthorshipGraph;
use crate::error::{Error, Result};

struct Level {
    adj: Vec<Vec<(usize, u64)>>,
    self_weight: Vec<u64>,
}

impl Level {
    fn len(&self) -> usize {
        self.adj.len()
    }

    fn degrees(&self) -> Vec<u64> {
        self.adj
            .iter()
            .zip(&self.self_weight)
            .map(|(row, s)| 2 * s + row.iter().map(|(_, w)| w).sum::<u64>())
            .collect()
    }

    /// Returns the community of each node, or `None` if nothing moved.
    fn local_moving(&self, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
        let n = self.len();
        let k = self.degrees();
        let m2: i128 = k.iter().map(|&d| d as i128).sum();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut tot: Vec<i128> = k.iter().map(|&d| d as i128).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);

        let mut weight_to = vec![0u64; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut moved_any = false;
        loop {
            let mut moved = false;
            for &i in &order {
                let ci = comm[i];
                let ki = k[i] as i128;
                tot[ci] -= ki;
                for &(j, w) in &self.adj[i] {
                    let c = comm[j];
                    if weight_to[c] == 0 {
                        touched.push(c);
                    }
                    weight_to[c] += w;
                }
                touched.sort_unstable();
                let gain = |c: usize, w: u64| m2 * w as i128 - ki * tot[c];
                let mut best = ci;
                let mut best_gain = gain(ci, weight_to[ci]);
                for &c in &touched {
                    let g = gain(c, weight_to[c]);
                    if g > best_gain {
                        best = c;
                        best_gain = g;
                    }
                }
                for &c in &touched {
                    weight_to[c] = 0;
                }
                touched.clear();
                comm[i] = best;
                tot[best] += ki;
                if best != ci {
                    moved = true;
                }
            }
            if !moved {
                break;
            }
            moved_any = true;
        }
        moved_any.then_some(comm)
    }

    /// Collapses communities into nodes. Returns the new level and each old
    /// node's new index.
    fn aggregate(&self, comm: &[usize]) -> (Level, Vec<usize>) {
        let mut renumber: BTreeMap<usize, usize> = BTreeMap::new();
        let mut mapping = Vec::with_capacity(comm.len());
        for &c in comm {
            let next = renumber.len();
            mapping.push(*renumber.entry(c).or_insert(next));
        }
        let size = renumber.len();
        let mut self_weight = vec![0u64; size];
        let mut links: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); size];
        for (i, row) in self.adj.iter().enumerate() {
            let ci = mapping[i];
            self_weight[ci] += self.self_weight[i];
            for &(j, w) in row {
                if j < i {
                    continue;
                }
                let cj = mapping[j];
                if ci == cj {
                    self_weight[ci] += w;
                } else {
                    *links[ci].entry(cj).or_insert(0) += w;
                    *links[cj].entry(ci).or_insert(0) += w;
                }
            }
        }
        let adj = links.into_iter().map(|m| m.into_iter().collect()).collect();
        (Level { adj, self_weight }, mapping)
    }
}

/// Labels every node with a cluster, numbered from 1 in order of each
/// cluster's smallest institution id.
pub fn cluster_graph(graph: &CoauthorshipGraph, seed: u64) -> Result<CoauthorshipGraph> {
    if graph.is_empty() {
        return Err(Error::Precondition("cannot cluster an empty graph".into()));
    }
    let n = graph.nodes.len();
    let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
    for e in &graph.edges {
        let a = graph.index_of(e.a.as_str()).expect("edge endpoints are nodes");
        let b = graph.index_of(e.b.as_str()).expect("edge endpoints are nodes");
        adj[a].push((b, e.strength));
        adj[b].push((a, e.strength));
    }
    let mut level = Level {
        adj,
        self_weight: vec![0; n],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut membership: Vec<usize> = (0..n).collect();
    while let Some(comm) = level.local_moving(&mut rng) {
        let (next, mapping) = level.aggregate(&comm);
        for m in membership.iter_mut() {
            *m = mapping[*m];
        }
        let shrunk = next.len() < level.len();
        level = next;
        if !shrunk {
            break;
        }
    }

    let mut labels: BTreeMap<usize, u32> = BTreeMap::new();
    let mut out = graph.clone();
    for (node, &m) in out.nodes.iter_mut().zip(&membership) {
        let next = labels.len() as u32 + 1;
        node.cluster = Some(*labels.entry(m).or_insert(next));
    }
    Ok(out)
}

/// Weighted modularity of the graph's labelling; unlabeled nodes count as
/// singletons.
pub fn modularity(graph: &CoauthorshipGraph) -> f64 {
    let m = graph.edge_strength_sum() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let key = |i: usize| match graph.nodes[i].cluster {
        Some(c) => (0u8, c as usize),
        None => (1, i),
    };
    let mut internal: BTreeMap<(u8, usize), f64> = BTreeMap::new();
    let mut degree: BTreeMap<(u8, usize), f64> = BTreeMap::new();
    for (i, n) in graph.nodes.iter().enumerate() {
        *degree.entry(key(i)).or_insert(0.0) += n.total_link_strength as f64;
    }
    for e in &graph.edges {
        let (a, b) = (
            graph.index_of(e.a.as_str()).expect("node"),
            graph.index_of(e.b.as_str()).expect("node"),
        );
        if key(a) == key(b) {
            *internal.entry(key(a)).or_insert(0.0) += e.strength as f64;
        }
    }
    degree
        .iter()
        .map(|(c, d)| internal.get(c).copied().unwrap_or(0.0) / m - (d / (2.0 * m)).powi(2))
        .sum()
}
