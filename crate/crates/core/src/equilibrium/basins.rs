//! Steepest-descent drainage and threshold merging on a neighbour graph.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Raw drainage: every node routed to the sink its descent path reaches.
#[derive(Debug, Clone, PartialEq)]
pub struct Drainage {
    /// Lowest strictly lower neighbour, `None` for sinks.
    pub receiver: Vec<Option<usize>>,
    /// Sink node reached from each node.
    pub sink_of: Vec<usize>,
    /// Sink nodes in ascending index order.
    pub sinks: Vec<usize>,
    /// Raw basin index (position in `sinks`) of each node.
    pub label: Vec<usize>,
}

impl Drainage {
    pub fn basin_count(&self) -> usize {
        self.sinks.len()
    }
}

/// Routes each node to its lowest neighbour when that neighbour is strictly
/// lower. Equal heights resolve to the lowest index.
pub fn drain(heights: &[f64], adj: &[Vec<usize>]) -> Drainage {
    let n = heights.len();
    let receiver: Vec<Option<usize>> = (0..n)
        .map(|i| {
            let mut best: Option<usize> = None;
            for &j in &adj[i] {
                let better = match best {
                    None => true,
                    Some(b) => heights[j] < heights[b] || (heights[j] == heights[b] && j < b),
                };
                if better {
                    best = Some(j);
                }
            }
            best.filter(|&j| heights[j] < heights[i])
        })
        .collect();

    let mut sink_of = vec![usize::MAX; n];
    let mut path = Vec::new();
    for start in 0..n {
        let mut cur = start;
        while sink_of[cur] == usize::MAX {
            path.push(cur);
            match receiver[cur] {
                Some(next) => cur = next,
                None => {
                    sink_of[cur] = cur;
                    break;
                }
            }
        }
        let sink = sink_of[cur];
        for p in path.drain(..) {
            sink_of[p] = sink;
        }
    }

    let sinks: Vec<usize> = (0..n).filter(|&i| receiver[i].is_none()).collect();
    let mut index = vec![usize::MAX; n];
    for (b, &s) in sinks.iter().enumerate() {
        index[s] = b;
    }
    let label = sink_of.iter().map(|&s| index[s]).collect();
    Drainage {
        receiver,
        sink_of,
        sinks,
        label,
    }
}

/// When two adjacent basins are joined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MergeRule {
    /// Sink heights differ by less than the threshold.
    #[default]
    SinkHeight,
    /// The lowest pass between the basins rises less than the threshold
    /// above the higher of the two sinks.
    Saddle,
}

/// Basins after merging.
#[derive(Debug, Clone, PartialEq)]
pub struct Basins {
    /// Merged basin index of each node.
    pub label: Vec<usize>,
    /// Sink node of each merged basin, sorted by height then index.
    pub sinks: Vec<usize>,
    pub members: Vec<usize>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Repeatedly joins adjacent basins whose separation is below
/// `tau * h_range` until no pair qualifies.
///
/// Candidate pairs are visited in order of increasing separation, then by
/// basin index. A merged basin keeps the lower of its two sinks.
pub fn merge_basins(
    drainage: &Drainage,
    heights: &[f64],
    adj: &[Vec<usize>],
    tau: f64,
    h_range: f64,
    rule: MergeRule,
) -> Basins {
    let nb = drainage.basin_count();
    let threshold = tau * h_range;

    // Lowest crossing between each pair of raw basins.
    let mut pass: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, list) in adj.iter().enumerate() {
        let a = drainage.label[i];
        for &j in list {
            let b = drainage.label[j];
            if a < b {
                let h = heights[i].max(heights[j]);
                pass.entry((a, b)).and_modify(|p| *p = p.min(h)).or_insert(h);
            }
        }
    }

    let mut uf = UnionFind::new(nb);
    let mut sink: Vec<usize> = drainage.sinks.clone();
    let lower = |a: usize, b: usize, sink: &[usize]| {
        let (ha, hb) = (heights[sink[a]], heights[sink[b]]);
        ha < hb || (ha == hb && sink[a] < sink[b])
    };

    loop {
        // Cluster-level adjacency with the lowest pass between clusters.
        let mut clusters: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (&(a, b), &h) in &pass {
            let (ra, rb) = (uf.find(a), uf.find(b));
            if ra != rb {
                let key = (ra.min(rb), ra.max(rb));
                clusters.entry(key).and_modify(|p| *p = p.min(h)).or_insert(h);
            }
        }
        let separation = |a: usize, b: usize, saddle: f64, sink: &[usize]| {
            let (ha, hb) = (heights[sink[a]], heights[sink[b]]);
            match rule {
                MergeRule::SinkHeight => (ha - hb).abs(),
                MergeRule::Saddle => saddle - ha.max(hb),
            }
        };
        let mut pairs: Vec<(f64, usize, usize)> = clusters
            .iter()
            .map(|(&(a, b), &s)| (separation(a, b, s, &sink), a, b))
            .filter(|p| p.0 < threshold)
            .collect();
        if pairs.is_empty() {
            break;
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

        let mut changed = false;
        for (_, a, b) in pairs {
            let (ra, rb) = (uf.find(a), uf.find(b));
            if ra == rb {
                continue;
            }
            // Separations involving an already-merged cluster are stale;
            // they are re-examined on the next pass.
            if ra != a || rb != b {
                continue;
            }
            let (keep, gone) = if lower(ra, rb, &sink) { (ra, rb) } else { (rb, ra) };
            uf.parent[gone] = keep;
            sink[gone] = sink[keep];
            changed = true;
        }
        if !changed {
            break;
        }
    }

    let mut root_index: BTreeMap<usize, usize> = BTreeMap::new();
    let mut roots: Vec<usize> = (0..nb).filter(|&b| uf.find(b) == b).collect();
    roots.sort_by(|&a, &b| {
        heights[sink[a]]
            .total_cmp(&heights[sink[b]])
            .then(sink[a].cmp(&sink[b]))
    });
    for (i, &r) in roots.iter().enumerate() {
        root_index.insert(r, i);
    }
    let raw_to_merged: Vec<usize> = (0..nb).map(|b| root_index[&uf.find(b)]).collect();
    let label: Vec<usize> = drainage.label.iter().map(|&b| raw_to_merged[b]).collect();
    let mut members = vec![0; roots.len()];
    for &l in &label {
        members[l] += 1;
    }
    Basins {
        label,
        sinks: roots.iter().map(|&r| sink[r]).collect(),
        members,
    }
}
