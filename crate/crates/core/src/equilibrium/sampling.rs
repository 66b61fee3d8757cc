use std::f64::consts::PI;

use rayon::prelude::*;

use super::Direction;
use crate::geometry::Point3;

/// Golden-angle spiral of `n` directions with `z_i = 1 - 2(i + 0.5)/n`.
pub fn fibonacci_sphere(n: usize) -> Vec<Direction> {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let az = 2.0 * PI * i as f64 / golden;
            Direction::new_normalize(Point3::new(rho * az.cos(), rho * az.sin(), z))
        })
        .collect()
}

/// Indices of the `k` directions closest in angle to `target`, skipping
/// `exclude`, nearest first.
pub(crate) fn nearest(dirs: &[Direction], target: &Point3, k: usize, exclude: Option<usize>) -> Vec<usize> {
    let mut scored: Vec<(f64, usize)> = dirs
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != exclude)
        .map(|(j, d)| (-d.dot(target), j))
        .collect();
    let k = k.min(scored.len());
    if k == 0 {
        return Vec::new();
    }
    scored.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.truncate(k);
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.into_iter().map(|(_, j)| j).collect()
}

/// Brute-force k-nearest-neighbour lists by angular distance, followed by
/// symmetric closure. Each list is sorted ascending by index.
///
/// With `identify_antipodes` every node is also linked to the neighbours of
/// its antipode, turning the graph into a sampling of the projective plane.
pub fn knn_graph(dirs: &[Direction], k: usize, identify_antipodes: bool) -> Vec<Vec<usize>> {
    let n = dirs.len();
    let lists: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let d = dirs[i].into_inner();
            let mut out = nearest(dirs, &d, k, Some(i));
            if identify_antipodes {
                out.extend(nearest(dirs, &(-d), k, Some(i)));
            }
            out
        })
        .collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, list) in lists.iter().enumerate() {
        for &j in list {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

/// Angle between two directions, treating antipodes as coincident when
/// `identify_antipodes` is set.
pub(crate) fn angle(a: &Direction, b: &Direction, identify_antipodes: bool) -> f64 {
    let c = a.dot(b).clamp(-1.0, 1.0);
    let c = if identify_antipodes { c.abs() } else { c };
    c.acos()
}
