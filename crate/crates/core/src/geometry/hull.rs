//! Incremental 3-D convex hull with outside-set bookkeeping.

use super::{mass_properties, Point3, TriMesh};
use crate::error::{Error, Result};

/// Relative tolerance for "point is above plane" tests.
const PLANE_EPS: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ConvexHull {
    /// Triangles indexing into the input point slice, outward oriented.
    pub faces: Vec<[usize; 3]>,
    pub volume: f64,
}

struct Face {
    v: [usize; 3],
    /// Neighbour across edge `(v[e], v[e + 1])`.
    nb: [usize; 3],
    normal: Point3,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
    visit: usize,
}

impl Face {
    fn new(points: &[Point3], v: [usize; 3]) -> Self {
        let [a, b, c] = v.map(|i| points[i]);
        let n = (b - a).cross(&(c - a));
        let normal = n / n.norm();
        Self {
            v,
            nb: [usize::MAX; 3],
            normal,
            offset: normal.dot(&a),
            outside: Vec::new(),
            alive: true,
            visit: usize::MAX,
        }
    }

    fn distance(&self, p: &Point3) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// Convex hull of a point cloud.
///
/// Points lying within the plane tolerance of an existing face are treated
/// as inside, so coplanar input (cube faces, cylinder caps) is handled.
pub fn convex_hull(points: &[Point3]) -> Result<ConvexHull> {
    if points.len() < 4 {
        return Err(Error::Hull(format!("need at least 4 points, got {}", points.len())));
    }
    let scale = points
        .iter()
        .flat_map(|p| p.iter().map(|c| c.abs()))
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let eps = PLANE_EPS * scale;

    let seed = initial_simplex(points, eps)?;
    let interior = seed.iter().map(|&i| points[i]).sum::<Point3>() / 4.0;
    let mut faces: Vec<Face> = Vec::new();
    let [a, b, c, d] = seed;
    for tri in [[a, b, c], [a, b, d], [a, c, d], [b, c, d]] {
        let mut face = Face::new(points, tri);
        if face.distance(&interior) > 0.0 {
            face = Face::new(points, [tri[0], tri[2], tri[1]]);
        }
        faces.push(face);
    }
    for i in 0..4 {
        for e in 0..3 {
            let (u, w) = (faces[i].v[e], faces[i].v[(e + 1) % 3]);
            faces[i].nb[e] = (0..4)
                .find(|&j| j != i && (0..3).any(|f| faces[j].v[f] == w && faces[j].v[(f + 1) % 3] == u))
                .ok_or_else(|| Error::Hull("degenerate initial simplex".into()))?;
        }
    }

    for (i, p) in points.iter().enumerate() {
        if seed.contains(&i) {
            continue;
        }
        if let Some(f) = faces.iter_mut().find(|f| f.distance(p) > eps) {
            f.outside.push(i);
        }
    }

    let mut stack: Vec<usize> = (0..faces.len()).collect();
    let mut visible = Vec::new();
    let mut horizon: Vec<(usize, usize, usize)> = Vec::new();
    let mut orphans = Vec::new();
    let mut step = 0;
    while let Some(fi) = stack.pop() {
        if !faces[fi].alive || faces[fi].outside.is_empty() {
            continue;
        }
        step += 1;
        let apex = *faces[fi]
            .outside
            .iter()
            .max_by(|&&x, &&y| {
                faces[fi]
                    .distance(&points[x])
                    .total_cmp(&faces[fi].distance(&points[y]))
            })
            .unwrap();
        let p = points[apex];

        // Visible region by flood fill from the seeding face; edges to
        // faces that cannot see the apex form the horizon.
        visible.clear();
        horizon.clear();
        visible.push(fi);
        faces[fi].visit = step;
        let mut k = 0;
        while k < visible.len() {
            let f = visible[k];
            k += 1;
            for e in 0..3 {
                let nb = faces[f].nb[e];
                if faces[nb].visit == step {
                    continue;
                }
                if faces[nb].distance(&p) > eps {
                    faces[nb].visit = step;
                    visible.push(nb);
                }
            }
        }
        for &f in &visible {
            for e in 0..3 {
                let nb = faces[f].nb[e];
                if faces[nb].visit != step {
                    horizon.push((faces[f].v[e], faces[f].v[(e + 1) % 3], nb));
                }
            }
        }
        if horizon.is_empty() {
            return Err(Error::Hull("empty horizon".into()));
        }

        orphans.clear();
        for &f in &visible {
            faces[f].alive = false;
            orphans.append(&mut faces[f].outside);
        }

        let first_new = faces.len();
        for &(u, w, outer) in &horizon {
            let id = faces.len();
            let mut face = Face::new(points, [u, w, apex]);
            face.nb[0] = outer;
            let back = (0..3)
                .find(|&e| faces[outer].v[e] == w && faces[outer].v[(e + 1) % 3] == u)
                .ok_or_else(|| Error::Hull("hull lost manifoldness".into()))?;
            faces[outer].nb[back] = id;
            faces.push(face);
        }
        // Cone faces are linked through their shared apex edges.
        for i in first_new..faces.len() {
            let [u, w, _] = faces[i].v;
            let next = (first_new..faces.len()).find(|&j| faces[j].v[0] == w);
            let prev = (first_new..faces.len()).find(|&j| faces[j].v[1] == u);
            match (next, prev) {
                (Some(n), Some(p)) => {
                    faces[i].nb[1] = n;
                    faces[i].nb[2] = p;
                }
                _ => return Err(Error::Hull("open horizon".into())),
            }
        }
        for &q in &orphans {
            if q == apex {
                continue;
            }
            let pq = points[q];
            if let Some(f) = (first_new..faces.len()).find(|&f| faces[f].distance(&pq) > eps) {
                faces[f].outside.push(q);
            }
        }
        stack.extend(first_new..faces.len());
    }

    let faces: Vec<[usize; 3]> = faces.into_iter().filter(|f| f.alive).map(|f| f.v).collect();
    let volume = faces
        .iter()
        .map(|f| {
            let [a, b, c] = f.map(|i| points[i]);
            (a - interior).dot(&(b - interior).cross(&(c - interior)))
        })
        .sum::<f64>()
        / 6.0;
    Ok(ConvexHull { faces, volume })
}

impl ConvexHull {
    /// Vertex graph of the hull for support queries.
    pub fn support_index(&self, points: &[Point3]) -> SupportIndex {
        let mut local = vec![usize::MAX; points.len()];
        let mut verts = Vec::new();
        for f in &self.faces {
            for &v in f {
                if local[v] == usize::MAX {
                    local[v] = verts.len();
                    verts.push(points[v]);
                }
            }
        }
        let mut adj = vec![Vec::new(); verts.len()];
        for f in &self.faces {
            for e in 0..3 {
                let (a, b) = (local[f[e]], local[f[(e + 1) % 3]]);
                adj[a].push(b);
            }
        }
        let mut offsets = Vec::with_capacity(verts.len() + 1);
        let mut neighbours = Vec::new();
        offsets.push(0);
        for mut list in adj {
            list.sort_unstable();
            list.dedup();
            neighbours.extend(list);
            offsets.push(neighbours.len());
        }
        SupportIndex {
            points: verts,
            offsets,
            neighbours,
        }
    }
}

/// Hull vertices with their edge graph. A linear function on a convex
/// polytope has no local minima other than the global one, so a greedy walk
/// finds the support point.
#[derive(Debug, Clone)]
pub struct SupportIndex {
    points: Vec<Point3>,
    offsets: Vec<usize>,
    neighbours: Vec<usize>,
}

impl SupportIndex {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `min_v v·d` and the vertex attaining it, walking from `start`.
    pub fn min_dot(&self, d: &Point3, start: usize) -> (f64, usize) {
        let mut cur = start.min(self.points.len() - 1);
        let mut best = self.points[cur].dot(d);
        loop {
            let mut next = cur;
            for &j in &self.neighbours[self.offsets[cur]..self.offsets[cur + 1]] {
                let s = self.points[j].dot(d);
                if s < best {
                    best = s;
                    next = j;
                }
            }
            if next == cur {
                return (best, cur);
            }
            cur = next;
        }
    }
}

fn initial_simplex(points: &[Point3], eps: f64) -> Result<[usize; 4]> {
    let argmax = |key: &dyn Fn(&Point3) -> f64| -> usize {
        (0..points.len())
            .max_by(|&a, &b| key(&points[a]).total_cmp(&key(&points[b])))
            .unwrap()
    };
    let mut best = (0, 0, -1.0);
    for axis in 0..3 {
        let lo = argmax(&|p| -p[axis]);
        let hi = argmax(&|p| p[axis]);
        let d = (points[hi] - points[lo]).norm();
        if d > best.2 {
            best = (lo, hi, d);
        }
    }
    let (a, b, span) = best;
    if span <= eps {
        return Err(Error::Hull("points are coincident".into()));
    }
    let ab = (points[b] - points[a]) / span;
    let c = argmax(&|p| (p - points[a]).cross(&ab).norm());
    if (points[c] - points[a]).cross(&ab).norm() <= eps {
        return Err(Error::Hull("points are collinear".into()));
    }
    let n = (points[b] - points[a]).cross(&(points[c] - points[a])).normalize();
    let d = argmax(&|p| n.dot(&(p - points[a])).abs());
    if n.dot(&(points[d] - points[a])).abs() <= eps {
        return Err(Error::Hull("points are coplanar".into()));
    }
    Ok([a, b, c, d])
}

/// Mesh volume divided by the volume of the convex hull of its vertices.
pub fn convexity_ratio(mesh: &TriMesh) -> Result<f64> {
    let volume = mass_properties(mesh)?.volume;
    let hull = convex_hull(mesh.vertices())?;
    Ok((volume / hull.volume).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives::box_mesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cube_hull() {
        let cube = box_mesh(2.0);
        let hull = convex_hull(cube.vertices()).unwrap();
        assert!((hull.volume - 8.0).abs() < 1e-12);
        assert!((convexity_ratio(&cube).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn interior_points_are_ignored() {
        let mut pts = box_mesh(2.0).vertices().to_vec();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            pts.push(Point3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ));
        }
        let hull = convex_hull(&pts).unwrap();
        assert!((hull.volume - 8.0).abs() < 1e-9);
    }

    #[test]
    fn hull_faces_have_no_points_outside() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<Point3> = (0..2000)
            .map(|_| {
                Point3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        let hull = convex_hull(&pts).unwrap();
        for f in &hull.faces {
            let [a, b, c] = f.map(|i| pts[i]);
            let n = (b - a).cross(&(c - a)).normalize();
            for p in &pts {
                assert!(n.dot(&(p - a)) <= 1e-9);
            }
        }
    }

    #[test]
    fn support_walk_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Point3> = (0..3000)
            .map(|_| {
                let p = Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                p * (1.0 + 0.3 * p.x) / p.norm()
            })
            .collect();
        let index = convex_hull(&pts).unwrap().support_index(&pts);
        for i in 0..200 {
            let d = Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let brute = pts.iter().map(|p| p.dot(&d)).fold(f64::INFINITY, f64::min);
            let (walk, _) = index.min_dot(&d, i);
            assert!((walk - brute).abs() < 1e-12, "{walk} vs {brute}");
        }
    }

    #[test]
    fn coplanar_input_is_an_error() {
        let pts: Vec<Point3> = (0..10)
            .map(|i| Point3::new(i as f64, (i * i) as f64, 0.0))
            .collect();
        assert!(matches!(convex_hull(&pts), Err(Error::Hull(_))));
    }

    #[test]
    fn dented_mesh_ratio_below_one() {
        // Push one vertex of a subdivided sphere inward.
        let mut sphere = crate::geometry::mesh_from_radial(|_, _| 1.0, 10, 20).unwrap();
        let mut v = sphere.vertices().to_vec();
        v[50] *= 0.5;
        sphere = TriMesh::new(v, sphere.faces().to_vec()).unwrap();
        let r = convexity_ratio(&sphere).unwrap();
        assert!(r < 0.999 && r > 0.9, "{r}");
    }
}
