//! Counting stable resting orientations of a rigid body.
//!
//! The centre-of-mass height `h(d) = c·d − min_v v·d` is sampled on a
//! Fibonacci spiral of directions, each sample drains to a local minimum
//! along a k-nearest-neighbour graph, and basins separated by less than a
//! fraction of the height range are merged. The surviving basin count is
//! the equilibrium count score (ECS).

mod basins;
mod sampling;

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{Unit, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use basins::{drain, merge_basins, Basins, Drainage, MergeRule};
pub use sampling::{fibonacci_sphere, knn_graph};

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, mass_properties, Point3, SupportIndex, TriMesh};
use crate::sloan::SloanParams;

/// Unit vector on the orientation sphere.
pub type Direction = Unit<Vector3<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EcsConfig {
    pub n_dirs: usize,
    pub k: usize,
    /// Merge threshold as a fraction of the height range.
    pub merge_tau: f64,
    /// Height range below which the landscape is flagged degenerate.
    pub flat_floor: f64,
    pub seed: u64,
    /// Quotient the sphere by `d ~ -d` before counting.
    pub identify_antipodes: bool,
    pub merge_rule: MergeRule,
}

impl Default for EcsConfig {
    fn default() -> Self {
        Self {
            n_dirs: 5000,
            k: 12,
            merge_tau: 0.01,
            flat_floor: 0.005,
            seed: 0,
            identify_antipodes: false,
            merge_rule: MergeRule::default(),
        }
    }
}

impl EcsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_dirs < 100 {
            return Err(Error::InvalidParameter(format!("n_dirs = {} < 100", self.n_dirs)));
        }
        if self.k < 3 {
            return Err(Error::InvalidParameter(format!("k = {} < 3", self.k)));
        }
        if !(self.merge_tau > 0.0 && self.merge_tau < 1.0) {
            return Err(Error::InvalidParameter(format!("merge_tau = {} outside (0, 1)", self.merge_tau)));
        }
        if self.flat_floor.is_nan() || self.flat_floor < 0.0 {
            return Err(Error::InvalidParameter("flat_floor must be >= 0".into()));
        }
        Ok(())
    }

    pub fn with_tau(&self, merge_tau: f64) -> Self {
        Self { merge_tau, ..self.clone() }
    }
}

/// Sample directions and their neighbour graph, shared between landscapes
/// with the same `(n_dirs, k, identify_antipodes)`.
#[derive(Debug)]
pub struct SphereGraph {
    pub directions: Vec<Direction>,
    pub knn: Vec<Vec<usize>>,
    pub identify_antipodes: bool,
}

impl SphereGraph {
    pub fn new(n_dirs: usize, k: usize, identify_antipodes: bool) -> Self {
        let directions = fibonacci_sphere(n_dirs);
        let knn = knn_graph(&directions, k, identify_antipodes);
        Self {
            directions,
            knn,
            identify_antipodes,
        }
    }

    /// Cached graph for a configuration.
    pub fn shared(config: &EcsConfig) -> Arc<SphereGraph> {
        type Cache = Mutex<HashMap<(usize, usize, bool), Arc<SphereGraph>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let key = (config.n_dirs, config.k, config.identify_antipodes);
        let cache = CACHE.get_or_init(Default::default);
        if let Some(g) = cache.lock().unwrap().get(&key) {
            return g.clone();
        }
        let g = Arc::new(SphereGraph::new(key.0, key.1, key.2));
        cache.lock().unwrap().insert(key, g.clone());
        g
    }

    /// Unique undirected edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.knn
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }
}

/// `c·d − min_v v·d`.
pub fn com_height(mesh: &TriMesh, centroid: &Point3, d: &Direction) -> f64 {
    centroid.dot(d) - support_value(mesh.vertices(), d)
}

/// `min_v v·d` over a vertex set.
pub fn support_value(vertices: &[Point3], d: &Direction) -> f64 {
    let (dx, dy, dz) = (d.x, d.y, d.z);
    let mut lanes = [f64::INFINITY; 4];
    let chunks = vertices.chunks_exact(4);
    let rest = chunks.remainder();
    for c in chunks {
        for l in 0..4 {
            let v = &c[l];
            let s = v.x * dx + v.y * dy + v.z * dz;
            lanes[l] = if s < lanes[l] { s } else { lanes[l] };
        }
    }
    let mut m = lanes[0].min(lanes[1]).min(lanes[2].min(lanes[3]));
    for v in rest {
        m = m.min(v.x * dx + v.y * dy + v.z * dz);
    }
    m
}

/// Support values of a mesh for every sample direction.
pub fn support_values(mesh: &TriMesh, dirs: &[Direction]) -> Vec<f64> {
    let vertices = mesh.vertices();
    dirs.par_iter().map(|d| support_value(vertices, d)).collect()
}

/// Support values from a hull vertex graph. Each walk starts at the support
/// vertex of an already visited graph neighbour, so the result agrees with
/// [`support_values`] up to the hull's plane tolerance.
pub fn hull_support_values(index: &SupportIndex, graph: &SphereGraph) -> Vec<f64> {
    let n = graph.directions.len();
    let mut values = vec![0.0; n];
    let mut vertex = vec![0usize; n];
    for i in 0..n {
        let start = graph.knn[i].first().filter(|&&j| j < i).map_or(0, |&j| vertex[j]);
        let (v, at) = index.min_dot(&graph.directions[i], start);
        values[i] = v;
        vertex[i] = at;
    }
    values
}

/// Sampled height function over the sphere.
#[derive(Debug, Clone)]
pub struct Landscape {
    pub graph: Arc<SphereGraph>,
    pub heights: Vec<f64>,
}

impl Landscape {
    pub fn from_support(graph: Arc<SphereGraph>, support: &[f64], centroid: &Point3) -> Self {
        let heights = graph
            .directions
            .iter()
            .zip(support)
            .map(|(d, s)| centroid.dot(d) - s)
            .collect();
        Self { graph, heights }
    }

    pub fn directions(&self) -> &[Direction] {
        &self.graph.directions
    }

    pub fn knn(&self) -> &[Vec<usize>] {
        &self.graph.knn
    }

    pub fn h_min(&self) -> f64 {
        self.heights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn h_max(&self) -> f64 {
        self.heights.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn h_range(&self) -> f64 {
        self.h_max() - self.h_min()
    }

    pub fn drain(&self) -> Drainage {
        drain(&self.heights, self.knn())
    }

    pub fn merge(&self, drainage: &Drainage, config: &EcsConfig) -> Basins {
        merge_basins(
            drainage,
            &self.heights,
            self.knn(),
            config.merge_tau,
            self.h_range(),
            config.merge_rule,
        )
    }

    /// Writes `direction_x, direction_y, direction_z, longitude, latitude,
    /// height, basin_id` rows (degrees for the angles).
    pub fn write_csv<W: Write>(&self, out: W, basins: &Basins) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "direction_x",
            "direction_y",
            "direction_z",
            "longitude",
            "latitude",
            "height",
            "basin_id",
        ])?;
        for (i, d) in self.directions().iter().enumerate() {
            let lon = d.y.atan2(d.x).to_degrees();
            let lat = d.z.clamp(-1.0, 1.0).asin().to_degrees();
            w.write_record([
                format!("{:.9}", d.x),
                format!("{:.9}", d.y),
                format!("{:.9}", d.z),
                format!("{lon:.6}"),
                format!("{lat:.6}"),
                format!("{:.9}", self.heights[i]),
                basins.label[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Heights at the configured sample directions with the mesh's own centroid.
pub fn build_landscape(mesh: &TriMesh, config: &EcsConfig) -> Result<Landscape> {
    config.validate()?;
    let centroid = mass_properties(mesh)?.centroid;
    Ok(build_landscape_with_centroid(mesh, &centroid, config))
}

pub fn build_landscape_with_centroid(mesh: &TriMesh, centroid: &Point3, config: &EcsConfig) -> Landscape {
    let graph = SphereGraph::shared(config);
    let support = mesh_support_values(mesh, &graph);
    Landscape::from_support(graph, &support, centroid)
}

/// Support values through the hull walk, falling back to the vertex scan
/// when no hull can be built.
pub fn mesh_support_values(mesh: &TriMesh, graph: &SphereGraph) -> Vec<f64> {
    match convex_hull(mesh.vertices()) {
        Ok(hull) => hull_support_values(&hull.support_index(mesh.vertices()), graph),
        Err(_) => support_values(mesh, &graph.directions),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sink {
    pub direction: [f64; 3],
    pub height: f64,
    pub member_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcsReport {
    pub ecs: usize,
    pub raw_basins: usize,
    pub boa: f64,
    pub h_range: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// Merged basins, lowest sink first.
    pub sinks: Vec<Sink>,
    pub degenerate: bool,
}

impl EcsReport {
    pub fn from_landscape(landscape: &Landscape, config: &EcsConfig) -> Self {
        let drainage = landscape.drain();
        let basins = landscape.merge(&drainage, config);
        Self::assemble(landscape, &drainage, &basins, config)
    }

    fn assemble(landscape: &Landscape, drainage: &Drainage, basins: &Basins, config: &EcsConfig) -> Self {
        let n = landscape.heights.len();
        let h_range = landscape.h_range();
        let sinks: Vec<Sink> = basins
            .sinks
            .iter()
            .zip(&basins.members)
            .map(|(&s, &m)| {
                let d = landscape.directions()[s];
                Sink {
                    direction: [d.x, d.y, d.z],
                    height: landscape.heights[s],
                    member_count: m,
                }
            })
            .collect();
        Self {
            ecs: sinks.len(),
            raw_basins: drainage.basin_count(),
            boa: basins.members[0] as f64 / n as f64,
            h_range,
            h_min: landscape.h_min(),
            h_max: landscape.h_max(),
            sinks,
            degenerate: h_range < config.flat_floor,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Full oracle: landscape, drainage, merge.
pub fn ecs_report(mesh: &TriMesh, config: &EcsConfig) -> Result<EcsReport> {
    let landscape = build_landscape(mesh, config)?;
    Ok(EcsReport::from_landscape(&landscape, config))
}

/// Oracle run with an externally supplied centre of mass.
pub fn ecs_report_with_centroid(mesh: &TriMesh, centroid: &Point3, config: &EcsConfig) -> Result<EcsReport> {
    config.validate()?;
    let landscape = build_landscape_with_centroid(mesh, centroid, config);
    Ok(EcsReport::from_landscape(&landscape, config))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsReport {
    /// Mean drop from each sample to the sink its descent reaches.
    pub sre: f64,
    /// Mean `|Δh| / Δangle` over graph edges.
    pub steepness: f64,
    pub boa: f64,
    pub ecs: usize,
    pub h_range: f64,
    pub degenerate: bool,
}

pub fn dynamics_from_landscape(landscape: &Landscape, config: &EcsConfig) -> DynamicsReport {
    let report = EcsReport::from_landscape(landscape, config);
    if report.degenerate {
        return DynamicsReport {
            sre: 0.0,
            steepness: 0.0,
            boa: report.boa,
            ecs: report.ecs,
            h_range: report.h_range,
            degenerate: true,
        };
    }
    let h = &landscape.heights;
    let drainage = landscape.drain();
    let sre = (0..h.len()).map(|i| h[i] - h[drainage.sink_of[i]]).sum::<f64>() / h.len() as f64;

    let graph = &landscape.graph;
    let (mut total, mut count) = (0.0, 0usize);
    for (i, j) in graph.edges() {
        let a = sampling::angle(&graph.directions[i], &graph.directions[j], graph.identify_antipodes);
        if a > 0.0 {
            total += (h[i] - h[j]).abs() / a;
            count += 1;
        }
    }
    DynamicsReport {
        sre,
        steepness: if count > 0 { total / count as f64 } else { 0.0 },
        boa: report.boa,
        ecs: report.ecs,
        h_range: report.h_range,
        degenerate: false,
    }
}

pub fn dynamics(mesh: &TriMesh, config: &EcsConfig) -> Result<DynamicsReport> {
    let landscape = build_landscape(mesh, config)?;
    Ok(dynamics_from_landscape(&landscape, config))
}

/// ECS at each merge threshold, reusing one landscape.
pub fn threshold_sweep(mesh: &TriMesh, config: &EcsConfig, taus: &[f64]) -> Result<Vec<(f64, usize)>> {
    let landscape = build_landscape(mesh, config)?;
    let drainage = landscape.drain();
    taus.iter()
        .map(|&tau| {
            let c = config.with_tau(tau);
            c.validate()?;
            Ok((tau, landscape.merge(&drainage, &c).sinks.len()))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolutionPoint {
    pub n_theta: usize,
    pub n_phi: usize,
    pub ecs: usize,
    pub h_range: f64,
}

/// Rebuilds the Sloan mesh at each `(n_theta, n_phi)` and reruns the oracle.
pub fn resolution_sweep(
    params: &SloanParams,
    resolutions: &[(usize, usize)],
    config: &EcsConfig,
) -> Result<Vec<ResolutionPoint>> {
    resolutions
        .iter()
        .map(|&(n_theta, n_phi)| {
            let mesh = params.mesh(n_theta, n_phi)?;
            let r = ecs_report(&mesh, config)?;
            Ok(ResolutionPoint {
                n_theta,
                n_phi,
                ecs: r.ecs,
                h_range: r.h_range,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{mesh_from_radial, primitive, PrimitiveKind, PrimitiveSpec};

    #[test]
    fn sphere_height_is_one() {
        let mesh = mesh_from_radial(|_, _| 1.0, 100, 200).unwrap();
        let c = mass_properties(&mesh).unwrap().centroid;
        for d in fibonacci_sphere(300) {
            assert!((com_height(&mesh, &c, &d) - 1.0).abs() < 2e-4);
        }
    }

    #[test]
    fn cube_heights_at_face_and_corner() {
        let cube = primitive(&PrimitiveSpec::new(PrimitiveKind::Cube), 0).unwrap();
        let s = PrimitiveSpec::cube_side();
        let c = Point3::zeros();
        let face = Direction::new_normalize(Point3::z());
        let diag = Direction::new_normalize(Point3::new(1.0, 1.0, 1.0));
        assert!((com_height(&cube, &c, &face) - s / 2.0).abs() < 1e-12);
        assert!((com_height(&cube, &c, &diag) - s * 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((s / 2.0 - 0.806).abs() < 1e-3 && (s * 3f64.sqrt() / 2.0 - 1.396).abs() < 1e-3);
    }

    #[test]
    fn support_value_matches_naive_min() {
        let mesh = mesh_from_radial(|t, p| 1.0 + 0.05 * (3.0 * t).sin() * p.cos(), 13, 27).unwrap();
        for d in fibonacci_sphere(50) {
            let naive = mesh
                .vertices()
                .iter()
                .map(|v| v.dot(&d))
                .fold(f64::INFINITY, f64::min);
            assert_eq!(support_value(mesh.vertices(), &d), naive);
        }
    }

    #[test]
    fn hull_walk_matches_vertex_scan() {
        let graph = SphereGraph::shared(&EcsConfig::default());
        for kind in [PrimitiveKind::Cube, PrimitiveKind::Hemisphere, PrimitiveKind::Cylinder] {
            let mesh = primitive(&PrimitiveSpec::new(kind), 40).unwrap();
            let walk = mesh_support_values(&mesh, &graph);
            let scan = support_values(&mesh, &graph.directions);
            let err = walk.iter().zip(&scan).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9, "{kind}: {err}");
        }
    }

    #[test]
    fn config_validation() {
        assert!(EcsConfig::default().validate().is_ok());
        assert!(EcsConfig { n_dirs: 50, ..Default::default() }.validate().is_err());
        assert!(EcsConfig { k: 2, ..Default::default() }.validate().is_err());
        assert!(EcsConfig { merge_tau: 1.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn sphere_is_degenerate() {
        let mesh = primitive(&PrimitiveSpec::new(PrimitiveKind::Sphere), 100).unwrap();
        let r = ecs_report(&mesh, &EcsConfig::default()).unwrap();
        assert!(r.degenerate);
        assert!(r.h_range < 0.005);
        let dy = dynamics(&mesh, &EcsConfig::default()).unwrap();
        assert!(dy.sre < 0.005);
    }

    #[test]
    fn report_invariants() {
        let mesh = primitive(&PrimitiveSpec::new(PrimitiveKind::Hemisphere), 60).unwrap();
        let r = ecs_report(&mesh, &EcsConfig::default()).unwrap();
        assert!(r.ecs <= r.raw_basins);
        assert!((r.h_range - (r.h_max - r.h_min)).abs() < 1e-15);
        assert_eq!(r.sinks.iter().map(|s| s.member_count).sum::<usize>(), 5000);
        assert!((r.boa - r.sinks[0].member_count as f64 / 5000.0).abs() < 1e-15);
        assert!(r.sinks.windows(2).all(|w| w[0].height <= w[1].height));
    }
}
