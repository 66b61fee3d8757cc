//! Triangle meshes, mass properties and mesh construction.

mod grid;
mod hull;
pub mod io;
mod primitives;

pub use grid::{mesh_from_radial, revolve_profile};
pub use hull::{convex_hull, convexity_ratio, ConvexHull, SupportIndex};
pub use io::{export_mesh, import_mesh, MeshFormat};
pub use primitives::{primitive, PrimitiveKind, PrimitiveSpec, REFERENCE_VOLUME};

use nalgebra::Vector3;
use serde::Serialize;

use crate::error::{Error, Result};

/// A point (or free vector) in model units.
pub type Point3 = Vector3<f64>;

/// Faces with twice-area below this are rejected.
const MIN_FACE_AREA: f64 = 1e-12;

/// Indexed triangle surface, counterclockwise faces seen from outside.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Point3>,
    faces: Vec<[usize; 3]>,
}

impl TriMesh {
    /// Builds a mesh and checks indices, face areas and orientation.
    pub fn new(vertices: Vec<Point3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if let Some((i, v)) = vertices
            .iter()
            .enumerate()
            .find(|(_, v)| !v.iter().all(|c| c.is_finite()))
        {
            return Err(Error::InvalidMesh(format!("vertex {i} is not finite: {v:?}")));
        }
        let n = vertices.len();
        for (fi, f) in faces.iter().enumerate() {
            if f.iter().any(|&i| i >= n) {
                return Err(Error::InvalidMesh(format!(
                    "face {fi} references vertex out of range ({f:?}, {n} vertices)"
                )));
            }
            let [a, b, c] = f.map(|i| vertices[i]);
            if (b - a).cross(&(c - a)).norm() * 0.5 <= MIN_FACE_AREA {
                return Err(Error::InvalidMesh(format!("face {fi} has zero area")));
            }
        }
        let mesh = Self { vertices, faces };
        let volume = mesh.signed_volume();
        if volume.abs() < 1e-9 {
            return Err(Error::DegenerateMesh(volume));
        }
        if volume < 0.0 {
            return Err(Error::InvalidMesh(format!(
                "signed volume {volume} is negative (faces oriented inward)"
            )));
        }
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn triangle(&self, face: usize) -> [Point3; 3] {
        self.faces[face].map(|i| self.vertices[i])
    }

    /// Returns a copy with every vertex mapped through `f`.
    ///
    /// Fails if the mapping flips orientation or collapses faces.
    pub fn map_vertices(&self, f: impl Fn(&Point3) -> Point3) -> Result<Self> {
        Self::new(self.vertices.iter().map(f).collect(), self.faces.clone())
    }

    pub fn translated(&self, t: Point3) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| v + t).collect(),
            faces: self.faces.clone(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        assert!(s > 0.0, "scale must be positive");
        Self {
            vertices: self.vertices.iter().map(|v| v * s).collect(),
            faces: self.faces.clone(),
        }
    }

    fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|i| self.vertices[i]);
                a.dot(&b.cross(&c))
            })
            .sum::<f64>()
            / 6.0
    }

    /// Vertex with the smallest z, lowest index on ties.
    pub fn lowest_vertex(&self) -> Point3 {
        let mut best = 0;
        for (i, v) in self.vertices.iter().enumerate() {
            if v.z < self.vertices[best].z {
                best = i;
            }
        }
        self.vertices[best]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassProperties {
    pub volume: f64,
    pub centroid: Point3,
}

/// Volume and centroid of a closed mesh with uniform density.
///
/// Sums signed tetrahedra spanned by the origin and each face.
pub fn mass_properties(mesh: &TriMesh) -> Result<MassProperties> {
    let mut volume = 0.0;
    let mut moment = Point3::zeros();
    for f in mesh.faces() {
        let [a, b, c] = f.map(|i| mesh.vertices[i]);
        let v = a.dot(&b.cross(&c)) / 6.0;
        volume += v;
        moment += (a + b + c) * (v / 4.0);
    }
    if volume.abs() < 1e-9 {
        return Err(Error::DegenerateMesh(volume));
    }
    Ok(MassProperties {
        volume,
        centroid: moment / volume,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn unit_cube() -> TriMesh {
        primitives::box_mesh(1.0)
    }

    #[test]
    fn cube_mass_properties() {
        let mp = mass_properties(&unit_cube()).unwrap();
        assert!((mp.volume - 1.0).abs() < 1e-12);
        assert!(mp.centroid.norm() < 1e-12);
    }

    #[test]
    fn rejects_out_of_range_index() {
        let cube = unit_cube();
        let mut faces = cube.faces().to_vec();
        faces[0][1] = 99;
        assert!(matches!(
            TriMesh::new(cube.vertices().to_vec(), faces),
            Err(Error::InvalidMesh(_))
        ));
    }

    #[test]
    fn rejects_inward_orientation() {
        let cube = unit_cube();
        let faces = cube.faces().iter().map(|&[a, b, c]| [a, c, b]).collect();
        assert!(TriMesh::new(cube.vertices().to_vec(), faces).is_err());
    }

    #[test]
    fn rejects_zero_area_face() {
        let v = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
        ];
        assert!(TriMesh::new(v, vec![[0, 1, 2]]).is_err());
    }

    #[test]
    fn lowest_vertex_prefers_lowest_index() {
        let cube = unit_cube();
        let low = cube.lowest_vertex();
        let first = cube.vertices().iter().find(|v| v.z == -0.5).unwrap();
        assert_eq!(low, *first);
    }

    #[test]
    fn translation_moves_centroid_exactly() {
        let cube = unit_cube();
        let t = Point3::new(0.3, -1.2, 2.5);
        let a = mass_properties(&cube).unwrap();
        let b = mass_properties(&cube.translated(t)).unwrap();
        assert!((a.volume - b.volume).abs() < 1e-12);
        assert!((b.centroid - a.centroid - t).norm() < 1e-12);
    }
}
