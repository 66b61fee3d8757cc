use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::grid::{mesh_from_radial, revolve_profile};
use super::{Point3, TriMesh};
use crate::error::{Error, Result};

/// Volume every reference primitive is matched to (unit sphere).
pub const REFERENCE_VOLUME: f64 = 4.0 * PI / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimitiveKind {
    Sphere,
    Cylinder,
    Hemisphere,
    Ellipsoid,
    Capsule,
    Cube,
}

impl PrimitiveKind {
    pub const ALL: [PrimitiveKind; 6] = [
        PrimitiveKind::Sphere,
        PrimitiveKind::Cylinder,
        PrimitiveKind::Hemisphere,
        PrimitiveKind::Ellipsoid,
        PrimitiveKind::Capsule,
        PrimitiveKind::Cube,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PrimitiveKind::Sphere => "sphere",
            PrimitiveKind::Cylinder => "cylinder",
            PrimitiveKind::Hemisphere => "hemisphere",
            PrimitiveKind::Ellipsoid => "ellipsoid",
            PrimitiveKind::Capsule => "capsule",
            PrimitiveKind::Cube => "cube",
        }
    }
}

impl fmt::Display for PrimitiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PrimitiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PrimitiveKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown(format!("primitive kind '{s}'")))
    }
}

/// A reference solid, before volume matching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveSpec {
    pub kind: PrimitiveKind,
    /// Cylinder length over diameter.
    pub cylinder_aspect: f64,
    /// Ellipsoid semi-axes along x, y, z, up to scale.
    pub ellipsoid_ratios: [f64; 3],
    /// Capsule total length (including caps) over diameter.
    pub capsule_aspect: f64,
}

impl PrimitiveSpec {
    pub fn new(kind: PrimitiveKind) -> Self {
        Self {
            kind,
            cylinder_aspect: 2.0,
            ellipsoid_ratios: [1.0, 0.9, 0.8],
            capsule_aspect: 3.5,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            PrimitiveKind::Cylinder => self.cylinder_aspect > 0.0,
            PrimitiveKind::Ellipsoid => self.ellipsoid_ratios.iter().all(|&r| r > 0.0),
            // A capsule shorter than its diameter has no cylindrical part.
            PrimitiveKind::Capsule => self.capsule_aspect >= 1.0,
            _ => true,
        };
        if ok && self.cylinder_aspect.is_finite() && self.capsule_aspect.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad shape parameters for {:?}", self)))
        }
    }

    /// Cylinder radius and length at reference volume.
    pub fn cylinder_dims(&self) -> (f64, f64) {
        let r = (2.0 / (3.0 * self.cylinder_aspect)).cbrt();
        (r, 2.0 * r * self.cylinder_aspect)
    }

    /// Capsule radius and straight-section length at reference volume.
    pub fn capsule_dims(&self) -> (f64, f64) {
        let r = (4.0 / (6.0 * self.capsule_aspect - 2.0)).cbrt();
        (r, 2.0 * r * (self.capsule_aspect - 1.0))
    }

    /// Ellipsoid semi-axes with product one.
    pub fn ellipsoid_axes(&self) -> [f64; 3] {
        let [a, b, c] = self.ellipsoid_ratios;
        let s = (a * b * c).cbrt();
        [a / s, b / s, c / s]
    }

    pub fn hemisphere_radius() -> f64 {
        2f64.cbrt()
    }

    pub fn cube_side() -> f64 {
        REFERENCE_VOLUME.cbrt()
    }
}

/// Mesh of a reference primitive at volume `4π/3`.
///
/// Curved solids use `resolution` latitude rows and `2 * resolution`
/// longitude columns. Axes of symmetry lie along z; the hemisphere rests
/// on its flat face at `z = 0` with the dome above.
pub fn primitive(spec: &PrimitiveSpec, resolution: usize) -> Result<TriMesh> {
    spec.validate()?;
    let resolution = resolution.max(8);
    let n_phi = 2 * resolution;
    match spec.kind {
        PrimitiveKind::Sphere => mesh_from_radial(|_, _| 1.0, resolution, n_phi),
        PrimitiveKind::Cylinder => {
            let (r, len) = spec.cylinder_dims();
            let h = len / 2.0;
            revolve_profile(&[(0.0, h), (r, h), (r, -h), (0.0, -h)], n_phi)
        }
        PrimitiveKind::Hemisphere => {
            let radius = PrimitiveSpec::hemisphere_radius();
            let rows = resolution / 2;
            let mut profile = vec![(0.0, radius)];
            for i in 1..=rows {
                let t = 0.5 * PI * i as f64 / rows as f64;
                profile.push((radius * t.sin(), radius * t.cos()));
            }
            // The rim sits exactly on the flat face.
            profile.last_mut().unwrap().1 = 0.0;
            profile.push((0.0, 0.0));
            revolve_profile(&profile, n_phi)
        }
        PrimitiveKind::Ellipsoid => {
            let [a, b, c] = spec.ellipsoid_axes();
            let sphere = mesh_from_radial(|_, _| 1.0, resolution, n_phi)?;
            sphere.map_vertices(|v| Point3::new(a * v.x, b * v.y, c * v.z))
        }
        PrimitiveKind::Capsule => {
            let (r, len) = spec.capsule_dims();
            let h = len / 2.0;
            let rows = resolution / 2;
            let mut profile = vec![(0.0, h + r)];
            for i in 1..=rows {
                let t = 0.5 * PI * i as f64 / rows as f64;
                profile.push((r * t.sin(), h + r * t.cos()));
            }
            for i in 0..rows {
                let t = 0.5 * PI * (1.0 + i as f64 / rows as f64);
                profile.push((r * t.sin(), -h + r * t.cos()));
            }
            profile.push((0.0, -h - r));
            revolve_profile(&profile, n_phi)
        }
        PrimitiveKind::Cube => Ok(box_mesh(PrimitiveSpec::cube_side())),
    }
}

/// Axis-aligned cube of the given side centred on the origin.
pub(crate) fn box_mesh(side: f64) -> TriMesh {
    let h = side / 2.0;
    let vertices: Vec<Point3> = (0..8)
        .map(|i| {
            let s = |bit: usize| if i & bit != 0 { h } else { -h };
            Point3::new(s(1), s(2), s(4))
        })
        .collect();
    let quads = [
        [0, 2, 3, 1], // z-
        [4, 5, 7, 6], // z+
        [0, 1, 5, 4], // y-
        [2, 6, 7, 3], // y+
        [0, 4, 6, 2], // x-
        [1, 3, 7, 5], // x+
    ];
    let faces = quads
        .iter()
        .flat_map(|&[a, b, c, d]| [[a, b, c], [a, c, d]])
        .collect();
    TriMesh::new(vertices, faces).expect("cube mesh is valid")
}
