use std::f64::consts::PI;

use super::{Point3, TriMesh};
use crate::error::{Error, Result};

/// Latitude-longitude mesh: a north pole vertex, `rings` rows of `n_phi`
/// vertices ordered north to south with azimuth increasing
/// counterclockwise about +z, and a south pole vertex.
fn lat_long_mesh(rings: Vec<Vec<Point3>>, north: Point3, south: Point3) -> Result<TriMesh> {
    let n_phi = rings[0].len();
    let n_rings = rings.len();
    let mut vertices = Vec::with_capacity(2 + n_rings * n_phi);
    vertices.push(north);
    for ring in rings {
        debug_assert_eq!(ring.len(), n_phi);
        vertices.extend(ring);
    }
    let south_idx = vertices.len();
    vertices.push(south);

    let at = |ring: usize, j: usize| 1 + ring * n_phi + j % n_phi;
    let mut faces = Vec::with_capacity(2 * n_phi * n_rings);
    for j in 0..n_phi {
        faces.push([0, at(0, j), at(0, j + 1)]);
    }
    for i in 0..n_rings - 1 {
        for j in 0..n_phi {
            let (a, b, c, d) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    let last = n_rings - 1;
    for j in 0..n_phi {
        faces.push([at(last, j), south_idx, at(last, j + 1)]);
    }
    TriMesh::new(vertices, faces)
}

/// Mesh of the star-shaped surface `r(theta, phi)` on a regular grid.
///
/// The grid has `n_theta + 1` latitude rows including the two poles, which
/// collapse to single vertices joined by triangle fans.
pub fn mesh_from_radial(
    radial: impl Fn(f64, f64) -> f64,
    n_theta: usize,
    n_phi: usize,
) -> Result<TriMesh> {
    if n_theta < 8 || n_phi < 16 {
        return Err(Error::InvalidParameter(format!(
            "grid {n_theta}x{n_phi} is too coarse (need at least 8x16)"
        )));
    }
    let eval = |theta: f64, phi: f64| -> Result<f64> {
        let r = radial(theta, phi);
        if r.is_finite() && r > 0.0 {
            Ok(r)
        } else {
            Err(Error::InvalidRadius { theta, phi, radius: r })
        }
    };
    let dir = |theta: f64, phi: f64| {
        Point3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
    };

    let mut rings = Vec::with_capacity(n_theta - 1);
    for i in 1..n_theta {
        let theta = PI * i as f64 / n_theta as f64;
        let mut ring = Vec::with_capacity(n_phi);
        for j in 0..n_phi {
            let phi = 2.0 * PI * j as f64 / n_phi as f64;
            ring.push(dir(theta, phi) * eval(theta, phi)?);
        }
        rings.push(ring);
    }
    let north = Point3::z() * eval(0.0, 0.0)?;
    let south = -Point3::z() * eval(PI, 0.0)?;
    lat_long_mesh(rings, north, south)
}

/// Surface of revolution about z from a profile of `(rho, z)` pairs
/// running from the top pole to the bottom pole.
///
/// The first and last entries are the poles and must have `rho == 0`;
/// interior entries must have `rho > 0`.
pub fn revolve_profile(profile: &[(f64, f64)], n_phi: usize) -> Result<TriMesh> {
    if profile.len() < 3 || n_phi < 3 {
        return Err(Error::InvalidParameter(
            "profile needs two poles and at least one ring".into(),
        ));
    }
    let (first, rest) = profile.split_first().unwrap();
    let (last, interior) = rest.split_last().unwrap();
    if first.0 != 0.0 || last.0 != 0.0 || interior.iter().any(|&(rho, _)| rho <= 0.0) {
        return Err(Error::InvalidParameter("malformed revolution profile".into()));
    }
    let rings = interior
        .iter()
        .map(|&(rho, z)| {
            (0..n_phi)
                .map(|j| {
                    let phi = 2.0 * PI * j as f64 / n_phi as f64;
                    Point3::new(rho * phi.cos(), rho * phi.sin(), z)
                })
                .collect()
        })
        .collect();
    lat_long_mesh(rings, Point3::new(0.0, 0.0, first.1), Point3::new(0.0, 0.0, last.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mass_properties;

    const SPHERE_VOLUME: f64 = 4.0 * PI / 3.0;

    #[test]
    fn unit_sphere_volume_and_centroid() {
        let mesh = mesh_from_radial(|_, _| 1.0, 100, 200).unwrap();
        let mp = mass_properties(&mesh).unwrap();
        assert!((mp.volume / SPHERE_VOLUME - 1.0).abs() < 1e-3, "{}", mp.volume);
        assert!(mp.centroid.norm() < 1e-9);
        assert_eq!(mesh.vertices().len(), 2 + 99 * 200);
        assert_eq!(mesh.faces().len(), 2 * 200 * 99);
    }

    #[test]
    fn volume_converges_at_second_order() {
        let err = |n: usize| {
            let m = mesh_from_radial(|_, _| 1.0, n, 2 * n).unwrap();
            (SPHERE_VOLUME - mass_properties(&m).unwrap().volume).abs()
        };
        let (e1, e2, e3) = (err(16), err(32), err(64));
        assert!((e1 / e2).log2() >= 1.9, "{e1} {e2}");
        assert!((e2 / e3).log2() >= 1.9, "{e2} {e3}");
    }

    #[test]
    fn faces_point_outward() {
        let mesh = mesh_from_radial(|t, p| 1.0 + 0.1 * t.sin() * p.cos(), 20, 40).unwrap();
        let c = mass_properties(&mesh).unwrap().centroid;
        for f in 0..mesh.faces().len() {
            let [a, b, d] = mesh.triangle(f);
            let n = (b - a).cross(&(d - a));
            assert!(((a + b + d) / 3.0 - c).dot(&n) > 0.0);
        }
    }

    #[test]
    fn reports_bad_radius_location() {
        let err = mesh_from_radial(|t, _| if t > 1.0 { -1.0 } else { 1.0 }, 10, 20).unwrap_err();
        match err {
            Error::InvalidRadius { theta, .. } => assert!(theta > 1.0),
            e => panic!("unexpected {e}"),
        }
        assert!(mesh_from_radial(|_, _| f64::NAN, 10, 20).is_err());
    }

    #[test]
    fn rejects_coarse_grid() {
        assert!(mesh_from_radial(|_, _| 1.0, 7, 16).is_err());
        assert!(mesh_from_radial(|_, _| 1.0, 8, 15).is_err());
    }
}
