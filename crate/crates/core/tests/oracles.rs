use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use monostatic::equilibrium::{
    build_landscape, com_height, ecs_report, mesh_support_values, support_values, EcsConfig, SphereGraph,
};
use monostatic::geometry::{mass_properties, primitive, PrimitiveKind, PrimitiveSpec};
use monostatic::search::basin_gap;
use monostatic::sloan::{analytic_height, catalog, SloanParams};
use monostatic::{Direction, EcsReport};

#[test]
fn capsule_has_one_full_basin() {
    let mesh = primitive(&PrimitiveSpec::new(PrimitiveKind::Capsule), 100).unwrap();
    let r = ecs_report(&mesh, &EcsConfig::default()).unwrap();
    assert_eq!(r.ecs, 1);
    assert_eq!(r.boa, 1.0);
    // Side-down minus end-down height for the volume-matched capsule.
    let (radius, length) = PrimitiveSpec::new(PrimitiveKind::Capsule).capsule_dims();
    assert!((r.h_range - length / 2.0).abs() < 2e-3, "{} vs {}", r.h_range, length / 2.0);
    assert!((r.h_range - 1.486).abs() < 5e-3);
    assert!(radius > 0.0);
}

#[test]
fn hemisphere_rests_two_ways() {
    let mesh = primitive(&PrimitiveSpec::new(PrimitiveKind::Hemisphere), 100).unwrap();
    let r = ecs_report(&mesh, &EcsConfig::default()).unwrap();
    assert_eq!(r.ecs, 2);
    // Dome-down sink at 5R/8, flat-down at 3R/8. Near the flat face the
    // height grows linearly with tilt, so that sink sits one spacing high.
    let spacing = (4.0 * std::f64::consts::PI / 5000.0).sqrt();
    let radius = PrimitiveSpec::hemisphere_radius();
    let flat = r.sinks[0].height - 3.0 * radius / 8.0;
    assert!(flat > -1e-9 && flat < radius * spacing, "{flat}");
    assert!((r.sinks[1].height - 5.0 * radius / 8.0).abs() < 1e-3);
}

#[test]
fn cylinder_side_basin_matches_ridge_angle() {
    // The ridge between the side and end basins sits where
    // tan(alpha) = r / (L/2), so the side basin covers cos(alpha) of the sphere.
    let spec = PrimitiveSpec::new(PrimitiveKind::Cylinder);
    let (r, l) = spec.cylinder_dims();
    let expected = (r / (l / 2.0)).atan().cos();
    let mesh = primitive(&spec, 100).unwrap();
    let report = ecs_report(&mesh, &EcsConfig::default()).unwrap();
    assert!((report.boa - expected).abs() < 0.01, "{} vs {expected}", report.boa);
}

#[test]
fn sloan_height_ranges() {
    let cfg = EcsConfig::default();
    let eta = ecs_report(&SloanParams::eta(0.05).unwrap().mesh(100, 200).unwrap(), &cfg).unwrap();
    assert!((eta.h_range - 0.097).abs() < 0.005, "{}", eta.h_range);
    for inst in catalog() {
        let r = ecs_report(&inst.params.mesh(100, 200).unwrap(), &cfg).unwrap();
        assert!((r.h_range - inst.expected_h_range).abs() < 0.004, "{}: {}", inst.name, r.h_range);
    }
}

#[test]
fn basin_gaps_of_published_stages() {
    let cfg = EcsConfig::default();
    let stage1 = ecs_report(&SloanParams::eta(0.0455).unwrap().mesh(100, 200).unwrap(), &cfg).unwrap();
    assert_eq!(stage1.ecs, 2);
    assert!((basin_gap(&stage1) - 0.0015).abs() < 5e-4, "{}", basin_gap(&stage1));
    let primary = &catalog()[0];
    let stage2 = ecs_report(&primary.params.mesh(100, 200).unwrap(), &cfg).unwrap();
    assert_eq!(basin_gap(&stage2), 0.0);
}

#[test]
fn hull_walk_agrees_with_vertex_scan_on_sloan_meshes() {
    let graph = SphereGraph::shared(&EcsConfig::default());
    for beta in [0.02, 0.1, 0.15] {
        let mesh = SloanParams::eta(beta).unwrap().mesh(100, 200).unwrap();
        let walk = mesh_support_values(&mesh, &graph);
        let scan = support_values(&mesh, &graph.directions);
        let err = walk.iter().zip(&scan).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "beta {beta}: {err}");
    }
}

#[test]
fn analytic_and_mesh_heights_agree_on_a_non_convex_body() {
    let p = SloanParams::eta(0.1).unwrap();
    let mesh = p.mesh(100, 200).unwrap();
    let c = mass_properties(&mesh).unwrap().centroid;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let d = Direction::new_normalize(Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ));
        let a = analytic_height(&p, &c, &d, 12);
        let m = com_height(&mesh, &c, &d);
        assert!(a >= m - 1e-6 && a - m < 1e-3, "{a} vs {m}");
    }
}

#[test]
fn antipodal_identification_pairs_cube_faces() {
    let mesh = primitive(&PrimitiveSpec::new(PrimitiveKind::Cube), 0).unwrap();
    let cfg = EcsConfig {
        identify_antipodes: true,
        ..Default::default()
    };
    let r: EcsReport = EcsReport::from_landscape(&build_landscape(&mesh, &cfg).unwrap(), &cfg);
    let s = PrimitiveSpec::cube_side();
    let face = r.h_min - s / 2.0;
    assert!(face > -1e-9 && face < 0.03 * s, "{face}");
    // Diagonal directions lie within one sample spacing of the corner height.
    assert!((r.h_max - s * 3f64.sqrt() / 2.0).abs() < 2e-2);
}
