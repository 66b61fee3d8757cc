//! Bottom-weighting experiment: the centre of mass is pulled toward the
//! lowest vertex and the equilibrium count is re-measured.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::equilibrium::{mesh_support_values, EcsConfig, EcsReport, Landscape, SphereGraph};
use crate::error::{Error, Result};
use crate::geometry::{mass_properties, Point3, TriMesh};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BallastConfig {
    pub weights: Vec<f64>,
    pub ecs_config: EcsConfig,
}

impl Default for BallastConfig {
    fn default() -> Self {
        Self {
            weights: vec![0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30],
            ecs_config: EcsConfig::default(),
        }
    }
}

impl BallastConfig {
    pub fn validate(&self) -> Result<()> {
        self.ecs_config.validate()?;
        if self.weights.is_empty() {
            return Err(Error::InvalidParameter("empty weight grid".into()));
        }
        if let Some(w) = self.weights.iter().find(|w| !(0.0..1.0).contains(*w)) {
            return Err(Error::InvalidParameter(format!("ballast weight {w} outside [0, 1)")));
        }
        if self.weights.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::InvalidParameter("weights must be strictly ascending".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallastEntry {
    pub w: f64,
    pub ecs: usize,
    pub boa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallastReport {
    pub entries: Vec<BallastEntry>,
    /// Smallest grid weight with a single basin.
    pub min_w_for_ecs1: Option<f64>,
}

/// `(1 − w)·c + w·v_bottom`, with `v_bottom` the lowest vertex in the body
/// frame.
pub fn shifted_centroid(mesh: &TriMesh, w: f64) -> Result<Point3> {
    if !(0.0..1.0).contains(&w) {
        return Err(Error::InvalidParameter(format!("ballast weight {w} outside [0, 1)")));
    }
    let c = mass_properties(mesh)?.centroid;
    let bottom = mesh.lowest_vertex();
    Ok(c * (1.0 - w) + bottom * w)
}

pub fn ballast_sweep(mesh: &TriMesh, config: &BallastConfig) -> Result<BallastReport> {
    config.validate()?;
    let ecs_config = &config.ecs_config;
    let graph = SphereGraph::shared(ecs_config);
    let support = mesh_support_values(mesh, &graph);
    let mut entries = Vec::with_capacity(config.weights.len());
    for &w in &config.weights {
        let c = shifted_centroid(mesh, w)?;
        let landscape = Landscape::from_support(graph.clone(), &support, &c);
        let report = EcsReport::from_landscape(&landscape, ecs_config);
        entries.push(BallastEntry {
            w,
            ecs: report.ecs,
            boa: report.boa,
        });
    }
    let min_w_for_ecs1 = entries.iter().find(|e| e.ecs == 1).map(|e| e.w);
    Ok(BallastReport { entries, min_w_for_ecs1 })
}

/// `geometry, w, ecs, boa` rows for several sweeps.
pub fn write_csv<W: Write>(out: W, reports: &[(String, BallastReport)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["geometry", "w", "ecs", "boa"])?;
    for (name, report) in reports {
        for e in &report.entries {
            w.write_record([name.clone(), format!("{:.2}", e.w), e.ecs.to_string(), format!("{:.4}", e.boa)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// JSON object mapping each geometry to its minimum ballast weight.
pub fn summary_json(reports: &[(String, BallastReport)]) -> String {
    let map: serde_json::Map<String, serde_json::Value> = reports
        .iter()
        .map(|(name, r)| (name.clone(), serde_json::json!(r.min_w_for_ecs1)))
        .collect();
    serde_json::to_string_pretty(&map).expect("plain values serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::ecs_report;
    use crate::geometry::{primitive, PrimitiveKind, PrimitiveSpec};

    #[test]
    fn zero_weight_keeps_centroid() {
        let mesh = primitive(&PrimitiveSpec::new(PrimitiveKind::Hemisphere), 30).unwrap();
        let c = mass_properties(&mesh).unwrap().centroid;
        assert_eq!(shifted_centroid(&mesh, 0.0).unwrap(), c);
        assert!(shifted_centroid(&mesh, 1.0).is_err());
    }

    #[test]
    fn cube_shift_is_direct_arithmetic() {
        let mesh = primitive(&PrimitiveSpec::new(PrimitiveKind::Cube), 0).unwrap();
        let h = PrimitiveSpec::cube_side() / 2.0;
        let bottom = mesh.lowest_vertex();
        assert!((bottom.z + h).abs() < 1e-12);
        let c = shifted_centroid(&mesh, 0.3).unwrap();
        assert!((c - bottom * 0.3).norm() < 1e-12);
        assert!((c.z + 0.3 * h).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_matches_plain_report() {
        let mesh = primitive(&PrimitiveSpec::new(PrimitiveKind::Hemisphere), 40).unwrap();
        let cfg = BallastConfig::default();
        let sweep = ballast_sweep(&mesh, &cfg).unwrap();
        let plain = ecs_report(&mesh, &cfg.ecs_config).unwrap();
        assert_eq!(sweep.entries[0].ecs, plain.ecs);
        assert_eq!(sweep.entries.len(), cfg.weights.len());
    }

    #[test]
    fn grid_validation() {
        let bad = BallastConfig {
            weights: vec![0.1, 0.05],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = BallastConfig {
            weights: vec![0.0, 1.0],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn csv_has_one_row_per_weight() {
        let mesh = primitive(&PrimitiveSpec::new(PrimitiveKind::Sphere), 40).unwrap();
        let r = ballast_sweep(&mesh, &BallastConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &[("sphere".into(), r.clone())]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + r.entries.len());
        assert!(summary_json(&[("sphere".into(), r)]).contains("sphere"));
    }
}
