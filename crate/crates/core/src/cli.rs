//! Command-line front end.
//!
//! Every command writes its tables into the output directory and returns
//! whether its acceptance predicate held; `main` turns that into the exit
//! code.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::ballast::{self, ballast_sweep, BallastConfig, BallastReport};
use crate::equilibrium::{build_landscape, dynamics_from_landscape, DynamicsReport, EcsConfig, EcsReport};
use crate::error::{Error, Result};
use crate::geometry::{convexity_ratio, export_mesh, primitive, MeshFormat, PrimitiveKind, PrimitiveSpec, TriMesh};
use crate::search::{self, optimize, verify_instance, Campaign, SearchSpace};
use crate::sloan::{catalog, instance, SloanParams};

/// Angular resolution of a sensor that resolves `tolerance_mm` over a
/// baseline of `scale_mm`, in degrees.
pub fn imu_precision(tolerance_mm: f64, scale_mm: f64) -> Result<f64> {
    if scale_mm.is_nan() || scale_mm <= 0.0 {
        return Err(Error::InvalidParameter(format!("scale {scale_mm} mm must be positive")));
    }
    if tolerance_mm.is_nan() || tolerance_mm < 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance {tolerance_mm} mm must be non-negative")));
    }
    Ok((tolerance_mm / scale_mm).atan().to_degrees())
}

/// Mesh resolution written `NxM` (polar by azimuthal samples).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self { n_theta: 100, n_phi: 200 }
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.n_theta, self.n_phi)
    }
}

impl FromStr for Resolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("resolution '{s}' is not NxM"));
        let (a, b) = s.split_once(['x', 'X', '×']).ok_or_else(bad)?;
        Ok(Self {
            n_theta: a.trim().parse().map_err(|_| bad())?,
            n_phi: b.trim().parse().map_err(|_| bad())?,
        })
    }
}

/// A body named on the command line: a reference primitive, a catalogued
/// instance, `eta:BETA` or `sloan:BETA:ORDER:COEFF`.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Primitive(PrimitiveKind),
    Sloan { name: String, params: SloanParams },
}

impl Geometry {
    pub fn name(&self) -> &str {
        match self {
            Geometry::Primitive(k) => k.name(),
            Geometry::Sloan { name, .. } => name,
        }
    }

    pub fn mesh(&self, resolution: Resolution) -> Result<TriMesh> {
        match self {
            Geometry::Primitive(k) => primitive(&PrimitiveSpec::new(*k), resolution.n_theta),
            Geometry::Sloan { params, .. } => params.mesh(resolution.n_theta, resolution.n_phi),
        }
    }

    pub fn sloan(&self) -> Result<&SloanParams> {
        match self {
            Geometry::Sloan { params, .. } => Ok(params),
            Geometry::Primitive(k) => Err(Error::InvalidParameter(format!("{k} is not a Sloan surface"))),
        }
    }
}

impl FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad number '{t}' in '{s}'")))
        };
        if let Ok(k) = s.parse::<PrimitiveKind>() {
            return Ok(Geometry::Primitive(k));
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["eta", b] => Ok(Geometry::Sloan {
                name: s.to_string(),
                params: SloanParams::eta(num(b)?)?,
            }),
            ["sloan", b, k, a] => {
                let order = k
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad order '{k}' in '{s}'")))?;
                Ok(Geometry::Sloan {
                    name: s.to_string(),
                    params: SloanParams::single_term(num(b)?, order, num(a)?)?,
                })
            }
            _ => {
                let lookup = if s.eq_ignore_ascii_case("gomboc") { "primary" } else { s };
                let inst = instance(lookup)?;
                Ok(Geometry::Sloan {
                    name: s.to_string(),
                    params: inst.params,
                })
            }
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "monostatic", version, about = "Equilibrium counting for self-righting bodies")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Number of sample directions.
    #[arg(long, global = true)]
    pub n_dirs: Option<usize>,
    /// Neighbours per direction.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Merge threshold as a fraction of the height range.
    #[arg(long, global = true)]
    pub merge_tau: Option<f64>,
    /// Mesh resolution NxM.
    #[arg(long, global = true)]
    pub resolution: Option<Resolution>,
    /// Seed for direction sampling and the optimiser.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Identify antipodal directions before counting basins.
    #[arg(long, global = true)]
    pub identify_antipodes: bool,
    /// Mesh export format: obj, stl (binary) or stl-ascii.
    #[arg(long, global = true, default_value = "obj")]
    pub format: MeshFormat,
    /// TOML file with oracle, search and resolution settings.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reference primitives through the oracle.
    Validate,
    /// ECS, convexity and height range across beta for the eta phase.
    SweepBeta {
        #[arg(long, value_delimiter = ',')]
        betas: Option<Vec<f64>>,
    },
    /// Full verification battery for a Sloan body.
    Verify {
        #[arg(default_value = "primary")]
        geometry: Geometry,
    },
    /// Differential-evolution search followed by verification.
    Optimize {
        /// Fourier orders to search over (overrides the config file).
        #[arg(long, value_delimiter = ',')]
        orders: Option<Vec<u32>>,
    },
    /// Bottom-weighting sweep.
    Ballast {
        #[arg(default_values = ["gomboc", "sphere", "ellipsoid", "capsule", "cylinder", "cube"])]
        geometries: Vec<Geometry>,
    },
    /// Self-righting energy, steepness and basin of attraction.
    Dynamics {
        #[arg(default_values = ["gomboc", "ellipsoid", "capsule", "cylinder", "cube"])]
        geometries: Vec<Geometry>,
    },
    /// Height landscape with basin labels as CSV.
    Landscape {
        #[arg(default_value = "primary")]
        geometry: Geometry,
    },
    /// Write a mesh file.
    Export {
        geometry: Geometry,
        /// Destination; defaults to `<out>/<name>.<ext>`.
        #[arg(long)]
        path: Option<PathBuf>,
    },
    /// Tilt resolution from a length tolerance over a baseline.
    Imu {
        #[arg(long, default_value_t = 0.01)]
        tolerance_mm: f64,
        #[arg(long, default_value_t = 100.0)]
        scale_mm: f64,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
struct ConfigFile {
    resolution: Option<String>,
    #[serde(flatten)]
    campaign: Campaign,
}

/// Settings after merging defaults, the config file and flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub oracle: EcsConfig,
    pub resolution: Resolution,
    pub out: PathBuf,
    pub format: MeshFormat,
    pub campaign: Campaign,
}

impl RunConfig {
    pub fn resolve(global: &GlobalArgs) -> Result<Self> {
        let file = match &global.config {
            Some(path) => {
                let text = fs::read_to_string(path)?;
                toml::from_str::<ConfigFile>(&text)
                    .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?
            }
            None => ConfigFile::default(),
        };
        let mut campaign = file.campaign;
        let mut oracle = campaign.oracle.clone();
        if let Some(n) = global.n_dirs {
            oracle.n_dirs = n;
        }
        if let Some(k) = global.k {
            oracle.k = k;
        }
        if let Some(t) = global.merge_tau {
            oracle.merge_tau = t;
        }
        if let Some(s) = global.seed {
            oracle.seed = s;
            campaign.de.seed = s;
        }
        oracle.identify_antipodes |= global.identify_antipodes;
        oracle.validate()?;
        campaign.oracle = oracle.clone();
        let resolution = match (global.resolution, file.resolution) {
            (Some(r), _) => r,
            (None, Some(s)) => s.parse()?,
            (None, None) => Resolution::default(),
        };
        Ok(Self {
            oracle,
            resolution,
            out: global.out.clone(),
            format: global.format,
            campaign,
        })
    }
}

/// One named expectation and whether it held.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

fn check(label: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        label: label.into(),
        pass,
        detail: detail.into(),
    }
}

fn report_checks(checks: &[Check]) -> bool {
    for c in checks.iter().filter(|c| !c.pass) {
        eprintln!("mismatch: {}: {}", c.label, c.detail);
    }
    checks.iter().all(|c| c.pass)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_writer(fs::File::create(path)?))
}

/// Parses arguments and runs the command. `Ok(false)` means the command
/// completed but its acceptance predicate failed.
pub fn run(cli: Cli) -> Result<bool> {
    let cfg = RunConfig::resolve(&cli.global)?;
    fs::create_dir_all(&cfg.out)?;
    match cli.command {
        Command::Validate => cmd_validate(&cfg),
        Command::SweepBeta { betas } => cmd_sweep_beta(&cfg, betas.as_deref().unwrap_or(&TABLE_BETAS)),
        Command::Verify { geometry } => cmd_verify(&cfg, &geometry),
        Command::Optimize { orders } => cmd_optimize(&cfg, orders),
        Command::Ballast { geometries } => cmd_ballast(&cfg, &geometries),
        Command::Dynamics { geometries } => cmd_dynamics(&cfg, &geometries),
        Command::Landscape { geometry } => cmd_landscape(&cfg, &geometry),
        Command::Export { geometry, path } => cmd_export(&cfg, &geometry, path),
        Command::Imu { tolerance_mm, scale_mm } => {
            let deg = imu_precision(tolerance_mm, scale_mm)?;
            println!("{deg:.5} deg ({:.1} arcsec)", deg * 3600.0);
            Ok(true)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct ValidateRow {
    geometry: String,
    ecs: usize,
    ecs_antipodal: usize,
    raw_basins: usize,
    boa: f64,
    h_range: f64,
    degenerate: bool,
}

/// Expected primitive counts. Symmetric bodies are accepted with or
/// without the pairing of opposite basins.
pub fn validate_checks(rows: &[(PrimitiveKind, EcsReport, EcsReport)]) -> Vec<Check> {
    let mut out = Vec::new();
    for (kind, plain, anti) in rows {
        let (e, a) = (plain.ecs, anti.ecs);
        let detail = format!("ecs {e}, antipodal {a}, h_range {:.4}", plain.h_range);
        match kind {
            PrimitiveKind::Capsule => out.push(check("capsule ECS = 1", e == 1, detail)),
            PrimitiveKind::Hemisphere => out.push(check("hemisphere ECS = 2", e == 2, detail)),
            PrimitiveKind::Sphere => out.push(check(
                "sphere degenerate, h_range < 0.005",
                plain.degenerate && plain.h_range < 0.005,
                detail,
            )),
            PrimitiveKind::Cube => out.push(check(
                "cube ECS in {3, 6}, antipodal 3",
                matches!(e, 3 | 6) && a == 3,
                detail,
            )),
            PrimitiveKind::Cylinder => out.push(check(
                "cylinder ECS in {2, 3}, antipodal 2",
                matches!(e, 2 | 3) && a == 2,
                detail,
            )),
            PrimitiveKind::Ellipsoid => {}
        }
    }
    out
}

fn cmd_validate(cfg: &RunConfig) -> Result<bool> {
    let anti_cfg = EcsConfig {
        identify_antipodes: true,
        ..cfg.oracle.clone()
    };
    let mut rows = Vec::new();
    for kind in PrimitiveKind::ALL {
        let mesh = primitive(&PrimitiveSpec::new(kind), cfg.resolution.n_theta)?;
        let plain = EcsReport::from_landscape(&build_landscape(&mesh, &cfg.oracle)?, &cfg.oracle);
        let anti = EcsReport::from_landscape(&build_landscape(&mesh, &anti_cfg)?, &anti_cfg);
        rows.push((kind, plain, anti));
    }
    let table: Vec<ValidateRow> = rows
        .iter()
        .map(|(k, p, a)| ValidateRow {
            geometry: k.name().into(),
            ecs: p.ecs,
            ecs_antipodal: a.ecs,
            raw_basins: p.raw_basins,
            boa: p.boa,
            h_range: p.h_range,
            degenerate: p.degenerate,
        })
        .collect();
    let mut w = csv_writer(&cfg.out.join("validate.csv"))?;
    for r in &table {
        w.serialize(r)?;
        println!(
            "{:<11} ecs {:>3}  antipodal {:>3}  raw {:>4}  boa {:.3}  h_range {:.4}{}",
            r.geometry,
            r.ecs,
            r.ecs_antipodal,
            r.raw_basins,
            r.boa,
            r.h_range,
            if r.degenerate { "  degenerate" } else { "" }
        );
    }
    w.flush()?;
    let checks = validate_checks(&rows);
    write_json(&cfg.out.join("validate.json"), &serde_json::json!({ "rows": table, "checks": checks }))?;
    Ok(report_checks(&checks))
}

/// Beta values and height ranges of the published sweep.
pub const TABLE_BETAS: [f64; 7] = [0.001, 0.005, 0.01, 0.02, 0.05, 0.10, 0.15];
pub const TABLE_H_RANGE: [f64; 7] = [0.002, 0.010, 0.020, 0.040, 0.097, 0.174, 0.237];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    pub ecs: usize,
    pub convexity: f64,
    pub h_range: f64,
}

pub fn sweep_row(beta: f64, cfg: &EcsConfig, resolution: Resolution) -> Result<SweepRow> {
    let mesh = SloanParams::eta(beta)?.mesh(resolution.n_theta, resolution.n_phi)?;
    let report = EcsReport::from_landscape(&build_landscape(&mesh, cfg)?, cfg);
    Ok(SweepRow {
        beta,
        ecs: report.ecs,
        convexity: convexity_ratio(&mesh)?,
        h_range: report.h_range,
    })
}

pub fn sweep_checks(rows: &[SweepRow]) -> Vec<Check> {
    let mut out = Vec::new();
    if let Some(min) = rows.iter().map(|r| r.ecs).min() {
        let at: Vec<f64> = rows.iter().filter(|r| r.ecs == min).map(|r| r.beta).collect();
        let near = at.iter().all(|b| (b - 0.05).abs() <= 0.01);
        out.push(check(
            "minimum ECS = 2 near beta = 0.05",
            min == 2 && near,
            format!("minimum {min} at beta {at:?}"),
        ));
    }
    for r in rows {
        if r.beta <= 0.05 {
            out.push(check(
                format!("beta {} convex", r.beta),
                r.convexity > 0.999,
                format!("ratio {:.5}", r.convexity),
            ));
        } else if r.beta >= 0.10 {
            out.push(check(
                format!("beta {} non-convex", r.beta),
                r.convexity < 0.999,
                format!("ratio {:.5}", r.convexity),
            ));
        }
        if let Some(i) = TABLE_BETAS.iter().position(|&b| (b - r.beta).abs() < 1e-12) {
            let expect = TABLE_H_RANGE[i];
            out.push(check(
                format!("beta {} h_range {expect} +/- 10%", r.beta),
                (r.h_range - expect).abs() <= 0.1 * expect,
                format!("h_range {:.4}", r.h_range),
            ));
        }
    }
    out
}

fn cmd_sweep_beta(cfg: &RunConfig, betas: &[f64]) -> Result<bool> {
    let rows = betas
        .iter()
        .map(|&b| sweep_row(b, &cfg.oracle, cfg.resolution))
        .collect::<Result<Vec<_>>>()?;
    let mut w = csv_writer(&cfg.out.join("sweep_beta.csv"))?;
    for r in &rows {
        w.serialize(r)?;
        println!(
            "beta {:<7} ecs {:>3}  convex {:<3} ({:.5})  h_range {:.4}",
            r.beta,
            r.ecs,
            if r.convexity > 0.999 { "yes" } else { "no" },
            r.convexity,
            r.h_range
        );
    }
    w.flush()?;
    let checks = sweep_checks(&rows);
    write_json(&cfg.out.join("sweep_beta.json"), &serde_json::json!({ "rows": rows, "checks": checks }))?;
    Ok(report_checks(&checks))
}

fn cmd_verify(cfg: &RunConfig, geometry: &Geometry) -> Result<bool> {
    let v = verify_instance(geometry.sloan()?, &cfg.oracle)?;
    let mut w = csv_writer(&cfg.out.join("verify.csv"))?;
    for c in &v.cells {
        w.serialize(c)?;
        println!(
            "{}x{} tau {:<5} ecs {}  boa {:.3}  h_range {:.4}",
            c.n_theta, c.n_phi, c.tau, c.ecs, c.boa, c.h_range
        );
    }
    w.flush()?;
    println!("convexity {:.5}  com violation {:.3e}", v.convexity, v.com_violation);
    println!("{}: {}", geometry.name(), if v.pass { "pass" } else { "fail" });
    write_json(&cfg.out.join("verify.json"), &v)?;
    Ok(v.pass)
}

fn cmd_optimize(cfg: &RunConfig, orders: Option<Vec<u32>>) -> Result<bool> {
    let mut campaign = cfg.campaign.clone();
    if let Some(orders) = orders {
        campaign.space = SearchSpace {
            beta_bounds: campaign.space.beta_bounds,
            ..SearchSpace::with_orders(&orders)
        };
    }
    let result = optimize(&campaign)?;
    let file = fs::File::create(cfg.out.join("trace.csv"))?;
    search::write_trace_csv(file, &campaign.space, &result.trace)?;
    println!(
        "best beta {:.6}  phase {:?}\nobjective {:.6e}  gap {:.6e}  convexity {:.5}  com {:.3e}  ecs {}  generations {}",
        result.params.beta,
        result.params.phase,
        result.objective,
        result.gap,
        result.convexity,
        result.com_violation,
        result.ecs,
        result.trace.len() - 1
    );
    println!("verification: {}", if result.verification.pass { "pass" } else { "fail" });
    write_json(&cfg.out.join("optimize.json"), &result)?;
    Ok(result.verification.pass)
}

pub fn ballast_checks(reports: &[(String, BallastReport)]) -> Vec<Check> {
    let mut out = Vec::new();
    for (name, r) in reports {
        let detail = format!("min_w {:?}, ecs {:?}", r.min_w_for_ecs1, r.entries.iter().map(|e| e.ecs).collect::<Vec<_>>());
        match name.as_str() {
            "sphere" => out.push(check(
                "sphere min_w = 0.05",
                r.min_w_for_ecs1.is_some_and(|w| (w - 0.05).abs() < 1e-12),
                detail,
            )),
            "cylinder" | "cube" => {
                out.push(check(format!("{name} never reaches ECS 1"), r.min_w_for_ecs1.is_none(), detail))
            }
            "gomboc" | "primary" => out.push(check(
                format!("{name} ECS 1 and BOA 1 at every w"),
                r.entries.iter().all(|e| e.ecs == 1 && e.boa == 1.0),
                detail,
            )),
            _ => {}
        }
    }
    out
}

fn cmd_ballast(cfg: &RunConfig, geometries: &[Geometry]) -> Result<bool> {
    let bc = BallastConfig {
        ecs_config: cfg.oracle.clone(),
        ..Default::default()
    };
    let mut reports = Vec::new();
    for g in geometries {
        let r = ballast_sweep(&g.mesh(cfg.resolution)?, &bc)?;
        println!(
            "{:<11} ecs(w) {:?}  min_w {}",
            g.name(),
            r.entries.iter().map(|e| e.ecs).collect::<Vec<_>>(),
            r.min_w_for_ecs1.map_or("none".into(), |w| format!("{w:.2}"))
        );
        reports.push((g.name().to_string(), r));
    }
    ballast::write_csv(fs::File::create(cfg.out.join("ballast.csv"))?, &reports)?;
    fs::write(cfg.out.join("ballast.json"), ballast::summary_json(&reports) + "\n")?;
    Ok(report_checks(&ballast_checks(&reports)))
}

pub fn dynamics_checks(rows: &[(String, DynamicsReport)]) -> Vec<Check> {
    let get = |n: &str| rows.iter().find(|(name, _)| name == n).map(|(_, r)| r);
    let within = |x: f64, target: f64, rel: f64| (x - target).abs() <= rel * target;
    let mut out = Vec::new();
    let gomboc = get("gomboc").or_else(|| get("primary"));
    if let Some(g) = gomboc {
        out.push(check("Gomboc SRE 0.028 +/- 30%", within(g.sre, 0.028, 0.3), format!("{:.4}", g.sre)));
        out.push(check(
            "Gomboc steepness 0.023 +/- 30%",
            within(g.steepness, 0.023, 0.3),
            format!("{:.4}", g.steepness),
        ));
    }
    if let Some(c) = get("capsule") {
        out.push(check("capsule SRE 0.743 +/- 30%", within(c.sre, 0.743, 0.3), format!("{:.4}", c.sre)));
        out.push(check("capsule ECS 1", c.ecs == 1, format!("{}", c.ecs)));
        if let Some(g) = gomboc {
            let ratio = c.sre / g.sre;
            out.push(check("SRE ratio capsule/Gomboc in [18, 36]", (18.0..=36.0).contains(&ratio), format!("{ratio:.1}")));
        }
    }
    if let Some(c) = get("cylinder") {
        out.push(check("cylinder BOA 0.835 +/- 0.03", (c.boa - 0.835).abs() <= 0.03, format!("{:.3}", c.boa)));
    }
    if let Some(c) = get("cube") {
        out.push(check("cube BOA 0.624 +/- 0.05", (c.boa - 0.624).abs() <= 0.05, format!("{:.3}", c.boa)));
    }
    if let (Some(g), Some(e), Some(c)) = (gomboc, get("ellipsoid"), get("capsule")) {
        out.push(check("ellipsoid ECS 1", e.ecs == 1, format!("{}", e.ecs)));
        out.push(check(
            "SRE order Gomboc < ellipsoid < capsule",
            g.sre < e.sre && e.sre < c.sre,
            format!("{:.4} {:.4} {:.4}", g.sre, e.sre, c.sre),
        ));
    }
    out
}

#[derive(Debug, Serialize)]
struct DynamicsRow<'a> {
    geometry: &'a str,
    #[serde(flatten)]
    report: &'a DynamicsReport,
}

fn cmd_dynamics(cfg: &RunConfig, geometries: &[Geometry]) -> Result<bool> {
    let mut rows = Vec::new();
    for g in geometries {
        let landscape = build_landscape(&g.mesh(cfg.resolution)?, &cfg.oracle)?;
        let r = dynamics_from_landscape(&landscape, &cfg.oracle);
        println!(
            "{:<11} ecs {:>3}  sre {:.4}  h_range {:.4}  steepness {:.4}  boa {:.3}",
            g.name(),
            r.ecs,
            r.sre,
            r.h_range,
            r.steepness,
            r.boa
        );
        rows.push((g.name().to_string(), r));
    }
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(fs::File::create(cfg.out.join("dynamics.csv"))?);
    w.write_record(["geometry", "sre", "steepness", "boa", "ecs", "h_range", "degenerate"])?;
    for (name, r) in &rows {
        w.write_record([
            name.clone(),
            format!("{:.6}", r.sre),
            format!("{:.6}", r.steepness),
            format!("{:.6}", r.boa),
            r.ecs.to_string(),
            format!("{:.6}", r.h_range),
            r.degenerate.to_string(),
        ])?;
    }
    w.flush()?;
    let json: Vec<DynamicsRow> = rows
        .iter()
        .map(|(n, r)| DynamicsRow { geometry: n, report: r })
        .collect();
    write_json(&cfg.out.join("dynamics.json"), &json)?;
    Ok(report_checks(&dynamics_checks(&rows)))
}

fn cmd_landscape(cfg: &RunConfig, geometry: &Geometry) -> Result<bool> {
    let landscape = build_landscape(&geometry.mesh(cfg.resolution)?, &cfg.oracle)?;
    let drainage = landscape.drain();
    let basins = landscape.merge(&drainage, &cfg.oracle);
    let path = cfg.out.join("landscape.csv");
    landscape.write_csv(fs::File::create(&path)?, &basins)?;
    let report = EcsReport::from_landscape(&landscape, &cfg.oracle);
    write_json(&cfg.out.join("report.json"), &report)?;
    println!("{}: ecs {}  h_range {:.4}  -> {}", geometry.name(), report.ecs, report.h_range, path.display());
    Ok(true)
}

fn cmd_export(cfg: &RunConfig, geometry: &Geometry, path: Option<PathBuf>) -> Result<bool> {
    let mesh = geometry.mesh(cfg.resolution)?;
    let ext = match cfg.format {
        MeshFormat::Obj => "obj",
        MeshFormat::StlAscii | MeshFormat::StlBinary => "stl",
    };
    let stem: String = geometry
        .name()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' })
        .collect();
    let path = path.unwrap_or_else(|| cfg.out.join(format!("{stem}.{ext}")));
    export_mesh(&mesh, cfg.format, &path)?;
    println!("{} faces -> {}", mesh.faces().len(), path.display());
    Ok(true)
}

/// Names of the catalogued instances, for help output and tests.
pub fn instance_names() -> Vec<String> {
    catalog().into_iter().map(|i| i.name).collect()
}
