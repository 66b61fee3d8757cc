//! The Sloan radial surface family and its phase functions.
//!
//! Surfaces are `r^4 = 1 + 4 beta sin(theta) cos(phi - P(theta))` with the
//! phase `P` linear, the cubic `eta` phase, or `eta` plus a finite sine
//! series in `eta`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::equilibrium::Direction;
use crate::error::{Error, Result};
use crate::geometry::{mesh_from_radial, Point3, TriMesh};

/// Largest amplitude for which the family is documented.
pub const BETA_MAX: f64 = 0.17;

/// `(3π/2)(cos θ − cos³θ / 3)`, running from `π` at the north pole to `−π`
/// at the south pole.
pub fn eta(theta: f64) -> f64 {
    let c = theta.cos();
    1.5 * PI * (c - c * c * c / 3.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhaseSpec {
    Linear { c: f64 },
    Eta,
    /// `eta + sum a_k sin(k eta)` over `(k, a_k)` pairs.
    EtaFourier { coeffs: Vec<(u32, f64)> },
}

impl PhaseSpec {
    pub fn fourier(coeffs: impl IntoIterator<Item = (u32, f64)>) -> Self {
        PhaseSpec::EtaFourier {
            coeffs: coeffs.into_iter().collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PhaseSpec::Linear { c } if !c.is_finite() => {
                Err(Error::InvalidParameter(format!("linear phase coefficient {c}")))
            }
            PhaseSpec::EtaFourier { coeffs } => {
                for (i, &(k, a)) in coeffs.iter().enumerate() {
                    if k == 0 {
                        return Err(Error::InvalidParameter("Fourier order must be >= 1".into()));
                    }
                    if a.is_nan() || a.abs() > 1.0 {
                        return Err(Error::InvalidParameter(format!(
                            "Fourier coefficient a_{k} = {a} outside [-1, 1]"
                        )));
                    }
                    if coeffs[..i].iter().any(|&(j, _)| j == k) {
                        return Err(Error::InvalidParameter(format!("duplicate Fourier order {k}")));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            PhaseSpec::Linear { c } => c * theta,
            PhaseSpec::Eta => eta(theta),
            PhaseSpec::EtaFourier { coeffs } => {
                let e = eta(theta);
                e + coeffs
                    .iter()
                    .map(|&(k, a)| a * (k as f64 * e).sin())
                    .sum::<f64>()
            }
        }
    }
}

/// Free function form of [`PhaseSpec::eval`].
pub fn phase(spec: &PhaseSpec, theta: f64) -> f64 {
    spec.eval(theta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SloanParams {
    pub beta: f64,
    pub phase: PhaseSpec,
}

impl SloanParams {
    /// Checks `0 <= beta <= 0.17` and the phase invariants.
    ///
    /// `beta = 0` (the unit sphere) is accepted as a reference case.
    pub fn new(beta: f64, phase: PhaseSpec) -> Result<Self> {
        if !(0.0..=BETA_MAX).contains(&beta) {
            return Err(Error::InvalidParameter(format!(
                "beta = {beta} outside [0, {BETA_MAX}]"
            )));
        }
        phase.validate()?;
        Ok(Self { beta, phase })
    }

    pub fn eta(beta: f64) -> Result<Self> {
        Self::new(beta, PhaseSpec::Eta)
    }

    /// Eta phase plus a single `a sin(k eta)` term.
    pub fn single_term(beta: f64, order: u32, coefficient: f64) -> Result<Self> {
        Self::new(beta, PhaseSpec::fourier([(order, coefficient)]))
    }

    pub fn radius(&self, theta: f64, phi: f64) -> f64 {
        sloan_radius(self, theta, phi)
    }

    pub fn point(&self, theta: f64, phi: f64) -> Point3 {
        let r = self.radius(theta, phi);
        Point3::new(
            r * theta.sin() * phi.cos(),
            r * theta.sin() * phi.sin(),
            r * theta.cos(),
        )
    }

    pub fn mesh(&self, n_theta: usize, n_phi: usize) -> Result<TriMesh> {
        mesh_from_radial(|t, p| self.radius(t, p), n_theta, n_phi)
    }
}

pub fn sloan_radius(params: &SloanParams, theta: f64, phi: f64) -> f64 {
    let p = params.phase.eval(theta);
    (1.0 + 4.0 * params.beta * theta.sin() * (phi - p).cos()).powf(0.25)
}

const QUAD_START_PANELS: usize = 2048;
const QUAD_MAX_PANELS: usize = 1 << 22;
const QUAD_TOL: f64 = 1e-9;

fn simpson_com_integral(phase: impl Fn(f64) -> f64, panels: usize) -> (f64, f64) {
    let h = PI / panels as f64;
    let f = |t: f64| {
        let s = t.sin();
        let w = s * s * s;
        let p = phase(t);
        (w * p.cos(), w * p.sin())
    };
    let (mut re, mut im) = (0.0, 0.0);
    for i in 0..=panels {
        let w = if i == 0 || i == panels {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let (a, b) = f(i as f64 * h);
        re += w * a;
        im += w * b;
    }
    (re * h / 3.0, im * h / 3.0)
}

/// `|∫₀^π sin³θ e^{iP(θ)} dθ|`, the first-order centroid offset of the
/// surface up to a constant factor.
///
/// Composite Simpson, doubling the panel count until the complex value
/// moves by less than `1e-9`.
pub fn com_constraint_violation(spec: &PhaseSpec) -> Result<f64> {
    spec.validate()?;
    com_integral_modulus(|t| spec.eval(t))
}

fn com_integral_modulus(phase: impl Fn(f64) -> f64 + Copy) -> Result<f64> {
    let mut panels = QUAD_START_PANELS;
    let mut prev = simpson_com_integral(phase, panels);
    loop {
        panels *= 2;
        let next = simpson_com_integral(phase, panels);
        let change = (next.0 - prev.0).hypot(next.1 - prev.1);
        if change < QUAD_TOL {
            return Ok(next.0.hypot(next.1));
        }
        if panels >= QUAD_MAX_PANELS {
            return Err(Error::Quadrature(change));
        }
        prev = next;
    }
}

const SEED_ROWS: usize = 16;
const SEED_COLS: usize = 32;
const DESCENT_MIN_STEP: f64 = 1e-10;

/// Compass search for a local minimum of `v(θ, φ)·d` from `(theta, phi)`.
fn support_descent(params: &SloanParams, d: &Point3, theta: f64, phi: f64, step: f64) -> Option<f64> {
    let f = |t: f64, p: f64| params.point(t.clamp(0.0, PI), p).dot(d);
    let (mut t, mut p) = (theta, phi);
    let mut best = f(t, p);
    let mut step = step;
    let mut iters = 0usize;
    while step >= DESCENT_MIN_STEP {
        iters += 1;
        if iters > 100_000 {
            return None;
        }
        let mut moved = false;
        for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let (nt, np) = ((t + dt).clamp(0.0, PI), p + dp);
            let v = f(nt, np);
            if v < best {
                best = v;
                t = nt;
                p = np;
                moved = true;
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    best.is_finite().then_some(best)
}

/// Centre-of-mass height from the continuous surface rather than a mesh.
///
/// The support value `min v·d` is found by a coarse grid scan followed by
/// compass-search descents from the `n_starts` best grid points.
pub fn analytic_height(params: &SloanParams, centroid: &Point3, d: &Direction, n_starts: usize) -> f64 {
    let d = d.into_inner();
    let mut grid = Vec::with_capacity(SEED_ROWS * SEED_COLS + 2);
    for i in 0..=SEED_ROWS {
        let t = PI * i as f64 / SEED_ROWS as f64;
        let cols = if i == 0 || i == SEED_ROWS { 1 } else { SEED_COLS };
        for j in 0..cols {
            let p = 2.0 * PI * j as f64 / SEED_COLS as f64;
            grid.push((params.point(t, p).dot(&d), t, p));
        }
    }
    grid.sort_by(|a, b| a.0.total_cmp(&b.0));
    let step = PI / SEED_ROWS as f64;
    let found = grid
        .iter()
        .take(n_starts.max(1))
        .filter_map(|&(_, t, p)| support_descent(params, &d, t, p, step))
        .fold(grid[0].0, f64::min);
    centroid.dot(&d) - found
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifiedInstance {
    pub name: String,
    pub params: SloanParams,
    pub expected_ecs: usize,
    pub expected_h_range: f64,
}

#[derive(Deserialize)]
struct CatalogFile {
    instance: Vec<CatalogRecord>,
}

#[derive(Deserialize)]
struct CatalogRecord {
    name: String,
    beta: f64,
    order: u32,
    coefficient: f64,
    expected_ecs: usize,
    expected_h_range: f64,
}

const CATALOG: &str = include_str!("../data/instances.toml");

/// Parses an instance catalog in the shipped TOML layout.
pub fn parse_catalog(text: &str) -> Result<Vec<VerifiedInstance>> {
    let file: CatalogFile =
        toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("catalog: {e}")))?;
    file.instance
        .into_iter()
        .map(|r| {
            if r.expected_ecs == 0 {
                return Err(Error::InvalidParameter(format!("{}: expected_ecs must be >= 1", r.name)));
            }
            Ok(VerifiedInstance {
                params: SloanParams::single_term(r.beta, r.order, r.coefficient)?,
                name: r.name,
                expected_ecs: r.expected_ecs,
                expected_h_range: r.expected_h_range,
            })
        })
        .collect()
}

/// The shipped catalog of published instances.
pub fn catalog() -> Vec<VerifiedInstance> {
    parse_catalog(CATALOG).expect("bundled catalog is valid")
}

pub fn instance(name: &str) -> Result<VerifiedInstance> {
    catalog()
        .into_iter()
        .find(|i| i.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::Unknown(format!("instance '{name}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_endpoints() {
        assert!(eta(PI / 2.0).abs() < 1e-15);
        assert!((eta(0.0) - PI).abs() < 1e-15);
        assert!((eta(PI) + PI).abs() < 1e-14);
    }

    #[test]
    fn phase_variants() {
        let empty = PhaseSpec::fourier([]);
        for t in [0.0, 0.3, 1.2, 2.9] {
            assert_eq!(empty.eval(t), eta(t));
        }
        let primary = PhaseSpec::fourier([(1, 0.2344)]);
        assert!(primary.eval(PI / 2.0).abs() < 1e-15);
        assert!((phase(&PhaseSpec::Linear { c: 5.0 }, PI) - 5.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn radius_special_values() {
        let sphere = SloanParams::eta(0.0).unwrap();
        assert_eq!(sphere.radius(1.0, 2.0), 1.0);
        let p = SloanParams::eta(0.05).unwrap();
        let r = p.radius(PI / 2.0, p.phase.eval(PI / 2.0));
        assert!((r - 1.2f64.powf(0.25)).abs() < 1e-15);
    }

    #[test]
    fn radius_spread_on_grid() {
        // Radicand extremes 1 ± 4 beta occur on the equator.
        let p = SloanParams::eta(0.05).unwrap();
        let (mut lo, mut hi) = (f64::MAX, f64::MIN);
        for i in 0..=100 {
            for j in 0..200 {
                let r = p.radius(PI * i as f64 / 100.0, 2.0 * PI * j as f64 / 200.0);
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        let expected = 1.2f64.powf(0.25) - 0.8f64.powf(0.25);
        assert!((hi - lo - expected).abs() < 2e-4, "{}", hi - lo);
    }

    #[test]
    fn radicand_is_antisymmetric_under_half_turn() {
        for phase in [PhaseSpec::Eta, PhaseSpec::Linear { c: 5.0 }, PhaseSpec::fourier([(2, 0.3)])] {
            let p = SloanParams::new(0.1, phase).unwrap();
            for &(t, f) in &[(0.4, 1.0), (1.5, 4.0), (2.8, 0.2)] {
                let a = p.radius(t, f).powi(4) - 1.0;
                let b = p.radius(t, f + PI).powi(4) - 1.0;
                assert!((a + b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SloanParams::eta(0.2).is_err());
        assert!(SloanParams::eta(-0.01).is_err());
        assert!(SloanParams::new(0.05, PhaseSpec::fourier([(0, 0.1)])).is_err());
        assert!(SloanParams::new(0.05, PhaseSpec::fourier([(1, 1.5)])).is_err());
        assert!(SloanParams::new(0.05, PhaseSpec::fourier([(2, 0.1), (2, 0.2)])).is_err());
        assert!(SloanParams::new(0.05, PhaseSpec::Linear { c: f64::NAN }).is_err());
    }

    #[test]
    fn com_violation_linear_phase_vanishes() {
        let v = com_constraint_violation(&PhaseSpec::Linear { c: 5.0 }).unwrap();
        assert!(v < 1e-10, "{v:e}");
    }

    #[test]
    fn com_violation_eta_phase_vanishes() {
        assert!(com_constraint_violation(&PhaseSpec::Eta).unwrap() < 1e-6);
    }

    /// Substituting u = eta(θ) turns the integral into (2/3π)∫_{-π}^{π}
    /// e^{i(u + a sin(ku))} du, which is (4/3)|J_1(a)| for k = 1 and zero for
    /// k >= 2. J_1 is summed from its power series here.
    fn bessel_j1(x: f64) -> f64 {
        let mut term = x / 2.0;
        let mut sum = term;
        for m in 1..30 {
            term *= -(x * x / 4.0) / (m as f64 * (m as f64 + 1.0));
            sum += term;
        }
        sum
    }

    #[test]
    fn com_violation_matches_bessel_closed_form() {
        for &a in &[0.05, 0.2344, -0.4] {
            let v = com_constraint_violation(&PhaseSpec::fourier([(1, a)])).unwrap();
            assert!((v - 4.0 / 3.0 * bessel_j1(a).abs()).abs() < 1e-9, "{a}: {v}");
        }
        for &(k, a) in &[(2, 0.1376), (3, -0.0552), (4, 0.3)] {
            let v = com_constraint_violation(&PhaseSpec::fourier([(k, a)])).unwrap();
            assert!(v < 1e-9, "k={k}: {v:e}");
        }
    }

    #[test]
    fn com_violation_invariant_under_phase_shift() {
        let spec = PhaseSpec::fourier([(1, 0.2344)]);
        let base = com_constraint_violation(&spec).unwrap();
        for &delta in &[0.1, 1.0, PI] {
            let shifted = com_integral_modulus(|t| spec.eval(t) + delta).unwrap();
            assert!((base - shifted).abs() < 1e-12, "{delta}: {base} vs {shifted}");
        }
    }

    #[test]
    fn analytic_height_of_sphere() {
        let p = SloanParams::eta(0.0).unwrap();
        for v in [Point3::new(1.0, 2.0, 3.0), Point3::new(0.0, 0.0, -1.0), Point3::new(-0.3, 0.1, 0.0)] {
            let d = Direction::new_normalize(v);
            let h = analytic_height(&p, &Point3::zeros(), &d, 12);
            assert!((h - 1.0).abs() < 1e-9, "{h}");
        }
    }

    #[test]
    fn catalog_loads() {
        let cat = catalog();
        assert_eq!(cat.len(), 3);
        let p = instance("primary").unwrap();
        assert_eq!(p.params.beta, 0.0231);
        assert_eq!(p.params.phase, PhaseSpec::fourier([(1, 0.2344)]));
        assert!(instance("fourth").is_err());
    }
}
