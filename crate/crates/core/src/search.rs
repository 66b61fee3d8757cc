//! Differential-evolution search over Sloan parameters and the verification
//! battery applied to candidates.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{hull_support_values, EcsConfig, EcsReport, Landscape, SphereGraph};
use crate::error::{Error, Result};
use crate::geometry::{convex_hull, mass_properties, TriMesh};
use crate::sloan::{com_constraint_violation, PhaseSpec, SloanParams};

/// Objective value returned when a candidate cannot be meshed.
pub const SENTINEL: f64 = 1e6;

/// Convexity ratio below which the convexity penalty applies.
pub const CONVEXITY_TARGET: f64 = 0.999;

/// Upper bound on the COM violation accepted by [`verify_instance`].
pub const COM_TOLERANCE: f64 = 1e-6;

/// Resolutions and thresholds of the verification battery.
pub const BATTERY_RESOLUTIONS: [(usize, usize); 3] = [(80, 160), (100, 200), (200, 400)];
pub const BATTERY_TAUS: [f64; 4] = [0.005, 0.01, 0.05, 0.10];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSpace {
    pub beta_bounds: (f64, f64),
    pub fourier_orders: Vec<u32>,
    /// One interval per entry of `fourier_orders`.
    pub coeff_bounds: Vec<(f64, f64)>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self::with_orders(&[1])
    }
}

impl SearchSpace {
    pub fn with_orders(orders: &[u32]) -> Self {
        Self {
            beta_bounds: (0.005, 0.08),
            fourier_orders: orders.to_vec(),
            coeff_bounds: vec![(-0.5, 0.5); orders.len()],
        }
    }

    pub fn dim(&self) -> usize {
        1 + self.fourier_orders.len()
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        std::iter::once(self.beta_bounds).chain(self.coeff_bounds.iter().copied()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.coeff_bounds.len() != self.fourier_orders.len() {
            return Err(Error::InvalidParameter(format!(
                "{} coefficient bounds for {} orders",
                self.coeff_bounds.len(),
                self.fourier_orders.len()
            )));
        }
        validate_bounds(&self.bounds())
    }

    /// Maps a parameter vector `[beta, a_1, ...]` to surface parameters.
    pub fn params(&self, x: &[f64]) -> Result<SloanParams> {
        if x.len() != self.dim() {
            return Err(Error::InvalidParameter(format!("expected {} parameters, got {}", self.dim(), x.len())));
        }
        let phase = if self.fourier_orders.is_empty() {
            PhaseSpec::Eta
        } else {
            PhaseSpec::fourier(self.fourier_orders.iter().copied().zip(x[1..].iter().copied()))
        };
        SloanParams::new(x[0], phase)
    }
}

fn validate_bounds(bounds: &[(f64, f64)]) -> Result<()> {
    for &(lo, hi) in bounds {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter(format!("bad interval [{lo}, {hi}]")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeConfig {
    /// Population size; `None` means 15 per dimension.
    pub population: Option<usize>,
    pub mutation: f64,
    pub crossover: f64,
    pub max_generations: usize,
    pub seed: u64,
    /// Stop once the population's objective spread falls below this.
    pub tolerance: f64,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            population: None,
            mutation: 0.7,
            crossover: 0.9,
            max_generations: 200,
            seed: 0,
            tolerance: 1e-8,
        }
    }
}

impl DeConfig {
    pub fn population_for(&self, dim: usize) -> usize {
        self.population.unwrap_or(15 * dim)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.population_for(dim) < 4 {
            return Err(Error::InvalidParameter("population must be at least 4".into()));
        }
        if !(self.mutation > 0.0 && self.mutation < 2.0) {
            return Err(Error::InvalidParameter(format!("mutation factor {} outside (0, 2)", self.mutation)));
        }
        if !(0.0..=1.0).contains(&self.crossover) {
            return Err(Error::InvalidParameter(format!("crossover rate {} outside [0, 1]", self.crossover)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Penalties {
    pub convex: f64,
    pub com: f64,
}

impl Default for Penalties {
    fn default() -> Self {
        Self { convex: 10.0, com: 10.0 }
    }
}

/// Height gap between the two lowest merged sinks, zero for a single basin.
pub fn basin_gap(report: &EcsReport) -> f64 {
    match report.sinks.as_slice() {
        [first, second, ..] => second.height - first.height,
        _ => 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveParts {
    pub ecs: usize,
    pub gap: f64,
    pub convexity: f64,
    pub com_violation: f64,
}

impl ObjectiveParts {
    pub fn value(&self, penalties: &Penalties) -> f64 {
        self.gap
            + penalties.convex * (CONVEXITY_TARGET - self.convexity).max(0.0)
            + penalties.com * self.com_violation
    }
}

/// Landscape and convexity ratio from a single hull construction.
fn landscape_and_convexity(mesh: &TriMesh, config: &EcsConfig) -> Result<(Landscape, f64)> {
    let mp = mass_properties(mesh)?;
    let hull = convex_hull(mesh.vertices())?;
    let graph = SphereGraph::shared(config);
    let support = hull_support_values(&hull.support_index(mesh.vertices()), &graph);
    let landscape = Landscape::from_support(graph, &support, &mp.centroid);
    Ok((landscape, (mp.volume / hull.volume).min(1.0)))
}

/// Objective components at the given mesh resolution.
pub fn objective_parts(params: &SloanParams, config: &EcsConfig, resolution: (usize, usize)) -> Result<ObjectiveParts> {
    config.validate()?;
    let com_violation = com_constraint_violation(&params.phase)?;
    let mesh = params.mesh(resolution.0, resolution.1)?;
    let (landscape, convexity) = landscape_and_convexity(&mesh, config)?;
    let report = EcsReport::from_landscape(&landscape, config);
    Ok(ObjectiveParts {
        ecs: report.ecs,
        gap: basin_gap(&report),
        convexity,
        com_violation,
    })
}

/// Penalised basin gap at 100×200; [`SENTINEL`] when the candidate fails.
pub fn objective(params: &SloanParams, config: &EcsConfig, penalties: &Penalties) -> f64 {
    objective_at(params, config, penalties, (100, 200))
}

pub fn objective_at(params: &SloanParams, config: &EcsConfig, penalties: &Penalties, resolution: (usize, usize)) -> f64 {
    match objective_parts(params, config, resolution) {
        Ok(parts) => parts.value(penalties),
        Err(_) => SENTINEL,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub generation: usize,
    pub best: f64,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeOutcome {
    pub best: Vec<f64>,
    pub value: f64,
    /// Best member after initialisation (generation 0) and each generation.
    pub trace: Vec<TracePoint>,
    pub converged: bool,
}

fn reflect(v: f64, lo: f64, hi: f64) -> f64 {
    let mut v = v;
    for _ in 0..8 {
        if v < lo {
            v = 2.0 * lo - v;
        } else if v > hi {
            v = 2.0 * hi - v;
        } else {
            return v;
        }
    }
    v.clamp(lo, hi)
}

fn best_of(values: &[f64]) -> usize {
    (0..values.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
        .expect("population is non-empty")
}

/// Minimises `f` over a box with DE/rand/1/bin.
///
/// All random draws happen on one seeded stream before each generation's
/// evaluations, which run in parallel; selection is sequential, so the
/// result depends only on the seed.
pub fn differential_evolution<F>(f: F, bounds: &[(f64, f64)], config: &DeConfig) -> Result<DeOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    validate_bounds(bounds)?;
    let dim = bounds.len();
    config.validate(dim)?;
    let np = config.population_for(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut pop: Vec<Vec<f64>> = (0..np)
        .map(|_| bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect())
        .collect();
    let mut values: Vec<f64> = pop.par_iter().map(|x| f(x)).collect();

    let record = |generation: usize, pop: &[Vec<f64>], values: &[f64]| {
        let b = best_of(values);
        TracePoint {
            generation,
            best: values[b],
            params: pop[b].clone(),
        }
    };
    let mut trace = vec![record(0, &pop, &values)];
    let spread = |values: &[f64]| {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let mut converged = spread(&values) < config.tolerance || trace[0].best <= 0.0;

    for generation in 1..=config.max_generations {
        if converged {
            break;
        }
        let trials: Vec<Vec<f64>> = (0..np)
            .map(|i| {
                let mut pick = || loop {
                    let r = rng.gen_range(0..np);
                    if r != i {
                        break r;
                    }
                };
                let r1 = pick();
                let r2 = loop {
                    let r = pick();
                    if r != r1 {
                        break r;
                    }
                };
                let r3 = loop {
                    let r = pick();
                    if r != r1 && r != r2 {
                        break r;
                    }
                };
                let forced = rng.gen_range(0..dim);
                (0..dim)
                    .map(|j| {
                        let cross: f64 = rng.gen();
                        if j == forced || cross < config.crossover {
                            let v = pop[r1][j] + config.mutation * (pop[r2][j] - pop[r3][j]);
                            reflect(v, bounds[j].0, bounds[j].1)
                        } else {
                            pop[i][j]
                        }
                    })
                    .collect()
            })
            .collect();
        let trial_values: Vec<f64> = trials.par_iter().map(|x| f(x)).collect();
        for (i, (t, v)) in trials.into_iter().zip(trial_values).enumerate() {
            if v <= values[i] {
                pop[i] = t;
                values[i] = v;
            }
        }
        trace.push(record(generation, &pop, &values));
        converged = spread(&values) < config.tolerance || trace.last().unwrap().best <= 0.0;
    }

    let last = trace.last().expect("trace has generation 0").clone();
    Ok(DeOutcome {
        best: last.params,
        value: last.best,
        trace,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryCell {
    pub n_theta: usize,
    pub n_phi: usize,
    pub tau: f64,
    pub ecs: usize,
    pub boa: f64,
    pub h_range: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub cells: Vec<BatteryCell>,
    /// Lowest convexity ratio over the battery resolutions.
    pub convexity: f64,
    pub com_violation: f64,
    pub pass: bool,
}

impl Verification {
    pub fn all_single_basin(&self) -> bool {
        self.cells.iter().all(|c| c.ecs == 1)
    }
}

/// ECS at every battery resolution and threshold, plus the convexity and
/// COM checks.
pub fn verify_instance(params: &SloanParams, config: &EcsConfig) -> Result<Verification> {
    config.validate()?;
    let com_violation = com_constraint_violation(&params.phase)?;
    let mut cells = Vec::new();
    let mut convexity = f64::INFINITY;
    for (n_theta, n_phi) in BATTERY_RESOLUTIONS {
        let mesh = params.mesh(n_theta, n_phi)?;
        let (landscape, ratio) = landscape_and_convexity(&mesh, config)?;
        convexity = convexity.min(ratio);
        for tau in BATTERY_TAUS {
            let report = EcsReport::from_landscape(&landscape, &config.with_tau(tau));
            cells.push(BatteryCell {
                n_theta,
                n_phi,
                tau,
                ecs: report.ecs,
                boa: report.boa,
                h_range: report.h_range,
            });
        }
    }
    let pass =
        cells.iter().all(|c| c.ecs == 1) && convexity > CONVEXITY_TARGET && com_violation < COM_TOLERANCE;
    Ok(Verification {
        cells,
        convexity,
        com_violation,
        pass,
    })
}

/// Search campaign as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct Campaign {
    pub space: SearchSpace,
    pub de: DeConfig,
    pub oracle: EcsConfig,
    pub penalties: Penalties,
}

impl Campaign {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("campaign config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.space.validate()?;
        self.de.validate(self.space.dim())?;
        self.oracle.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub params: SloanParams,
    pub objective: f64,
    pub gap: f64,
    pub convexity: f64,
    pub com_violation: f64,
    pub ecs: usize,
    pub trace: Vec<TracePoint>,
    pub converged: bool,
    pub verification: Verification,
}

/// Runs the search and verifies the best member.
pub fn optimize(campaign: &Campaign) -> Result<OptimizeResult> {
    campaign.validate()?;
    let space = &campaign.space;
    let f = |x: &[f64]| match space.params(x) {
        Ok(p) => objective(&p, &campaign.oracle, &campaign.penalties),
        Err(_) => SENTINEL,
    };
    let outcome = differential_evolution(f, &space.bounds(), &campaign.de)?;
    let params = space.params(&outcome.best)?;
    let parts = objective_parts(&params, &campaign.oracle, (100, 200))?;
    let verification = verify_instance(&params, &campaign.oracle)?;
    Ok(OptimizeResult {
        objective: parts.value(&campaign.penalties),
        gap: parts.gap,
        convexity: parts.convexity,
        com_violation: parts.com_violation,
        ecs: parts.ecs,
        params,
        trace: outcome.trace,
        converged: outcome.converged,
        verification,
    })
}

/// `generation, best_objective, beta, a_<k>...` rows.
pub fn write_trace_csv<W: Write>(out: W, space: &SearchSpace, trace: &[TracePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["generation".to_string(), "best_objective".into(), "beta".into()];
    header.extend(space.fourier_orders.iter().map(|k| format!("a_{k}")));
    w.write_record(&header)?;
    for t in trace {
        let mut row = vec![t.generation.to_string(), format!("{:.12e}", t.best)];
        row.extend(t.params.iter().map(|p| format!("{p:.12e}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
