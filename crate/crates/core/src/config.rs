//! Experiment configuration schema and runner: one JSON config maps to one
//! deterministic CSV artifact. All randomness is seeded; all defaults are
//! resolved explicitly and recorded in the provenance header.

use crate::curvature::{self, TangentVector};
use crate::geodesics::{product_distance, SolverOptions};
use crate::measure::DiscreteMeasure;
use crate::report::{Report, ResolvedParam};
use crate::spaces::ModelSpace;
use crate::transport::{
    cd_check, cyclical_monotonicity_check, gaussian_blob, singular_mass_probe, w2,
};
use crate::warp::{cone_distance, WarpedPoint, WarpedProduct, WarpingFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("config invalid: {0}")]
    Invalid(String),
    #[error(transparent)]
    Warp(#[from] crate::warp::WarpError),
    #[error(transparent)]
    Space(#[from] crate::spaces::SpaceError),
    #[error(transparent)]
    Geodesic(#[from] crate::geodesics::GeodesicError),
    #[error(transparent)]
    Transport(#[from] crate::transport::TransportError),
    #[error(transparent)]
    Curvature(#[from] crate::curvature::CurvatureError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Process-level outcome of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Success,
    ConfigError,
    SolverNonConvergence,
    InvariantViolation,
}

impl RunStatus {
    pub fn code(self) -> i32 {
        match self {
            RunStatus::Success => 0,
            RunStatus::ConfigError => 1,
            RunStatus::SolverNonConvergence => 2,
            RunStatus::InvariantViolation => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Distance,
    Geodesic,
    CurvatureScan,
    FkCheck,
    ConditionsCheck,
    CdCheck,
    Transport,
    SingularProbe,
    Bench,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Distance => "distance",
            Command::Geodesic => "geodesic",
            Command::CurvatureScan => "curvature-scan",
            Command::FkCheck => "fk-check",
            Command::ConditionsCheck => "conditions-check",
            Command::CdCheck => "cd-check",
            Command::Transport => "transport",
            Command::SingularProbe => "singular-probe",
            Command::Bench => "bench",
        }
    }
}

/// Warped-product descriptor: base, fiber, warping identifier, exponent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WarpedProductConfig {
    pub base: ModelSpace,
    pub fiber: ModelSpace,
    pub warping: WarpingFunction,
    pub exponent: f64,
}

impl WarpedProductConfig {
    pub fn build(&self) -> Result<WarpedProduct, ConfigError> {
        Ok(WarpedProduct::new(
            self.base.clone(),
            self.fiber.clone(),
            self.warping.clone(),
            self.exponent,
        )?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointConfig {
    pub base: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub grid_res: Option<usize>,
    pub pairs: Option<usize>,
    /// Oracle column for distance runs: "sphere", "cone", or "none".
    pub oracle: Option<String>,
    pub k: Option<f64>,
    pub n: Option<f64>,
    pub k_fiber: Option<f64>,
    pub times: Option<Vec<f64>>,
    pub entropy_grid: Option<[usize; 2]>,
    pub atom_grid: Option<[usize; 2]>,
    pub blob_radius: Option<f64>,
    pub blob_centers: Option<Vec<PointConfig>>,
    pub max_atoms: Option<usize>,
    pub points: Option<usize>,
    pub geodesics: Option<usize>,
    pub samples: Option<usize>,
    pub endpoints: Option<[PointConfig; 2]>,
    pub delta: Option<f64>,
    pub deficit_tolerance: Option<f64>,
    /// "pass" or "violation"; absent means report-only.
    pub expect: Option<String>,
    pub trials: Option<usize>,
    pub tuple_size: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub space: WarpedProductConfig,
    #[serde(default)]
    pub parameters: Parameters,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Parse a standalone warped-product descriptor (the `space` object of an
/// experiment config).
pub fn parse_product_config(text: &str) -> Result<WarpedProductConfig, ConfigError> {
    Ok(serde_json::from_str(text)?)
}

/// Command-line and environment overrides applied on top of the config.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub reproducible: bool,
}

pub struct RunOutcome {
    pub report: Report,
    pub status: RunStatus,
}

/// Tracks parameter resolution so the provenance header can distinguish
/// configured values from defaults.
struct ParamSet {
    resolved: Vec<ResolvedParam>,
}

impl ParamSet {
    fn new() -> Self {
        Self { resolved: Vec::new() }
    }

    fn get<T: Copy + ToString>(&mut self, name: &'static str, v: Option<T>, default: T) -> T {
        let (value, is_default) = match v {
            Some(x) => (x, false),
            None => (default, true),
        };
        self.resolved.push(ResolvedParam::new(name, value.to_string(), is_default));
        value
    }

    fn note(&mut self, name: &'static str, value: impl ToString, is_default: bool) {
        self.resolved.push(ResolvedParam::new(name, value.to_string(), is_default));
    }
}

pub fn run_experiment(
    config: &ExperimentConfig,
    config_text: &str,
    overrides: &RunOverrides,
) -> Result<RunOutcome, ConfigError> {
    let threads = overrides
        .threads
        .or_else(|| std::env::var("WARPCD_THREADS").ok().and_then(|s| s.parse().ok()))
        .unwrap_or_else(num_threads_default);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ConfigError::Invalid(format!("thread pool: {e}")))?;
    pool.install(|| run_inner(config, config_text, overrides))
}

fn num_threads_default() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn run_inner(
    config: &ExperimentConfig,
    config_text: &str,
    overrides: &RunOverrides,
) -> Result<RunOutcome, ConfigError> {
    let mut ps = ParamSet::new();
    let seed = match overrides.seed {
        Some(s) => {
            ps.note("seed", s, false);
            s
        }
        None => ps.get("seed", config.parameters.seed, 0),
    };
    let w = config.space.build()?;
    let p = &config.parameters;

    let tol = ps.get("tolerance", p.tolerance, 1e-6);
    let grid_res = ps.get("grid_res", p.grid_res, 400);
    let opts = SolverOptions { grid_res, tol, ..SolverOptions::default() };

    match config.command {
        Command::Distance | Command::Bench => {
            run_distance(config, config_text, overrides, &w, &opts, seed, ps)
        }
        Command::Geodesic => run_geodesic(config, config_text, overrides, &w, &opts, seed, ps),
        Command::CurvatureScan => {
            run_curvature_scan(config, config_text, overrides, &w, seed, ps)
        }
        Command::FkCheck => run_fk_check(config, config_text, overrides, &w, seed, ps),
        Command::ConditionsCheck => {
            run_conditions_check(config, config_text, overrides, &w, seed, ps)
        }
        Command::CdCheck => run_cd_check(config, config_text, overrides, &w, &opts, seed, ps),
        Command::Transport | Command::SingularProbe => {
            run_transport(config, config_text, overrides, &w, &opts, seed, ps)
        }
    }
}

fn coords_field(coords: &[f64]) -> String {
    coords
        .iter()
        .map(|c| format!("{c:.12e}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn random_pair(w: &WarpedProduct, rng: &mut ChaCha8Rng) -> (WarpedPoint, WarpedPoint) {
    let sample = |rng: &mut ChaCha8Rng| {
        let b = w.base.random_point(rng);
        let f = w.fiber.random_point(rng);
        w.point(&b.coords, Some(&f.coords)).expect("sampled point")
    };
    (sample(rng), sample(rng))
}

fn point_from_config(w: &WarpedProduct, pc: &PointConfig) -> Result<WarpedPoint, ConfigError> {
    Ok(w.point(&pc.base, pc.fiber.as_deref())?)
}

/// Closed-form comparison value for distance runs, when one applies.
fn oracle_value(
    w: &WarpedProduct,
    kind: &str,
    a: &WarpedPoint,
    b: &WarpedPoint,
) -> Option<f64> {
    match kind {
        "sphere" => {
            // [0, pi] x_sin fiber: great-circle law with the fiber separation
            let r0 = a.base.scalar();
            let r1 = b.base.scalar();
            let th = match (&a.fiber, &b.fiber) {
                (Some(x), Some(y)) => w.fiber.distance(x, y),
                _ => 0.0,
            };
            Some(
                (r0.cos() * r1.cos() + r0.sin() * r1.sin() * th.cos())
                    .clamp(-1.0, 1.0)
                    .acos(),
            )
        }
        "cone" => {
            let k = match w.warping {
                WarpingFunction::SnK { k } => k,
                WarpingFunction::Linear => 0.0,
                WarpingFunction::Sin => 1.0,
                _ => return None,
            };
            let (x, s) = (a.fiber.as_ref(), a.base.scalar());
            let (y, t) = (b.fiber.as_ref(), b.base.scalar());
            match (x, y) {
                (Some(x), Some(y)) => cone_distance(k, &w.fiber, x, s, y, t).ok(),
                _ => {
                    // collapsed endpoint: radial distance
                    Some((s - t).abs())
                }
            }
        }
        _ => None,
    }
}

#[allow(clippy::too_many_arguments)]
fn run_distance(
    config: &ExperimentConfig,
    config_text: &str,
    overrides: &RunOverrides,
    w: &WarpedProduct,
    opts: &SolverOptions,
    seed: u64,
    mut ps: ParamSet,
) -> Result<RunOutcome, ConfigError> {
    use rayon::prelude::*;
    let p = &config.parameters;
    let n_pairs = ps.get("pairs", p.pairs, 100);
    let oracle = match &p.oracle {
        Some(s) => {
            ps.note("oracle", s, false);
            s.clone()
        }
        None => {
            ps.note("oracle", "none", true);
            "none".into()
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(WarpedPoint, WarpedPoint)> = match &p.endpoints {
        Some([a, b]) => vec![(point_from_config(w, a)?, point_from_config(w, b)?)],
        None => (0..n_pairs).map(|_| random_pair(w, &mut rng)).collect(),
    };

    let started = std::time::Instant::now();
    let results: Result<Vec<_>, _> = pairs
        .par_iter()
        .map(|(a, b)| product_distance(w, a, b, opts))
        .collect();
    let results = results?;
    let elapsed = started.elapsed().as_secs_f64();

    let mut report = Report::new(
        config.command.name(),
        config_text,
        seed,
        &ps.resolved,
        overrides.reproducible,
    );
    if !overrides.reproducible {
        // timing is environment noise, keep it out of the body
        report = with_comment(report, &format!("# elapsed-seconds {elapsed:.3}"));
    }
    report.columns(vec![
        "pair", "base0", "fiber0", "base1", "fiber1", "grid", "refined", "oracle",
        "abs_err_grid", "abs_err_refined", "converged",
    ]);
    let mut nonconverged = false;
    for (i, ((a, b), d)) in pairs.iter().zip(&results).enumerate() {
        let oracle_d = oracle_value(w, &oracle, a, b);
        let (od, eg, er) = match oracle_d {
            Some(o) => (
                Report::num(o),
                Report::num((d.grid_length - o).abs()),
                Report::num((d.length - o).abs()),
            ),
            None => ("".into(), "".into(), "".into()),
        };
        if !d.path.converged {
            nonconverged = true;
        }
        report.row(vec![
            i.to_string(),
            coords_field(&a.base.coords),
            a.fiber.as_ref().map(|f| coords_field(&f.coords)).unwrap_or_default(),
            coords_field(&b.base.coords),
            b.fiber.as_ref().map(|f| coords_field(&f.coords)).unwrap_or_default(),
            Report::num(d.grid_length),
            Report::num(d.length),
            od,
            eg,
            er,
            d.path.converged.to_string(),
        ]);
    }
    let status = if nonconverged { RunStatus::SolverNonConvergence } else { RunStatus::Success };
    Ok(RunOutcome { report, status })
}

fn with_comment(mut report: Report, line: &str) -> Report {
    report.push_header(line.to_string());
    report
}

#[allow(clippy::too_many_arguments)]
fn run_geodesic(
    config: &ExperimentConfig,
    config_text: &str,
    overrides: &RunOverrides,
    w: &WarpedProduct,
    opts: &SolverOptions,
    seed: u64,
    mut ps: ParamSet,
) -> Result<RunOutcome, ConfigError> {
    let p = &config.parameters;
    let samples = ps.get("samples", p.samples, 129);
    let endpoints = p
        .endpoints
        .as_ref()
        .ok_or_else(|| ConfigError::Invalid("geodesic requires parameters.endpoints".into()))?;
    let a = point_from_config(w, &endpoints[0])?;
    let b = point_from_config(w, &endpoints[1])?;
    let opts = SolverOptions { path_samples: samples, ..opts.clone() };
    let d = product_distance(w, &a, &b, &opts)?;

    let mut report = Report::new(
        config.command.name(),
        config_text,
        seed,
        &ps.resolved,
        overrides.reproducible,
    );
    report = with_comment(report, &format!("# length {}", Report::num(d.length)));
    report = with_comment(report, &format!("# grid-length {}", Report::num(d.grid_length)));
    report = with_comment(
        report,
        &format!("# through-singular {}", d.path.through_singular),
    );
    report.columns(vec!["t", "base", "fiber", "f", "base_speed", "fiber_speed", "speed"]);
    for (k, (t, pt)) in d.path.samples.iter().enumerate() {
        let f = w.f(&pt.base);
        let v = d.path.base_speed[k];
        let fs = d.path.fiber_speed[k];
        let speed = (v * v + f * f * fs * fs).sqrt();
        report.row(vec![
            Report::num(*t),
            coords_field(&pt.base.coords),
            pt.fiber.as_ref().map(|x| coords_field(&x.coords)).unwrap_or_default(),
            Report::num(f),
            Report::num(v),
            Report::num(fs),
            Report::num(speed),
        ]);
    }
    let status = if d.path.converged { RunStatus::Success } else { RunStatus::SolverNonConvergence };
    Ok(RunOutcome { report, status })
}

#[allow(clippy::too_many_arguments)]
fn run_curvature_scan(
    config: &ExperimentConfig,
    config_text: &str,
    overrides: &RunOverrides,
    w: &WarpedProduct,
    seed: u64,
    mut ps: ParamSet,
) -> Result<RunOutcome, ConfigError> {
    let p = &config.parameters;
    let n_points = ps.get("points", p.points, 200);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut report = Report::new(
        config.command.name(),
        config_text,
        seed,
        &ps.resolved,
        overrides.reproducible,
    );
    report.columns(vec![
        "index", "base", "fiber", "base_part", "fiber_part", "norm2", "value", "ric_base",
        "hessian", "fiber_term", "gradient",
    ]);
    for i in 0..n_points {
        // rejection-sample a non-collapsed point
        let at = loop {
            let b = w.base.random_point(&mut rng);
            let f = w.fiber.random_point(&mut rng);
            if let Ok(pt) = w.point(&b.coords, Some(&f.coords)) {
                if !pt.is_singular() {
                    break pt;
                }
            }
        };
        let base_part: Vec<f64> = (0..w.base.chart_len())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let fiber_part: Vec<f64> = (0..w.fiber.chart_len())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let u = TangentVector { at, base_part, fiber_part };
        let rep = curvature::warped_ricci(w, &u)?;
        let term = |name: &str| {
            rep.terms
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, v)| *v)
                .unwrap_or(f64::NAN)
        };
        report.row(vec![
            i.to_string(),
            coords_field(&u.at.base.coords),
            u.at.fiber.as_ref().map(|x| coords_field(&x.coords)).unwrap_or_default(),
            coords_field(&u.base_part),
            coords_field(&u.fiber_part),
            Report::num(u.norm2(w)),
            Report::num(rep.value),
            Report::num(term("ric_base")),
            Report::num(term("hessian")),
            Report::num(term("fiber")),
            Report::num(term("gradient")),
        ]);
    }
    Ok(RunOutcome { report, status: RunStatus::Success })
}

#[allow(clippy::too_many_arguments)]
fn run_fk_check(
    config: &ExperimentConfig,
    config_text: &str,
    overrides: &RunOverrides,
    w: &WarpedProduct,
    seed: u64,
    mut ps: ParamSet,
) -> Result<RunOutcome, ConfigError> {
    let p = &config.parameters;
    let k = ps.get("k", p.k, 0.0);
    let n_geo = ps.get("geodesics", p.geodesics, 64);
    let n_samples = ps.get("samples", p.samples, 16);
    let rep = curvature::fk_concavity_check(&w.base, &w.warping, k, n_geo, n_samples, seed)?;

    let mut report = Report::new(
        config.command.name(),
        config_text,
        seed,
        &ps.resolved,
        overrides.reproducible,
    );
    report.columns(vec!["barrier_margin", "hessian_margin", "verdict"]);
    report.row(vec![
        Report::num(rep.barrier_margin),
        Report::num(rep.hessian_margin),
        if rep.pass { "PASS".into() } else { "FAIL".into() },
    ]);
    let status = expectation_status(&p.expect, rep.pass);
    Ok(RunOutcome { report, status })
}

fn expectation_status(expect: &Option<String>, pass: bool) -> RunStatus {
    match expect.as_deref() {
        Some("pass") if !pass => RunStatus::InvariantViolation,
        Some("violation") if pass => RunStatus::InvariantViolation,
        _ => RunStatus::Success,
    }
}

#[allow(clippy::too_many_arguments)]
fn run_conditions_check(
    config: &ExperimentConfig,
    config_text: &str,
    overrides: &RunOverrides,
    w: &WarpedProduct,
    seed: u64,
    mut ps: ParamSet,
) -> Result<RunOutcome, ConfigError> {
    let p = &config.parameters;
    let k = ps.get("k", p.k, 0.0);
    let k_fiber = ps.get("k_fiber", p.k_fiber, 0.0);
    let rep = curvature::check_conditions(&w.base, &w.warping, k, k_fiber)?;

    let mut report = Report::new(
        config.command.name(),
        config_text,
        seed,
        &ps.resolved,
        overrides.reproducible,
    );
    report.columns(vec![
        "form", "margin", "verdict", "agreement_margin", "verdicts_agree",
    ]);
    report.row(vec![
        "boundary".into(),
        Report::num(rep.boundary_form.margin),
        if rep.boundary_form.pass { "PASS".into() } else { "FAIL".into() },
        Report::num(rep.agreement_margin),
        rep.verdicts_agree.to_string(),
    ]);
    report.row(vec![
        "global".into(),
        Report::num(rep.global_form.margin),
        if rep.global_form.pass { "PASS".into() } else { "FAIL".into() },
        Report::num(rep.agreement_margin),
        rep.verdicts_agree.to_string(),
    ]);
    let both = rep.boundary_form.pass && rep.global_form.pass;
    Ok(RunOutcome { report, status: expectation_status(&p.expect, both) })
}

fn build_blobs(
    w: &WarpedProduct,
    p: &Parameters,
    ps: &mut ParamSet,
) -> Result<(DiscreteMeasure<WarpedPoint>, DiscreteMeasure<WarpedPoint>), ConfigError> {
    let radius = ps.get("blob_radius", p.blob_radius, 0.4);
    let max_atoms = ps.get("max_atoms", p.max_atoms, 160);
    let atom_grid = match p.atom_grid {
        Some(g) => {
            ps.note("atom_grid", format!("{}x{}", g[0], g[1]), false);
            g
        }
        None => {
            ps.note("atom_grid", "96x96", true);
            [96, 96]
        }
    };
    let centers = p
        .blob_centers
        .as_ref()
        .ok_or_else(|| ConfigError::Invalid("transport commands need parameters.blob_centers (two entries)".into()))?;
    if centers.len() != 2 {
        return Err(ConfigError::Invalid(format!(
            "expected exactly 2 blob centers, got {}",
            centers.len()
        )));
    }
    let grid = w.warped_grid(atom_grid[0], atom_grid[1])?;
    let c0 = point_from_config(w, &centers[0])?;
    let c1 = point_from_config(w, &centers[1])?;
    let mu0 = gaussian_blob(w, &grid, &c0, radius, max_atoms)?;
    let mu1 = gaussian_blob(w, &grid, &c1, radius, max_atoms)?;
    Ok((mu0, mu1))
}

#[allow(clippy::too_many_arguments)]
fn run_cd_check(
    config: &ExperimentConfig,
    config_text: &str,
    overrides: &RunOverrides,
    w: &WarpedProduct,
    opts: &SolverOptions,
    seed: u64,
    mut ps: ParamSet,
) -> Result<RunOutcome, ConfigError> {
    let p = &config.parameters;
    let k = ps.get("k", p.k, 0.0);
    let n_prime = ps.get("n", p.n, 2.0);
    let deficit_tol = ps.get("deficit_tolerance", p.deficit_tolerance, 0.05);
    let times = match &p.times {
        Some(t) => {
            ps.note("times", format!("{t:?}"), false);
            t.clone()
        }
        None => {
            ps.note("times", "[0.25, 0.5, 0.75]", true);
            vec![0.25, 0.5, 0.75]
        }
    };
    let entropy_grid = match p.entropy_grid {
        Some(g) => {
            ps.note("entropy_grid", format!("{}x{}", g[0], g[1]), false);
            g
        }
        None => {
            ps.note("entropy_grid", "32x32", true);
            [32, 32]
        }
    };
    let expect = p.expect.clone();
    ps.note(
        "expect",
        expect.as_deref().unwrap_or("report"),
        expect.is_none(),
    );
    let (mu0, mu1) = build_blobs(w, p, &mut ps)?;
    let grid = w.warped_grid(entropy_grid[0], entropy_grid[1])?;
    let rep = cd_check(w, &mu0, &mu1, k, n_prime, &times, &grid, opts)?;

    let mut report = Report::new(
        config.command.name(),
        config_text,
        seed,
        &ps.resolved,
        overrides.reproducible,
    );
    report = with_comment(report, &format!("# wasserstein {}", Report::num(rep.wasserstein)));
    report.columns(vec![
        "t", "entropy", "comparison", "deficit", "dropped_mass", "violation",
    ]);
    for s in &rep.slices {
        report.row(vec![
            Report::num(s.t),
            Report::num(s.entropy),
            Report::num(s.comparison),
            Report::num(s.deficit),
            Report::num(s.dropped_mass),
            (s.deficit < -deficit_tol).to_string(),
        ]);
    }
    let violated = rep.worst_deficit() < -deficit_tol;
    let status = match expect.as_deref() {
        Some("pass") => {
            if violated { RunStatus::InvariantViolation } else { RunStatus::Success }
        }
        Some("violation") => {
            if violated { RunStatus::Success } else { RunStatus::InvariantViolation }
        }
        _ => RunStatus::Success,
    };
    Ok(RunOutcome { report, status })
}

#[allow(clippy::too_many_arguments)]
fn run_transport(
    config: &ExperimentConfig,
    config_text: &str,
    overrides: &RunOverrides,
    w: &WarpedProduct,
    opts: &SolverOptions,
    seed: u64,
    mut ps: ParamSet,
) -> Result<RunOutcome, ConfigError> {
    let p = &config.parameters;
    let (mu0, mu1) = build_blobs(w, p, &mut ps)?;
    let plan = w2(&mu0, &mu1, w, opts)?;

    let mut report = Report::new(
        config.command.name(),
        config_text,
        seed,
        &ps.resolved,
        overrides.reproducible,
    );
    report = with_comment(report, &format!("# wasserstein {}", Report::num(plan.wasserstein_distance())));

    match config.command {
        Command::SingularProbe => {
            let delta = ps.get("delta", p.delta, 0.05);
            let fraction = singular_mass_probe(&plan, w, delta);
            report.columns(vec!["delta", "near_singular_fraction", "pairs"]);
            report.row(vec![
                Report::num(delta),
                Report::num(fraction),
                plan.pairs.len().to_string(),
            ]);
        }
        _ => {
            let trials = ps.get("trials", p.trials, 1000);
            let tuple = ps.get("tuple_size", p.tuple_size, 4);
            let cyc = cyclical_monotonicity_check(&plan, tuple, trials, seed);
            report = with_comment(
                report,
                &format!(
                    "# cyclical-monotonicity violations {} worst {}",
                    cyc.violations,
                    Report::num(cyc.worst_margin)
                ),
            );
            report.columns(vec!["source", "target", "mass", "distance"]);
            for pair in &plan.pairs {
                report.row(vec![
                    pair.source.to_string(),
                    pair.target.to_string(),
                    Report::num(pair.mass),
                    Report::num(pair.distance),
                ]);
            }
        }
    }
    Ok(RunOutcome { report, status: RunStatus::Success })
}

/// Convenience wrapper used by the binary and the foreign-function surface.
pub fn run_config_text(
    text: &str,
    overrides: &RunOverrides,
) -> Result<(String, RunStatus, Option<String>), ConfigError> {
    let config = ExperimentConfig::from_json(text)?;
    let outcome = run_experiment(&config, text, overrides)?;
    Ok((outcome.report.render(), outcome.status, config.output.clone()))
}
