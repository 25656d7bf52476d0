//! Each command is split into a plan, built from the config before any
//! computation starts, and a run that produces the output tables.

use rayon::prelude::*;

use foult::fbm::{HurstParam, TimeGrid};
use foult::fou::{FouGenerator, FouParams, Generator};
use foult::gaussian_analysis::{fou_cov, probe_bounds, probe_grids, PROBE_GRID_COUNT, PROBE_SEED};
use foult::localtime::{
    cauchy_gap_sweep, existence_value, holder_value, intersection_local_time_reg, local_time_reg,
    LocalTimeQuery, McSetup,
};
use foult::mollifier::{Bandwidth, MultiIndex};
use foult::regularity::{
    pathwise_holder_estimate, spatial_increment_moments, temporal_scaling, ScalingResult,
    SpatialLattice,
};
use foult::rng::Domain;
use foult::stats::MCEstimate;
use foult::FoultError;

use crate::config::{Config, Result};
use crate::error::CliError;
use crate::output::{joined, Cell, Outputs, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Simulate,
    Localtime,
    Convergence,
    Scaling,
    Bounds,
    Condition,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Localtime => "localtime",
            Command::Convergence => "convergence",
            Command::Scaling => "scaling",
            Command::Bounds => "bounds",
            Command::Condition => "condition",
        }
    }

    /// Key that `--seed` overrides.
    pub fn seed_key(self) -> &'static str {
        match self {
            Command::Bounds => "bounds.seed",
            _ => "mc.seed",
        }
    }
}

/// Result of a run: tables, human-readable summary lines and the verdict
/// of the `--check` tolerances (always computed, only enforced on request).
pub struct Report {
    pub outputs: Outputs,
    pub summary: Vec<String>,
    pub check: std::result::Result<(), String>,
}

pub trait Plan {
    fn run(&self) -> Result<Report>;
}

pub fn plan(command: Command, cfg: &Config) -> Result<Box<dyn Plan>> {
    let plan: Box<dyn Plan> = match command {
        Command::Simulate => Box::new(SimulatePlan::new(cfg)?),
        Command::Localtime => Box::new(LocalTimePlan::new(cfg)?),
        Command::Convergence => Box::new(ConvergencePlan::new(cfg)?),
        Command::Scaling => Box::new(ScalingPlan::new(cfg)?),
        Command::Bounds => Box::new(BoundsPlan::new(cfg)?),
        Command::Condition => Box::new(ConditionPlan::new(cfg)?),
    };
    cfg.reject_unused()?;
    Ok(plan)
}

fn lib<T>(key: &str, r: foult::Result<T>) -> Result<T> {
    r.map_err(|e| CliError::from_library(key, e))
}

fn hurst(cfg: &Config, key: &str, default: Option<f64>) -> Result<HurstParam> {
    let h = match default {
        Some(d) => cfg.get_or(key, d)?,
        None => cfg.get(key)?,
    };
    lib(key, HurstParam::new(h))
}

fn model(cfg: &Config) -> Result<FouParams> {
    let h = hurst(cfg, "model.h", None)?;
    let v = cfg.get_or("model.v", 1.0)?;
    let x0 = if cfg.has("model.x0") {
        cfg.list("model.x0")?
    } else {
        let dim: usize = cfg.get_or("model.dim", 1)?;
        if dim == 0 {
            return Err(CliError::config("model.dim", "must be at least 1"));
        }
        vec![0.0; dim]
    };
    lib("model", FouParams::new(h, v, x0))
}

/// Second process for two-process commands; every key falls back to the
/// first model's value.
fn second_model(cfg: &Config, first: &FouParams) -> Result<FouParams> {
    let h = hurst(cfg, "model2.h", Some(first.hurst.value()))?;
    let v = cfg.get_or("model2.v", first.v)?;
    let x0 = cfg.list_or("model2.x0", first.x0.clone())?;
    if x0.len() != first.dim() {
        return Err(CliError::config(
            "model2.x0",
            "dimension differs from the first model",
        ));
    }
    lib("model2", FouParams::new(h, v, x0))
}

fn grid(cfg: &Config) -> Result<TimeGrid> {
    let t = cfg.get_or("grid.t", 1.0)?;
    let n = cfg.get_or("grid.n", 256usize)?;
    lib("grid", TimeGrid::new(t, n))
}

fn setup(cfg: &Config, grid: TimeGrid, default_paths: usize) -> Result<McSetup> {
    let generator: Generator = lib(
        "grid.generator",
        cfg.get_or("grid.generator", "fbm-circulant".to_string())?
            .parse(),
    )?;
    let paths = cfg.get_or("mc.paths", default_paths)?;
    let seed = cfg.get_or("mc.seed", 1u64)?;
    Ok(McSetup::new(grid, paths, seed).with_generator(generator))
}

fn multi_index(cfg: &Config, dim: usize) -> Result<MultiIndex> {
    let k = cfg.list_or("query.k", vec![0usize; dim])?;
    if k.len() != dim {
        return Err(CliError::config("query.k", format!("needs {dim} entries")));
    }
    lib("query.k", MultiIndex::new(k))
}

fn query(cfg: &Config, dim: usize, default_t: f64) -> Result<LocalTimeQuery> {
    let x = cfg.list_or("query.x", vec![0.0; dim])?;
    let t = cfg.get_or("query.t", default_t)?;
    let eps = lib("query.eps", Bandwidth::new(cfg.get_or("query.eps", 0.05)?))?;
    let k = multi_index(cfg, dim)?;
    lib("query", LocalTimeQuery::new(x, t, eps, k))
}

fn estimate_cells(e: &MCEstimate) -> [Cell; 2] {
    [Cell::F(e.mean), Cell::F(e.stderr)]
}

// ---------------------------------------------------------------- simulate

struct SimulatePlan {
    generator: FouGenerator,
    setup: McSetup,
}

impl SimulatePlan {
    fn new(cfg: &Config) -> Result<Self> {
        let params = model(cfg)?;
        let grid = grid(cfg)?;
        let setup = setup(cfg, grid, 1)?;
        let generator = lib(
            "grid.generator",
            FouGenerator::new(grid, params, setup.generator),
        )?;
        Ok(SimulatePlan { generator, setup })
    }
}

impl Plan for SimulatePlan {
    fn run(&self) -> Result<Report> {
        let paths = (0..self.setup.n_paths as u64)
            .into_par_iter()
            .map(|i| self.generator.path(self.setup.seed, Domain::ProcessA, i))
            .collect::<foult::Result<Vec<_>>>()
            .map_err(CliError::Numerical)?;
        let params = self.generator.params();
        let grid = self.setup.grid;
        let mut table = Table::new(&["path", "component", "index", "time", "value", "decay"]);
        for (p, path) in paths.iter().enumerate() {
            for (c, &x0) in params.x0.iter().enumerate() {
                for (j, &x) in path.component(c).iter().enumerate() {
                    let t = grid.time(j);
                    table.push(&[
                        Cell::U(p as u64),
                        Cell::U(c as u64),
                        Cell::U(j as u64),
                        Cell::F(t),
                        Cell::F(x),
                        Cell::F(x0 * (-t).exp()),
                    ]);
                }
            }
        }
        let mut summary = Vec::new();
        let mut check = Ok(());
        if paths.len() >= 2 {
            let t = grid.horizon();
            let var = fou_cov(t, t, params.hurst, params.v).map_err(CliError::Numerical)?;
            for (c, &x0) in params.x0.iter().enumerate() {
                let mean = x0 * (-t).exp();
                let xs: Vec<f64> = paths.iter().map(|p| p.component(c)[grid.steps()]).collect();
                let m =
                    MCEstimate::from_samples(&xs, self.setup.seed).map_err(CliError::Numerical)?;
                let sq: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
                let v =
                    MCEstimate::from_samples(&sq, self.setup.seed).map_err(CliError::Numerical)?;
                summary.push(format!(
                    "component {c}: mean {} ± {} (exact {mean}), variance {} ± {} (exact {var})",
                    m.mean, m.stderr, v.mean, v.stderr
                ));
                if check.is_ok() && !(m.within(mean, 3.0) && v.within(var, 3.0)) {
                    check = Err(format!(
                        "component {c}: terminal moments outside 3 standard errors"
                    ));
                }
            }
        }
        Ok(Report {
            outputs: Outputs::single(table),
            summary,
            check,
        })
    }
}

// --------------------------------------------------------------- localtime

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LocalTimeKind {
    Single,
    Intersection,
}

struct LocalTimePlan {
    kind: LocalTimeKind,
    first: FouGenerator,
    second: Option<FouGenerator>,
    query: LocalTimeQuery,
    xs: Vec<Vec<f64>>,
    setup: McSetup,
}

impl LocalTimePlan {
    fn new(cfg: &Config) -> Result<Self> {
        let kind = match cfg.get_or("localtime.kind", "single".to_string())?.as_str() {
            "single" => LocalTimeKind::Single,
            "intersection" => LocalTimeKind::Intersection,
            other => {
                return Err(CliError::config(
                    "localtime.kind",
                    format!("`{other}` is neither `single` nor `intersection`"),
                ))
            }
        };
        let first = model(cfg)?;
        let second = match kind {
            LocalTimeKind::Intersection => Some(second_model(cfg, &first)?),
            LocalTimeKind::Single => None,
        };
        let grid = grid(cfg)?;
        let setup = setup(cfg, grid, 1)?;
        if setup.n_paths == 0 {
            return Err(CliError::config("mc.paths", "must be at least 1"));
        }
        let query = query(cfg, first.dim(), grid.horizon())?;
        let dim = first.dim();
        let first = lib(
            "grid.generator",
            FouGenerator::new(grid, first, setup.generator),
        )?;
        let second = second
            .map(|p| {
                lib(
                    "grid.generator",
                    FouGenerator::new(grid, p, setup.generator),
                )
            })
            .transpose()?;
        lib("query.t", grid.snap(query.t))?;
        let xs = if cfg.has("sweep.values") {
            if dim != 1 {
                return Err(CliError::config(
                    "sweep.values",
                    "an x sweep needs a one-dimensional model",
                ));
            }
            cfg.list::<f64>("sweep.values")?
                .into_iter()
                .map(|x| vec![x])
                .collect()
        } else {
            vec![query.x.clone()]
        };
        Ok(LocalTimePlan {
            kind,
            first,
            second,
            query,
            xs,
            setup,
        })
    }

    fn values_for_path(&self, i: u64) -> foult::Result<Vec<f64>> {
        let seed = self.setup.seed;
        let a = self.first.path(seed, Domain::ProcessA, i)?;
        match &self.second {
            None => self
                .xs
                .iter()
                .map(|x| local_time_reg(&a, &self.query.with_x(x.clone())))
                .collect(),
            Some(second) => {
                let b = second.path(seed, Domain::ProcessB, i)?;
                self.xs
                    .iter()
                    .map(|x| intersection_local_time_reg(&a, &b, &self.query.with_x(x.clone())))
                    .collect()
            }
        }
    }

    /// Occupation mass of each path over a uniform x sweep.
    fn mass_check(&self, per_path: &[Vec<f64>]) -> std::result::Result<(), String> {
        if self.query.k.total() != 0 || self.xs.len() < 3 {
            return Err(
                "occupation-mass check needs k = 0 and an x sweep of at least 3 points".into(),
            );
        }
        let xs: Vec<f64> = self.xs.iter().map(|x| x[0]).collect();
        let dx = xs[1] - xs[0];
        if dx <= 0.0
            || xs
                .windows(2)
                .any(|w| ((w[1] - w[0]) - dx).abs() > 1e-9 * dx.abs())
        {
            return Err("occupation-mass check needs an increasing uniform x sweep".into());
        }
        let grid = self.setup.grid;
        let t = grid.time(grid.snap(self.query.t).map_err(|e| e.to_string())?);
        let target = match self.kind {
            LocalTimeKind::Single => t,
            LocalTimeKind::Intersection => t * t,
        };
        for (p, vals) in per_path.iter().enumerate() {
            let n = vals.len() - 1;
            let mass = dx * (0.5 * (vals[0] + vals[n]) + vals[1..n].iter().sum::<f64>());
            if (mass - target).abs() > 0.01 * target {
                return Err(format!(
                    "path {p}: occupation mass {mass} differs from {target} by more than 1%"
                ));
            }
        }
        Ok(())
    }
}

impl Plan for LocalTimePlan {
    fn run(&self) -> Result<Report> {
        let per_path = (0..self.setup.n_paths as u64)
            .into_par_iter()
            .map(|i| self.values_for_path(i))
            .collect::<foult::Result<Vec<_>>>()
            .map_err(|e| CliError::from_library("query", e))?;
        let mut table = Table::new(&["x", "path", "value"]);
        for (j, x) in self.xs.iter().enumerate() {
            for (p, vals) in per_path.iter().enumerate() {
                table.push(&[Cell::S(joined(x)), Cell::U(p as u64), Cell::F(vals[j])]);
            }
        }
        let check = self.mass_check(&per_path);
        let summary = match &check {
            Ok(()) => vec!["occupation mass within 1% on every path".to_string()],
            Err(m) => vec![m.clone()],
        };
        Ok(Report {
            outputs: Outputs::single(table),
            summary,
            check,
        })
    }
}

// ------------------------------------------------------------- convergence

struct ConvergencePlan {
    first: FouParams,
    second: FouParams,
    query: LocalTimeQuery,
    pairs: Vec<(Bandwidth, Bandwidth)>,
    setup: McSetup,
}

impl ConvergencePlan {
    fn new(cfg: &Config) -> Result<Self> {
        let first = model(cfg)?;
        let second = second_model(cfg, &first)?;
        let grid = grid(cfg)?;
        let setup = setup(cfg, grid, 1000)?;
        let query = query(cfg, first.dim(), grid.horizon())?;
        let ratio: f64 = cfg.get_or("sweep.ratio", 0.5)?;
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(CliError::config("sweep.ratio", "must lie in (0, 1)"));
        }
        let eps: Vec<f64> = cfg.list_or("sweep.values", vec![0.4, 0.2, 0.1, 0.05])?;
        let pairs = eps
            .iter()
            .map(|&e| Ok((Bandwidth::new(e)?, Bandwidth::new(e * ratio)?)))
            .collect::<foult::Result<Vec<_>>>()
            .map_err(|e| CliError::from_library("sweep.values", e))?;
        if setup.n_paths < 2 {
            return Err(CliError::config("mc.paths", "need at least 2 path pairs"));
        }
        Ok(ConvergencePlan {
            first,
            second,
            query,
            pairs,
            setup,
        })
    }
}

impl Plan for ConvergencePlan {
    fn run(&self) -> Result<Report> {
        let gaps = cauchy_gap_sweep(
            &self.first,
            &self.second,
            &self.query,
            &self.pairs,
            self.setup,
        )
        .map_err(|e| CliError::from_library("query", e))?;
        let mut table = Table::new(&["epsilon", "theta", "gap_mean", "gap_stderr"]);
        for g in &gaps {
            let [m, s] = estimate_cells(&g.estimate);
            table.push(&[Cell::F(g.eps.value()), Cell::F(g.theta.value()), m, s]);
        }
        let value = existence_value(
            self.first.hurst,
            self.second.hurst,
            &self.query.k,
            self.first.dim(),
        );
        let mut ordered = gaps.clone();
        ordered.sort_by(|a, b| b.eps.value().total_cmp(&a.eps.value()));
        let decreasing = ordered
            .windows(2)
            .all(|w| w[1].estimate.mean < w[0].estimate.mean);
        let check = if decreasing {
            Ok(())
        } else {
            Err("gap does not decrease monotonically as epsilon shrinks".to_string())
        };
        Ok(Report {
            outputs: Outputs::single(table),
            summary: vec![format!("condition={} value={value}", value <= 1.0)],
            check,
        })
    }
}

// ----------------------------------------------------------------- scaling

enum ScalingKind {
    Temporal {
        order: u32,
        hs: Vec<f64>,
        tolerance: f64,
    },
    Spatial {
        order: u32,
        separations: Vec<f64>,
    },
    Holder {
        hs: Vec<f64>,
        lattice: SpatialLattice,
        tolerance: f64,
    },
}

struct ScalingPlan {
    params: FouParams,
    query: LocalTimeQuery,
    kind: ScalingKind,
    setup: McSetup,
}

fn increments(cfg: &Config, grid: &TimeGrid) -> Result<Vec<f64>> {
    let raw: Vec<f64> = cfg.list("sweep.values")?;
    let snap: bool = cfg.get_or("sweep.snap", false)?;
    raw.into_iter()
        .map(|h| {
            let h = if snap { grid.nearest_multiple(h) } else { h };
            lib("sweep.values", grid.steps_in(h)).map(|_| h)
        })
        .collect()
}

impl ScalingPlan {
    fn new(cfg: &Config) -> Result<Self> {
        let params = model(cfg)?;
        let grid = grid(cfg)?;
        let setup = setup(cfg, grid, 1000)?;
        let kind_name = cfg.get_or("scaling.kind", "temporal".to_string())?;
        let default_t = match kind_name.as_str() {
            "spatial" => grid.horizon(),
            _ => grid.step(),
        };
        let query = query(cfg, params.dim(), default_t)?;
        let kind = match kind_name.as_str() {
            "temporal" => ScalingKind::Temporal {
                order: cfg.get_or("scaling.order", 2u32)?,
                hs: increments(cfg, &grid)?,
                tolerance: cfg.get_or("scaling.tolerance", 0.15)?,
            },
            "spatial" => {
                let separations: Vec<f64> = cfg.list("sweep.values")?;
                if separations.iter().any(|s| !(*s > 0.0)) {
                    return Err(CliError::config(
                        "sweep.values",
                        "separations must be positive",
                    ));
                }
                ScalingKind::Spatial {
                    order: cfg.get_or("scaling.order", 2u32)?,
                    separations,
                }
            }
            "holder" => {
                let root = query.eps.value().sqrt();
                let lo = cfg.get_or("lattice.lo", -4.0)?;
                let hi = cfg.get_or("lattice.hi", 4.0)?;
                let spacing = cfg.get_or("lattice.spacing", 0.5 * root)?;
                ScalingKind::Holder {
                    hs: increments(cfg, &grid)?,
                    lattice: lib(
                        "lattice",
                        SpatialLattice::uniform(lo, hi, spacing, params.dim()),
                    )?,
                    tolerance: cfg.get_or("scaling.tolerance", 0.2)?,
                }
            }
            other => {
                return Err(CliError::config(
                    "scaling.kind",
                    format!("`{other}` is not one of temporal, spatial, holder"),
                ))
            }
        };
        Ok(ScalingPlan {
            params,
            query,
            kind,
            setup,
        })
    }
}

fn fit_table(fit: &ScalingResult) -> Table {
    let mut t = Table::new(&["exponent_hat", "intercept", "r_squared", "theory_exponent"]);
    t.push(&[
        Cell::F(fit.exponent_hat),
        Cell::F(fit.intercept),
        Cell::F(fit.r_squared),
        Cell::F(fit.theory_exponent),
    ]);
    t
}

fn slope_check(fit: &ScalingResult, tolerance: f64) -> std::result::Result<(), String> {
    let dev = (fit.exponent_hat - fit.theory_exponent).abs();
    if dev <= tolerance {
        Ok(())
    } else {
        Err(format!(
            "slope {} differs from {} by {dev} > {tolerance}",
            fit.exponent_hat, fit.theory_exponent
        ))
    }
}

fn fit_summary(fit: &ScalingResult) -> String {
    format!(
        "slope={} theory={} r_squared={}",
        fit.exponent_hat, fit.theory_exponent, fit.r_squared
    )
}

fn run_error(e: FoultError) -> CliError {
    match e {
        FoultError::LatticeCoverage { .. } => CliError::from_library("lattice", e),
        FoultError::InvalidParameter { name, .. } => CliError::from_library(name, e),
        e => CliError::from_library("query", e),
    }
}

impl Plan for ScalingPlan {
    fn run(&self) -> Result<Report> {
        let (p, q, s) = (&self.params, &self.query, self.setup);
        match &self.kind {
            ScalingKind::Temporal {
                order,
                hs,
                tolerance,
            } => {
                let r = temporal_scaling(p, q, *order, hs, s).map_err(run_error)?;
                let mut table = Table::new(&["h", "moment_mean", "moment_stderr", "used"]);
                for (h, m) in hs.iter().zip(&r.moments) {
                    let used = r.fit.points.iter().any(|(x, _)| x == h);
                    let [a, b] = estimate_cells(m);
                    table.push(&[Cell::F(*h), a, b, Cell::U(used as u64)]);
                }
                Ok(Report {
                    summary: vec![fit_summary(&r.fit)],
                    check: slope_check(&r.fit, *tolerance),
                    outputs: Outputs {
                        main: table,
                        extra: vec![("fit", fit_table(&r.fit))],
                    },
                })
            }
            ScalingKind::Spatial { order, separations } => {
                let pairs: Vec<(Vec<f64>, Vec<f64>)> = separations
                    .iter()
                    .map(|d| {
                        let mut x = q.x.clone();
                        x[0] += d;
                        (x, q.x.clone())
                    })
                    .collect();
                let moments =
                    spatial_increment_moments(p, q, *order, &pairs, s).map_err(run_error)?;
                let mut table = Table::new(&["separation", "moment_mean", "moment_stderr"]);
                for (d, m) in separations.iter().zip(&moments) {
                    let [a, b] = estimate_cells(m);
                    table.push(&[Cell::F(*d), a, b]);
                }
                let mut ordered: Vec<(f64, f64)> = separations
                    .iter()
                    .copied()
                    .zip(moments.iter().map(|m| m.mean))
                    .collect();
                ordered.sort_by(|a, b| b.0.total_cmp(&a.0));
                let check = if ordered.windows(2).all(|w| w[1].1 < w[0].1) {
                    Ok(())
                } else {
                    Err("spatial moments do not decrease with the separation".to_string())
                };
                Ok(Report {
                    outputs: Outputs::single(table),
                    summary: vec![format!("moments by decreasing separation: {ordered:?}")],
                    check,
                })
            }
            ScalingKind::Holder {
                hs,
                lattice,
                tolerance,
            } => {
                let r = pathwise_holder_estimate(p, q, hs, lattice, s).map_err(run_error)?;
                let mut table = Table::new(&["h", "median_sup", "mean_sup"]);
                for ((h, med), mean) in hs.iter().zip(&r.medians).zip(&r.means) {
                    table.push(&[Cell::F(*h), Cell::F(*med), Cell::F(*mean)]);
                }
                let mut sups = Table::new(&["path", "h", "sup"]);
                for (i, row) in r.sups.iter().enumerate() {
                    for (h, v) in hs.iter().zip(row) {
                        sups.push(&[Cell::U(i as u64), Cell::F(*h), Cell::F(*v)]);
                    }
                }
                Ok(Report {
                    summary: vec![fit_summary(&r.scaling)],
                    check: slope_check(&r.scaling, *tolerance),
                    outputs: Outputs {
                        main: table,
                        extra: vec![("fit", fit_table(&r.scaling)), ("sups", sups)],
                    },
                })
            }
        }
    }
}

// ------------------------------------------------------------------ bounds

struct BoundsPlan {
    hursts: Vec<HurstParam>,
    v: f64,
    grids: Vec<Vec<f64>>,
    floor: f64,
}

impl BoundsPlan {
    fn new(cfg: &Config) -> Result<Self> {
        let hursts = cfg
            .list_or("bounds.h", vec![0.3, 0.5, 0.7])?
            .into_iter()
            .map(|h| lib("bounds.h", HurstParam::new(h)))
            .collect::<Result<Vec<_>>>()?;
        let v: f64 = cfg.get_or("model.v", 1.0)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::config("model.v", "bound probes need v > 0"));
        }
        let count = cfg.get_or("bounds.grids", PROBE_GRID_COUNT)?;
        let seed = cfg.get_or("bounds.seed", PROBE_SEED)?;
        Ok(BoundsPlan {
            hursts,
            v,
            grids: probe_grids(seed, count),
            floor: cfg.get_or("bounds.floor", 1e-6)?,
        })
    }
}

impl Plan for BoundsPlan {
    fn run(&self) -> Result<Report> {
        let mut table = Table::new(&[
            "hurst",
            "grid",
            "n",
            "times",
            "eigen_ratio",
            "det_ratio",
            "lnd_ratio",
        ]);
        let mut summary = Vec::new();
        let mut check = Ok(());
        for &h in &self.hursts {
            let probes = probe_bounds(&self.grids, h, self.v)
                .map_err(|e| CliError::from_library("bounds.h", e))?;
            for (i, p) in probes.iter().enumerate() {
                table.push(&[
                    Cell::F(h.value()),
                    Cell::U(i as u64),
                    Cell::U(p.times.len() as u64),
                    Cell::S(joined(&p.times)),
                    Cell::F(p.eigen_ratio),
                    Cell::F(p.det_ratio),
                    Cell::F(p.lnd_ratio),
                ]);
            }
            let min = |f: fn(&foult::gaussian_analysis::BoundProbe) -> f64| {
                probes.iter().map(f).fold(f64::INFINITY, f64::min)
            };
            let (e, d, l) = (
                min(|p| p.eigen_ratio),
                min(|p| p.det_ratio),
                min(|p| p.lnd_ratio),
            );
            summary.push(format!(
                "H={h}: eigen floor {e}, det floor {d}, lnd floor {l}"
            ));
            if check.is_ok() && e.min(d).min(l) < self.floor {
                check = Err(format!("H={h}: a bound ratio falls below {}", self.floor));
            }
        }
        Ok(Report {
            outputs: Outputs::single(table),
            summary,
            check,
        })
    }
}

// --------------------------------------------------------------- condition

struct ConditionPlan {
    kind: &'static str,
    h1: HurstParam,
    h2: HurstParam,
    k: MultiIndex,
    delta: Option<Vec<f64>>,
    value: f64,
}

impl ConditionPlan {
    fn new(cfg: &Config) -> Result<Self> {
        let k: Vec<usize> = cfg.list("query.k")?;
        let dim = k.len();
        let k = lib("query.k", MultiIndex::new(k))?;
        let h1 = hurst(cfg, "model.h", None)?;
        match cfg
            .get_or("condition.kind", "existence".to_string())?
            .as_str()
        {
            "existence" => {
                let h2 = hurst(cfg, "model2.h", Some(h1.value()))?;
                let value = existence_value(h1, h2, &k, dim);
                Ok(ConditionPlan {
                    kind: "existence",
                    h1,
                    h2,
                    k,
                    delta: None,
                    value,
                })
            }
            "holder" => {
                let delta: Option<Vec<f64>> = if cfg.has("condition.delta") {
                    Some(cfg.list("condition.delta")?)
                } else {
                    None
                };
                let value = lib(
                    "condition.delta",
                    holder_value(h1, &k, dim, delta.as_deref()),
                )?;
                Ok(ConditionPlan {
                    kind: "holder",
                    h1,
                    h2: h1,
                    k,
                    delta,
                    value,
                })
            }
            other => Err(CliError::config(
                "condition.kind",
                format!("`{other}` is neither `existence` nor `holder`"),
            )),
        }
    }
}

impl Plan for ConditionPlan {
    fn run(&self) -> Result<Report> {
        let holds = self.value <= 1.0;
        let mut table = Table::new(&[
            "kind",
            "h1",
            "h2",
            "k",
            "delta",
            "dim",
            "value",
            "condition",
        ]);
        let k: Vec<f64> = self.k.orders().iter().map(|&o| o as f64).collect();
        table.push(&[
            Cell::S(self.kind.to_string()),
            Cell::F(self.h1.value()),
            Cell::F(self.h2.value()),
            Cell::S(joined(&k)),
            Cell::S(self.delta.as_deref().map(joined).unwrap_or_default()),
            Cell::U(self.k.dim() as u64),
            Cell::F(self.value),
            Cell::S(holds.to_string()),
        ]);
        Ok(Report {
            outputs: Outputs::single(table),
            summary: vec![format!("condition={holds} value={}", self.value)],
            check: if holds {
                Ok(())
            } else {
                Err(format!("condition value {} exceeds 1", self.value))
            },
        })
    }
}
