//! Experiment plans, result tables and derived plot data.
//!
//! A plan lists generator recipes (directly or as size/seed sweeps) and
//! solver configurations. Every (instance, solver) pair yields one
//! [`ResultRow`]; brute force is skipped above its size limit and the skip is
//! recorded. All seeds come from the plan, so reruns reproduce every column
//! except `wall_time_s`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{Family, GeneratorSpec};
use crate::landscape::{gradient_variance, DEFAULT_SAMPLES};
use crate::qubo::QuboInstance;
use crate::rng;
use crate::solvers::{
    residual_energy, solve_brute_force, solve_sa, solve_sgd, solve_sqa, success_probability, SaConfig, SgdConfig,
    SolverId, SolverOutcome, SqaConfig, BRUTE_FORCE_LIMIT,
};

/// Sizes above this draw a runtime warning.
pub const DESK_SIZE_LIMIT: usize = 512;
pub const DEFAULT_GAP_BUCKETS: usize = 5;
/// Buckets with fewer points are flagged as unreliable.
pub const MIN_BUCKET_POINTS: usize = 3;

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const VARIANCE_CURVE_FILE: &str = "variance_curve.csv";
pub const GAP_FILE: &str = "gap_vs_variance.csv";

pub const CSV_HEADER: &str = "instance_id,family,n,seed,sigma_grad,solver,best_energy,residual,success_prob,wall_time_s";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "solver", rename_all = "snake_case")]
pub enum SolverSpec {
    BruteForce,
    Sa(SaConfig),
    Sgd(SgdConfig),
    Sqa(SqaConfig),
}

impl SolverSpec {
    pub fn id(&self) -> SolverId {
        match self {
            SolverSpec::BruteForce => SolverId::BruteForce,
            SolverSpec::Sa(_) => SolverId::Sa,
            SolverSpec::Sgd(_) => SolverId::Sgd,
            SolverSpec::Sqa(_) => SolverId::Sqa,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            SolverSpec::BruteForce => Ok(()),
            SolverSpec::Sa(c) => c.validate(),
            SolverSpec::Sgd(c) => c.validate(),
            SolverSpec::Sqa(c) => c.validate(),
        }
    }

    /// Runs with the configured seed mixed with `salt`.
    pub fn run(&self, instance: &QuboInstance, salt: u64) -> Result<SolverOutcome> {
        match self {
            SolverSpec::BruteForce => solve_brute_force(instance),
            SolverSpec::Sa(c) => solve_sa(instance, &SaConfig { seed: rng::mix(c.seed, salt), ..c.clone() }),
            SolverSpec::Sgd(c) => solve_sgd(instance, &SgdConfig { seed: rng::mix(c.seed, salt), ..c.clone() }),
            SolverSpec::Sqa(c) => solve_sqa(instance, &SqaConfig { seed: rng::mix(c.seed, salt), ..c.clone() }),
        }
    }
}

/// One recipe expanded over sizes and seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub base: GeneratorSpec,
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    #[serde(default)]
    pub instances: Vec<GeneratorSpec>,
    #[serde(default)]
    pub sweeps: Vec<Sweep>,
    pub solvers: Vec<SolverSpec>,
    /// Independent solver runs per cell; trajectories are pooled.
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default = "default_samples")]
    pub landscape_samples: usize,
    /// Seed of the gradient-variance samples.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn one() -> usize {
    1
}
fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

impl ExperimentPlan {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    /// Instance recipes in plan order: explicit ones, then sweeps size-major.
    pub fn expanded(&self) -> Vec<GeneratorSpec> {
        let mut out = self.instances.clone();
        for s in &self.sweeps {
            for &n in &s.sizes {
                out.extend(s.seeds.iter().map(|&seed| s.base.resized(n, seed)));
            }
        }
        out
    }

    /// Checks the plan and returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.expanded().is_empty() {
            return Err(Error::invalid("plan lists no instances"));
        }
        if self.solvers.is_empty() {
            return Err(Error::invalid("plan lists no solvers"));
        }
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions must be positive"));
        }
        if self.landscape_samples < 2 {
            return Err(Error::invalid("landscape_samples must be at least 2"));
        }
        for s in &self.solvers {
            s.validate()?;
        }
        let large: Vec<String> = self
            .expanded()
            .iter()
            .filter(|s| s.size() > DESK_SIZE_LIMIT)
            .map(|s| s.instance_id())
            .collect();
        Ok(if large.is_empty() {
            Vec::new()
        } else {
            vec![format!(
                "{} instance(s) exceed {DESK_SIZE_LIMIT} variables and may run for a long time: {}",
                large.len(),
                large.join(", ")
            )]
        })
    }
}

/// One line of the results table; field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub instance_id: String,
    pub family: Family,
    /// QUBO variable count.
    pub n: usize,
    pub seed: u64,
    pub sigma_grad: f64,
    pub solver: SolverId,
    pub best_energy: f64,
    /// Relative gap to the reference; the absolute gap when the reference is zero.
    pub residual: f64,
    pub success_prob: f64,
    pub wall_time_s: f64,
}

impl ResultRow {
    fn sort_key(&self) -> (&'static str, usize, u64, &'static str, &str) {
        (self.family.as_str(), self.n, self.seed, self.solver.as_str(), &self.instance_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub instance_id: String,
    pub solver: SolverId,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub instance_id: String,
    pub solver: Option<SolverId>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub rows: Vec<ResultRow>,
    pub skipped: Vec<SkipRecord>,
    pub errors: Vec<ErrorRecord>,
    pub warnings: Vec<String>,
}

#[derive(Default)]
struct Cell {
    rows: Vec<ResultRow>,
    skipped: Vec<SkipRecord>,
    errors: Vec<ErrorRecord>,
}

fn pooled(runs: Vec<SolverOutcome>) -> SolverOutcome {
    let mut it = runs.into_iter();
    let mut acc = it.next().expect("at least one repetition");
    for r in it {
        if r.best_energy < acc.best_energy {
            acc.best_energy = r.best_energy;
            acc.best_bits = r.best_bits;
        }
        acc.wall_time_s += r.wall_time_s;
        acc.trajectories += r.trajectories;
        acc.trajectory_energies.extend(r.trajectory_energies);
    }
    acc
}

fn run_cell(spec: &GeneratorSpec, plan: &ExperimentPlan) -> Cell {
    let id = spec.instance_id();
    let mut cell = Cell::default();
    let fail = |solver, e: Error| ErrorRecord { instance_id: id.clone(), solver, message: e.to_string() };
    let instance = match spec.build() {
        Ok(i) => i,
        Err(e) => {
            cell.errors.push(fail(None, e));
            return cell;
        }
    };
    let sigma = match gradient_variance(&instance, plan.landscape_samples, plan.seed) {
        Ok(r) => r.sigma_grad,
        Err(e) => {
            cell.errors.push(fail(None, e));
            return cell;
        }
    };
    let n = instance.n();
    let mut outcomes = Vec::new();
    for solver in &plan.solvers {
        if solver.id() == SolverId::BruteForce && n > BRUTE_FORCE_LIMIT {
            cell.skipped.push(SkipRecord {
                instance_id: id.clone(),
                solver: SolverId::BruteForce,
                reason: format!("{n} variables exceeds the brute-force limit of {BRUTE_FORCE_LIMIT}"),
            });
            continue;
        }
        let salt = rng::mix(spec.seed(), n as u64);
        let runs: Result<Vec<_>> =
            (0..plan.repetitions as u64).map(|r| solver.run(&instance, rng::mix(salt, r))).collect();
        match runs {
            Ok(runs) => outcomes.push(pooled(runs)),
            Err(e) => cell.errors.push(fail(Some(solver.id()), e)),
        }
    }
    if outcomes.is_empty() {
        return cell;
    }

    let reference = if n <= BRUTE_FORCE_LIMIT {
        match outcomes.iter().find(|o| o.solver == SolverId::BruteForce) {
            Some(o) => o.best_energy,
            None => match solve_brute_force(&instance) {
                Ok(o) => o.best_energy,
                Err(e) => {
                    cell.errors.push(fail(None, e));
                    return cell;
                }
            },
        }
    } else {
        outcomes.iter().map(|o| o.best_energy).fold(f64::INFINITY, f64::min)
    };
    for o in outcomes {
        let residual = match residual_energy(o.best_energy, reference) {
            Ok(r) => r,
            Err(_) => o.best_energy - reference,
        };
        cell.rows.push(ResultRow {
            instance_id: id.clone(),
            family: spec.family(),
            n,
            seed: spec.seed(),
            sigma_grad: sigma,
            solver: o.solver,
            best_energy: o.best_energy,
            // Rounding in the relative form can dip just below zero.
            residual: residual.max(0.0),
            success_prob: success_probability(&o.trajectory_energies, reference),
            wall_time_s: o.wall_time_s,
        });
    }
    cell
}

/// Runs every cell of the plan. Instances run in parallel; the result is in
/// canonical order (family, n, seed, solver).
pub fn run_plan(plan: &ExperimentPlan) -> Result<RunReport> {
    let warnings = plan.validate()?;
    let cells: Vec<Cell> = plan.expanded().par_iter().map(|s| run_cell(s, plan)).collect();
    let mut report = RunReport { rows: Vec::new(), skipped: Vec::new(), errors: Vec::new(), warnings };
    for c in cells {
        report.rows.extend(c.rows);
        report.skipped.extend(c.skipped);
        report.errors.extend(c.errors);
    }
    report.rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(report)
}

pub fn write_rows(path: impl AsRef<Path>, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::invalid(format!("unexpected results header: {}", header.join(","))));
    }
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Mean and spread of `sigma_grad` per family and size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariancePoint {
    pub family: Family,
    pub n: usize,
    pub mean_sigma: f64,
    pub std_sigma: f64,
    pub instances: usize,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (m, v.sqrt())
}

/// One point per (family, n), counting each instance once.
pub fn emit_variance_curve(rows: &[ResultRow]) -> Result<Vec<VariancePoint>> {
    if rows.is_empty() {
        return Err(Error::InsufficientData("no result rows".into()));
    }
    let mut seen = BTreeMap::new();
    for r in rows {
        seen.entry((r.family, r.n, r.instance_id.as_str())).or_insert(r.sigma_grad);
    }
    let mut groups: BTreeMap<(Family, usize), Vec<f64>> = BTreeMap::new();
    for ((family, n, _), s) in seen {
        groups.entry((family, n)).or_default().push(s);
    }
    Ok(groups
        .into_iter()
        .map(|((family, n), xs)| {
            let (mean_sigma, std_sigma) = mean_std(&xs);
            VariancePoint { family, n, mean_sigma, std_sigma, instances: xs.len() }
        })
        .collect())
}

/// Mean residual gap `SA - SQA` over instances whose `sigma_grad` falls in the bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapBucket {
    pub sigma_lo: f64,
    pub sigma_hi: f64,
    pub points: usize,
    pub mean_sigma: f64,
    pub mean_gap: f64,
    /// Fewer than [`MIN_BUCKET_POINTS`] instances.
    pub flagged: bool,
}

/// Per-instance `(sigma, residual_sa - residual_sqa)` for instances with both solvers.
pub fn gap_points(rows: &[ResultRow]) -> Result<Vec<(f64, f64)>> {
    let mut by_instance: BTreeMap<&str, (f64, Option<f64>, Option<f64>)> = BTreeMap::new();
    for r in rows {
        let e = by_instance.entry(&r.instance_id).or_insert((r.sigma_grad, None, None));
        match r.solver {
            SolverId::Sa => e.1 = Some(r.residual),
            SolverId::Sqa => e.2 = Some(r.residual),
            _ => {}
        }
    }
    let pts: Vec<(f64, f64)> = by_instance
        .values()
        .filter_map(|&(s, sa, sqa)| Some((s, sa? - sqa?)))
        .collect();
    if pts.is_empty() {
        return Err(Error::InsufficientData("no instance has both SA and SQA results".into()));
    }
    Ok(pts)
}

/// Equal-width buckets over the observed `sigma_grad` range; empty buckets are omitted.
pub fn emit_gap_vs_variance(rows: &[ResultRow], buckets: usize) -> Result<Vec<GapBucket>> {
    if buckets == 0 {
        return Err(Error::invalid("bucket count must be positive"));
    }
    let pts = gap_points(rows)?;
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let count = if hi > lo { buckets } else { 1 };
    let width = (hi - lo) / count as f64;
    let mut members: Vec<Vec<(f64, f64)>> = vec![Vec::new(); count];
    for &p in &pts {
        let k = if width > 0.0 { (((p.0 - lo) / width) as usize).min(count - 1) } else { 0 };
        members[k].push(p);
    }
    Ok(members
        .into_iter()
        .enumerate()
        .filter(|(_, m)| !m.is_empty())
        .map(|(k, m)| {
            let len = m.len() as f64;
            let sigma_hi = if k + 1 == count { hi } else { lo + width * (k + 1) as f64 };
            GapBucket {
                sigma_lo: lo + width * k as f64,
                sigma_hi,
                points: m.len(),
                mean_sigma: m.iter().map(|p| p.0).sum::<f64>() / len,
                mean_gap: m.iter().map(|p| p.1).sum::<f64>() / len,
                flagged: m.len() < MIN_BUCKET_POINTS,
            }
        })
        .collect())
}

fn write_serialized<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for it in items {
        w.serialize(it)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSummary {
    pub complete: bool,
    pub rows: usize,
    pub files: Vec<String>,
    pub skipped: Vec<SkipRecord>,
    pub errors: Vec<ErrorRecord>,
    pub warnings: Vec<String>,
    /// Plot files that could not be derived, with the reason.
    pub notes: Vec<String>,
}

/// Writes the results table, derived plot data and a summary manifest.
/// On an I/O failure the manifest lists what was written before it.
pub fn write_outputs(report: &RunReport, dir: impl AsRef<Path>) -> Result<OutputSummary> {
    let dir = dir.as_ref();
    let mut summary = OutputSummary {
        complete: false,
        rows: report.rows.len(),
        files: Vec::new(),
        skipped: report.skipped.clone(),
        errors: report.errors.clone(),
        warnings: report.warnings.clone(),
        notes: Vec::new(),
    };
    let result = write_files(report, dir, &mut summary);
    summary.complete = result.is_ok();
    let manifest = serde_json::to_string_pretty(&summary)?;
    let written = fs::write(dir.join(SUMMARY_FILE), manifest);
    result?;
    written?;
    Ok(summary)
}

fn write_files(report: &RunReport, dir: &Path, summary: &mut OutputSummary) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_rows(dir.join(RESULTS_FILE), &report.rows)?;
    summary.files.push(RESULTS_FILE.into());
    write_derived(&report.rows, dir, summary)
}

fn write_derived(rows: &[ResultRow], dir: &Path, summary: &mut OutputSummary) -> Result<()> {
    match emit_variance_curve(rows) {
        Ok(points) => {
            write_serialized(&dir.join(VARIANCE_CURVE_FILE), &points)?;
            summary.files.push(VARIANCE_CURVE_FILE.into());
        }
        Err(e) => summary.notes.push(format!("{VARIANCE_CURVE_FILE}: {e}")),
    }
    match emit_gap_vs_variance(rows, DEFAULT_GAP_BUCKETS) {
        Ok(buckets) => {
            write_serialized(&dir.join(GAP_FILE), &buckets)?;
            summary.files.push(GAP_FILE.into());
        }
        Err(e) => summary.notes.push(format!("{GAP_FILE}: {e}")),
    }
    Ok(())
}

/// Aggregate of one solver over a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub family: Family,
    pub solver: SolverId,
    pub rows: usize,
    pub mean_residual: f64,
    pub mean_success: f64,
    pub mean_wall_time_s: f64,
}

pub fn summarize(rows: &[ResultRow]) -> Vec<SolverSummary> {
    let mut groups: BTreeMap<(Family, SolverId), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.family, r.solver)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((family, solver), rs)| {
            let k = rs.len() as f64;
            SolverSummary {
                family,
                solver,
                rows: rs.len(),
                mean_residual: rs.iter().map(|r| r.residual).sum::<f64>() / k,
                mean_success: rs.iter().map(|r| r.success_prob).sum::<f64>() / k,
                mean_wall_time_s: rs.iter().map(|r| r.wall_time_s).sum::<f64>() / k,
            }
        })
        .collect()
}

/// Re-reads a results directory, regenerates the plot files and summarizes it.
pub fn report_dir(dir: impl AsRef<Path>) -> Result<(Vec<SolverSummary>, OutputSummary)> {
    let dir = dir.as_ref();
    let rows = read_rows(dir.join(RESULTS_FILE))?;
    let mut out = OutputSummary {
        complete: true,
        rows: rows.len(),
        files: vec![RESULTS_FILE.into()],
        skipped: Vec::new(),
        errors: Vec::new(),
        warnings: Vec::new(),
        notes: Vec::new(),
    };
    write_derived(&rows, dir, &mut out)?;
    Ok((summarize(&rows), out))
}
