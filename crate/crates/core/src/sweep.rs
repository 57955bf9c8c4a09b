//! Ensemble sweeps over problem size, order statistics, scaling fits,
//! and factor-graph snapshots of unsatisfied clauses.
//!
//! A sweep generates seeded planted instances per `n`, runs the chosen
//! solver on each, and aggregates medians and percentiles. Results are
//! keyed by instance seed, so they do not depend on worker count or
//! scheduling order. Per-run records can be appended to a JSON-lines log,
//! which doubles as a resume checkpoint; the summary is a CSV.

use std::collections::HashSet;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::Formula;
use crate::dynamics::{clause_constraint, SolverParams, SolverState};
use crate::gen::{generate_cdc, CdcParams};
use crate::heuristics::CompetitionConfig;
use crate::integrator::{solve, RunConfig};
use crate::walksat::{walksat_solve, WalkSatParams};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("need at least {need} points, got {got}")]
    InsufficientPoints { need: usize, got: usize },
    #[error("non-positive data point at index {0}")]
    NonPositivePoint(usize),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad run log line: {0}")]
    BadLog(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverKind {
    Dmm,
    DmmCompetition,
    WalkSat,
}

impl SolverKind {
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::Dmm => "dmm",
            SolverKind::DmmCompetition => "dmm-competition",
            SolverKind::WalkSat => "walksat",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub solver: SolverKind,
    pub n_values: Vec<usize>,
    pub ratio: f64,
    pub p0: f64,
    pub instances_per_n: usize,
    pub base_seed: u64,
    /// Max integration steps (or WalkSAT flips) per instance.
    pub budget: u64,
    pub workers: usize,
    /// `None` = defaults for the sweep's ratio.
    #[serde(default)]
    pub params: Option<SolverParams>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.instances_per_n < 1 {
            return Err("instances_per_n must be >= 1".into());
        }
        if !self.n_values.windows(2).all(|w| w[0] < w[1]) {
            return Err("n_values must be strictly increasing".into());
        }
        Ok(())
    }

    pub fn solver_params(&self) -> SolverParams {
        self.params.unwrap_or_else(|| SolverParams::for_ratio(self.ratio))
    }
}

/// One solver run within a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRun {
    pub solver: SolverKind,
    pub n: usize,
    pub instance: usize,
    pub gen_seed: u64,
    pub run_seed: u64,
    pub solved: bool,
    pub steps: u64,
    pub integrated_time: f64,
    pub wall_time: f64,
    pub max_xl_seen: f64,
    pub mean_dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Aggregate statistics for one problem size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SizeSummary {
    pub n: usize,
    pub instances: usize,
    pub solved: usize,
    /// Lower median of steps with unsolved runs ranked as infinite;
    /// `None` when half or more of the instances are unsolved.
    pub median_steps: Option<f64>,
    pub p10_steps: Option<f64>,
    pub p90_steps: Option<f64>,
    /// Lower median of executed steps, unsolved runs counted at budget.
    pub median_steps_censored: f64,
    pub median_time: Option<f64>,
    pub median_max_xl: Option<f64>,
    pub mean_dt: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub runs: Vec<SweepRun>,
    pub per_n: Vec<SizeSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_fit: Option<Fit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponential_fit: Option<Fit>,
}

impl SweepResult {
    /// `(n, median_steps)` for sizes where the median is defined.
    pub fn fit_points(&self) -> Vec<(f64, f64)> {
        self.per_n
            .iter()
            .filter_map(|s| s.median_steps.map(|m| (s.n as f64, m)))
            .collect()
    }

    /// Same, but with censored medians so every size contributes.
    pub fn censored_fit_points(&self) -> Vec<(f64, f64)> {
        self.per_n
            .iter()
            .map(|s| (s.n as f64, s.median_steps_censored))
            .collect()
    }
}

/// Least-squares fit of `y = intercept + slope * x` in transformed
/// coordinates (see [`fit_power_law`], [`fit_exponential`]).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// Residual sum of squares in log space, comparable across models.
    pub residual_ss: f64,
}

fn ols(xs: &[f64], ys: &[f64]) -> Result<Fit, SweepError> {
    let k = xs.len();
    if k < 3 {
        return Err(SweepError::InsufficientPoints { need: 3, got: k });
    }
    let xbar = xs.iter().sum::<f64>() / k as f64;
    let ybar = ys.iter().sum::<f64>() / k as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let residual_ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = (residual_ss / (k as f64 - 2.0) / sxx).sqrt();
    Ok(Fit { slope, intercept, stderr, residual_ss })
}

/// Fits `median ~ n^a` by OLS of `log(median)` on `log(n)`; `slope` is
/// the exponent `a`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<Fit, SweepError> {
    check_positive(points)?;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    ols(&xs, &ys)
}

/// Fits `median ~ exp(b * n)` by OLS of `log(median)` on `n`; `slope` is
/// the rate `b`.
pub fn fit_exponential(points: &[(f64, f64)]) -> Result<Fit, SweepError> {
    check_positive(points)?;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    ols(&xs, &ys)
}

fn check_positive(points: &[(f64, f64)]) -> Result<(), SweepError> {
    for (i, p) in points.iter().enumerate() {
        if p.0 <= 0.0 || p.1 <= 0.0 {
            return Err(SweepError::NonPositivePoint(i));
        }
    }
    Ok(())
}

/// Nearest-rank percentile of solver steps with unsolved runs sorted
/// last as effectively infinite. `None` when the rank lands on an
/// unsolved run. `q = 0.5` gives the lower median.
fn step_percentile(runs: &[&SweepRun], q: f64) -> Option<f64> {
    let mut keyed: Vec<(bool, u64)> = runs.iter().map(|r| (!r.solved, r.steps)).collect();
    keyed.sort();
    let idx = ((q * keyed.len() as f64).ceil() as usize).max(1) - 1;
    let (unsolved, steps) = keyed[idx];
    (!unsolved).then_some(steps as f64)
}

fn median_of(mut vals: Vec<f64>) -> f64 {
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals[(vals.len() - 1) / 2]
}

fn summarize(n: usize, runs: &[&SweepRun]) -> SizeSummary {
    let solved: Vec<&&SweepRun> = runs.iter().filter(|r| r.solved).collect();
    let majority = solved.len() * 2 > runs.len();
    let solved_median = |f: &dyn Fn(&SweepRun) -> f64| -> Option<f64> {
        majority.then(|| median_of(solved.iter().map(|r| f(r)).collect()))
    };
    SizeSummary {
        n,
        instances: runs.len(),
        solved: solved.len(),
        median_steps: if majority { step_percentile(runs, 0.5) } else { None },
        p10_steps: step_percentile(runs, 0.1),
        p90_steps: step_percentile(runs, 0.9),
        median_steps_censored: median_of(runs.iter().map(|r| r.steps as f64).collect()),
        median_time: solved_median(&|r| r.integrated_time),
        median_max_xl: solved_median(&|r| r.max_xl_seen),
        mean_dt: solved_median(&|r| r.mean_dt),
    }
}

/// SplitMix64, used to derive independent per-run seeds from the base
/// seed and the run coordinates.
fn derive_seed(base: u64, n: usize, instance: usize, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add((n as u64).wrapping_mul(0x9E3779B97F4A7C15))
        .wrapping_add((instance as u64).wrapping_mul(0xBF58476D1CE4E5B9))
        .wrapping_add(stream.wrapping_mul(0x94D049BB133111EB));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn run_one(cfg: &SweepConfig, n: usize, instance: usize) -> SweepRun {
    let gen_seed = derive_seed(cfg.base_seed, n, instance, 0);
    let run_seed = derive_seed(cfg.base_seed, n, instance, 1);
    let inst = generate_cdc(&CdcParams {
        n,
        ratio: cfg.ratio,
        p0: cfg.p0,
        seed: gen_seed,
    })
    .expect("sweep params validated");
    let params = cfg.solver_params();
    let record = match cfg.solver {
        SolverKind::WalkSat => walksat_solve(
            &inst.formula,
            &WalkSatParams { noise: 0.5, max_flips: cfg.budget, seed: run_seed },
        ),
        dmm => solve(
            &inst.formula,
            &params,
            &RunConfig {
                max_steps: cfg.budget,
                competition: (dmm == SolverKind::DmmCompetition)
                    .then(CompetitionConfig::default),
                ..RunConfig::with_seed(run_seed)
            },
        ),
    };
    SweepRun {
        solver: cfg.solver,
        n,
        instance,
        gen_seed,
        run_seed,
        solved: record.solved,
        steps: record.steps,
        integrated_time: record.integrated_time,
        wall_time: record.wall_time,
        max_xl_seen: record.max_xl_seen,
        mean_dt: record.mean_dt,
        error: record.error,
    }
}

/// Runs the sweep, optionally appending each completed run to a
/// JSON-lines log. Runs already present in the log are not repeated, so
/// an interrupted sweep resumes where it stopped.
pub fn run_sweep_logged(
    cfg: &SweepConfig,
    log_path: Option<&Path>,
) -> Result<SweepResult, SweepError> {
    cfg.validate().map_err(SweepError::BadLog)?;
    let mut done: Vec<SweepRun> = Vec::new();
    if let Some(path) = log_path {
        if path.exists() {
            let reader = BufReader::new(std::fs::File::open(path)?);
            for line in reader.lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let run: SweepRun =
                    serde_json::from_str(&line).map_err(|e| SweepError::BadLog(e.to_string()))?;
                done.push(run);
            }
        }
    }
    let have: HashSet<(usize, usize)> = done.iter().map(|r| (r.n, r.instance)).collect();
    let todo: Vec<(usize, usize)> = cfg
        .n_values
        .iter()
        .flat_map(|&n| (0..cfg.instances_per_n).map(move |i| (n, i)))
        .filter(|key| !have.contains(key))
        .collect();

    let log = match log_path {
        Some(path) => Some(Mutex::new(
            OpenOptions::new().create(true).append(true).open(path)?,
        )),
        None => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .expect("thread pool");
    let mut fresh: Vec<SweepRun> = pool.install(|| {
        todo.par_iter()
            .map(|&(n, i)| {
                let run = run_one(cfg, n, i);
                if let Some(log) = &log {
                    let mut f = log.lock().unwrap();
                    let line = serde_json::to_string(&run).unwrap();
                    let _ = writeln!(f, "{line}");
                }
                run
            })
            .collect()
    });

    let mut runs = done;
    runs.append(&mut fresh);
    runs.sort_by_key(|r| (r.n, r.instance));
    let per_n: Vec<SizeSummary> = cfg
        .n_values
        .iter()
        .map(|&n| {
            let group: Vec<&SweepRun> = runs.iter().filter(|r| r.n == n).collect();
            summarize(n, &group)
        })
        .collect();
    let mut result = SweepResult {
        config: cfg.clone(),
        runs,
        per_n,
        power_fit: None,
        exponential_fit: None,
    };
    let points = result.fit_points();
    result.power_fit = fit_power_law(&points).ok();
    result.exponential_fit = fit_exponential(&points).ok();
    Ok(result)
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult, SweepError> {
    run_sweep_logged(cfg, None)
}

/// Summary CSV, one row per problem size.
pub fn write_summary_csv(result: &SweepResult, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(
        out,
        "solver,n,ratio,p0,solved,median_steps,p10,p90,median_t,median_max_xl,mean_dt"
    )?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for s in &result.per_n {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            result.config.solver.name(),
            s.n,
            result.config.ratio,
            result.config.p0,
            s.solved,
            opt(s.median_steps),
            opt(s.p10_steps),
            opt(s.p90_steps),
            opt(s.median_time),
            opt(s.median_max_xl),
            opt(s.mean_dt),
        )?;
    }
    Ok(())
}

/// The unsatisfied / recently-unsatisfied factor subgraph at one step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnsatGraphSnapshot {
    pub step: u64,
    pub unsat_clauses: Vec<usize>,
    /// Satisfied clauses whose short memory is still positive.
    pub recently_unsat_clauses: Vec<usize>,
    pub incident_vars: Vec<usize>,
    /// Sizes of connected components, counting both clause and variable
    /// nodes; sums to the number of nodes in the snapshot.
    pub component_sizes: Vec<usize>,
}

/// Clause-state change across one accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionDelta {
    pub newly_satisfied: usize,
    pub newly_unsatisfied: usize,
}

pub fn snapshot_unsat_graph(f: &Formula, state: &SolverState) -> UnsatGraphSnapshot {
    let m = f.num_clauses();
    let mut unsat = Vec::new();
    let mut recent = Vec::new();
    for j in 0..m {
        if clause_constraint(f, &state.v, j) >= 0.5 {
            unsat.push(j);
        } else if state.x_s[j] > 0.0 {
            recent.push(j);
        }
    }
    let selected: Vec<usize> = unsat.iter().chain(&recent).cloned().collect();
    let sel_set: HashSet<usize> = selected.iter().cloned().collect();
    let mut vars: Vec<usize> = selected
        .iter()
        .flat_map(|&j| f.clauses()[j].literals().iter().map(|l| l.var))
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    vars.sort_unstable();

    // union-find over clause nodes and variable nodes
    let mut var_occ: Vec<Vec<usize>> = vec![Vec::new(); f.num_vars()];
    for &j in &selected {
        for l in f.clauses()[j].literals() {
            var_occ[l.var].push(j);
        }
    }
    let mut component_sizes = Vec::new();
    let mut seen_clause: HashSet<usize> = HashSet::new();
    for &start in &selected {
        if seen_clause.contains(&start) {
            continue;
        }
        let mut stack = vec![start];
        seen_clause.insert(start);
        let mut clause_nodes = 0usize;
        let mut var_nodes: HashSet<usize> = HashSet::new();
        while let Some(j) = stack.pop() {
            clause_nodes += 1;
            for l in f.clauses()[j].literals() {
                var_nodes.insert(l.var);
                for &j2 in &var_occ[l.var] {
                    if sel_set.contains(&j2) && seen_clause.insert(j2) {
                        stack.push(j2);
                    }
                }
            }
        }
        component_sizes.push(clause_nodes + var_nodes.len());
    }
    UnsatGraphSnapshot {
        step: state.steps,
        unsat_clauses: unsat,
        recently_unsat_clauses: recent,
        incident_vars: vars,
        component_sizes,
    }
}

/// Snapshots two consecutive accepted states and counts clauses that
/// changed satisfaction status in the step between them.
pub fn analyze_transition(
    f: &Formula,
    before: &SolverState,
    after: &SolverState,
) -> (UnsatGraphSnapshot, UnsatGraphSnapshot, TransitionDelta) {
    let a = snapshot_unsat_graph(f, before);
    let b = snapshot_unsat_graph(f, after);
    let before_unsat: HashSet<usize> = a.unsat_clauses.iter().cloned().collect();
    let after_unsat: HashSet<usize> = b.unsat_clauses.iter().cloned().collect();
    let delta = TransitionDelta {
        newly_satisfied: before_unsat.difference(&after_unsat).count(),
        newly_unsatisfied: after_unsat.difference(&before_unsat).count(),
    };
    (a, b, delta)
}
