//! Adaptive forward-Euler integration of the flow, with boundary
//! projection onto the invariant hypercube and per-step termination
//! checks.
//!
//! One accepted step = one satisfiability check; rejected retries shrink
//! the step and are counted separately. The paper-facing step counter is
//! `SolverState::steps`.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{self, Assignment, Formula};
use crate::dynamics::{clause_constraint, flow_field_into, Derivative, SolverParams, SolverState};
use crate::gen::PlantedInstance;
use crate::heuristics::{CompetitionConfig, CompetitionSchedule};

#[derive(Debug, Error)]
pub enum IntegrateError {
    #[error("non-finite derivative at step {step}")]
    NonFiniteDerivative { step: u64 },
    #[error("state out of bounds")]
    OutOfBoundsState,
}

/// The accept/reject rule. A candidate step is accepted when the largest
/// pre-projection componentwise change is at most `max_change`; a step at
/// `dt_min` is always accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveConfig {
    pub max_change: f64,
    pub grow: f64,
    pub shrink: f64,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig { max_change: 0.125, grow: 1.2, shrink: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitPolicy {
    /// `v ~ U(-1,1)`, `x_s = 1/2`, `x_l = 1`.
    RandomVoltages,
    /// Use the given state verbatim (bounds-checked).
    Explicit(SolverState),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub max_steps: u64,
    pub seed: u64,
    pub init: InitPolicy,
    pub record_trajectory: bool,
    pub snapshot_stride: u64,
    pub adaptive: AdaptiveConfig,
    /// Per-clause long-memory rate adaptation; `None` = plain solver.
    pub competition: Option<CompetitionConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_steps: 100_000_000,
            seed: 0,
            init: InitPolicy::RandomVoltages,
            record_trajectory: false,
            snapshot_stride: 1,
            adaptive: AdaptiveConfig::default(),
            competition: None,
        }
    }
}

impl RunConfig {
    pub fn with_seed(seed: u64) -> Self {
        RunConfig { seed, ..Default::default() }
    }
}

/// One row of the optional trajectory dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub step: u64,
    pub t: f64,
    pub dt: f64,
    pub num_unsat: usize,
    pub max_xl: f64,
}

/// Outcome of one solve attempt.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub solved: bool,
    pub assignment: Option<Assignment>,
    pub steps: u64,
    pub rejected_steps: u64,
    pub integrated_time: f64,
    pub wall_time: f64,
    pub max_xl_seen: f64,
    pub mean_dt: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trajectory: Vec<TrajectorySample>,
}

/// Initial state per `cfg.init`; deterministic given the seed.
pub fn init_state(
    f: &Formula,
    params: &SolverParams,
    cfg: &RunConfig,
) -> Result<SolverState, IntegrateError> {
    let n = f.num_vars();
    let m = f.num_clauses();
    match &cfg.init {
        InitPolicy::RandomVoltages => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            Ok(SolverState {
                v: (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                x_s: vec![0.5; m],
                x_l: vec![1.0; m],
                t: 0.0,
                dt: params.dt_min,
                steps: 0,
            })
        }
        InitPolicy::Explicit(s) => {
            if s.v.len() != n
                || s.x_s.len() != m
                || s.x_l.len() != m
                || !s.in_bounds(params.xl_max_for(m))
            {
                return Err(IntegrateError::OutOfBoundsState);
            }
            Ok(s.clone())
        }
    }
}

/// If every clause constraint is below 1/2, returns `sign(v)` (zero
/// voltages read as TRUE); the returned assignment always verifies.
pub fn check_solved(f: &Formula, state: &SolverState) -> Option<Assignment> {
    // C_j < 1/2 is equivalent to some literal having q*v > 0.
    let sat = f
        .clauses()
        .iter()
        .all(|c| c.literals().iter().any(|l| l.q() * state.v[l.var] > 0.0));
    if !sat {
        return None;
    }
    let a = Assignment::new(
        state.v.iter().map(|&v| if v < 0.0 { -1 } else { 1 }).collect(),
    );
    debug_assert!(cnf::verify(f, &a).unwrap());
    Some(a)
}

/// One forward-Euler attempt with the uniform long-memory rate. On
/// accept, the projected state is committed and `dt` grows; on reject,
/// `dt` halves and the state is untouched.
pub fn euler_step(
    f: &Formula,
    params: &SolverParams,
    adaptive: &AdaptiveConfig,
    state: &mut SolverState,
    deriv: &mut Derivative,
) -> Result<bool, IntegrateError> {
    let alpha = vec![params.alpha; f.num_clauses()];
    let max_d = flow_field_into(f, params, &alpha, state, deriv);
    if !max_d.is_finite() {
        return Err(IntegrateError::NonFiniteDerivative { step: state.steps });
    }
    if state.dt * max_d > adaptive.max_change && state.dt > params.dt_min {
        state.dt = (state.dt * adaptive.shrink).max(params.dt_min);
        return Ok(false);
    }
    commit(params, adaptive, state, deriv, params.xl_max_for(f.num_clauses()));
    Ok(true)
}

/// Applies `state += dt * deriv` with componentwise projection onto
/// `[-1,1] x [0,1] x [1, xl_max]`, then advances `t`, `steps`, `dt`.
/// Returns the largest long memory after the step.
#[inline]
fn commit(
    params: &SolverParams,
    adaptive: &AdaptiveConfig,
    state: &mut SolverState,
    deriv: &Derivative,
    xl_max: f64,
) -> f64 {
    let dt = state.dt;
    for (v, dv) in state.v.iter_mut().zip(&deriv.dv) {
        *v = (*v + dt * dv).clamp(-1.0, 1.0);
    }
    for (x, dx) in state.x_s.iter_mut().zip(&deriv.dxs) {
        *x = (*x + dt * dx).clamp(0.0, 1.0);
    }
    let mut max_xl = 1.0f64;
    for (x, dx) in state.x_l.iter_mut().zip(&deriv.dxl) {
        *x = (*x + dt * dx).clamp(1.0, xl_max);
        max_xl = max_xl.max(*x);
    }
    state.t += dt;
    state.steps += 1;
    state.dt = (dt * adaptive.grow).min(params.dt_max);
    max_xl
}

/// Integrates until solved or the step budget runs out, calling
/// `observer` after every accepted step.
pub fn solve_observed(
    f: &Formula,
    params: &SolverParams,
    cfg: &RunConfig,
    mut observer: impl FnMut(&SolverState),
) -> RunRecord {
    let start = Instant::now();
    let m = f.num_clauses();
    let xl_max = params.xl_max_for(m);
    let mut record = RunRecord {
        solved: false,
        assignment: None,
        steps: 0,
        rejected_steps: 0,
        integrated_time: 0.0,
        wall_time: 0.0,
        max_xl_seen: 1.0,
        mean_dt: 0.0,
        seed: cfg.seed,
        error: None,
        trajectory: Vec::new(),
    };
    let mut state = match init_state(f, params, cfg) {
        Ok(s) => s,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    let mut schedule = cfg
        .competition
        .as_ref()
        .map(|c| CompetitionSchedule::new(*c, m));
    let uniform_alpha = vec![params.alpha; m];
    let mut deriv = Derivative::zeros(f.num_vars(), m);

    while state.steps < cfg.max_steps {
        let alpha: &[f64] = match &schedule {
            Some(s) => s.alpha(),
            None => &uniform_alpha,
        };
        let max_d = flow_field_into(f, params, alpha, &state, &mut deriv);
        if !max_d.is_finite() {
            record.error = Some(
                IntegrateError::NonFiniteDerivative { step: state.steps }.to_string(),
            );
            break;
        }
        // The derivative only depends on the state, so rejected retries
        // just shrink dt without re-evaluating the flow.
        while state.dt * max_d > cfg.adaptive.max_change && state.dt > params.dt_min {
            state.dt = (state.dt * cfg.adaptive.shrink).max(params.dt_min);
            record.rejected_steps += 1;
        }
        let max_xl = commit(params, &cfg.adaptive, &mut state, &deriv, xl_max);
        if max_xl > record.max_xl_seen {
            record.max_xl_seen = max_xl;
        }
        if let Some(s) = &mut schedule {
            s.maybe_adapt(&mut state, xl_max);
        }
        if cfg.record_trajectory && state.steps % cfg.snapshot_stride == 0 {
            record.trajectory.push(sample(f, &state));
        }
        observer(&state);
        let solved = check_solved(f, &state);
        if let Some(a) = solved {
            debug_assert!(cnf::verify(f, &a).unwrap());
            record.solved = true;
            record.assignment = Some(a);
            break;
        }
    }

    record.steps = state.steps;
    record.integrated_time = state.t;
    record.mean_dt = if state.steps > 0 { state.t / state.steps as f64 } else { 0.0 };
    record.wall_time = start.elapsed().as_secs_f64();
    record
}

fn sample(f: &Formula, state: &SolverState) -> TrajectorySample {
    let num_unsat = (0..f.num_clauses())
        .filter(|&j| clause_constraint(f, &state.v, j) >= 0.5)
        .count();
    let max_xl = state.x_l.iter().cloned().fold(1.0f64, f64::max);
    TrajectorySample {
        step: state.steps,
        t: state.t,
        dt: state.dt,
        num_unsat,
        max_xl,
    }
}

/// One full solve attempt.
pub fn solve(f: &Formula, params: &SolverParams, cfg: &RunConfig) -> RunRecord {
    solve_observed(f, params, cfg, |_| {})
}

/// Outcome of a run started inside the restricted solution orthant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrthantRecord {
    pub record: RunRecord,
    /// Largest clause constraint seen along the whole trajectory.
    pub max_constraint: f64,
    /// Whether every gauged voltage was non-decreasing across accepted steps.
    pub monotone: bool,
}

/// Test harness for the basin-of-attraction property: gauges the instance
/// so all-true is a model, starts with `v_i` in `[1 - 2*gamma, 1]` and
/// `x_s = 0`, and tracks the constraint ceiling and voltage monotonicity.
pub fn solve_from_orthant(
    inst: &PlantedInstance,
    params: &SolverParams,
    cfg: &RunConfig,
) -> OrthantRecord {
    let f = inst.formula.gauged(&inst.planted).expect("planted length");
    let n = f.num_vars();
    let m = f.num_clauses();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let lo = 1.0 - 2.0 * params.gamma;
    let init = SolverState {
        v: (0..n).map(|_| rng.gen_range(lo..=1.0)).collect(),
        x_s: vec![0.0; m],
        x_l: vec![1.0; m],
        t: 0.0,
        dt: params.dt_min,
        steps: 0,
    };
    let cfg = RunConfig {
        init: InitPolicy::Explicit(init.clone()),
        ..cfg.clone()
    };
    let mut prev_v = init.v.clone();
    let mut max_c = (0..m)
        .map(|j| clause_constraint(&f, &init.v, j))
        .fold(0.0f64, f64::max);
    let mut monotone = true;
    let record = solve_observed(&f, params, &cfg, |state| {
        for (p, v) in prev_v.iter().zip(&state.v) {
            if *v < *p - 1e-12 {
                monotone = false;
            }
        }
        prev_v.copy_from_slice(&state.v);
        for j in 0..m {
            let c = clause_constraint(&f, &state.v, j);
            if c > max_c {
                max_c = c;
            }
        }
    });
    OrthantRecord { record, max_constraint: max_c, monotone }
}
