//! The continuous flow field driving the solver.
//!
//! Per clause `j` over voltages `v` with polarities `q`:
//!
//! ```text
//! C_j  = 1/2 * min_i (1 - q_ij v_i)                 (clause constraint)
//! G_ij = 1/2 * q_ij * min over the other two (1 - q v)
//! R_ij = 1/2 * (q_ij - v_i)   if i is the argmin, else 0
//!
//! dv_i   = sum_{j : i in j} [ x_l,j x_s,j G_ij + (1 + zeta x_l,j)(1 - x_s,j) R_ij ]
//! dx_s,j = beta (x_s,j + eps)(C_j - gamma)
//! dx_l,j = alpha_j (C_j - delta)
//! ```
//!
//! A clause is satisfied exactly when `C_j < 1/2`, so `sign(v)` is a model
//! once every constraint is below 1/2. Degenerate minima are broken
//! deterministically toward the lowest variable index.

use serde::{Deserialize, Serialize};

use crate::cnf::Formula;

/// All ODE constants and the step-size bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Long-memory growth rate.
    pub alpha: f64,
    /// Short-memory rate.
    pub beta: f64,
    /// Short-memory constraint threshold.
    pub gamma: f64,
    /// Long-memory constraint threshold.
    pub delta: f64,
    /// Short-memory floor offset.
    pub epsilon: f64,
    /// Rigidity learning-rate factor.
    pub zeta: f64,
    /// Long-memory cap; `None` means `1e4 * m`.
    pub xl_max: Option<f64>,
    pub dt_min: f64,
    pub dt_max: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            alpha: 5.0,
            beta: 20.0,
            gamma: 0.25,
            delta: 0.05,
            epsilon: 1e-3,
            zeta: 1e-1,
            xl_max: None,
            dt_min: 2f64.powi(-7),
            dt_max: 1e3,
        }
    }
}

impl SolverParams {
    /// Default parameters with `zeta` picked by clause density: `1e-1`
    /// for ratio >= 6, `1e-3` near 4.3, `1e-2` otherwise (ratio 5 and
    /// uniform 4.25).
    pub fn for_ratio(ratio: f64) -> Self {
        let zeta = if ratio >= 6.0 {
            1e-1
        } else if (ratio - 4.3).abs() < 0.025 {
            1e-3
        } else {
            1e-2
        };
        SolverParams { zeta, ..Default::default() }
    }

    pub fn xl_max_for(&self, num_clauses: usize) -> f64 {
        self.xl_max.unwrap_or(1e4 * num_clauses as f64)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0 < self.delta && self.delta < self.gamma && self.gamma < 0.5) {
            return Err(format!(
                "need 0 < delta < gamma < 1/2, got delta {} gamma {}",
                self.delta, self.gamma
            ));
        }
        if self.epsilon <= 0.0 || self.zeta <= 0.0 {
            return Err("epsilon and zeta must be positive".into());
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt_max) {
            return Err("need 0 < dt_min < dt_max".into());
        }
        Ok(())
    }
}

/// Full dynamical state: voltages plus both memories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverState {
    pub v: Vec<f64>,
    pub x_s: Vec<f64>,
    pub x_l: Vec<f64>,
    /// Integration time, arbitrary units.
    pub t: f64,
    pub dt: f64,
    /// Accepted steps.
    pub steps: u64,
}

impl SolverState {
    pub fn in_bounds(&self, xl_max: f64) -> bool {
        self.v.iter().all(|&v| (-1.0..=1.0).contains(&v))
            && self.x_s.iter().all(|&x| (0.0..=1.0).contains(&x))
            && self.x_l.iter().all(|&x| (1.0..=xl_max).contains(&x))
    }
}

/// Right-hand side of the ODE system.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivative {
    pub dv: Vec<f64>,
    pub dxs: Vec<f64>,
    pub dxl: Vec<f64>,
}

impl Derivative {
    pub fn zeros(n: usize, m: usize) -> Self {
        Derivative {
            dv: vec![0.0; n],
            dxs: vec![0.0; m],
            dxl: vec![0.0; m],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.dv.iter().chain(&self.dxs).chain(&self.dxl).all(|x| x.is_finite())
    }
}

/// The three `1 - q v` gaps of clause `j`, in literal slot order.
#[inline]
fn clause_gaps(f: &Formula, v: &[f64], j: usize) -> [f64; 3] {
    let lits = f.clauses()[j].literals();
    [
        1.0 - lits[0].q() * v[lits[0].var],
        1.0 - lits[1].q() * v[lits[1].var],
        1.0 - lits[2].q() * v[lits[2].var],
    ]
}

/// Slot of the minimal gap; ties go to the lowest variable index.
#[inline]
fn argmin_slot(f: &Formula, gaps: &[f64; 3], j: usize) -> usize {
    let lits = f.clauses()[j].literals();
    let mut best = 0;
    for k in 1..3 {
        if gaps[k] < gaps[best]
            || (gaps[k] == gaps[best] && lits[k].var < lits[best].var)
        {
            best = k;
        }
    }
    best
}

/// Constraint `C_j = 1/2 min_i (1 - q_ij v_i)`, in `[0, 1]` for in-bounds
/// voltages; the clause is satisfied iff `C_j < 1/2`.
pub fn clause_constraint(f: &Formula, v: &[f64], j: usize) -> f64 {
    let gaps = clause_gaps(f, v, j);
    0.5 * gaps[0].min(gaps[1]).min(gaps[2])
}

/// Variable index attaining the clause minimum (the clause's most
/// satisfied literal), deterministic under ties.
pub fn argmin_literal(f: &Formula, v: &[f64], j: usize) -> usize {
    let gaps = clause_gaps(f, v, j);
    f.clauses()[j].literals()[argmin_slot(f, &gaps, j)].var
}

/// Gradient-like drive of clause `j` on variable `i`:
/// `1/2 q_ij min` over the other two gaps. Zero when `i` is not in the
/// clause.
pub fn gradient_term(f: &Formula, v: &[f64], j: usize, i: usize) -> f64 {
    let lits = f.clauses()[j].literals();
    let Some(slot) = f.clauses()[j].contains_var(i) else {
        return 0.0;
    };
    let gaps = clause_gaps(f, v, j);
    let other = match slot {
        0 => gaps[1].min(gaps[2]),
        1 => gaps[0].min(gaps[2]),
        _ => gaps[0].min(gaps[1]),
    };
    0.5 * lits[slot].q() * other
}

/// Rigidity drive: holds the clause's most satisfied voltage at its
/// satisfying rail, `1/2 (q_ij - v_i)` for the argmin variable, zero for
/// the other two (and for variables outside the clause).
pub fn rigidity_term(f: &Formula, v: &[f64], j: usize, i: usize) -> f64 {
    let lits = f.clauses()[j].literals();
    let Some(slot) = f.clauses()[j].contains_var(i) else {
        return 0.0;
    };
    let gaps = clause_gaps(f, v, j);
    if argmin_slot(f, &gaps, j) == slot {
        0.5 * (lits[slot].q() - v[i])
    } else {
        0.0
    }
}

/// Diagnostic product-form clause energy
/// `E_j = 1/8 * prod (1 - q v)`, in `[0, 1]`.
pub fn clause_energy(f: &Formula, v: &[f64], j: usize) -> f64 {
    let gaps = clause_gaps(f, v, j);
    0.125 * gaps[0] * gaps[1] * gaps[2]
}

/// Full right-hand side, clause-major, with a per-clause long-memory rate
/// (all equal to `params.alpha` outside competition mode). `out` is a
/// reusable buffer; `O(m)` per call. Returns the largest absolute
/// derivative component, which the integrator's acceptance rule needs
/// every step.
pub fn flow_field_into(
    f: &Formula,
    params: &SolverParams,
    alpha: &[f64],
    state: &SolverState,
    out: &mut Derivative,
) -> f64 {
    debug_assert_eq!(alpha.len(), f.num_clauses());
    out.dv.iter_mut().for_each(|x| *x = 0.0);
    let v = &state.v;
    let mut max_abs = 0.0f64;
    for (j, clause) in f.clauses().iter().enumerate() {
        let lits = clause.literals();
        let gaps = [
            1.0 - lits[0].q() * v[lits[0].var],
            1.0 - lits[1].q() * v[lits[1].var],
            1.0 - lits[2].q() * v[lits[2].var],
        ];
        let mut min_slot = 0;
        for k in 1..3 {
            if gaps[k] < gaps[min_slot]
                || (gaps[k] == gaps[min_slot] && lits[k].var < lits[min_slot].var)
            {
                min_slot = k;
            }
        }
        let c = 0.5 * gaps[min_slot];
        let xs = state.x_s[j];
        let xl = state.x_l[j];
        let dxs = params.beta * (xs + params.epsilon) * (c - params.gamma);
        let dxl = alpha[j] * (c - params.delta);
        out.dxs[j] = dxs;
        out.dxl[j] = dxl;
        max_abs = max_abs.max(dxs.abs()).max(dxl.abs());

        let grad_w = xl * xs;
        let rigid_w = (1.0 + params.zeta * xl) * (1.0 - xs);
        // min over the other two gaps, per slot
        let others = [
            gaps[1].min(gaps[2]),
            gaps[0].min(gaps[2]),
            gaps[0].min(gaps[1]),
        ];
        for k in 0..3 {
            let lit = lits[k];
            let mut d = grad_w * 0.5 * lit.q() * others[k];
            if k == min_slot {
                d += rigid_w * 0.5 * (lit.q() - v[lit.var]);
            }
            out.dv[lit.var] += d;
        }
    }
    for &dv in &out.dv {
        max_abs = max_abs.max(dv.abs());
    }
    max_abs
}

/// Allocation-per-call variant of [`flow_field_into`] with the uniform
/// long-memory rate.
pub fn flow_field(f: &Formula, params: &SolverParams, state: &SolverState) -> Derivative {
    let mut out = Derivative::zeros(f.num_vars(), f.num_clauses());
    let alpha = vec![params.alpha; f.num_clauses()];
    flow_field_into(f, params, &alpha, state, &mut out);
    out
}

/// Closed-form divergence of the voltage flow,
/// `-1/2 sum_j (1 + zeta x_l,j)(1 - x_s,j)`, valid away from the argmin
/// switching hyperplanes.
pub fn voltage_divergence(params: &SolverParams, state: &SolverState) -> f64 {
    -0.5 * state
        .x_s
        .iter()
        .zip(&state.x_l)
        .map(|(&xs, &xl)| (1.0 + params.zeta * xl) * (1.0 - xs))
        .sum::<f64>()
}
