//! Competition-mode per-clause long-memory rate adaptation.
//!
//! Every `interval` integration-time units the run pauses, each clause
//! whose long memory sits strictly above the (lower) median gets its rate
//! multiplied by 1.1, every other clause by 0.9 with a floor of 1, and
//! any clause whose long memory hit the cap is reset to `x_l = 1`,
//! `rate = 1`. Nothing else is touched, so between adaptation instants
//! the dynamics are the plain solver with a per-clause rate vector.

use serde::{Deserialize, Serialize};

use crate::dynamics::SolverState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompetitionConfig {
    /// Integration-time units between adaptations.
    pub interval: f64,
    pub up_factor: f64,
    pub down_factor: f64,
    pub alpha_floor: f64,
    pub alpha_init: f64,
}

impl Default for CompetitionConfig {
    fn default() -> Self {
        CompetitionConfig {
            interval: 1e4,
            up_factor: 1.1,
            down_factor: 0.9,
            alpha_floor: 1.0,
            alpha_init: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompetitionSchedule {
    pub cfg: CompetitionConfig,
    per_clause_alpha: Vec<f64>,
    next_adapt: f64,
}

/// Lower median: element at index `(len - 1) / 2` of the sorted values.
pub fn lower_median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted[(sorted.len() - 1) / 2]
}

impl CompetitionSchedule {
    pub fn new(cfg: CompetitionConfig, num_clauses: usize) -> Self {
        CompetitionSchedule {
            cfg,
            per_clause_alpha: vec![cfg.alpha_init; num_clauses],
            next_adapt: cfg.interval,
        }
    }

    pub fn alpha(&self) -> &[f64] {
        &self.per_clause_alpha
    }

    /// Runs the adaptation when `t` has crossed the next interval
    /// boundary. Returns true if an adaptation happened. Cap resets are
    /// checked here, at adaptation instants only.
    pub fn maybe_adapt(&mut self, state: &mut SolverState, xl_max: f64) -> bool {
        if state.t < self.next_adapt {
            return false;
        }
        self.next_adapt += self.cfg.interval;
        let med = lower_median(&state.x_l);
        for (alpha, xl) in self.per_clause_alpha.iter_mut().zip(state.x_l.iter_mut()) {
            if *xl >= xl_max {
                *xl = 1.0;
                *alpha = 1.0;
            } else if *xl > med {
                *alpha *= self.cfg.up_factor;
            } else {
                *alpha = (*alpha * self.cfg.down_factor).max(self.cfg.alpha_floor);
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state_with_xl(xl: Vec<f64>, t: f64) -> SolverState {
        let m = xl.len();
        SolverState {
            v: vec![0.0; 3],
            x_s: vec![0.5; m],
            x_l: xl,
            t,
            dt: 0.1,
            steps: 0,
        }
    }

    #[test]
    fn lower_median_even_and_odd() {
        assert_eq!(lower_median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(lower_median(&[4.0, 1.0, 3.0, 2.0]), 2.0);
    }

    #[test]
    fn no_adapt_before_interval() {
        let mut sched = CompetitionSchedule::new(CompetitionConfig::default(), 2);
        let mut s = state_with_xl(vec![5.0, 1.0], 9999.0);
        assert!(!sched.maybe_adapt(&mut s, 1e6));
        assert_eq!(sched.alpha(), &[5.0, 5.0]);
    }

    #[test]
    fn adapt_up_down_and_floor() {
        let cfg = CompetitionConfig::default();
        let mut sched = CompetitionSchedule::new(cfg, 3);
        // x_l = [10, 2, 1]; lower median 2: only the first is above
        let mut s = state_with_xl(vec![10.0, 2.0, 1.0], 1e4);
        assert!(sched.maybe_adapt(&mut s, 1e6));
        assert!((sched.alpha()[0] - 5.5).abs() < 1e-12);
        assert!((sched.alpha()[1] - 4.5).abs() < 1e-12);
        assert!((sched.alpha()[2] - 4.5).abs() < 1e-12);
        // drive one alpha to the floor
        for k in 0..40 {
            let mut s = state_with_xl(vec![10.0, 2.0, 1.0], 2e4 + k as f64 * 1e4);
            sched.maybe_adapt(&mut s, 1e6);
        }
        assert_eq!(sched.alpha()[2], 1.0);
    }

    #[test]
    fn cap_reset() {
        let mut sched = CompetitionSchedule::new(CompetitionConfig::default(), 2);
        let mut s = state_with_xl(vec![1e6, 2.0], 1e4);
        sched.maybe_adapt(&mut s, 1e6);
        assert_eq!(s.x_l[0], 1.0);
        assert_eq!(sched.alpha()[0], 1.0);
        assert_eq!(s.x_l[1], 2.0);
    }

    #[test]
    fn interval_boundaries_accumulate() {
        let mut sched = CompetitionSchedule::new(CompetitionConfig::default(), 2);
        let mut s = state_with_xl(vec![3.0, 1.0], 1e4 + 5.0);
        assert!(sched.maybe_adapt(&mut s, 1e6));
        // next boundary is 2e4 regardless of overshoot
        let mut s = state_with_xl(vec![3.0, 1.0], 1.5e4);
        assert!(!sched.maybe_adapt(&mut s, 1e6));
        let mut s = state_with_xl(vec![3.0, 1.0], 2.0e4);
        assert!(sched.maybe_adapt(&mut s, 1e6));
    }
}
