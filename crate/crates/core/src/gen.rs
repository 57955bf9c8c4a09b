//! Random 3-SAT instance generation.
//!
//! Two schemes: planted CDC (clause-distribution-controlled) instances,
//! which are satisfiable by construction and hard for local search in the
//! regime `ratio > 4.25`, `0.077 < p0 < 0.25`, and plain uniform random
//! 3-SAT with no satisfiability guarantee.
//!
//! All sampling runs on a seeded ChaCha8 stream so instances are
//! reproducible across platforms. The draw order is fixed: for each
//! clause, three distinct variables (without replacement), then the
//! clause type, then the negation positions; after all clauses, the
//! planted assignment. Changing that order is a breaking change for
//! recorded seeds.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{self, Assignment, Clause, CnfError, Formula, Literal};

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

/// Parameters of the CDC planted generator.
///
/// Clause types are counted relative to the planted assignment: with
/// probability `p0` a clause has zero false literals under the un-gauged
/// all-true view, `3*p1` one negation, `3*p2` two negations. The third
/// type (all three negated) never occurs, which is what makes the planted
/// assignment a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdcParams {
    pub n: usize,
    pub ratio: f64,
    pub p0: f64,
    pub seed: u64,
}

impl CdcParams {
    pub fn num_clauses(&self) -> usize {
        (self.ratio * self.n as f64).round() as usize
    }

    pub fn validate(&self) -> Result<(), GenError> {
        cdc_probabilities(self.p0)?;
        if self.n < 3 {
            return Err(GenError::OutOfRange(format!("n = {}, need >= 3", self.n)));
        }
        if self.num_clauses() < 1 {
            return Err(GenError::OutOfRange(format!(
                "ratio {} with n {} yields no clauses",
                self.ratio, self.n
            )));
        }
        Ok(())
    }

    /// Whether the parameters fall in the hard regime
    /// (`ratio > 4.25`, `0.077 < p0 < 0.25`).
    pub fn in_hard_regime(&self) -> bool {
        self.ratio > 4.25 && self.p0 > 0.077 && self.p0 < 0.25
    }
}

/// A generated formula together with its hidden model and the parameters
/// that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantedInstance {
    pub formula: Formula,
    pub planted: Assignment,
    pub params: CdcParams,
}

/// Clause-type probabilities `(p0, p1, p2)` with `p1 = (1-4*p0)/6`,
/// `p2 = (1+2*p0)/6`, so that `p0 + 3*p1 + 3*p2 = 1` and
/// `p0 + p1 - p2 = 0`.
pub fn cdc_probabilities(p0: f64) -> Result<(f64, f64, f64), GenError> {
    if !(p0 > 0.0 && p0 <= 0.25) {
        return Err(GenError::OutOfRange(format!("p0 = {p0}, need 0 < p0 <= 0.25")));
    }
    let p1 = (1.0 - 4.0 * p0) / 6.0;
    let p2 = (1.0 + 2.0 * p0) / 6.0;
    Ok((p0, p1, p2))
}

fn sample_distinct_vars(rng: &mut ChaCha8Rng, n: usize) -> [usize; 3] {
    let mut vars = [0usize; 3];
    let mut k = 0;
    while k < 3 {
        let v = rng.gen_range(0..n);
        if !vars[..k].contains(&v) {
            vars[k] = v;
            k += 1;
        }
    }
    vars
}

/// Generates a planted CDC instance. Clauses are first drawn relative to
/// the all-true assignment (so no clause is fully negated), then the
/// whole formula is gauge-conjugated by a uniformly random `±1` planted
/// vector so the solver cannot exploit an all-true bias.
pub fn generate_cdc(params: &CdcParams) -> Result<PlantedInstance, GenError> {
    params.validate()?;
    if !params.in_hard_regime() {
        log::warn!(
            "CDC params (ratio {}, p0 {}) outside the hard regime ratio > 4.25, 0.077 < p0 < 0.25",
            params.ratio,
            params.p0
        );
    }
    let (p0, p1, _p2) = cdc_probabilities(params.p0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let m = params.num_clauses();
    let n = params.n;

    let mut clauses = Vec::with_capacity(m);
    for _ in 0..m {
        let vars = sample_distinct_vars(&mut rng, n);
        // 0, 1, or 2 negations relative to all-true, position uniform.
        let u: f64 = rng.gen();
        let negations: usize = if u < p0 {
            0
        } else if u < p0 + 3.0 * p1 {
            1
        } else {
            2
        };
        let mut signs = [1i8; 3];
        match negations {
            0 => {}
            1 => signs[rng.gen_range(0..3)] = -1,
            _ => {
                let keep = rng.gen_range(0..3);
                for (i, s) in signs.iter_mut().enumerate() {
                    if i != keep {
                        *s = -1;
                    }
                }
            }
        }
        clauses.push(Clause([
            Literal::new(vars[0], signs[0]),
            Literal::new(vars[1], signs[1]),
            Literal::new(vars[2], signs[2]),
        ]));
    }

    let planted = Assignment::new((0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect());
    let formula = Formula::new(n, clauses)?.gauged(&planted)?;
    debug_assert!(cnf::verify(&formula, &planted).unwrap());
    Ok(PlantedInstance {
        formula,
        planted,
        params: *params,
    })
}

/// Uniform random 3-SAT: three distinct variables per clause, each sign
/// an independent fair coin. No satisfiability guarantee.
pub fn generate_uniform(n: usize, ratio: f64, seed: u64) -> Result<Formula, GenError> {
    if n < 3 {
        return Err(GenError::OutOfRange(format!("n = {n}, need >= 3")));
    }
    let m = (ratio * n as f64).round() as usize;
    if m < 1 {
        return Err(GenError::OutOfRange(format!(
            "ratio {ratio} with n {n} yields no clauses"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clauses = Vec::with_capacity(m);
    for _ in 0..m {
        let vars = sample_distinct_vars(&mut rng, n);
        let signs: [i8; 3] =
            [0, 1, 2].map(|_| if rng.gen::<bool>() { 1 } else { -1 });
        clauses.push(Clause([
            Literal::new(vars[0], signs[0]),
            Literal::new(vars[1], signs[1]),
            Literal::new(vars[2], signs[2]),
        ]));
    }
    Ok(Formula::new(n, clauses)?)
}
