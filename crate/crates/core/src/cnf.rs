//! 3-SAT formula representation, DIMACS I/O, and model verification.
//!
//! Literals are 0-based signed pairs internally; the 1-based signed
//! integers of DIMACS appear only at the I/O boundary.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CnfError {
    #[error("syntax error at line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("clause {clause} has {len} literals, expected exactly 3")]
    NotThreeSat { clause: usize, len: usize },
    #[error("variable {var} out of range (num_vars = {num_vars})")]
    VarOutOfRange { var: usize, num_vars: usize },
    #[error("clause {clause} repeats variable {var}")]
    DuplicateVarInClause { clause: usize, var: usize },
    #[error("invalid formula: {0}")]
    InvalidFormula(String),
    #[error("assignment length {got} does not match num_vars {expected}")]
    LengthMismatch { got: usize, expected: usize },
}

/// A signed occurrence of a variable: `sign = +1` for the plain variable,
/// `-1` for its negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub sign: i8,
}

impl Literal {
    pub fn new(var: usize, sign: i8) -> Self {
        debug_assert!(sign == 1 || sign == -1);
        Literal { var, sign }
    }

    /// Polarity as a float, the `q` entry of the clause.
    #[inline]
    pub fn q(&self) -> f64 {
        self.sign as f64
    }
}

/// Exactly three literals over pairwise-distinct variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause(pub [Literal; 3]);

impl Clause {
    pub fn literals(&self) -> &[Literal; 3] {
        &self.0
    }

    pub fn contains_var(&self, var: usize) -> Option<usize> {
        self.0.iter().position(|l| l.var == var)
    }
}

/// An immutable 3-SAT formula. Safe to share read-only across parallel
/// solver runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formula {
    num_vars: usize,
    clauses: Vec<Clause>,
}

impl Formula {
    /// Validates the structural invariants: `n >= 3`, `m >= 1`, three
    /// distinct variables per clause, all in range.
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self, CnfError> {
        if num_vars < 3 {
            return Err(CnfError::InvalidFormula(format!(
                "num_vars = {num_vars}, need at least 3"
            )));
        }
        if clauses.is_empty() {
            return Err(CnfError::InvalidFormula("no clauses".into()));
        }
        for (ci, c) in clauses.iter().enumerate() {
            for (k, lit) in c.0.iter().enumerate() {
                if lit.var >= num_vars {
                    return Err(CnfError::VarOutOfRange {
                        var: lit.var,
                        num_vars,
                    });
                }
                if c.0[..k].iter().any(|o| o.var == lit.var) {
                    return Err(CnfError::DuplicateVarInClause {
                        clause: ci,
                        var: lit.var,
                    });
                }
            }
        }
        Ok(Formula { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Clause density m/n.
    pub fn ratio(&self) -> f64 {
        self.clauses.len() as f64 / self.num_vars as f64
    }

    /// Conjugates every polarity by the given `±1` vector, so that `g`
    /// being a model of `self` is equivalent to all-true being a model of
    /// the gauged formula.
    pub fn gauged(&self, g: &Assignment) -> Result<Formula, CnfError> {
        if g.values.len() != self.num_vars {
            return Err(CnfError::LengthMismatch {
                got: g.values.len(),
                expected: self.num_vars,
            });
        }
        let clauses = self
            .clauses
            .iter()
            .map(|c| {
                Clause(c.0.map(|l| Literal::new(l.var, l.sign * g.values[l.var])))
            })
            .collect();
        Ok(Formula {
            num_vars: self.num_vars,
            clauses,
        })
    }
}

/// A full truth assignment, `+1` = TRUE, `-1` = FALSE.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub values: Vec<i8>,
}

impl Assignment {
    pub fn new(values: Vec<i8>) -> Self {
        debug_assert!(values.iter().all(|&v| v == 1 || v == -1));
        Assignment { values }
    }
}

/// True iff every clause has at least one literal with `sign * value = +1`.
pub fn verify(f: &Formula, a: &Assignment) -> Result<bool, CnfError> {
    if a.values.len() != f.num_vars {
        return Err(CnfError::LengthMismatch {
            got: a.values.len(),
            expected: f.num_vars,
        });
    }
    Ok(f.clauses
        .iter()
        .all(|c| c.0.iter().any(|l| l.sign * a.values[l.var] == 1)))
}

/// Parses DIMACS CNF. Rejects clauses whose length is not exactly 3 and
/// clauses that repeat a variable (including tautologies).
pub fn parse_dimacs(text: &str) -> Result<Formula, CnfError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(CnfError::Syntax {
                    line: lineno,
                    msg: "duplicate header".into(),
                });
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 4 || toks[1] != "cnf" {
                return Err(CnfError::Syntax {
                    line: lineno,
                    msg: format!("malformed header '{line}'"),
                });
            }
            let n: usize = toks[2].parse().map_err(|_| CnfError::Syntax {
                line: lineno,
                msg: format!("bad variable count '{}'", toks[2]),
            })?;
            let m: usize = toks[3].parse().map_err(|_| CnfError::Syntax {
                line: lineno,
                msg: format!("bad clause count '{}'", toks[3]),
            })?;
            header = Some((n, m));
            continue;
        }
        let (num_vars, _) = header.ok_or(CnfError::Syntax {
            line: lineno,
            msg: "clause before header".into(),
        })?;
        for tok in line.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| CnfError::Syntax {
                line: lineno,
                msg: format!("bad literal '{tok}'"),
            })?;
            if lit == 0 {
                if current.len() != 3 {
                    return Err(CnfError::NotThreeSat {
                        clause: clauses.len(),
                        len: current.len(),
                    });
                }
                let arr = [current[0], current[1], current[2]];
                for (k, l) in arr.iter().enumerate() {
                    if arr[..k].iter().any(|o| o.var == l.var) {
                        return Err(CnfError::DuplicateVarInClause {
                            clause: clauses.len(),
                            var: l.var,
                        });
                    }
                }
                clauses.push(Clause(arr));
                current.clear();
            } else {
                let var = lit.unsigned_abs() as usize - 1;
                if var >= num_vars {
                    return Err(CnfError::VarOutOfRange { var, num_vars });
                }
                current.push(Literal::new(var, if lit > 0 { 1 } else { -1 }));
            }
        }
    }
    if !current.is_empty() {
        return Err(CnfError::NotThreeSat {
            clause: clauses.len(),
            len: current.len(),
        });
    }
    let (num_vars, m) = header.ok_or(CnfError::Syntax {
        line: 0,
        msg: "missing header".into(),
    })?;
    if clauses.len() != m {
        return Err(CnfError::Syntax {
            line: 0,
            msg: format!("header promises {m} clauses, found {}", clauses.len()),
        });
    }
    Formula::new(num_vars, clauses)
}

/// Deterministic DIMACS output, clause order preserved.
pub fn serialize_dimacs(f: &Formula) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", f.num_vars, f.clauses.len());
    for c in &f.clauses {
        for l in c.0.iter() {
            let v = (l.var as i64 + 1) * l.sign as i64;
            let _ = write!(out, "{v} ");
        }
        let _ = writeln!(out, "0");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lit(v: i64) -> Literal {
        Literal::new(v.unsigned_abs() as usize - 1, if v > 0 { 1 } else { -1 })
    }

    fn formula(n: usize, cls: &[[i64; 3]]) -> Formula {
        Formula::new(
            n,
            cls.iter().map(|c| Clause([lit(c[0]), lit(c[1]), lit(c[2])])).collect(),
        )
        .unwrap()
    }

    #[test]
    fn parse_basic() {
        let f = parse_dimacs("p cnf 3 1\n1 -2 3 0").unwrap();
        assert_eq!(f.num_vars(), 3);
        assert_eq!(f.clauses(), formula(3, &[[1, -2, 3]]).clauses());
    }

    #[test]
    fn parse_rejects_short_clause() {
        assert!(matches!(
            parse_dimacs("p cnf 3 1\n1 2 0"),
            Err(CnfError::NotThreeSat { len: 2, .. })
        ));
    }

    #[test]
    fn parse_rejects_tautology_and_duplicates() {
        assert!(matches!(
            parse_dimacs("p cnf 3 1\n1 -1 2 0"),
            Err(CnfError::DuplicateVarInClause { var: 0, .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 3 1\n1 1 2 0"),
            Err(CnfError::DuplicateVarInClause { var: 0, .. })
        ));
    }

    #[test]
    fn parse_rejects_out_of_range() {
        assert!(matches!(
            parse_dimacs("p cnf 3 1\n1 2 4 0"),
            Err(CnfError::VarOutOfRange { var: 3, .. })
        ));
    }

    #[test]
    fn parse_rejects_malformed_header() {
        assert!(matches!(
            parse_dimacs("p dnf 3 1\n1 2 3 0"),
            Err(CnfError::Syntax { .. })
        ));
    }

    #[test]
    fn serialize_matches_expected() {
        let f = formula(3, &[[1, -2, 3]]);
        assert_eq!(serialize_dimacs(&f), "p cnf 3 1\n1 -2 3 0\n");
    }

    #[test]
    fn empty_clause_list_rejected() {
        assert!(matches!(
            Formula::new(3, vec![]),
            Err(CnfError::InvalidFormula(_))
        ));
    }

    #[test]
    fn verify_examples() {
        let f = formula(3, &[[1, 2, -3]]);
        assert!(verify(&f, &Assignment::new(vec![1, -1, 1])).unwrap());
        assert!(!verify(&f, &Assignment::new(vec![-1, -1, 1])).unwrap());
        assert!(matches!(
            verify(&f, &Assignment::new(vec![1, 1])),
            Err(CnfError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn gauge_maps_model_to_all_true() {
        let f = formula(4, &[[1, -2, 3], [-1, 2, -4]]);
        let a = Assignment::new(vec![1, -1, -1, -1]);
        assert!(verify(&f, &a).unwrap());
        let g = f.gauged(&a).unwrap();
        assert!(verify(&g, &Assignment::new(vec![1; 4])).unwrap());
    }

    /// Brute-force model check over all literals, used as the oracle for
    /// `verify` on small formulas.
    fn verify_brute(f: &Formula, a: &[i8]) -> bool {
        f.clauses().iter().all(|c| {
            let mut sat = false;
            for l in c.literals() {
                let val = a[l.var] == 1;
                let litval = if l.sign == 1 { val } else { !val };
                sat = sat || litval;
            }
            sat
        })
    }

    proptest! {
        #[test]
        fn roundtrip_identity(n in 3usize..20, seed in any::<u64>()) {
            let f = crate::gen::generate_uniform(n, 3.0, seed).unwrap();
            let f2 = parse_dimacs(&serialize_dimacs(&f)).unwrap();
            prop_assert_eq!(f, f2);
        }

        #[test]
        fn verify_agrees_with_brute_force(seed in any::<u64>()) {
            let n = 8usize;
            let f = crate::gen::generate_uniform(n, 4.0, seed).unwrap();
            for bits in 0u32..(1 << n) {
                let a: Vec<i8> = (0..n).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect();
                let asn = Assignment::new(a.clone());
                prop_assert_eq!(verify(&f, &asn).unwrap(), verify_brute(&f, &a));
            }
        }
    }
}
