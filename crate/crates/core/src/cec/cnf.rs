// SPDX-License-Identifier: Apache-2.0

//! Tseitin encoding and DIMACS text.

use std::fmt::Write as _;

use thiserror::Error;

use crate::aig::{Aig, Lit};

use super::sat::{Budget, SatLit, SolveResult, Solver};

/// Clauses over DIMACS-numbered variables. Node `n` is variable `n + 1`;
/// variable 1 is the constant and carries the unit clause `-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("line {0}: {1}")]
    Syntax(usize, String),
    #[error("literal {lit} exceeds the declared {vars} variables")]
    VarRange { lit: i32, vars: usize },
}

/// DIMACS literal of an AIG literal.
pub fn node_lit(l: Lit) -> i32 {
    let v = l.node() as i32 + 1;
    if l.is_complemented() {
        -v
    } else {
        v
    }
}

/// Three clauses per and-gate, the constant unit, and one unit per entry of
/// `assert_true`.
pub fn tseitin_with(aig: &Aig, assert_true: &[Lit]) -> Cnf {
    let mut clauses = Vec::with_capacity(3 * aig.num_ands() + 1 + assert_true.len());
    clauses.push(vec![-1]);
    for node in aig.and_ids() {
        let o = node as i32 + 1;
        let [a, b] = aig.fanins(node);
        let (a, b) = (node_lit(a), node_lit(b));
        clauses.push(vec![-o, a]);
        clauses.push(vec![-o, b]);
        clauses.push(vec![o, -a, -b]);
    }
    for &l in assert_true {
        clauses.push(vec![node_lit(l)]);
    }
    Cnf {
        num_vars: aig.num_nodes(),
        clauses,
    }
}

/// Encoding of a single-output circuit (a miter) with the output asserted.
pub fn tseitin(miter: &Aig) -> Cnf {
    tseitin_with(miter, miter.outputs())
}

impl Cnf {
    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let _ = write!(s, "{l} ");
            }
            s.push_str("0\n");
        }
        s
    }

    pub fn parse_dimacs(text: &str) -> Result<Cnf, DimacsError> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut cur = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('c') || t.starts_with('%') {
                continue;
            }
            if t.starts_with('p') {
                let f: Vec<&str> = t.split_whitespace().collect();
                if f.len() != 4 || f[1] != "cnf" {
                    return Err(DimacsError::Syntax(i + 1, t.to_owned()));
                }
                let parse = |x: &str| x.parse::<usize>().map_err(|e| DimacsError::Syntax(i + 1, e.to_string()));
                header = Some((parse(f[2])?, parse(f[3])?));
                continue;
            }
            let Some((vars, _)) = header else {
                return Err(DimacsError::MissingHeader);
            };
            for tok in t.split_whitespace() {
                let lit: i32 = tok.parse().map_err(|_| DimacsError::Syntax(i + 1, tok.to_owned()))?;
                if lit == 0 {
                    clauses.push(std::mem::take(&mut cur));
                } else if lit.unsigned_abs() as usize > vars {
                    return Err(DimacsError::VarRange { lit, vars });
                } else {
                    cur.push(lit);
                }
            }
        }
        let (num_vars, _) = header.ok_or(DimacsError::MissingHeader)?;
        if !cur.is_empty() {
            clauses.push(cur);
        }
        Ok(Cnf { num_vars, clauses })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CnfResult {
    /// Value of every variable, index 0 for variable 1.
    Sat(Vec<bool>),
    Unsat,
    Unknown(String),
}

pub fn solve_cnf(cnf: &Cnf, budget: &Budget) -> CnfResult {
    solve_cnf_with_priority(cnf, &[], budget)
}

/// [`solve_cnf`] branching on the DIMACS variables `first` before any
/// other.
pub fn solve_cnf_with_priority(cnf: &Cnf, first: &[u32], budget: &Budget) -> CnfResult {
    let mut s = Solver::new();
    s.ensure_vars(cnf.num_vars);
    s.set_priority(&first.iter().map(|&v| v - 1).collect::<Vec<_>>());
    for c in &cnf.clauses {
        let lits: Vec<SatLit> = c.iter().map(|&d| SatLit::from_dimacs(d)).collect();
        if !s.add_clause(&lits) {
            return CnfResult::Unsat;
        }
    }
    match s.solve(&[], budget) {
        SolveResult::Sat => {
            let model: Vec<bool> = (0..cnf.num_vars as u32).map(|v| s.model_value(v)).collect();
            debug_assert!(cnf.clauses.iter().all(|c| c.iter().any(|&d| model[d.unsigned_abs() as usize - 1] == (d > 0))));
            CnfResult::Sat(model)
        }
        SolveResult::Unsat => CnfResult::Unsat,
        SolveResult::Unknown(why) => CnfResult::Unknown(why.to_owned()),
    }
}

/// Reads `s SATISFIABLE` / `s UNSATISFIABLE` / `s UNKNOWN` and `v` model
/// lines of a solver's standard output.
pub fn parse_solver_output(text: &str, num_vars: usize) -> CnfResult {
    let mut status = None;
    let mut model = vec![false; num_vars];
    for line in text.lines() {
        let t = line.trim();
        if let Some(rest) = t.strip_prefix("s ") {
            status = Some(rest.trim().to_owned());
        } else if let Some(rest) = t.strip_prefix("v ") {
            for tok in rest.split_whitespace() {
                if let Ok(d) = tok.parse::<i32>() {
                    let v = d.unsigned_abs() as usize;
                    if d != 0 && v <= num_vars {
                        model[v - 1] = d > 0;
                    }
                }
            }
        }
    }
    match status.as_deref() {
        Some("SATISFIABLE") => CnfResult::Sat(model),
        Some("UNSATISFIABLE") => CnfResult::Unsat,
        Some(other) => CnfResult::Unknown(format!("solver status `{other}`")),
        None => CnfResult::Unknown("no status line in solver output".to_owned()),
    }
}

/// Output in the format [`parse_solver_output`] reads.
pub fn format_solver_output(result: &CnfResult) -> String {
    match result {
        CnfResult::Sat(model) => {
            let mut s = String::from("s SATISFIABLE\nv");
            for (i, &b) in model.iter().enumerate() {
                let d = i as i64 + 1;
                let _ = write!(s, " {}", if b { d } else { -d });
            }
            s.push_str(" 0\n");
            s
        }
        CnfResult::Unsat => "s UNSATISFIABLE\n".to_owned(),
        CnfResult::Unknown(_) => "s UNKNOWN\n".to_owned(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::AigBuilder;

    #[test]
    fn single_gate_clauses() {
        let mut b = AigBuilder::new(2);
        let g = b.and(b.input(0), b.input(1));
        b.add_output(g);
        let cnf = tseitin(&b.build());
        assert_eq!(cnf.num_vars, 4);
        assert_eq!(cnf.clauses, vec![vec![-1], vec![-4, 2], vec![-4, 3], vec![4, -2, -3], vec![4]]);
        assert!(matches!(solve_cnf(&cnf, &Budget::unlimited()), CnfResult::Sat(m) if m[1] && m[2]));
    }

    #[test]
    fn constant_false_root() {
        let mut b = AigBuilder::new(1);
        b.add_output(Lit::FALSE);
        let cnf = tseitin(&b.build());
        assert_eq!(cnf.clauses, vec![vec![-1], vec![1]]);
        assert_eq!(solve_cnf(&cnf, &Budget::unlimited()), CnfResult::Unsat);
    }

    #[test]
    fn dimacs_roundtrip() {
        let cnf = Cnf {
            num_vars: 3,
            clauses: vec![vec![1, -2], vec![3], vec![-1, 2, -3]],
        };
        let text = cnf.to_dimacs();
        assert_eq!(text, "p cnf 3 3\n1 -2 0\n3 0\n-1 2 -3 0\n");
        assert_eq!(Cnf::parse_dimacs(&text).unwrap(), cnf);
        assert!(Cnf::parse_dimacs("1 2 0\n").is_err());
        assert!(Cnf::parse_dimacs("p cnf 1 1\n2 0\n").is_err());
    }

    #[test]
    fn solver_output_roundtrip() {
        let r = CnfResult::Sat(vec![true, false, true]);
        assert_eq!(parse_solver_output(&format_solver_output(&r), 3), r);
        assert_eq!(parse_solver_output("c hi\ns UNSATISFIABLE\n", 3), CnfResult::Unsat);
        assert!(matches!(parse_solver_output("garbage", 3), CnfResult::Unknown(_)));
    }
}
