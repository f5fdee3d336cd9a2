//! CNF data model and DIMACS input/output.
//!
//! Variables are 1-based as in DIMACS. A literal is packed as
//! `2 * (var - 1) + negated`, so sorting literals by their code sorts them by
//! variable index with the positive literal first.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::ops::Not;

use thiserror::Error;

/// A propositional variable, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Creates a variable from its 1-based index.
    ///
    /// # Panics
    /// Panics if `index` is zero.
    pub fn new(index: u32) -> Var {
        assert!(index >= 1, "variable indices start at 1");
        Var(index)
    }

    /// The 1-based DIMACS index.
    pub fn index(self) -> u32 {
        self.0
    }

    /// Zero-based position, for indexing dense per-variable arrays.
    pub fn idx(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn from_idx(idx: usize) -> Var {
        Var(idx as u32 + 1)
    }

    pub fn pos(self) -> Lit {
        Lit::new(self, true)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Lit {
        Lit::new(self, false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A literal: a variable or its negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(((var.0 - 1) << 1) | (!positive) as u32)
    }

    /// Converts a non-zero DIMACS integer.
    pub fn from_dimacs(value: i32) -> Lit {
        assert!(value != 0, "0 is the DIMACS clause terminator, not a literal");
        Lit::new(Var(value.unsigned_abs()), value > 0)
    }

    pub fn to_dimacs(self) -> i32 {
        let v = self.var().0 as i32;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn var(self) -> Var {
        Var((self.0 >> 1) + 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Dense code, usable as an index into per-literal arrays.
    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn from_code(code: usize) -> Lit {
        Lit(code as u32)
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A normalized clause: literals sorted by code with duplicates removed.
///
/// A clause containing both `x` and `¬x` is kept as a tautology placeholder so
/// that clause positions in the input file stay meaningful.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Clause {
    lits: Vec<Lit>,
    tautology: bool,
}

impl Clause {
    pub fn new(mut lits: Vec<Lit>) -> Clause {
        lits.sort_unstable();
        lits.dedup();
        let tautology = lits.windows(2).any(|w| w[0].var() == w[1].var());
        Clause { lits, tautology }
    }

    pub fn from_dimacs(values: &[i32]) -> Clause {
        Clause::new(values.iter().map(|&v| Lit::from_dimacs(v)).collect())
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn is_tautology(&self) -> bool {
        self.tautology
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.lits.iter().map(|l| l.var())
    }

    pub fn max_var(&self) -> Option<Var> {
        self.lits.last().map(|l| l.var())
    }

    /// `Some(true)` if some literal is true, `Some(false)` if all are false,
    /// `None` if an unassigned variable decides the outcome.
    pub fn eval(&self, a: &Assignment) -> Option<bool> {
        if self.tautology {
            return Some(true);
        }
        let mut undecided = false;
        for &l in &self.lits {
            match a.lit_value(l) {
                Some(true) => return Some(true),
                Some(false) => {}
                None => undecided = true,
            }
        }
        if undecided {
            None
        } else {
            Some(false)
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lits {
            write!(f, "{} ", l)?;
        }
        write!(f, "0")
    }
}

/// A CNF formula in input order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Formula {
    pub clauses: Vec<Clause>,
    pub num_vars: u32,
}

impl Formula {
    /// Builds a formula, widening `num_vars` to cover every literal.
    pub fn new(clauses: Vec<Clause>, num_vars: u32) -> Formula {
        let seen = clauses
            .iter()
            .filter_map(|c| c.max_var())
            .map(|v| v.index())
            .max()
            .unwrap_or(0);
        Formula {
            clauses,
            num_vars: num_vars.max(seen),
        }
    }

    pub fn from_dimacs_clauses(clauses: &[&[i32]]) -> Formula {
        Formula::new(clauses.iter().map(|c| Clause::from_dimacs(c)).collect(), 0)
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Sorted, deduplicated list of variables occurring in some clause.
    pub fn occurring_vars(&self) -> Vec<Var> {
        let mut seen = vec![false; self.num_vars as usize];
        for c in &self.clauses {
            for v in c.vars() {
                seen[v.idx()] = true;
            }
        }
        seen.iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| Var::from_idx(i))
            .collect()
    }
}

/// A partial assignment of truth values.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    values: Vec<Option<bool>>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    /// An assignment mapping `x1..=xn` to false.
    pub fn all_false(num_vars: u32) -> Assignment {
        Assignment {
            values: vec![Some(false); num_vars as usize],
        }
    }

    pub fn from_lits(lits: impl IntoIterator<Item = Lit>) -> Assignment {
        let mut a = Assignment::new();
        for l in lits {
            a.set(l.var(), l.is_positive());
        }
        a
    }

    pub fn get(&self, v: Var) -> Option<bool> {
        self.values.get(v.idx()).copied().flatten()
    }

    pub fn set(&mut self, v: Var, value: bool) {
        if self.values.len() <= v.idx() {
            self.values.resize(v.idx() + 1, None);
        }
        self.values[v.idx()] = Some(value);
    }

    pub fn unset(&mut self, v: Var) {
        if let Some(slot) = self.values.get_mut(v.idx()) {
            *slot = None;
        }
    }

    pub fn lit_value(&self, l: Lit) -> Option<bool> {
        self.get(l.var()).map(|b| b == l.is_positive())
    }

    pub fn is_total_over<'a>(&self, vars: impl IntoIterator<Item = &'a Var>) -> bool {
        vars.into_iter().all(|&v| self.get(v).is_some())
    }

    /// Assigned variables as literals, in variable order.
    pub fn lits(&self) -> impl Iterator<Item = Lit> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|b| Lit::new(Var::from_idx(i), b)))
    }

    pub fn len(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CnfError {
    #[error("variable {0} occurs in the formula but is not assigned")]
    Unassigned(Var),
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        msg: msg.into(),
    }
}

/// Parses DIMACS CNF.
///
/// Clauses may span lines; a trailing clause without its terminating `0` at
/// end of input is accepted. A line starting with `%` ends the clause section
/// (the SATLIB convention).
pub fn parse_dimacs<R: BufRead>(reader: R) -> Result<Formula, ParseError> {
    let mut header: Option<u32> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Lit> = Vec::new();

    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(syntax(lineno, "duplicate header"));
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(syntax(lineno, format!("malformed header `{}`", trimmed)));
            }
            let vars = fields[2]
                .parse::<u32>()
                .map_err(|_| syntax(lineno, format!("bad variable count `{}`", fields[2])))?;
            fields[3]
                .parse::<u64>()
                .map_err(|_| syntax(lineno, format!("bad clause count `{}`", fields[3])))?;
            header = Some(vars);
            continue;
        }
        if header.is_none() {
            return Err(ParseError::MissingHeader);
        }
        for tok in trimmed.split_whitespace() {
            let value: i64 = tok
                .parse()
                .map_err(|_| syntax(lineno, format!("non-integer token `{}`", tok)))?;
            if value == 0 {
                clauses.push(Clause::new(std::mem::take(&mut current)));
            } else {
                if value.unsigned_abs() > i32::MAX as u64 {
                    return Err(syntax(lineno, format!("literal `{}` out of range", tok)));
                }
                current.push(Lit::from_dimacs(value as i32));
            }
        }
    }
    let declared = header.ok_or(ParseError::MissingHeader)?;
    if !current.is_empty() {
        clauses.push(Clause::new(current));
    }
    Ok(Formula::new(clauses, declared))
}

pub fn parse_dimacs_str(text: &str) -> Result<Formula, ParseError> {
    parse_dimacs(text.as_bytes())
}

pub fn write_dimacs<W: Write>(f: &Formula, mut out: W) -> io::Result<()> {
    writeln!(out, "p cnf {} {}", f.num_vars, f.clauses.len())?;
    for c in &f.clauses {
        writeln!(out, "{}", c)?;
    }
    Ok(())
}

pub fn to_dimacs_string(f: &Formula) -> String {
    let mut buf = Vec::new();
    write_dimacs(f, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("DIMACS output is ASCII")
}

/// Evaluates `f` under `a`. Tautology placeholders count as true.
pub fn eval_formula(f: &Formula, a: &Assignment) -> Result<bool, CnfError> {
    let mut result = true;
    for c in &f.clauses {
        match c.eval(a) {
            Some(true) => {}
            Some(false) => result = false,
            None => {
                let v = c.vars().find(|&v| a.get(v).is_none()).unwrap();
                return Err(CnfError::Unassigned(v));
            }
        }
    }
    // tautologies short-circuit in `eval`, their variables still need values
    for c in f.clauses.iter().filter(|c| c.is_tautology()) {
        if let Some(v) = c.vars().find(|&v| a.get(v).is_none()) {
            return Err(CnfError::Unassigned(v));
        }
    }
    Ok(result)
}

/// Hands out fresh variables above a floor.
#[derive(Debug, Clone)]
pub struct VarAllocator {
    next: u32,
}

impl VarAllocator {
    /// The first variable handed out is `above + 1`.
    pub fn above(above: u32) -> VarAllocator {
        VarAllocator { next: above + 1 }
    }

    pub fn fresh(&mut self) -> Var {
        let v = Var::new(self.next);
        self.next += 1;
        v
    }

    /// The next variable `fresh` will return.
    pub fn peek(&self) -> Var {
        Var::new(self.next)
    }

    /// Highest variable handed out so far (or the floor).
    pub fn max_allocated(&self) -> u32 {
        self.next - 1
    }
}
