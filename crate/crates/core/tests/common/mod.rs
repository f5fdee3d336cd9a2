#![allow(dead_code)]

use partsat::cnf::{Assignment, Clause, Formula, Lit, Var};
use proptest::prelude::*;

/// Every total assignment over `vars`, in a fixed order.
pub fn assignments(vars: &[Var]) -> impl Iterator<Item = Assignment> + '_ {
    assert!(vars.len() <= 22);
    (0u64..(1 << vars.len())).map(move |bits| {
        let mut a = Assignment::new();
        for (i, &v) in vars.iter().enumerate() {
            a.set(v, bits >> i & 1 == 1);
        }
        a
    })
}

pub fn clause_holds(c: &[Lit], a: &Assignment) -> bool {
    c.iter().any(|&l| a.lit_value(l) == Some(true))
}

pub fn all_hold(cs: &[Clause], a: &Assignment) -> bool {
    cs.iter().all(|c| clause_holds(c.lits(), a))
}

pub fn vars_upto(n: u32) -> Vec<Var> {
    (1..=n).map(Var::new).collect()
}

pub fn lit_strategy(max_var: u32) -> impl Strategy<Value = Lit> {
    (1..=max_var, any::<bool>()).prop_map(|(v, p)| Lit::new(Var::new(v), p))
}

pub fn clause_strategy(max_var: u32, max_len: usize) -> impl Strategy<Value = Clause> {
    prop::collection::vec(lit_strategy(max_var), 1..=max_len).prop_map(Clause::new)
}

pub fn formula_strategy(max_var: u32, max_clauses: usize) -> impl Strategy<Value = Formula> {
    prop::collection::vec(clause_strategy(max_var, 3), 1..=max_clauses)
        .prop_map(move |cs| Formula::new(cs, max_var))
}
