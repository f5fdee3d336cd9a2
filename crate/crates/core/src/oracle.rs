//! Exhaustive reference solver for small formulas.

use crate::cnf::{Assignment, Formula, Var};

/// Largest variable count [`brute_force`] accepts.
pub const MAX_BRUTE_VARS: u32 = 26;

/// Returns the lexicographically first model (x1 most significant, false
/// before true), or `None` when `f` is unsatisfiable.
///
/// # Panics
/// If `f` has more than [`MAX_BRUTE_VARS`] variables.
pub fn brute_force(f: &Formula) -> Option<Assignment> {
    let mut found = None;
    for_each_model(f, |a| {
        found = Some(a.clone());
        false
    });
    found
}

/// Number of models over all `f.num_vars` variables.
pub fn count_models(f: &Formula) -> u64 {
    let mut n = 0;
    for_each_model(f, |_| {
        n += 1;
        true
    });
    n
}

/// Calls `visit` on every model in lexicographic order until it returns false.
pub fn for_each_model(f: &Formula, mut visit: impl FnMut(&Assignment) -> bool) {
    let n = f.num_vars;
    assert!(n <= MAX_BRUTE_VARS, "{} variables is too many to enumerate", n);
    // bit n - i of the counter holds x_i, so counting is lexicographic
    let bit = |v: Var| 1u32 << (n - v.index());
    let masks: Vec<(u32, u32)> = f
        .clauses
        .iter()
        .filter(|c| !c.is_tautology())
        .map(|c| {
            c.lits().iter().fold((0, 0), |(pos, neg), l| {
                if l.is_positive() {
                    (pos | bit(l.var()), neg)
                } else {
                    (pos, neg | bit(l.var()))
                }
            })
        })
        .collect();
    let mut a = Assignment::all_false(n);
    for bits in 0u32..(1u32 << n) {
        if masks.iter().all(|&(pos, neg)| bits & pos != 0 || !bits & neg != 0) {
            for i in 1..=n {
                a.set(Var::new(i), bits & bit(Var::new(i)) != 0);
            }
            if !visit(&a) {
                return;
            }
        }
    }
}
