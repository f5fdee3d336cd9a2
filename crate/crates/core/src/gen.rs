//! Benchmark and test formula generators.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cnf::{Clause, Formula, Lit, Var};

/// Uniform random k-CNF: each clause picks `width` distinct variables and
/// random polarities.
pub fn random_kcnf(num_vars: u32, num_clauses: usize, width: usize, seed: u64) -> Formula {
    assert!(width as u32 <= num_vars && width > 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clauses = (0..num_clauses)
        .map(|_| {
            let lits = sample(&mut rng, num_vars as usize, width)
                .into_iter()
                .map(|i| Lit::new(Var::new(i as u32 + 1), rng.gen()))
                .collect();
            Clause::new(lits)
        })
        .collect();
    Formula::new(clauses, num_vars)
}

/// Random 3-CNF with `round(ratio · num_vars)` clauses.
pub fn random_3cnf(num_vars: u32, ratio: f64, seed: u64) -> Formula {
    let m = (ratio * num_vars as f64).round() as usize;
    random_kcnf(num_vars, m.max(1), 3, seed)
}

/// Pigeonhole principle: `pigeons` pigeons into `holes` holes.
/// Variable `p·holes + h + 1` says pigeon `p` sits in hole `h`.
/// Unsatisfiable iff `pigeons > holes`.
pub fn pigeonhole(pigeons: u32, holes: u32) -> Formula {
    let x = |p: u32, h: u32| Var::new(p * holes + h + 1);
    let mut clauses = Vec::new();
    for p in 0..pigeons {
        clauses.push(Clause::new((0..holes).map(|h| x(p, h).pos()).collect()));
    }
    for h in 0..holes {
        for p in 0..pigeons {
            for q in p + 1..pigeons {
                clauses.push(Clause::new(vec![x(p, h).neg(), x(q, h).neg()]));
            }
        }
    }
    Formula::new(clauses, pigeons * holes)
}
