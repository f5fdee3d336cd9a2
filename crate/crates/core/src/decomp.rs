//! Lazy decomposition: contiguous, equally sized clause ranges.
//!
//! Partition `i` of `k` over `n` clauses covers `[⌊i·n/k⌋, ⌊(i+1)·n/k⌋)`.
//! No attempt is made to reduce the variable overlap between partitions.

use std::collections::BTreeSet;
use std::ops::Range;

use thiserror::Error;

use crate::cnf::{Clause, Formula, Var};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecompError {
    #[error("cannot split {clauses} clauses into {k} partitions")]
    InvalidPartitionCount { k: usize, clauses: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    ranges: Vec<Range<usize>>,
    shared: BTreeSet<Var>,
    private: Vec<BTreeSet<Var>>,
    partition_vars: Vec<BTreeSet<Var>>,
}

impl Decomposition {
    pub fn k(&self) -> usize {
        self.ranges.len()
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    /// Variables occurring in at least two partitions.
    pub fn shared_vars(&self) -> &BTreeSet<Var> {
        &self.shared
    }

    pub fn private_vars(&self, i: usize) -> &BTreeSet<Var> {
        &self.private[i]
    }

    pub fn partition_vars(&self, i: usize) -> &BTreeSet<Var> {
        &self.partition_vars[i]
    }

    /// All clauses of partition `i`, tautology placeholders included.
    pub fn partition<'f>(&self, f: &'f Formula, i: usize) -> &'f [Clause] {
        &f.clauses[self.ranges[i].clone()]
    }

    /// Clauses of partition `i` a solver should see.
    pub fn solver_clauses<'f>(&self, f: &'f Formula, i: usize) -> impl Iterator<Item = &'f Clause> {
        self.partition(f, i).iter().filter(|c| !c.is_tautology())
    }

    /// Shared variables occurring in partition `i`, ascending.
    pub fn interface_vars(&self, i: usize) -> impl Iterator<Item = Var> + '_ {
        self.partition_vars[i].intersection(&self.shared).copied()
    }
}

/// Splits `f` into `k` contiguous partitions.
pub fn decompose_lazy(f: &Formula, k: usize) -> Result<Decomposition, DecompError> {
    let n = f.clauses.len();
    if k < 1 || k > n {
        return Err(DecompError::InvalidPartitionCount { k, clauses: n });
    }
    let ranges: Vec<Range<usize>> = (0..k).map(|i| (i * n / k)..((i + 1) * n / k)).collect();
    let parts: Vec<&[Clause]> = ranges.iter().map(|r| &f.clauses[r.clone()]).collect();
    let partition_vars: Vec<BTreeSet<Var>> = parts.iter().map(|p| vars_of(p)).collect();
    let (shared, private) = split_vars(&partition_vars);
    Ok(Decomposition {
        ranges,
        shared,
        private,
        partition_vars,
    })
}

/// Shared variables (occurring in two or more partitions) and the private
/// remainder of each partition. Tautology placeholders contribute nothing.
pub fn shared_and_private(partitions: &[&[Clause]]) -> (BTreeSet<Var>, Vec<BTreeSet<Var>>) {
    let vars: Vec<BTreeSet<Var>> = partitions.iter().map(|p| vars_of(p)).collect();
    split_vars(&vars)
}

fn vars_of(clauses: &[Clause]) -> BTreeSet<Var> {
    clauses
        .iter()
        .filter(|c| !c.is_tautology())
        .flat_map(|c| c.vars())
        .collect()
}

fn split_vars(vars: &[BTreeSet<Var>]) -> (BTreeSet<Var>, Vec<BTreeSet<Var>>) {
    let mut seen = BTreeSet::new();
    let mut shared = BTreeSet::new();
    for set in vars {
        for &v in set {
            if !seen.insert(v) {
                shared.insert(v);
            }
        }
    }
    let private = vars.iter().map(|s| s.difference(&shared).copied().collect()).collect();
    (shared, private)
}
