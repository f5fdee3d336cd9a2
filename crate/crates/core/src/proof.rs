//! Append-only resolution proofs.
//!
//! Every node carries its clause. Resolvents are binary and oriented: the
//! left antecedent contains the pivot positively, the right one negatively.
//! Interpolation relies on this orientation.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

use crate::cnf::{Lit, Var};

/// Partition label of an input clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    A,
    B,
}

impl Label {
    pub fn swapped(self) -> Label {
        match self {
            Label::A => Label::B,
            Label::B => Label::A,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::A => "A",
            Label::B => "B",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProofNodeId(pub u32);

impl ProofNodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ProofNodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Input {
        label: Label,
    },
    Resolvent {
        left: ProofNodeId,
        right: ProofNodeId,
        pivot: Var,
    },
}

#[derive(Debug, Clone, Copy)]
struct NodeRecord {
    start: u32,
    len: u32,
    kind: NodeKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProofError {
    #[error("proof node {0} does not exist")]
    Dangling(ProofNodeId),
    #[error("pivot {pivot} does not occur {polarity} in node {node}")]
    MissingPivot {
        node: ProofNodeId,
        pivot: Var,
        polarity: &'static str,
    },
    #[error("resolving {left} and {right} on {pivot} yields a tautology")]
    Tautology {
        left: ProofNodeId,
        right: ProofNodeId,
        pivot: Var,
    },
}

/// Resolution proof DAG. Node ids are dense and every resolvent's
/// antecedents have smaller ids.
#[derive(Debug, Clone, Default)]
pub struct ProofStore {
    nodes: Vec<NodeRecord>,
    lits: Vec<Lit>,
}

impl ProofStore {
    pub fn new() -> ProofStore {
        ProofStore::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: ProofNodeId) -> bool {
        id.index() < self.nodes.len()
    }

    /// Literals stored across all nodes; a rough memory measure.
    pub fn literal_count(&self) -> usize {
        self.lits.len()
    }

    fn record(&self, id: ProofNodeId) -> Result<&NodeRecord, ProofError> {
        self.nodes.get(id.index()).ok_or(ProofError::Dangling(id))
    }

    /// # Panics
    /// Panics on a dangling id.
    pub fn clause(&self, id: ProofNodeId) -> &[Lit] {
        let r = &self.nodes[id.index()];
        &self.lits[r.start as usize..(r.start + r.len) as usize]
    }

    /// # Panics
    /// Panics on a dangling id.
    pub fn kind(&self, id: ProofNodeId) -> NodeKind {
        self.nodes[id.index()].kind
    }

    fn push(&mut self, lits: &[Lit], kind: NodeKind) -> ProofNodeId {
        let id = ProofNodeId(self.nodes.len() as u32);
        let start = self.lits.len() as u32;
        self.lits.extend_from_slice(lits);
        self.nodes.push(NodeRecord {
            start,
            len: lits.len() as u32,
            kind,
        });
        id
    }

    /// Appends an input clause. Literals are sorted and deduplicated; no two
    /// inputs are ever merged.
    pub fn add_input(&mut self, clause: &[Lit], label: Label) -> ProofNodeId {
        let mut lits = clause.to_vec();
        lits.sort_unstable();
        lits.dedup();
        debug_assert!(
            lits.windows(2).all(|w| w[0].var() != w[1].var()),
            "tautological proof input"
        );
        self.push(&lits, NodeKind::Input { label })
    }

    /// Appends the resolvent of `left` (containing `pivot`) and `right`
    /// (containing `¬pivot`).
    pub fn add_resolvent(
        &mut self,
        left: ProofNodeId,
        right: ProofNodeId,
        pivot: Var,
    ) -> Result<ProofNodeId, ProofError> {
        self.record(left)?;
        self.record(right)?;
        let lits = resolve(self.clause(left), self.clause(right), pivot).map_err(|e| match e {
            ResolveError::MissingLeft => ProofError::MissingPivot {
                node: left,
                pivot,
                polarity: "positively",
            },
            ResolveError::MissingRight => ProofError::MissingPivot {
                node: right,
                pivot,
                polarity: "negatively",
            },
            ResolveError::Tautology => ProofError::Tautology { left, right, pivot },
        })?;
        Ok(self.push(&lits, NodeKind::Resolvent { left, right, pivot }))
    }

    /// Ids of all nodes reachable from `root`, ascending.
    pub fn reachable(&self, root: ProofNodeId) -> Result<Vec<ProofNodeId>, ProofError> {
        self.record(root)?;
        let mut visited = HashSet::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if !visited.insert(id) {
                continue;
            }
            if let NodeKind::Resolvent { left, right, .. } = self.nodes[id.index()].kind {
                for child in [left, right] {
                    // antecedents must precede their resolvent
                    if child >= id {
                        return Err(ProofError::Dangling(child));
                    }
                    stack.push(child);
                }
            }
        }
        let mut ids: Vec<ProofNodeId> = visited.into_iter().collect();
        ids.sort_unstable();
        Ok(ids)
    }

    /// Input nodes reachable from `root`.
    pub fn leaves(&self, root: ProofNodeId) -> Result<Vec<ProofNodeId>, ProofError> {
        Ok(self
            .reachable(root)?
            .into_iter()
            .filter(|&id| matches!(self.kind(id), NodeKind::Input { .. }))
            .collect())
    }

    /// True iff `root` carries the empty clause and every resolvent reachable
    /// from it is a correct, non-tautological resolution of its antecedents.
    /// Resolvent clauses are recomputed, never trusted.
    pub fn check_refutation(&self, root: ProofNodeId) -> Result<bool, ProofError> {
        if !self.clause_of(root)?.is_empty() {
            return Ok(false);
        }
        self.check_derivation(root)
    }

    /// Like [`check_refutation`](Self::check_refutation) without requiring the
    /// root clause to be empty.
    pub fn check_derivation(&self, root: ProofNodeId) -> Result<bool, ProofError> {
        for id in self.reachable(root)? {
            if let NodeKind::Resolvent { left, right, pivot } = self.kind(id) {
                match resolve(self.clause(left), self.clause(right), pivot) {
                    Ok(lits) if lits == self.clause(id) => {}
                    _ => return Ok(false),
                }
            }
        }
        Ok(true)
    }

    fn clause_of(&self, id: ProofNodeId) -> Result<&[Lit], ProofError> {
        self.record(id)?;
        Ok(self.clause(id))
    }

    /// Copies the subproof reachable from `root` into a fresh store, keeping
    /// relative order. Returns the new store and the new root id.
    pub fn extract(&self, root: ProofNodeId) -> Result<(ProofStore, ProofNodeId), ProofError> {
        let reach = self.reachable(root)?;
        let mut remap = vec![u32::MAX; root.index() + 1];
        let mut out = ProofStore::new();
        for id in reach {
            let kind = match self.kind(id) {
                NodeKind::Input { label } => NodeKind::Input { label },
                NodeKind::Resolvent { left, right, pivot } => NodeKind::Resolvent {
                    left: ProofNodeId(remap[left.index()]),
                    right: ProofNodeId(remap[right.index()]),
                    pivot,
                },
            };
            let new_id = out.push(self.clause(id), kind);
            remap[id.index()] = new_id.0;
        }
        let new_root = ProofNodeId(remap[root.index()]);
        Ok((out, new_root))
    }

    /// Writes one line per node:
    /// `<id> I <label> <lits> 0` or `<id> R <left> <right> <pivot> <lits> 0`.
    pub fn dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        for i in 0..self.nodes.len() {
            let id = ProofNodeId(i as u32);
            match self.kind(id) {
                NodeKind::Input { label } => write!(out, "{} I {}", id, label)?,
                NodeKind::Resolvent { left, right, pivot } => {
                    write!(out, "{} R {} {} {}", id, left, right, pivot.index())?
                }
            }
            for l in self.clause(id) {
                write!(out, " {}", l)?;
            }
            writeln!(out, " 0")?;
        }
        Ok(())
    }

    pub fn dump_string(&self) -> String {
        let mut buf = Vec::new();
        self.dump(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("dump output is ASCII")
    }
}

enum ResolveError {
    MissingLeft,
    MissingRight,
    Tautology,
}

/// Merges two sorted clauses, dropping the pivot literals.
fn resolve(left: &[Lit], right: &[Lit], pivot: Var) -> Result<Vec<Lit>, ResolveError> {
    let pos = pivot.pos();
    let neg = pivot.neg();
    if !left.contains(&pos) {
        return Err(ResolveError::MissingLeft);
    }
    if !right.contains(&neg) {
        return Err(ResolveError::MissingRight);
    }
    let mut out = Vec::with_capacity(left.len() + right.len() - 2);
    let (mut i, mut j) = (0, 0);
    while i < left.len() || j < right.len() {
        let next = match (left.get(i), right.get(j)) {
            (Some(&a), Some(&b)) if a == b => {
                i += 1;
                j += 1;
                a
            }
            (Some(&a), Some(&b)) if a < b => {
                i += 1;
                a
            }
            (Some(_), Some(&b)) => {
                j += 1;
                b
            }
            (Some(&a), None) => {
                i += 1;
                a
            }
            (None, Some(&b)) => {
                j += 1;
                b
            }
            (None, None) => unreachable!(),
        };
        if next.var() == pivot {
            continue;
        }
        if let Some(&last) = out.last() {
            if last == !next {
                return Err(ResolveError::Tautology);
            }
        }
        out.push(next);
    }
    Ok(out)
}
