//! Hash-consed boolean circuits with complement edges.
//!
//! Nodes are `True`, variable leaves, and binary `And` gates. Negation lives on
//! the edge ([`RbcRef`]), so `¬` is free and `∨` is expressed through De Morgan.
//! Construction applies the constant, idempotence and contradiction laws and
//! orders `And` children canonically, so structurally equal circuits share a
//! single node.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::ops::Not;

use thiserror::Error;

use crate::cnf::{Assignment, Clause, Lit, Var, VarAllocator};

/// A possibly complemented edge into an [`RbcStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RbcRef(u32);

impl RbcRef {
    pub const TRUE: RbcRef = RbcRef(0);
    pub const FALSE: RbcRef = RbcRef(1);

    fn new(node: u32, negated: bool) -> RbcRef {
        RbcRef((node << 1) | negated as u32)
    }

    pub fn node(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn is_const(self) -> bool {
        self.node() == 0
    }
}

impl Not for RbcRef {
    type Output = RbcRef;

    fn not(self) -> RbcRef {
        RbcRef(self.0 ^ 1)
    }
}

pub fn mk_not(r: RbcRef) -> RbcRef {
    !r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RbcNode {
    True,
    Var(Var),
    And(RbcRef, RbcRef),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RbcError {
    #[error("variable {0} is not assigned")]
    Unassigned(Var),
    #[error("fresh variable {fresh} collides with circuit variable {used}")]
    AllocatorCollision { fresh: Var, used: Var },
}

#[derive(Debug, Clone)]
pub struct RbcStore {
    nodes: Vec<RbcNode>,
    ands: HashMap<(RbcRef, RbcRef), u32>,
    vars: HashMap<Var, u32>,
}

impl Default for RbcStore {
    fn default() -> Self {
        RbcStore::new()
    }
}

impl RbcStore {
    pub fn new() -> RbcStore {
        RbcStore {
            nodes: vec![RbcNode::True],
            ands: HashMap::new(),
            vars: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, r: RbcRef) -> RbcNode {
        self.nodes[r.node() as usize]
    }

    pub fn mk_true(&self) -> RbcRef {
        RbcRef::TRUE
    }

    pub fn mk_false(&self) -> RbcRef {
        RbcRef::FALSE
    }

    pub fn mk_var(&mut self, v: Var) -> RbcRef {
        let next = self.nodes.len() as u32;
        let id = *self.vars.entry(v).or_insert(next);
        if id == next {
            self.nodes.push(RbcNode::Var(v));
        }
        RbcRef::new(id, false)
    }

    pub fn mk_lit(&mut self, l: Lit) -> RbcRef {
        let r = self.mk_var(l.var());
        if l.is_positive() {
            r
        } else {
            !r
        }
    }

    pub fn mk_and(&mut self, a: RbcRef, b: RbcRef) -> RbcRef {
        if a == RbcRef::FALSE || b == RbcRef::FALSE || a == !b {
            return RbcRef::FALSE;
        }
        if a == RbcRef::TRUE || a == b {
            return b;
        }
        if b == RbcRef::TRUE {
            return a;
        }
        let key = if a < b { (a, b) } else { (b, a) };
        let next = self.nodes.len() as u32;
        let id = *self.ands.entry(key).or_insert(next);
        if id == next {
            self.nodes.push(RbcNode::And(key.0, key.1));
        }
        RbcRef::new(id, false)
    }

    pub fn mk_or(&mut self, a: RbcRef, b: RbcRef) -> RbcRef {
        !self.mk_and(!a, !b)
    }

    /// Disjunction of literals; `⊥` for an empty iterator.
    pub fn mk_clause(&mut self, lits: impl IntoIterator<Item = Lit>) -> RbcRef {
        let mut acc = RbcRef::FALSE;
        for l in lits {
            let r = self.mk_lit(l);
            acc = self.mk_or(acc, r);
        }
        acc
    }

    /// Node ids reachable from `roots`, ascending (children before parents).
    fn cone(&self, roots: &[RbcRef]) -> Vec<u32> {
        let mut mark = vec![false; self.nodes.len()];
        let mut stack: Vec<u32> = roots.iter().map(|r| r.node()).collect();
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut mark[n as usize], true) {
                continue;
            }
            if let RbcNode::And(l, r) = self.nodes[n as usize] {
                stack.push(l.node());
                stack.push(r.node());
            }
        }
        mark.iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| i as u32)
            .collect()
    }

    /// Number of `And` gates reachable from `r`.
    pub fn and_count(&self, r: RbcRef) -> usize {
        self.cone(&[r])
            .into_iter()
            .filter(|&n| matches!(self.nodes[n as usize], RbcNode::And(..)))
            .count()
    }

    pub fn vars(&self, r: RbcRef) -> BTreeSet<Var> {
        self.cone(&[r])
            .into_iter()
            .filter_map(|n| match self.nodes[n as usize] {
                RbcNode::Var(v) => Some(v),
                _ => None,
            })
            .collect()
    }

    pub fn evaluate(&self, r: RbcRef, a: &Assignment) -> Result<bool, RbcError> {
        let cone = self.cone(&[r]);
        let mut value: HashMap<u32, bool> = HashMap::with_capacity(cone.len());
        let edge = |value: &HashMap<u32, bool>, e: RbcRef| value[&e.node()] ^ e.is_negated();
        for n in cone {
            let v = match self.nodes[n as usize] {
                RbcNode::True => true,
                RbcNode::Var(v) => a.get(v).ok_or(RbcError::Unassigned(v))?,
                RbcNode::And(l, r) => edge(&value, l) && edge(&value, r),
            };
            value.insert(n, v);
        }
        Ok(edge(&value, r))
    }

    /// Copies the circuit rooted at `r` in `other` into this store,
    /// re-interning every node. Returns the corresponding ref here.
    pub fn import(&mut self, other: &RbcStore, r: RbcRef) -> RbcRef {
        let mut map: HashMap<u32, RbcRef> = HashMap::new();
        let translate = |map: &HashMap<u32, RbcRef>, e: RbcRef| {
            let t = map[&e.node()];
            if e.is_negated() {
                !t
            } else {
                t
            }
        };
        for n in other.cone(&[r]) {
            let mapped = match other.nodes[n as usize] {
                RbcNode::True => RbcRef::TRUE,
                RbcNode::Var(v) => self.mk_var(v),
                RbcNode::And(a, b) => {
                    let (a, b) = (translate(&map, a), translate(&map, b));
                    self.mk_and(a, b)
                }
            };
            map.insert(n, mapped);
        }
        translate(&map, r)
    }

    /// Graphviz rendering of the circuits rooted at `roots`. Dashed edges are
    /// complemented.
    pub fn to_dot(&self, roots: &[RbcRef]) -> String {
        let mut out = String::from("digraph rbc {\n");
        for n in self.cone(roots) {
            let label = match self.nodes[n as usize] {
                RbcNode::True => "T".to_string(),
                RbcNode::Var(v) => v.to_string(),
                RbcNode::And(..) => "AND".to_string(),
            };
            let _ = writeln!(out, "  n{} [label=\"{}\"];", n, label);
            if let RbcNode::And(l, r) = self.nodes[n as usize] {
                for c in [l, r] {
                    let style = if c.is_negated() { " [style=dashed]" } else { "" };
                    let _ = writeln!(out, "  n{} -> n{}{};", n, c.node(), style);
                }
            }
        }
        for (i, r) in roots.iter().enumerate() {
            let style = if r.is_negated() { " [style=dashed]" } else { "" };
            let _ = writeln!(out, "  root{} [shape=box];\n  root{} -> n{}{};", i, i, r.node(), style);
        }
        out.push_str("}\n");
        out
    }
}

/// Tseitin lowering with a node cache, so lowering several circuits from
/// one store only emits clauses for gates not seen before.
#[derive(Debug, Clone, Default)]
pub struct TseitinEncoder {
    cache: HashMap<u32, Lit>,
}

impl TseitinEncoder {
    pub fn new() -> TseitinEncoder {
        TseitinEncoder::default()
    }

    /// Appends defining clauses for every uncached gate under `r` to `out`
    /// and returns the literal standing for `r`.
    ///
    /// Variable leaves map to themselves. Each gate `a = l ∧ r` gets
    /// `(¬a ∨ l)`, `(¬a ∨ r)` and `(a ∨ ¬l ∨ ¬r)`. The constant node gets one
    /// auxiliary `t` with the unit clause `(t)`.
    pub fn encode(
        &mut self,
        store: &RbcStore,
        r: RbcRef,
        fresh: &mut VarAllocator,
        out: &mut Vec<Clause>,
    ) -> Result<Lit, RbcError> {
        let cone = store.cone(&[r]);
        let first_fresh = fresh.peek();
        for &n in &cone {
            if let RbcNode::Var(v) = store.nodes[n as usize] {
                if v >= first_fresh {
                    return Err(RbcError::AllocatorCollision {
                        fresh: first_fresh,
                        used: v,
                    });
                }
            }
        }
        for n in cone {
            if self.cache.contains_key(&n) {
                continue;
            }
            let lit = match store.nodes[n as usize] {
                RbcNode::Var(v) => v.pos(),
                RbcNode::True => {
                    let t = fresh.fresh().pos();
                    out.push(Clause::new(vec![t]));
                    t
                }
                RbcNode::And(l, r) => {
                    let a = fresh.fresh().pos();
                    let (l, r) = (self.edge(l), self.edge(r));
                    out.push(Clause::new(vec![!a, l]));
                    out.push(Clause::new(vec![!a, r]));
                    out.push(Clause::new(vec![a, !l, !r]));
                    a
                }
            };
            self.cache.insert(n, lit);
        }
        Ok(self.edge(r))
    }

    fn edge(&self, e: RbcRef) -> Lit {
        let l = self.cache[&e.node()];
        if e.is_negated() {
            !l
        } else {
            l
        }
    }
}

/// Lowers `r` to CNF. The returned clauses together with the root literal
/// are equisatisfiable with `r`.
pub fn to_cnf_tseitin(
    store: &RbcStore,
    r: RbcRef,
    fresh: &mut VarAllocator,
) -> Result<(Vec<Clause>, Lit), RbcError> {
    let mut clauses = Vec::new();
    let root = TseitinEncoder::new().encode(store, r, fresh, &mut clauses)?;
    Ok((clauses, root))
}
