//! Conflict-driven clause learning with resolution-proof logging.
//!
//! - two watched literals with blocker literals
//! - First-UIP learning; literals false at level 0 are resolved away so
//!   every learnt clause is exactly the clause its proof node carries
//! - activity-based branching, lowest index wins ties, negative phase
//! - Luby restarts (unit 100 conflicts)
//! - assumptions as pseudo-decisions on the first levels
//!
//! Learnt clauses are never deleted: later derivations may reference them.

use std::time::Instant;

use thiserror::Error;

use crate::cnf::{Assignment, Clause, Lit, Var};
use crate::proof::{Label, ProofError, ProofNodeId, ProofStore};

/// Index of a clause in the solver database.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClauseId(u32);

impl ClauseId {
    /// Returned for clauses that were not added (tautologies, or any clause
    /// once the database is already refuted).
    pub const IGNORED: ClauseId = ClauseId(u32::MAX);

    pub fn is_ignored(self) -> bool {
        self == ClauseId::IGNORED
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    /// Model total over every solver variable, extending the assumptions.
    Sat(Assignment),
    /// The clause database is contradictory; the node carries `∅`.
    Unsat(ProofNodeId),
    /// The node carries `{¬a : a ∈ conflict}`, derived from database clauses only.
    UnsatUnderAssumptions {
        conflict: Vec<Lit>,
        derivation: ProofNodeId,
    },
    /// A limit was hit before a verdict.
    Unknown,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("assumptions contain both {0} and its negation")]
    InconsistentAssumptions(Lit),
    #[error("no refutation available: the last solve did not end unsatisfiable")]
    NotRefuted,
    #[error("conflict literal {0} is not among the given B units")]
    UnitMismatch(Lit),
    #[error(transparent)]
    Proof(#[from] ProofError),
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub var_decay: f64,
    /// Conflicts per Luby unit.
    pub restart_unit: u64,
    pub phase_saving: bool,
    /// Keep a copy of every learnt clause together with the trail it was
    /// learnt under.
    pub record_learnts: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            var_decay: 0.95,
            restart_unit: 100,
            phase_saving: false,
            record_learnts: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveLimits {
    pub deadline: Option<Instant>,
    pub max_conflicts: Option<u64>,
}

/// A learnt clause and the trail it was derived under.
#[derive(Debug, Clone)]
pub struct LearntRecord {
    pub clause: Vec<Lit>,
    pub trail: Vec<Lit>,
    pub proof: ProofNodeId,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolverStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub restarts: u64,
    pub learnts: u64,
}

#[derive(Debug, Clone)]
struct StoredClause {
    lits: Vec<Lit>,
    proof: ProofNodeId,
    learnt: bool,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    clause: ClauseId,
    blocker: Lit,
}

#[derive(Debug, Clone)]
enum LastResult {
    None,
    Sat,
    Unsat(ProofNodeId),
    Assumptions(Vec<Lit>, ProofNodeId),
}

const UNASSIGNED: u8 = 2;

/// Binary max-heap over variable indices keyed by activity, ties to the
/// lower index.
#[derive(Debug, Clone, Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<Option<u32>>,
}

impl VarHeap {
    fn before(act: &[f64], a: u32, b: u32) -> bool {
        let (x, y) = (act[a as usize], act[b as usize]);
        x > y || (x == y && a < b)
    }

    fn grow(&mut self, n: usize) {
        self.pos.resize(n, None);
    }

    fn contains(&self, v: u32) -> bool {
        self.pos[v as usize].is_some()
    }

    fn sift_up(&mut self, act: &[f64], mut i: usize) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if !Self::before(act, v, p) {
                break;
            }
            self.heap[i] = p;
            self.pos[p as usize] = Some(i as u32);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i as u32);
    }

    fn sift_down(&mut self, act: &[f64], mut i: usize) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let child = if r < n && Self::before(act, self.heap[r], self.heap[l]) {
                r
            } else {
                l
            };
            let c = self.heap[child];
            if !Self::before(act, c, v) {
                break;
            }
            self.heap[i] = c;
            self.pos[c as usize] = Some(i as u32);
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = Some(i as u32);
    }

    fn insert(&mut self, act: &[f64], v: u32) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v as usize] = Some(i as u32);
        self.sift_up(act, i);
    }

    fn increased(&mut self, act: &[f64], v: u32) {
        if let Some(i) = self.pos[v as usize] {
            self.sift_up(act, i as usize);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.pos[top as usize] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = Some(0);
            self.sift_down(act, 0);
        }
        Some(top)
    }
}

/// `luby(i)` for i ≥ 1: 1 1 2 1 1 2 4 1 1 2 ...
fn luby(mut i: u64) -> u64 {
    loop {
        let mut k = 1u32;
        while (1u64 << k) - 1 < i {
            k += 1;
        }
        if (1u64 << k) - 1 == i {
            return 1u64 << (k - 1);
        }
        i -= (1u64 << (k - 1)) - 1;
    }
}

#[derive(Debug, Clone)]
pub struct Solver {
    config: SolverConfig,
    clauses: Vec<StoredClause>,
    watches: Vec<Vec<Watcher>>,
    values: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<Option<ClauseId>>,
    trail_pos: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    occurs: Vec<bool>,
    seen: Vec<bool>,
    proof: ProofStore,
    refutation: Option<ProofNodeId>,
    last: LastResult,
    learnt_log: Vec<LearntRecord>,
    stats: SolverStats,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new()
    }
}

impl Solver {
    pub fn new() -> Solver {
        Solver::with_config(SolverConfig::default())
    }

    pub fn with_config(config: SolverConfig) -> Solver {
        Solver {
            config,
            clauses: Vec::new(),
            watches: Vec::new(),
            values: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail_pos: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            heap: VarHeap::default(),
            phase: Vec::new(),
            occurs: Vec::new(),
            seen: Vec::new(),
            proof: ProofStore::new(),
            refutation: None,
            last: LastResult::None,
            learnt_log: Vec::new(),
            stats: SolverStats::default(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    pub fn proof(&self) -> &ProofStore {
        &self.proof
    }

    pub fn learnt_log(&self) -> &[LearntRecord] {
        &self.learnt_log
    }

    /// Whether `v` occurs in some clause of the database.
    pub fn var_occurs(&self, v: Var) -> bool {
        self.occurs.get(v.idx()).copied().unwrap_or(false)
    }

    /// Proof node of the empty clause, once the database is refuted.
    pub fn refutation(&self) -> Option<ProofNodeId> {
        self.refutation
    }

    /// Clauses in the database (inputs and learnt), with their proof nodes.
    pub fn clauses(&self) -> impl Iterator<Item = (&[Lit], ProofNodeId, bool)> {
        self.clauses
            .iter()
            .map(|c| (c.lits.as_slice(), c.proof, c.learnt))
    }

    /// Makes sure variables `x1..=xn` exist.
    pub fn ensure_vars(&mut self, n: usize) {
        let old = self.values.len();
        if n <= old {
            return;
        }
        self.values.resize(n, UNASSIGNED);
        self.level.resize(n, 0);
        self.reason.resize(n, None);
        self.trail_pos.resize(n, 0);
        self.activity.resize(n, 0.0);
        self.phase.resize(n, false);
        self.occurs.resize(n, false);
        self.seen.resize(n, false);
        self.watches.resize(2 * n, Vec::new());
        self.heap.grow(n);
        for v in old..n {
            self.heap.insert(&self.activity, v as u32);
        }
    }

    fn lit_value(&self, l: Lit) -> u8 {
        let v = self.values[l.var().idx()];
        if v == UNASSIGNED {
            UNASSIGNED
        } else {
            v ^ (!l.is_positive()) as u8
        }
    }

    fn is_true(&self, l: Lit) -> bool {
        self.lit_value(l) == 1
    }

    fn is_false(&self, l: Lit) -> bool {
        self.lit_value(l) == 0
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<ClauseId>) {
        let v = l.var().idx();
        debug_assert_eq!(self.values[v], UNASSIGNED);
        self.values[v] = l.is_positive() as u8;
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail_pos[v] = self.trail.len() as u32;
        self.trail.push(l);
    }

    fn new_decision_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let keep = self.trail_lim[level as usize];
        for i in (keep..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().idx();
            if self.config.phase_saving {
                self.phase[v] = l.is_positive();
            }
            self.values[v] = UNASSIGNED;
            self.reason[v] = None;
            self.heap.insert(&self.activity, v as u32);
        }
        self.trail.truncate(keep);
        self.trail_lim.truncate(level as usize);
        self.qhead = keep;
    }

    /// Adds `clause` with `label`. Must be called between solves (the solver
    /// is always back at level 0 then).
    pub fn add_clause(&mut self, clause: &Clause, label: Label) -> ClauseId {
        self.cancel_until(0);
        if let Some(v) = clause.max_var() {
            self.ensure_vars(v.index() as usize);
        }
        if clause.is_tautology() || self.refutation.is_some() {
            return ClauseId::IGNORED;
        }
        for v in clause.vars() {
            self.occurs[v.idx()] = true;
        }
        let proof = self.proof.add_input(clause.lits(), label);
        let id = self.push_clause(clause.lits().to_vec(), proof, false);
        self.attach_at_root(id);
        id
    }

    fn push_clause(&mut self, lits: Vec<Lit>, proof: ProofNodeId, learnt: bool) -> ClauseId {
        let id = ClauseId(self.clauses.len() as u32);
        self.clauses.push(StoredClause {
            lits,
            proof,
            learnt,
        });
        id
    }

    fn watch(&mut self, id: ClauseId) {
        let c = &self.clauses[id.index()].lits;
        let (a, b) = (c[0], c[1]);
        self.watches[(!a).code()].push(Watcher { clause: id, blocker: b });
        self.watches[(!b).code()].push(Watcher { clause: id, blocker: a });
    }

    /// Installs a freshly added input clause at level 0: picks watches,
    /// propagates if it is unit, records a refutation if it is falsified.
    fn attach_at_root(&mut self, id: ClauseId) {
        let mut lits = std::mem::take(&mut self.clauses[id.index()].lits);
        if lits.is_empty() {
            self.refutation = Some(self.clauses[id.index()].proof);
            return;
        }
        // true literals first, then unassigned, then false
        lits.sort_by_key(|&l| match self.lit_value(l) {
            1 => 0,
            UNASSIGNED => 1,
            _ => 2,
        });
        let first = self.lit_value(lits[0]);
        let unit = lits.len() == 1 || self.is_false(lits[1]);
        let len = lits.len();
        self.clauses[id.index()].lits = lits;
        if len >= 2 {
            self.watch(id);
        }
        match first {
            1 => {}
            UNASSIGNED if !unit => {}
            UNASSIGNED => {
                let l = self.clauses[id.index()].lits[0];
                self.enqueue(l, Some(id));
                if let Some(confl) = self.propagate() {
                    self.refute_at_root(confl);
                }
            }
            _ => self.refute_at_root(id),
        }
    }

    /// Unit propagation. Returns a falsified clause on conflict.
    fn propagate(&mut self) -> Option<ClauseId> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.code()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.is_true(w.blocker) {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cid = w.clause;
                {
                    let lits = &mut self.clauses[cid.index()].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cid.index()].lits[0];
                if first != w.blocker && self.is_true(first) {
                    ws[j] = Watcher { clause: cid, blocker: first };
                    j += 1;
                    continue;
                }
                let len = self.clauses[cid.index()].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[cid.index()].lits[k];
                    if !self.is_false(l) {
                        let lits = &mut self.clauses[cid.index()].lits;
                        lits.swap(1, k);
                        self.watches[(!l).code()].push(Watcher { clause: cid, blocker: first });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = Watcher { clause: cid, blocker: first };
                j += 1;
                if self.is_false(first) {
                    conflict = Some(cid);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                    self.qhead = self.trail.len();
                } else {
                    self.enqueue(first, Some(cid));
                }
            }
            ws.truncate(j);
            self.watches[p.code()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    /// Resolves the proof node `current` (containing `¬p`) with the reason
    /// of the true trail literal `p`.
    fn resolve_with_reason(&mut self, current: ProofNodeId, p: Lit) -> ProofNodeId {
        let reason = self.reason[p.var().idx()].expect("implied literal has a reason");
        let reason_proof = self.clauses[reason.index()].proof;
        let (left, right) = if p.is_positive() {
            (reason_proof, current)
        } else {
            (current, reason_proof)
        };
        self.proof
            .add_resolvent(left, right, p.var())
            .expect("resolution on a trail literal is well formed")
    }

    /// Resolves away every marked (`seen`) variable assigned at level 0,
    /// walking the trail downwards. Clears the marks.
    fn resolve_root_marks(&mut self, mut current: ProofNodeId, mut pending: usize) -> ProofNodeId {
        let root_end = self.trail_lim.first().copied().unwrap_or(self.trail.len());
        let mut i = root_end;
        while pending > 0 {
            i -= 1;
            let p = self.trail[i];
            let v = p.var().idx();
            if !self.seen[v] {
                continue;
            }
            self.seen[v] = false;
            pending -= 1;
            current = self.resolve_with_reason(current, p);
            let reason = self.reason[v].unwrap();
            for k in 0..self.clauses[reason.index()].lits.len() {
                let q = self.clauses[reason.index()].lits[k];
                let qv = q.var().idx();
                if q != p && !self.seen[qv] {
                    self.seen[qv] = true;
                    pending += 1;
                }
            }
        }
        current
    }

    /// Derives the empty clause from a clause falsified at level 0.
    fn refute_at_root(&mut self, confl: ClauseId) {
        let mut pending = 0;
        for k in 0..self.clauses[confl.index()].lits.len() {
            let v = self.clauses[confl.index()].lits[k].var().idx();
            if !self.seen[v] {
                self.seen[v] = true;
                pending += 1;
            }
        }
        let start = self.clauses[confl.index()].proof;
        let root = self.resolve_root_marks(start, pending);
        debug_assert!(self.proof.clause(root).is_empty());
        self.refutation = Some(root);
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(&self.activity, v as u32);
    }

    /// First-UIP analysis of `confl` at decision level ≥ 1.
    ///
    /// Returns the learnt clause (asserting literal first, a literal of the
    /// backjump level second), the backjump level and the proof node that
    /// derives exactly that clause.
    fn analyze(&mut self, confl: ClauseId) -> (Vec<Lit>, u32, ProofNodeId) {
        let current_level = self.decision_level();
        let mut learnt = vec![Lit::from_code(0)];
        let mut path = 0usize;
        let mut root_marks = 0usize;
        let mut current = self.clauses[confl.index()].proof;
        let mut reason_lits: Vec<Lit> = self.clauses[confl.index()].lits.clone();
        let mut skip: Option<Lit> = None;
        let mut index = self.trail.len();
        let uip = loop {
            for &q in &reason_lits {
                if Some(q) == skip {
                    continue;
                }
                let v = q.var().idx();
                if self.seen[v] {
                    continue;
                }
                self.seen[v] = true;
                if self.level[v] == 0 {
                    root_marks += 1;
                    continue;
                }
                self.bump(v);
                if self.level[v] == current_level {
                    path += 1;
                } else {
                    learnt.push(q);
                }
            }
            let p = loop {
                index -= 1;
                let p = self.trail[index];
                if self.seen[p.var().idx()] {
                    break p;
                }
            };
            self.seen[p.var().idx()] = false;
            path -= 1;
            if path == 0 {
                break p;
            }
            current = self.resolve_with_reason(current, p);
            let reason = self.reason[p.var().idx()].expect("non-UIP literal is implied");
            reason_lits.clear();
            reason_lits.extend_from_slice(&self.clauses[reason.index()].lits);
            skip = Some(p);
        };
        learnt[0] = !uip;
        for &l in &learnt[1..] {
            self.seen[l.var().idx()] = false;
        }
        let proof = self.resolve_root_marks(current, root_marks);

        let mut backjump = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var().idx()] > self.level[learnt[best].var().idx()] {
                    best = k;
                }
            }
            learnt.swap(1, best);
            backjump = self.level[learnt[1].var().idx()];
        }
        (learnt, backjump, proof)
    }

    /// Collects the assumptions responsible for `p` being false and derives
    /// the clause `{¬a : a ∈ conflict}`.
    fn analyze_final(&mut self, p: Lit) -> (Vec<Lit>, ProofNodeId) {
        let mut conflict = vec![p];
        let np = !p;
        let reason = self.reason[np.var().idx()].expect("a falsified assumption is implied");
        let mut current = self.clauses[reason.index()].proof;
        let mut pending = 0usize;
        for k in 0..self.clauses[reason.index()].lits.len() {
            let q = self.clauses[reason.index()].lits[k];
            if q != np && !self.seen[q.var().idx()] {
                self.seen[q.var().idx()] = true;
                pending += 1;
            }
        }
        let mut i = self.trail.len();
        while pending > 0 {
            i -= 1;
            let t = self.trail[i];
            let v = t.var().idx();
            if !self.seen[v] {
                continue;
            }
            self.seen[v] = false;
            pending -= 1;
            match self.reason[v] {
                None => conflict.push(t),
                Some(r) => {
                    current = self.resolve_with_reason(current, t);
                    for k in 0..self.clauses[r.index()].lits.len() {
                        let q = self.clauses[r.index()].lits[k];
                        if q != t && !self.seen[q.var().idx()] {
                            self.seen[q.var().idx()] = true;
                            pending += 1;
                        }
                    }
                }
            }
        }
        (conflict, current)
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.values[v as usize] == UNASSIGNED {
                let var = Var::from_idx(v as usize);
                return Some(Lit::new(var, self.phase[v as usize]));
            }
        }
        None
    }

    pub fn solve(&mut self, assumptions: &[Lit]) -> Result<SolveOutcome, SolverError> {
        self.solve_limited(assumptions, SolveLimits::default())
    }

    pub fn solve_limited(
        &mut self,
        assumptions: &[Lit],
        limits: SolveLimits,
    ) -> Result<SolveOutcome, SolverError> {
        let mut sorted = assumptions.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if let Some(w) = sorted.windows(2).find(|w| w[0].var() == w[1].var()) {
            return Err(SolverError::InconsistentAssumptions(w[1]));
        }
        if let Some(max) = assumptions.iter().map(|l| l.var().index()).max() {
            self.ensure_vars(max as usize);
        }
        self.cancel_until(0);
        let outcome = self.search(assumptions, limits);
        self.last = match &outcome {
            SolveOutcome::Sat(_) => LastResult::Sat,
            SolveOutcome::Unsat(r) => LastResult::Unsat(*r),
            SolveOutcome::UnsatUnderAssumptions { conflict, derivation } => {
                LastResult::Assumptions(conflict.clone(), *derivation)
            }
            SolveOutcome::Unknown => LastResult::None,
        };
        self.cancel_until(0);
        Ok(outcome)
    }

    fn search(&mut self, assumptions: &[Lit], limits: SolveLimits) -> SolveOutcome {
        if let Some(r) = self.refutation {
            return SolveOutcome::Unsat(r);
        }
        if let Some(confl) = self.propagate() {
            self.refute_at_root(confl);
            return SolveOutcome::Unsat(self.refutation.unwrap());
        }
        let start_conflicts = self.stats.conflicts;
        let mut restart_index = 1u64;
        let mut restart_budget = luby(restart_index) * self.config.restart_unit;
        let mut since_restart = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                since_restart += 1;
                if self.decision_level() == 0 {
                    self.refute_at_root(confl);
                    return SolveOutcome::Unsat(self.refutation.unwrap());
                }
                let (lits, backjump, proof) = self.analyze(confl);
                self.stats.learnts += 1;
                if self.config.record_learnts {
                    self.learnt_log.push(LearntRecord {
                        clause: lits.clone(),
                        trail: self.trail.clone(),
                        proof,
                    });
                }
                self.cancel_until(backjump);
                let asserting = lits[0];
                let unit = lits.len() == 1;
                let id = self.push_clause(lits, proof, true);
                if !unit {
                    self.watch(id);
                }
                self.enqueue(asserting, Some(id));
                self.var_inc /= self.config.var_decay;

                if let Some(max) = limits.max_conflicts {
                    if self.stats.conflicts - start_conflicts >= max {
                        return SolveOutcome::Unknown;
                    }
                }
                if let Some(deadline) = limits.deadline {
                    if Instant::now() >= deadline {
                        return SolveOutcome::Unknown;
                    }
                }
                continue;
            }

            if since_restart >= restart_budget {
                self.stats.restarts += 1;
                since_restart = 0;
                restart_index += 1;
                restart_budget = luby(restart_index) * self.config.restart_unit;
                self.cancel_until(0);
                continue;
            }

            let mut next = None;
            while (self.decision_level() as usize) < assumptions.len() {
                let a = assumptions[self.decision_level() as usize];
                if self.is_true(a) {
                    self.new_decision_level();
                } else if self.is_false(a) {
                    let (conflict, derivation) = self.analyze_final(a);
                    return SolveOutcome::UnsatUnderAssumptions {
                        conflict,
                        derivation,
                    };
                } else {
                    next = Some(a);
                    break;
                }
            }
            let decision = match next {
                Some(a) => a,
                None => {
                    if self.stats.decisions.is_multiple_of(1024) {
                        if let Some(deadline) = limits.deadline {
                            if Instant::now() >= deadline {
                                return SolveOutcome::Unknown;
                            }
                        }
                    }
                    match self.pick_branch() {
                        Some(l) => l,
                        None => return SolveOutcome::Sat(self.model()),
                    }
                }
            };
            self.stats.decisions += 1;
            self.new_decision_level();
            self.enqueue(decision, None);
        }
    }

    fn model(&self) -> Assignment {
        let mut a = Assignment::new();
        for (i, &v) in self.values.iter().enumerate() {
            debug_assert_ne!(v, UNASSIGNED);
            a.set(Var::from_idx(i), v == 1);
        }
        a
    }

    /// Refutation of (database clauses) ∧ (unit clauses `b_units`), with the
    /// units registered as `B` inputs.
    ///
    /// Requires the previous solve to have ended unsatisfiable. The clause
    /// `{¬a : a ∈ conflict}` of the last solve is resolved against the unit
    /// `{a}` for each conflict literal, which must be among `b_units`. After a
    /// plain `Unsat` the database refutation is returned unchanged.
    pub fn labeled_refutation(&mut self, b_units: &[Lit]) -> Result<ProofNodeId, SolverError> {
        let (conflict, derivation) = match &self.last {
            LastResult::Unsat(root) => return Ok(*root),
            LastResult::Assumptions(c, d) => (c.clone(), *d),
            LastResult::Sat | LastResult::None => return Err(SolverError::NotRefuted),
        };
        let mut conflict = conflict;
        conflict.sort_unstable();
        if let Some(&missing) = conflict.iter().find(|l| !b_units.contains(l)) {
            return Err(SolverError::UnitMismatch(missing));
        }
        let mut current = derivation;
        for a in conflict {
            let unit = self.proof.add_input(&[a], Label::B);
            let (left, right) = if a.is_positive() {
                (unit, current)
            } else {
                (current, unit)
            };
            current = self.proof.add_resolvent(left, right, a.var())?;
        }
        debug_assert!(self.proof.clause(current).is_empty());
        Ok(current)
    }
}
