//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use partsat::cdcl::{Solver, SolverConfig};
use partsat::cnf::{eval_formula, Assignment, Clause, Formula, Lit, Var, VarAllocator};
use partsat::decomp::{decompose_lazy, Decomposition};
use partsat::gen::{pigeonhole, random_3cnf};
use partsat::itp::{interpolant_from_proof, ItpSystem};
use partsat::oracle::brute_force;
use partsat::proof::{Label, ProofStore};
use partsat::rbc::{to_cnf_tseitin, RbcNode, RbcRef, RbcStore};
use partsat::reconcile::{reconcile, ReconcileOptions, ReconcileReport, ReconcileResult};
use partsat_cli::record::{write_runs, RunRecord, Verdict};
use partsat_cli::run::{run_one, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Line {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

impl Line {
    fn print(&self) {
        println!(
            "[{}] criterion {} {}: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        );
    }
}

// ---------------------------------------------------------------------------
// bit-parallel circuit simulation

/// Cone of `root` in children-first order.
fn cone(rbc: &RbcStore, root: RbcRef) -> Vec<RbcRef> {
    fn go(rbc: &RbcStore, r: RbcRef, seen: &mut HashSet<u32>, out: &mut Vec<RbcRef>) {
        if !seen.insert(r.node()) {
            return;
        }
        if let RbcNode::And(a, b) = rbc.node(r) {
            go(rbc, a, seen, out);
            go(rbc, b, seen, out);
        }
        // store the positive reference of the node
        out.push(if r.is_negated() { !r } else { r });
    }
    let mut out = Vec::new();
    go(rbc, root, &mut HashSet::new(), &mut out);
    out
}

/// Evaluates `root` on 64 assignments at once; `word(v)` gives the values of `v`.
fn simulate(rbc: &RbcStore, order: &[RbcRef], root: RbcRef, word: impl Fn(Var) -> u64) -> u64 {
    let mut val: HashMap<u32, u64> = HashMap::with_capacity(order.len());
    let get = |val: &HashMap<u32, u64>, r: RbcRef| {
        let w = val[&r.node()];
        if r.is_negated() {
            !w
        } else {
            w
        }
    };
    for &r in order {
        let w = match rbc.node(r) {
            RbcNode::True => !0,
            RbcNode::Var(v) => word(v),
            RbcNode::And(a, b) => get(&val, a) & get(&val, b),
        };
        val.insert(r.node(), w);
    }
    get(&val, root)
}

// ---------------------------------------------------------------------------
// criteria 1, 2 and 5 (random instances)

/// Distinct projections onto the interface variables of the models of
/// partition `i`, as bit masks over the ascending interface list.
fn interface_projections(f: &Formula, d: &Decomposition, i: usize) -> (Vec<Var>, Vec<u32>) {
    let iface: Vec<Var> = d.interface_vars(i).collect();
    let mut order = iface.clone();
    order.extend(d.private_vars(i).iter().copied());
    let pos: HashMap<Var, usize> = order.iter().enumerate().map(|(p, &v)| (v, p)).collect();
    let mut buckets: Vec<Vec<Vec<(usize, bool)>>> = vec![Vec::new(); order.len()];
    let mut empty = false;
    for c in d.solver_clauses(f, i) {
        let lits: Vec<(usize, bool)> = c.lits().iter().map(|l| (pos[&l.var()], l.is_positive())).collect();
        match lits.iter().map(|l| l.0).max() {
            Some(m) => buckets[m].push(lits),
            None => empty = true,
        }
    }
    if empty {
        return (iface, Vec::new());
    }

    struct Search<'a> {
        buckets: &'a [Vec<Vec<(usize, bool)>>],
        values: Vec<bool>,
        ni: usize,
        found: Vec<u32>,
    }
    impl Search<'_> {
        fn ok(&self, d: usize) -> bool {
            self.buckets[d]
                .iter()
                .all(|c| c.iter().any(|&(p, positive)| self.values[p] == positive))
        }
        /// Enumerates interface prefixes, recording those with a completion.
        fn prefix(&mut self, d: usize) {
            if d == self.ni {
                if self.complete(d) {
                    let bits = (0..self.ni).fold(0u32, |acc, p| acc | (self.values[p] as u32) << p);
                    self.found.push(bits);
                }
                return;
            }
            for value in [false, true] {
                self.values[d] = value;
                if self.ok(d) {
                    self.prefix(d + 1);
                }
            }
        }
        fn complete(&mut self, d: usize) -> bool {
            if d == self.values.len() {
                return true;
            }
            for value in [false, true] {
                self.values[d] = value;
                if self.ok(d) && self.complete(d + 1) {
                    return true;
                }
            }
            false
        }
    }
    let mut s = Search {
        buckets: &buckets,
        values: vec![false; order.len()],
        ni: iface.len(),
        found: Vec::new(),
    };
    s.prefix(0);
    (iface, s.found)
}

#[derive(Default)]
struct RandomStats {
    runs: u64,
    mismatches: u64,
    bad_models: u64,
    errors: Vec<String>,
    interpolants: u64,
    contract_violations: u64,
    unsat_verdicts: u64,
    proof_failures: u64,
}

impl RandomStats {
    fn merge(mut self, o: RandomStats) -> RandomStats {
        self.runs += o.runs;
        self.mismatches += o.mismatches;
        self.bad_models += o.bad_models;
        self.errors.extend(o.errors);
        self.interpolants += o.interpolants;
        self.contract_violations += o.contract_violations;
        self.unsat_verdicts += o.unsat_verdicts;
        self.proof_failures += o.proof_failures;
        self
    }
}

/// A ⇒ I, I ∧ B unsat and vars(I) ⊆ V_A ∩ V_B for one recorded interpolant.
/// A is the partition, B the refused units. Every model of A over V_A ∪ V_B
/// is covered by the projections (I only reads shared variables), and B fixes
/// all of V_B, so checking I on the units decides I ∧ B.
fn contract_holds(
    report: &ReconcileReport,
    d: &Decomposition,
    i: usize,
    units: &[Lit],
    root: RbcRef,
    projections: &(Vec<Var>, Vec<u32>),
) -> bool {
    let rbc = &report.rbc;
    let a_vars = d.partition_vars(i);
    let b_vars: BTreeSet<Var> = units.iter().map(|l| l.var()).collect();
    let shared: BTreeSet<Var> = a_vars.intersection(&b_vars).copied().collect();
    if !rbc.vars(root).is_subset(&shared) {
        return false;
    }
    let order = cone(rbc, root);
    let b = Assignment::from_lits(units.iter().copied());
    let on_b = simulate(rbc, &order, root, |v| if b.get(v) == Some(true) { !0 } else { 0 });
    if on_b & 1 != 0 {
        return false;
    }
    let (iface, projs) = projections;
    let index: HashMap<Var, usize> = iface.iter().enumerate().map(|(p, &v)| (v, p)).collect();
    for chunk in projs.chunks(64) {
        let lanes = chunk.len();
        let word = |v: Var| {
            let p = index[&v];
            chunk
                .iter()
                .enumerate()
                .fold(0u64, |acc, (lane, bits)| acc | ((bits >> p & 1) as u64) << lane)
        };
        let out = simulate(rbc, &order, root, word);
        let mask = if lanes == 64 { !0 } else { (1u64 << lanes) - 1 };
        if out & mask != mask {
            return false;
        }
    }
    true
}

fn random_instance(idx: u64) -> Formula {
    let ratio = [3.0, 4.26, 5.0][(idx % 3) as usize];
    let n = 8 + ((idx / 3) % 17) as u32;
    random_3cnf(n, ratio, 0x5eed_0000 + idx)
}

fn check_random_instance(idx: u64) -> RandomStats {
    let f = random_instance(idx);
    let expected = brute_force(&f).is_some();
    let mut st = RandomStats::default();
    for k in [1usize, 2, 3, 5, 8] {
        let d = decompose_lazy(&f, k).unwrap();
        let mut projections: HashMap<usize, (Vec<Var>, Vec<u32>)> = HashMap::new();
        for system in ItpSystem::ALL {
            let opts = ReconcileOptions {
                system,
                check_proofs: true,
                keep_interpolants: true,
                ..ReconcileOptions::default()
            };
            st.runs += 1;
            let report = match reconcile(&f, k, &opts) {
                Ok(r) => r,
                Err(e) => {
                    st.errors.push(format!("instance {} k={} {}: {}", idx, k, system, e));
                    continue;
                }
            };
            match &report.result {
                ReconcileResult::Sat(m) => {
                    if !expected {
                        st.mismatches += 1;
                    }
                    if eval_formula(&f, m) != Ok(true) {
                        st.bad_models += 1;
                    }
                }
                ReconcileResult::Unsat => {
                    if expected {
                        st.mismatches += 1;
                    }
                    st.unsat_verdicts += 1;
                    if report.g_refutation_checked != Some(true) {
                        st.proof_failures += 1;
                    }
                }
                ReconcileResult::ResourcesExhausted(_) => st.mismatches += 1,
            }
            for rec in &report.interpolants {
                st.interpolants += 1;
                let proj = projections
                    .entry(rec.partition)
                    .or_insert_with(|| interface_projections(&f, &d, rec.partition));
                if !contract_holds(&report, &d, rec.partition, &rec.units, rec.interpolant, proj) {
                    st.contract_violations += 1;
                }
            }
        }
    }
    st
}

// ---------------------------------------------------------------------------
// criterion 3

fn worked_example() -> Line {
    let x = Var::new(1);
    let y = Var::new(2);
    let mut store = ProofStore::new();
    let a1 = store.add_input(&[x.pos()], Label::A);
    let a2 = store.add_input(&[x.neg(), y.pos()], Label::A);
    let b1 = store.add_input(&[y.neg()], Label::B);
    let r1 = store.add_resolvent(a1, a2, x).unwrap();
    let root = store.add_resolvent(r1, b1, y).unwrap();
    let mut failures = Vec::new();
    for system in ItpSystem::ALL {
        let mut rbc = RbcStore::new();
        let itp = match interpolant_from_proof(&store, root, system, &mut rbc) {
            Ok(i) => i,
            Err(e) => {
                failures.push(format!("{}: {}", system, e));
                continue;
            }
        };
        for bits in 0..4u32 {
            let a = Assignment::from_lits([Lit::new(x, bits & 1 != 0), Lit::new(y, bits & 2 != 0)]);
            if rbc.evaluate(itp.root, &a) != Ok(bits & 2 != 0) {
                failures.push(format!("{} differs from y", system));
                break;
            }
        }
    }
    Line {
        id: 3,
        name: "worked example",
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            "interpolant equivalent to y under mcmillan, hkp, dual-mcmillan".into()
        } else {
            failures.join("; ")
        },
    }
}

// ---------------------------------------------------------------------------
// criterion 4

fn all_models(f: &Formula) -> Vec<u32> {
    let n = f.num_vars;
    let masks: Vec<(u32, u32)> = f
        .clauses
        .iter()
        .map(|c| {
            c.lits().iter().fold((0, 0), |(p, q), l| {
                let b = 1u32 << (l.var().index() - 1);
                if l.is_positive() {
                    (p | b, q)
                } else {
                    (p, q | b)
                }
            })
        })
        .collect();
    (0u32..1 << n)
        .filter(|&a| masks.iter().all(|&(p, q)| a & p != 0 || !a & q != 0))
        .collect()
}

fn learnt_clause_checks() -> Line {
    let mut learnts = 0u64;
    let mut violations = 0u64;
    for idx in 0..100u64 {
        let ratio = [3.0, 4.26, 5.0][(idx % 3) as usize];
        let n = 8 + (idx % 13) as u32;
        let f = random_3cnf(n, ratio, 0xc0ffee + idx);
        let models = all_models(&f);
        let mut s = Solver::with_config(SolverConfig {
            record_learnts: true,
            ..SolverConfig::default()
        });
        for c in &f.clauses {
            s.add_clause(c, Label::A);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(idx);
        let assumptions: Vec<Lit> = (1..=3)
            .map(|_| Lit::new(Var::new(rng.gen_range(1..=n)), rng.gen()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let consistent = assumptions.iter().all(|l| !assumptions.contains(&!*l));
        if consistent {
            let _ = s.solve(&assumptions);
        }
        let _ = s.solve(&[]);
        for rec in s.learnt_log() {
            learnts += 1;
            let implied = models.iter().all(|&m| {
                rec.clause
                    .iter()
                    .any(|l| (m >> (l.var().index() - 1) & 1 == 1) == l.is_positive())
            });
            let falsified = rec.clause.iter().all(|&l| rec.trail.contains(&!l));
            if !implied || !falsified {
                violations += 1;
            }
        }
    }
    Line {
        id: 4,
        name: "learnt clauses",
        pass: violations == 0 && learnts > 0,
        detail: format!("100 instances, {} learnt clauses, {} violations", learnts, violations),
    }
}

// ---------------------------------------------------------------------------
// criteria 6 and 8

const HARD_BUDGET: Duration = Duration::from_secs(600);

struct HardRun {
    records: Vec<RunRecord>,
    unchecked: Vec<String>,
}

fn hard_sweep() -> HardRun {
    let cfg = RunConfig {
        system: ItpSystem::McMillan,
        timeout: HARD_BUDGET,
        check_proofs: true,
        ..RunConfig::default()
    };
    let mut records = Vec::new();
    let mut unchecked = Vec::new();
    for (name, f) in [("hole7", pigeonhole(7, 6)), ("hole8", pigeonhole(8, 7))] {
        for k in 1..=50 {
            let (record, report) = run_one(&f, name, k, &cfg).expect("valid configuration");
            if report.result.is_unsat() && report.g_refutation_checked != Some(true) {
                unchecked.push(format!("{} k={}", name, k));
            }
            records.push(record);
        }
    }
    HardRun { records, unchecked }
}

fn hard_benchmarks(first: &HardRun) -> Line {
    let mut problems = Vec::new();
    for r in &first.records {
        let k: usize = r.k.parse().unwrap();
        if [1, 10, 50].contains(&k) && (r.verdict != Verdict::Unsat || r.seconds >= HARD_BUDGET.as_secs_f64()) {
            problems.push(format!("{} k={} gave {} in {:.3}s", r.file, k, r.verdict, r.seconds));
        }
    }
    for file in ["hole7", "hole8"] {
        let verdicts: BTreeSet<Verdict> = first
            .records
            .iter()
            .filter(|r| r.file == file && r.verdict.is_solved())
            .map(|r| r.verdict)
            .collect();
        if verdicts.len() > 1 {
            problems.push(format!("{} verdicts disagree across k", file));
        }
    }
    let csv = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance_sweep.csv");
    let written = std::fs::File::create(&csv)
        .map_err(|e| e.to_string())
        .and_then(|f| write_runs(f, &first.records).map_err(|e| e.to_string()));
    if let Err(e) = written {
        problems.push(format!("cannot write {}: {}", csv.display(), e));
    }
    let pick = |file: &str, k: &str| {
        first
            .records
            .iter()
            .find(|r| r.file == file && r.k == k)
            .map(|r| format!("{}s", r.seconds))
            .unwrap_or_default()
    };
    Line {
        id: 6,
        name: "hard benchmarks",
        pass: problems.is_empty(),
        detail: if problems.is_empty() {
            format!(
                "hole7 k=1/10/50 {}/{}/{}, hole8 {}/{}/{}, all UNSAT; sweep k=1..50 in {}",
                pick("hole7", "1"),
                pick("hole7", "10"),
                pick("hole7", "50"),
                pick("hole8", "1"),
                pick("hole8", "10"),
                pick("hole8", "50"),
                csv.display()
            )
        } else {
            problems.join("; ")
        },
    }
}

fn determinism(first: &HardRun, second: &HardRun) -> Line {
    let key = |h: &HardRun| -> Vec<(String, String, Verdict, u64, usize)> {
        h.records
            .iter()
            .map(|r| (r.file.clone(), r.k.clone(), r.verdict, r.rounds, r.g_clauses))
            .collect()
    };
    let (a, b) = (key(first), key(second));
    let differing = a.iter().zip(&b).filter(|(x, y)| x != y).count();
    Line {
        id: 8,
        name: "determinism",
        pass: a.len() == b.len() && differing == 0,
        detail: format!("{} runs repeated, {} differ in verdict/rounds/G clauses", a.len(), differing),
    }
}

// ---------------------------------------------------------------------------
// criterion 7

#[derive(Debug)]
enum Expr {
    Const(bool),
    Var(u32),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

fn random_expr(rng: &mut ChaCha8Rng, nv: u32, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.1) {
            Expr::Const(rng.gen())
        } else {
            Expr::Var(rng.gen_range(1..=nv))
        };
    }
    match rng.gen_range(0..3) {
        0 => Expr::Not(Box::new(random_expr(rng, nv, depth - 1))),
        1 => Expr::And(
            Box::new(random_expr(rng, nv, depth - 1)),
            Box::new(random_expr(rng, nv, depth - 1)),
        ),
        _ => Expr::Or(
            Box::new(random_expr(rng, nv, depth - 1)),
            Box::new(random_expr(rng, nv, depth - 1)),
        ),
    }
}

fn eval_expr(e: &Expr, bits: u32) -> bool {
    match e {
        Expr::Const(b) => *b,
        Expr::Var(v) => bits >> (v - 1) & 1 == 1,
        Expr::Not(x) => !eval_expr(x, bits),
        Expr::And(x, y) => eval_expr(x, bits) && eval_expr(y, bits),
        Expr::Or(x, y) => eval_expr(x, bits) || eval_expr(y, bits),
    }
}

fn build(e: &Expr, s: &mut RbcStore) -> RbcRef {
    match e {
        Expr::Const(b) => {
            if *b {
                s.mk_true()
            } else {
                s.mk_false()
            }
        }
        Expr::Var(v) => s.mk_var(Var::new(*v)),
        Expr::Not(x) => !build(x, s),
        Expr::And(x, y) => {
            let (a, b) = (build(x, s), build(y, s));
            s.mk_and(a, b)
        }
        Expr::Or(x, y) => {
            let (a, b) = (build(x, s), build(y, s));
            s.mk_or(a, b)
        }
    }
}

fn masks(clauses: &[Clause]) -> Vec<(u32, u32)> {
    clauses
        .iter()
        .map(|c| {
            c.lits().iter().fold((0, 0), |(p, q), l| {
                let b = 1u32 << (l.var().index() - 1);
                if l.is_positive() {
                    (p | b, q)
                } else {
                    (p, q | b)
                }
            })
        })
        .collect()
}

/// Largest circuit whose Tseitin encoding is still enumerated with all
/// auxiliaries.
const MAX_AND_GATES: usize = 9;

fn rbc_tseitin() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7ce1);
    let mut circuits = 0;
    let mut eval_violations = 0;
    let mut tseitin_violations = 0;
    let mut max_total_vars = 0;
    while circuits < 1000 {
        let nv = rng.gen_range(1..=8);
        let depth = rng.gen_range(1..=5);
        let e = random_expr(&mut rng, nv, depth);
        let mut s = RbcStore::new();
        let r = build(&e, &mut s);
        if s.and_count(r) > MAX_AND_GATES {
            continue;
        }
        circuits += 1;
        for bits in 0u32..1 << nv {
            let a = Assignment::from_lits((1..=nv).map(|i| Lit::new(Var::new(i), bits >> (i - 1) & 1 == 1)));
            if s.evaluate(r, &a) != Ok(eval_expr(&e, bits)) {
                eval_violations += 1;
                break;
            }
        }
        let mut fresh = VarAllocator::above(nv);
        let (mut clauses, root) = match to_cnf_tseitin(&s, r, &mut fresh) {
            Ok(x) => x,
            Err(_) => {
                tseitin_violations += 1;
                continue;
            }
        };
        clauses.push(Clause::new(vec![root]));
        let total = fresh.max_allocated().max(nv);
        max_total_vars = max_total_vars.max(total);
        let ms = masks(&clauses);
        // satisfying extensions per assignment of the circuit variables
        let mut count = vec![0u32; 1 << nv];
        for full in 0u32..1 << total {
            if ms.iter().all(|&(p, q)| full & p != 0 || !full & q != 0) {
                count[(full & ((1 << nv) - 1)) as usize] += 1;
            }
        }
        if (0u32..1 << nv).any(|bits| count[bits as usize] != eval_expr(&e, bits) as u32) {
            tseitin_violations += 1;
        }
    }
    Line {
        id: 7,
        name: "rbc/tseitin",
        pass: eval_violations == 0 && tseitin_violations == 0,
        detail: format!(
            "{} circuits, {} evaluation and {} encoding violations (up to {} vars with auxiliaries)",
            circuits, eval_violations, tseitin_violations, max_total_vars
        ),
    }
}

// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let start = Instant::now();
    let mut lines = Vec::new();

    let t = Instant::now();
    let st = (0..500u64)
        .into_par_iter()
        .map(check_random_instance)
        .reduce(RandomStats::default, RandomStats::merge);
    let random_seconds = t.elapsed().as_secs_f64();
    let mut detail = format!(
        "500 instances x k in {{1,2,3,5,8}} x 3 systems = {} runs, {} mismatches, {} invalid models, {:.1}s",
        st.runs, st.mismatches, st.bad_models, random_seconds
    );
    if !st.errors.is_empty() {
        detail.push_str(&format!(", {} errors (first: {})", st.errors.len(), st.errors[0]));
    }
    lines.push(Line {
        id: 1,
        name: "oracle equivalence",
        pass: st.mismatches == 0 && st.bad_models == 0 && st.errors.is_empty() && random_seconds < 300.0,
        detail,
    });
    lines.push(Line {
        id: 2,
        name: "interpolant contract",
        pass: st.contract_violations == 0 && st.interpolants > 0,
        detail: format!("{} interpolants, {} violations", st.interpolants, st.contract_violations),
    });
    lines[0].print();
    lines[1].print();

    lines.push(worked_example());
    lines.last().unwrap().print();
    lines.push(learnt_clause_checks());
    lines.last().unwrap().print();

    let first = hard_sweep();
    let second = hard_sweep();
    let unsat_hard = first.records.iter().filter(|r| r.verdict == Verdict::Unsat).count();
    let proof_failures = st.proof_failures as usize + first.unchecked.len();
    let proof_line = Line {
        id: 5,
        name: "proof checking",
        pass: proof_failures == 0,
        detail: format!(
            "{} UNSAT verdicts ({} random, {} pigeonhole), {} refutations rejected or unchecked",
            st.unsat_verdicts as usize + unsat_hard,
            st.unsat_verdicts,
            unsat_hard,
            proof_failures
        ),
    };
    proof_line.print();
    let hard_line = hard_benchmarks(&first);
    hard_line.print();
    let rbc_line = rbc_tseitin();
    rbc_line.print();
    let det_line = determinism(&first, &second);
    det_line.print();
    lines.extend([proof_line, hard_line, rbc_line, det_line]);

    lines.sort_by_key(|l| l.id);
    let failed = lines.iter().filter(|l| !l.pass).count();
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        lines.len() - failed,
        lines.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
