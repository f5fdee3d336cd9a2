//! Reconciliation of partition models through interpolants.
//!
//! The global formula `G` over the shared variables starts empty. Each round
//! takes a model `m` of `G`, asks every partition whether it extends `m`
//! (solving under `m` as assumptions), and conjoins to `G` an interpolant of
//! `¬(ψᵢ ∧ m)` for every partition that refuses. The partition implies every
//! such interpolant, so the input formula does too; `G` becoming
//! unsatisfiable therefore proves the input unsatisfiable. A round in which
//! every partition extends `m` yields a global model.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::cdcl::{SolveLimits, SolveOutcome, Solver, SolverError};
use crate::cnf::{eval_formula, Assignment, Clause, Formula, Lit, Var, VarAllocator};
use crate::decomp::{decompose_lazy, DecompError, Decomposition};
use crate::itp::{interpolant_from_proof, ItpError, ItpSystem};
use crate::proof::Label;
use crate::rbc::{RbcError, RbcRef, RbcStore, TseitinEncoder};

/// Value given to shared variables the model of `G` does not constrain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completion {
    False,
    Random { seed: u64 },
}

#[derive(Debug, Clone)]
pub struct ReconcileOptions {
    pub system: ItpSystem,
    pub max_rounds: u64,
    pub timeout: Option<Duration>,
    pub completion: Completion,
    /// Check partitions on the rayon pool. Results are merged in partition
    /// order, so the outcome is identical to the sequential mode.
    pub parallel: bool,
    /// Check the refutation of `G` before reporting unsatisfiability.
    pub check_proofs: bool,
    /// Keep every interpolant in the report.
    pub keep_interpolants: bool,
}

impl Default for ReconcileOptions {
    fn default() -> Self {
        ReconcileOptions {
            system: ItpSystem::McMillan,
            max_rounds: 100_000,
            timeout: None,
            completion: Completion::False,
            parallel: false,
            check_proofs: false,
            keep_interpolants: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exhaustion {
    Rounds,
    Time,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReconcileResult {
    /// Total over all original variables; verified against the input.
    Sat(Assignment),
    Unsat,
    ResourcesExhausted(Exhaustion),
}

impl ReconcileResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, ReconcileResult::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, ReconcileResult::Unsat)
    }
}

#[derive(Debug, Clone, Default)]
pub struct PartitionStats {
    pub partition: usize,
    pub seconds: f64,
    pub failed: bool,
    /// Nodes of the refutation the interpolant was computed from.
    pub proof_nodes: usize,
    /// Gates in the interpolant after merging into the global store.
    pub itp_nodes: usize,
}

#[derive(Debug, Clone, Default)]
pub struct RoundStats {
    pub round: u64,
    pub g_seconds: f64,
    /// Clauses in `G` at the end of the round.
    pub g_clauses: usize,
    pub partitions: Vec<PartitionStats>,
}

/// One interpolant conjoined to `G`.
#[derive(Debug, Clone)]
pub struct InterpolantRecord {
    pub round: u64,
    pub partition: usize,
    /// The assumptions the partition refused (the `B` side).
    pub units: Vec<Lit>,
    /// Root in [`ReconcileReport::rbc`].
    pub interpolant: RbcRef,
}

#[derive(Debug, Clone)]
pub struct ReconcileReport {
    pub result: ReconcileResult,
    /// Number of times `G` was solved.
    pub rounds: u64,
    pub g_clauses: usize,
    pub peak_itp_nodes: usize,
    pub round_stats: Vec<RoundStats>,
    pub interpolants: Vec<InterpolantRecord>,
    pub rbc: RbcStore,
    /// `None` for a formula without clauses.
    pub decomposition: Option<Decomposition>,
    /// `Some(true)` once the refutation of `G` passed the checker.
    pub g_refutation_checked: Option<bool>,
}

#[derive(Debug, Error)]
pub enum ReconcileError {
    #[error(transparent)]
    Decomp(#[from] DecompError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Itp(#[from] ItpError),
    #[error(transparent)]
    Rbc(#[from] RbcError),
    #[error("internal error: partition {partition} extension sets {var} differently from the global model")]
    ExtensionDisagrees { partition: usize, var: Var },
    #[error("internal error: shared variable {0} missing from the global model")]
    IncompleteModel(Var),
    #[error("internal error: assembled model does not satisfy the formula")]
    ModelRejected,
    #[error("internal error: refutation of the global formula failed to check")]
    RefutationRejected,
}

enum PartitionOutcome {
    Extends(Assignment),
    Refuses {
        scratch: RbcStore,
        interpolant: RbcRef,
        proof_nodes: usize,
    },
    TimedOut,
}

struct PartitionRun {
    outcome: PartitionOutcome,
    seconds: f64,
}

fn check_partition(
    solver: &mut Solver,
    units: &[Lit],
    system: ItpSystem,
    limits: SolveLimits,
) -> Result<PartitionRun, ReconcileError> {
    let start = Instant::now();
    let outcome = match solver.solve_limited(units, limits)? {
        SolveOutcome::Sat(model) => PartitionOutcome::Extends(model),
        SolveOutcome::Unknown => PartitionOutcome::TimedOut,
        SolveOutcome::Unsat(_) | SolveOutcome::UnsatUnderAssumptions { .. } => {
            let root = solver.labeled_refutation(units)?;
            let mut scratch = RbcStore::new();
            let itp = interpolant_from_proof(solver.proof(), root, system, &mut scratch)?;
            PartitionOutcome::Refuses {
                scratch,
                interpolant: itp.root,
                proof_nodes: itp.visited,
            }
        }
    };
    Ok(PartitionRun {
        outcome,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Combines the global model `m` with each partition's extension.
/// Shared variables take their value from `m`, private ones from their
/// partition, and variables occurring nowhere are false.
pub fn assemble_model(
    m: &Assignment,
    extensions: &[Assignment],
    decomp: &Decomposition,
    num_vars: u32,
) -> Result<Assignment, ReconcileError> {
    let mut model = Assignment::all_false(num_vars);
    for &v in decomp.shared_vars() {
        let value = m.get(v).ok_or(ReconcileError::IncompleteModel(v))?;
        model.set(v, value);
    }
    for (i, ext) in extensions.iter().enumerate() {
        for v in decomp.interface_vars(i) {
            if ext.get(v) != m.get(v) {
                return Err(ReconcileError::ExtensionDisagrees { partition: i, var: v });
            }
        }
        for &v in decomp.private_vars(i) {
            model.set(v, ext.get(v).unwrap_or(false));
        }
    }
    Ok(model)
}

struct Reconciler<'f> {
    formula: &'f Formula,
    options: &'f ReconcileOptions,
    decomp: Decomposition,
    shared: Vec<Var>,
    deadline: Option<Instant>,
    global: Solver,
    partitions: Vec<Solver>,
    rbc: RbcStore,
    encoder: TseitinEncoder,
    fresh: VarAllocator,
    rng: Option<ChaCha8Rng>,
    report: ReconcileReport,
}

impl<'f> Reconciler<'f> {
    fn new(formula: &'f Formula, decomp: Decomposition, options: &'f ReconcileOptions, start: Instant) -> Self {
        let partitions = (0..decomp.k())
            .map(|i| {
                let mut s = Solver::new();
                for c in decomp.solver_clauses(formula, i) {
                    s.add_clause(c, Label::A);
                }
                s
            })
            .collect();
        let rng = match options.completion {
            Completion::False => None,
            Completion::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        Reconciler {
            formula,
            options,
            shared: decomp.shared_vars().iter().copied().collect(),
            decomp: decomp.clone(),
            deadline: options.timeout.map(|t| start + t),
            global: Solver::new(),
            partitions,
            rbc: RbcStore::new(),
            encoder: TseitinEncoder::new(),
            fresh: VarAllocator::above(formula.num_vars),
            rng,
            report: ReconcileReport {
                result: ReconcileResult::Unsat,
                rounds: 0,
                g_clauses: 0,
                peak_itp_nodes: 0,
                round_stats: Vec::new(),
                interpolants: Vec::new(),
                rbc: RbcStore::new(),
                decomposition: Some(decomp),
                g_refutation_checked: None,
            },
        }
    }

    fn limits(&self) -> SolveLimits {
        SolveLimits {
            deadline: self.deadline,
            max_conflicts: None,
        }
    }

    fn out_of_time(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// Restricts a model of `G` to the shared variables, completing the ones
    /// `G` does not mention.
    fn shared_model(&mut self, g_model: &Assignment) -> Assignment {
        let mut m = Assignment::new();
        for &v in &self.shared {
            let value = if self.global.var_occurs(v) {
                g_model.get(v).unwrap_or(false)
            } else {
                match self.rng.as_mut() {
                    Some(rng) => rng.gen(),
                    None => false,
                }
            };
            m.set(v, value);
        }
        m
    }

    fn conjoin(&mut self, scratch: &RbcStore, itp: RbcRef) -> Result<(RbcRef, usize), ReconcileError> {
        let root = self.rbc.import(scratch, itp);
        let mut clauses = Vec::new();
        let lit = self.encoder.encode(&self.rbc, root, &mut self.fresh, &mut clauses)?;
        clauses.push(Clause::new(vec![lit]));
        self.report.g_clauses += clauses.len();
        for c in &clauses {
            self.global.add_clause(c, Label::A);
        }
        Ok((root, self.rbc.and_count(root)))
    }

    fn run(mut self) -> Result<ReconcileReport, ReconcileError> {
        loop {
            if self.report.rounds >= self.options.max_rounds {
                return self.finish(ReconcileResult::ResourcesExhausted(Exhaustion::Rounds));
            }
            if self.out_of_time() {
                return self.finish(ReconcileResult::ResourcesExhausted(Exhaustion::Time));
            }
            self.report.rounds += 1;
            let round = self.report.rounds;

            let g_start = Instant::now();
            let g_outcome = self.global.solve_limited(&[], self.limits())?;
            let mut stats = RoundStats {
                round,
                g_seconds: g_start.elapsed().as_secs_f64(),
                ..RoundStats::default()
            };
            let g_model = match g_outcome {
                SolveOutcome::Sat(model) => model,
                SolveOutcome::Unsat(root) => {
                    if self.options.check_proofs {
                        let ok = self.global.proof().check_refutation(root).unwrap_or(false);
                        self.report.g_refutation_checked = Some(ok);
                        if !ok {
                            return Err(ReconcileError::RefutationRejected);
                        }
                    }
                    stats.g_clauses = self.report.g_clauses;
                    self.report.round_stats.push(stats);
                    return self.finish(ReconcileResult::Unsat);
                }
                SolveOutcome::Unknown => {
                    return self.finish(ReconcileResult::ResourcesExhausted(Exhaustion::Time));
                }
                SolveOutcome::UnsatUnderAssumptions { .. } => unreachable!("G is solved without assumptions"),
            };
            let m = self.shared_model(&g_model);

            let units: Vec<Vec<Lit>> = (0..self.decomp.k())
                .map(|i| {
                    self.decomp
                        .interface_vars(i)
                        .map(|v| Lit::new(v, m.get(v).expect("m is total over shared vars")))
                        .collect()
                })
                .collect();
            let system = self.options.system;
            let limits = self.limits();
            let runs: Vec<Result<PartitionRun, ReconcileError>> = if self.options.parallel {
                self.partitions
                    .par_iter_mut()
                    .zip(units.par_iter())
                    .map(|(s, u)| check_partition(s, u, system, limits))
                    .collect()
            } else {
                self.partitions
                    .iter_mut()
                    .zip(units.iter())
                    .map(|(s, u)| check_partition(s, u, system, limits))
                    .collect()
            };

            let mut extensions = Vec::with_capacity(runs.len());
            let mut refused = false;
            for (i, run) in runs.into_iter().enumerate() {
                let run = run?;
                let mut p = PartitionStats {
                    partition: i,
                    seconds: run.seconds,
                    ..PartitionStats::default()
                };
                match run.outcome {
                    PartitionOutcome::Extends(model) => extensions.push(model),
                    PartitionOutcome::TimedOut => {
                        return self.finish(ReconcileResult::ResourcesExhausted(Exhaustion::Time));
                    }
                    PartitionOutcome::Refuses {
                        scratch,
                        interpolant,
                        proof_nodes,
                    } => {
                        refused = true;
                        let (root, gates) = self.conjoin(&scratch, interpolant)?;
                        p.failed = true;
                        p.proof_nodes = proof_nodes;
                        p.itp_nodes = gates;
                        self.report.peak_itp_nodes = self.report.peak_itp_nodes.max(gates);
                        if self.options.keep_interpolants {
                            self.report.interpolants.push(InterpolantRecord {
                                round,
                                partition: i,
                                units: units[i].clone(),
                                interpolant: root,
                            });
                        }
                    }
                }
                stats.partitions.push(p);
            }
            stats.g_clauses = self.report.g_clauses;
            self.report.round_stats.push(stats);

            if !refused {
                let model = assemble_model(&m, &extensions, &self.decomp, self.formula.num_vars)?;
                if eval_formula(self.formula, &model) != Ok(true) {
                    return Err(ReconcileError::ModelRejected);
                }
                return self.finish(ReconcileResult::Sat(model));
            }
        }
    }

    fn finish(mut self, result: ReconcileResult) -> Result<ReconcileReport, ReconcileError> {
        self.report.result = result;
        self.report.rbc = self.rbc;
        Ok(self.report)
    }
}

/// Decides `f` by lazy decomposition into `k` partitions and reconciliation.
pub fn reconcile(f: &Formula, k: usize, options: &ReconcileOptions) -> Result<ReconcileReport, ReconcileError> {
    let start = Instant::now();
    if f.clauses.is_empty() {
        return Ok(ReconcileReport {
            result: ReconcileResult::Sat(Assignment::all_false(f.num_vars)),
            rounds: 0,
            g_clauses: 0,
            peak_itp_nodes: 0,
            round_stats: Vec::new(),
            interpolants: Vec::new(),
            rbc: RbcStore::new(),
            decomposition: None,
            g_refutation_checked: None,
        });
    }
    let decomp = decompose_lazy(f, k)?;
    Reconciler::new(f, decomp, options, start).run()
}

/// Variables of `f` that occur in more than one of the `k` partitions.
pub fn shared_vars(f: &Formula, k: usize) -> Result<BTreeSet<Var>, DecompError> {
    Ok(decompose_lazy(f, k)?.shared_vars().clone())
}
