//! Partitioned SAT solving: a CDCL solver with resolution proofs, Craig
//! interpolation over a reduced boolean circuit store, and the reconciliation
//! loop that combines partition solvers through interpolants.

pub mod cdcl;
pub mod cnf;
pub mod decomp;
pub mod gen;
pub mod itp;
pub mod oracle;
pub mod proof;
pub mod rbc;
pub mod reconcile;

pub use cdcl::{SolveLimits, SolveOutcome, Solver, SolverConfig};
pub use cnf::{parse_dimacs, parse_dimacs_str, Assignment, Clause, Formula, Lit, Var};
pub use decomp::{decompose_lazy, Decomposition};
pub use itp::ItpSystem;
pub use reconcile::{reconcile, ReconcileOptions, ReconcileReport, ReconcileResult};
