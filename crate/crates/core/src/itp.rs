//! Craig interpolants from labeled resolution refutations.
//!
//! Three systems are supported. Each assigns a partial interpolant to every
//! input clause and combines them at every resolution step according to the
//! class of the pivot variable:
//!
//! | pivot class | McMillan      | HKP                           |
//! |-------------|---------------|-------------------------------|
//! | A-local     | `I1 ∨ I2`     | `I1 ∨ I2`                     |
//! | shared      | `I1 ∧ I2`     | `(x ∨ I1) ∧ (¬x ∨ I2)`        |
//! | B-local     | `I1 ∧ I2`     | `I1 ∧ I2`                     |
//!
//! `I1` belongs to the antecedent containing the pivot positively.
//! McMillan starts A clauses at their shared literals and B clauses at `⊤`;
//! HKP starts A clauses at `⊥` and B clauses at `⊤`. The dual McMillan system
//! runs McMillan with the labels swapped and negates the result.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cnf::{Lit, Var};
use crate::proof::{Label, NodeKind, ProofError, ProofNodeId, ProofStore};
use crate::rbc::{RbcRef, RbcStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ItpSystem {
    McMillan,
    Hkp,
    DualMcMillan,
}

impl ItpSystem {
    pub const ALL: [ItpSystem; 3] = [ItpSystem::McMillan, ItpSystem::Hkp, ItpSystem::DualMcMillan];

    pub fn name(self) -> &'static str {
        match self {
            ItpSystem::McMillan => "mcmillan",
            ItpSystem::Hkp => "hkp",
            ItpSystem::DualMcMillan => "dual-mcmillan",
        }
    }
}

impl fmt::Display for ItpSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ItpSystem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mcmillan" => Ok(ItpSystem::McMillan),
            "hkp" | "pudlak" => Ok(ItpSystem::Hkp),
            "dual-mcmillan" | "dualmcmillan" | "dual" => Ok(ItpSystem::DualMcMillan),
            other => Err(format!("unknown interpolation system `{}`", other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarClass {
    ALocal,
    Shared,
    BLocal,
}

impl VarClass {
    fn swapped(self) -> VarClass {
        match self {
            VarClass::ALocal => VarClass::BLocal,
            VarClass::Shared => VarClass::Shared,
            VarClass::BLocal => VarClass::ALocal,
        }
    }
}

/// Variable classification of one refutation, taken from its input leaves.
#[derive(Debug, Clone, Default)]
pub struct VarClasses {
    a_vars: BTreeSet<Var>,
    b_vars: BTreeSet<Var>,
}

impl VarClasses {
    pub fn from_sets(a_vars: BTreeSet<Var>, b_vars: BTreeSet<Var>) -> VarClasses {
        VarClasses { a_vars, b_vars }
    }

    /// Classes from the leaves reachable from `root`.
    pub fn of_refutation(store: &ProofStore, root: ProofNodeId) -> Result<VarClasses, ProofError> {
        let mut classes = VarClasses::default();
        for id in store.leaves(root)? {
            let NodeKind::Input { label } = store.kind(id) else {
                unreachable!("leaves are inputs")
            };
            let set = match label {
                Label::A => &mut classes.a_vars,
                Label::B => &mut classes.b_vars,
            };
            set.extend(store.clause(id).iter().map(|l| l.var()));
        }
        Ok(classes)
    }

    /// `None` for a variable occurring in no leaf.
    pub fn class(&self, v: Var) -> Option<VarClass> {
        match (self.a_vars.contains(&v), self.b_vars.contains(&v)) {
            (true, true) => Some(VarClass::Shared),
            (true, false) => Some(VarClass::ALocal),
            (false, true) => Some(VarClass::BLocal),
            (false, false) => None,
        }
    }

    pub fn shared(&self) -> impl Iterator<Item = Var> + '_ {
        self.a_vars.intersection(&self.b_vars).copied()
    }

    pub fn a_vars(&self) -> &BTreeSet<Var> {
        &self.a_vars
    }

    pub fn b_vars(&self) -> &BTreeSet<Var> {
        &self.b_vars
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ItpError {
    #[error("node {0} does not root a valid refutation")]
    InvalidRefutation(ProofNodeId),
    #[error(transparent)]
    Proof(#[from] ProofError),
}

/// Partial interpolant of an input clause. For the dual system this is the
/// McMillan value under swapped labels (the final negation happens in
/// [`interpolant_from_proof`]).
pub fn initial_interpolant(
    clause: &[Lit],
    label: Label,
    system: ItpSystem,
    classes: &VarClasses,
    rbc: &mut RbcStore,
) -> RbcRef {
    let shared_part = |rbc: &mut RbcStore| {
        rbc.mk_clause(
            clause
                .iter()
                .copied()
                .filter(|l| classes.class(l.var()) == Some(VarClass::Shared)),
        )
    };
    match (system, label) {
        (ItpSystem::McMillan, Label::A) | (ItpSystem::DualMcMillan, Label::B) => shared_part(rbc),
        (ItpSystem::McMillan, Label::B) | (ItpSystem::DualMcMillan, Label::A) => RbcRef::TRUE,
        (ItpSystem::Hkp, Label::A) => RbcRef::FALSE,
        (ItpSystem::Hkp, Label::B) => RbcRef::TRUE,
    }
}

/// Partial interpolant of a resolvent. `left` belongs to the antecedent
/// containing `pivot` positively.
pub fn resolve_interpolant(
    system: ItpSystem,
    pivot_class: VarClass,
    pivot: Var,
    left: RbcRef,
    right: RbcRef,
    rbc: &mut RbcStore,
) -> RbcRef {
    let class = match system {
        ItpSystem::DualMcMillan => pivot_class.swapped(),
        _ => pivot_class,
    };
    match (system, class) {
        (_, VarClass::ALocal) => rbc.mk_or(left, right),
        (_, VarClass::BLocal) => rbc.mk_and(left, right),
        (ItpSystem::McMillan | ItpSystem::DualMcMillan, VarClass::Shared) => rbc.mk_and(left, right),
        (ItpSystem::Hkp, VarClass::Shared) => {
            let x = rbc.mk_var(pivot);
            let with_pos = rbc.mk_or(x, left);
            let with_neg = rbc.mk_or(!x, right);
            rbc.mk_and(with_pos, with_neg)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interpolant {
    pub root: RbcRef,
    /// Proof nodes visited; equals the number of nodes reachable from the
    /// refutation root.
    pub visited: usize,
}

/// Interpolant of the refutation rooted at `root`. The refutation is checked
/// first. Variable classes come from the reachable leaves only.
pub fn interpolant_from_proof(
    store: &ProofStore,
    root: ProofNodeId,
    system: ItpSystem,
    rbc: &mut RbcStore,
) -> Result<Interpolant, ItpError> {
    if !store.check_refutation(root)? {
        return Err(ItpError::InvalidRefutation(root));
    }
    let classes = VarClasses::of_refutation(store, root)?;
    let reachable = store.reachable(root)?;
    let mut partial = Vec::with_capacity(reachable.len());
    let slot = |id: ProofNodeId| reachable.binary_search(&id).expect("antecedent is reachable");
    for &id in &reachable {
        let itp = match store.kind(id) {
            NodeKind::Input { label } => initial_interpolant(store.clause(id), label, system, &classes, rbc),
            NodeKind::Resolvent { left, right, pivot } => {
                let class = classes
                    .class(pivot)
                    .expect("a checked pivot occurs in some leaf");
                resolve_interpolant(system, class, pivot, partial[slot(left)], partial[slot(right)], rbc)
            }
        };
        partial.push(itp);
    }
    let mut result = *partial.last().expect("root is reachable");
    if system == ItpSystem::DualMcMillan {
        result = !result;
    }
    Ok(Interpolant {
        root: result,
        visited: reachable.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Assignment;

    fn lits(v: &[i32]) -> Vec<Lit> {
        v.iter().map(|&x| Lit::from_dimacs(x)).collect()
    }

    fn x(i: u32) -> Var {
        Var::new(i)
    }

    /// A = {x1}, {¬x1 ∨ x2}; B = {¬x2}
    fn worked_example() -> (ProofStore, ProofNodeId) {
        let mut s = ProofStore::new();
        let a1 = s.add_input(&lits(&[1]), Label::A);
        let a2 = s.add_input(&lits(&[-1, 2]), Label::A);
        let b = s.add_input(&lits(&[-2]), Label::B);
        let y = s.add_resolvent(a1, a2, x(1)).unwrap();
        let root = s.add_resolvent(y, b, x(2)).unwrap();
        (s, root)
    }

    #[test]
    fn worked_example_is_y_under_every_system() {
        let (s, root) = worked_example();
        for system in ItpSystem::ALL {
            let mut rbc = RbcStore::new();
            let itp = interpolant_from_proof(&s, root, system, &mut rbc).unwrap();
            assert_eq!(itp.visited, 5);
            let y = rbc.mk_var(x(2));
            assert_eq!(itp.root, y, "{}", system);
        }
    }

    #[test]
    fn mcmillan_initial_keeps_shared_literals() {
        let classes = VarClasses::from_sets([x(1), x(2)].into(), [x(2)].into());
        let mut rbc = RbcStore::new();
        let i = initial_interpolant(&lits(&[1, -2]), Label::A, ItpSystem::McMillan, &classes, &mut rbc);
        let not_y = !rbc.mk_var(x(2));
        assert_eq!(i, not_y);
        let b = initial_interpolant(&lits(&[1, -2]), Label::B, ItpSystem::McMillan, &classes, &mut rbc);
        assert_eq!(b, RbcRef::TRUE);
        let h = initial_interpolant(&lits(&[1]), Label::A, ItpSystem::Hkp, &classes, &mut rbc);
        assert_eq!(h, RbcRef::FALSE);
    }

    #[test]
    fn resolution_rules() {
        let mut rbc = RbcStore::new();
        let y = rbc.mk_var(x(2));
        assert_eq!(
            resolve_interpolant(ItpSystem::McMillan, VarClass::Shared, x(2), y, RbcRef::TRUE, &mut rbc),
            y
        );
        assert_eq!(
            resolve_interpolant(ItpSystem::Hkp, VarClass::Shared, x(2), RbcRef::FALSE, RbcRef::TRUE, &mut rbc),
            y
        );
        for system in ItpSystem::ALL {
            let class = if system == ItpSystem::DualMcMillan {
                VarClass::BLocal
            } else {
                VarClass::ALocal
            };
            assert_eq!(
                resolve_interpolant(system, class, x(1), RbcRef::FALSE, RbcRef::FALSE, &mut rbc),
                RbcRef::FALSE
            );
        }
    }

    #[test]
    fn pure_a_refutation_gives_false() {
        let mut s = ProofStore::new();
        let a = s.add_input(&lits(&[1]), Label::A);
        let b = s.add_input(&lits(&[-1]), Label::A);
        let root = s.add_resolvent(a, b, x(1)).unwrap();
        for system in ItpSystem::ALL {
            let mut rbc = RbcStore::new();
            let itp = interpolant_from_proof(&s, root, system, &mut rbc).unwrap();
            assert_eq!(itp.root, RbcRef::FALSE, "{}", system);
        }
    }

    #[test]
    fn invalid_refutation_is_rejected() {
        let (s, _) = worked_example();
        let mut rbc = RbcStore::new();
        assert_eq!(
            interpolant_from_proof(&s, ProofNodeId(3), ItpSystem::McMillan, &mut rbc),
            Err(ItpError::InvalidRefutation(ProofNodeId(3)))
        );
    }

    #[test]
    fn hkp_orientation_matters() {
        // A = {x1 ∨ x2}, B = {¬x1}, {¬x2}: shared x1, x2
        let mut s = ProofStore::new();
        let a = s.add_input(&lits(&[1, 2]), Label::A);
        let b1 = s.add_input(&lits(&[-1]), Label::B);
        let b2 = s.add_input(&lits(&[-2]), Label::B);
        let r = s.add_resolvent(a, b1, x(1)).unwrap();
        let root = s.add_resolvent(r, b2, x(2)).unwrap();
        let mut rbc = RbcStore::new();
        let itp = interpolant_from_proof(&s, root, ItpSystem::Hkp, &mut rbc).unwrap();
        // must be equivalent to x1 ∨ x2
        for bits in 0..4u32 {
            let a = Assignment::from_lits([Var::new(1).pos(), Var::new(2).pos()].map(|l| {
                let v = l.var().index() - 1;
                Lit::new(l.var(), bits >> v & 1 == 1)
            }));
            assert_eq!(rbc.evaluate(itp.root, &a).unwrap(), bits != 0);
        }
    }

    #[test]
    fn system_names_parse() {
        for system in ItpSystem::ALL {
            assert_eq!(system.name().parse::<ItpSystem>(), Ok(system));
        }
        assert!("craig".parse::<ItpSystem>().is_err());
    }
}
