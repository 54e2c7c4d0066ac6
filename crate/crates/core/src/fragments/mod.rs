//! Decision procedures: HoBHC(SLA) by flattening to finitely many finite
//! structures, higher-order Datalog by enumerating equalities between
//! constants, and explicit finite families directly. Each structure is
//! decided by model checking the canonical structure of the program.

pub mod datalog;
pub mod sla;

use thiserror::Error;

use crate::clause::Clause;
use crate::lia::{LiaError, Model};
use crate::lift::{lift, LiftError};
use crate::model::{decide_structure, model_check, CheckResult, Expansion, FiniteFrame, ModelError};
use crate::problem::{Problem, TheoryDecl};
use crate::signature::Signature;
use crate::structure::FiniteStructure;
use crate::term::Term;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FragmentError {
    #[error("clause {clause} is outside the fragment: {reason}")]
    NotInFragment { clause: usize, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error(transparent)]
    Lia(#[from] LiaError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fragment {
    Sla,
    Datalog,
    Finite,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatModel {
    /// Position of the structure in the family.
    pub index: usize,
    pub structure: FiniteStructure,
    /// Integer values of the background constants inducing the structure
    /// (flattened arithmetic only).
    pub witness: Option<Model>,
    pub expansion: Expansion,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Sat(Box<SatModel>),
    Unsat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecideReport {
    pub fragment: Fragment,
    /// Signature of `clauses` (after lifting and flattening).
    pub sig: Signature,
    /// The clauses that were model checked.
    pub clauses: Vec<Clause>,
    pub family: Vec<FiniteStructure>,
    /// Flattened arithmetic only.
    pub ground_terms: Vec<Term>,
    pub decision: Decision,
}

impl DecideReport {
    pub fn is_sat(&self) -> bool {
        matches!(self.decision, Decision::Sat(_))
    }

    /// Re-checks a Sat answer: the expansion satisfies every clause.
    pub fn verify(&self, budget: usize) -> Result<bool, ModelError> {
        match &self.decision {
            Decision::Unsat => Ok(true),
            Decision::Sat(m) => {
                let frame = FiniteFrame::with_budget(&self.sig, m.structure.clone(), budget);
                Ok(model_check(&frame, &m.expansion, &self.clauses)? == CheckResult::Sat)
            }
        }
    }
}

/// Satisfiable iff some structure of the family has a model; structures
/// are tried in order.
pub fn decide_family(
    sig: &Signature,
    family: &[FiniteStructure],
    clauses: &[Clause],
    budget: usize,
) -> Result<Decision, ModelError> {
    for (index, s) in family.iter().enumerate() {
        if let Some(expansion) = decide_structure(sig, s, clauses, budget)? {
            return Ok(Decision::Sat(Box::new(SatModel {
                index,
                structure: s.clone(),
                witness: None,
                expansion,
            })));
        }
    }
    Ok(Decision::Unsat)
}

/// The flattened problem and its realizable structures. λ-abstractions may
/// remain in foreground atoms.
pub fn sla_family(
    sig: &Signature,
    clauses: &[Clause],
) -> Result<(sla::FlatProblem, Vec<sla::FlatStructure>), FragmentError> {
    let mut simple = Vec::new();
    for (i, c) in clauses.iter().enumerate() {
        let parts = sla::desugar(sig, c)
            .map_err(|reason| FragmentError::NotInFragment { clause: i, reason })?;
        for p in &parts {
            if let Some(reason) = sla::sla_violation(sig, p) {
                return Err(FragmentError::NotInFragment { clause: i, reason });
            }
        }
        simple.extend(parts);
    }
    let flat = sla::flatten(sig, &simple);
    let sort = flat.sig.individual().to_string();
    let structures = sla::enumerate_flat_structures(&sort, &flat.ground_terms)?;
    Ok((flat, structures))
}

/// Decides a set of HoBHC(SLA) over all expansions of the integers with
/// the background constants interpreted arbitrarily.
pub fn decide_bsr_sla(
    sig: &Signature,
    clauses: &[Clause],
    budget: usize,
) -> Result<DecideReport, FragmentError> {
    let lifted = lift(sig, clauses)?;
    let (flat, structures) = sla_family(&lifted.sig, &lifted.clauses)?;
    let mut decision = Decision::Unsat;
    for (index, fs) in structures.iter().enumerate() {
        if let Some(expansion) = decide_structure(&flat.sig, &fs.structure, &flat.clauses, budget)? {
            decision = Decision::Sat(Box::new(SatModel {
                index,
                structure: fs.structure.clone(),
                witness: Some(fs.witness.clone()),
                expansion,
            }));
            break;
        }
    }
    Ok(DecideReport {
        fragment: Fragment::Sla,
        sig: flat.sig,
        clauses: flat.clauses,
        family: structures.into_iter().map(|f| f.structure).collect(),
        ground_terms: flat.ground_terms,
        decision,
    })
}

/// Decides a problem according to its theory header.
pub fn decide(problem: &Problem, budget: usize) -> Result<DecideReport, FragmentError> {
    match &problem.theory {
        TheoryDecl::Lia => decide_bsr_sla(&problem.sig, &problem.clauses, budget),
        TheoryDecl::Datalog(consts) => {
            let family = datalog::partition_structures(consts);
            let decision = decide_family(&problem.sig, &family, &problem.clauses, budget)?;
            Ok(DecideReport {
                fragment: Fragment::Datalog,
                sig: problem.sig.clone(),
                clauses: problem.clauses.clone(),
                family,
                ground_terms: Vec::new(),
                decision,
            })
        }
        TheoryDecl::Finite(family) => {
            let decision = decide_family(&problem.sig, family, &problem.clauses, budget)?;
            Ok(DecideReport {
                fragment: Fragment::Finite,
                sig: problem.sig.clone(),
                clauses: problem.clauses.clone(),
                family: family.clone(),
                ground_terms: Vec::new(),
                decision,
            })
        }
    }
}
