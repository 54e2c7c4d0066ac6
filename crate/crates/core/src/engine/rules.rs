//! The three inference rules.

use std::collections::HashMap;

use thiserror::Error;

use crate::clause::{atom_kind, AtomKind, DefiniteClause, ForegroundShape, GoalClause};
use crate::signature::{FreshNames, Signature};
use crate::structure::{family_refutes, Evidence, FamilyResult, StructureError, TheoryHandle};
use crate::term::Term;
use crate::types::Name;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("goal has no atom at index {0}")]
    NoSuchAtom(usize),
    #[error("atom `{atom}` does not match the head `{head}`")]
    HeadMismatch { atom: String, head: String },
    #[error("atom `{0}` is not a β-redex")]
    NotARedex(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolvent {
    pub clause: GoalClause,
    /// Head variables ↦ goal arguments, followed by the renamings of
    /// body-only variables of the definite clause.
    pub subst: Vec<(Name, Term)>,
}

/// `¬R M̄ ∨ G` and `G′ ∨ R x̄` give `G ∨ G′[M̄/x̄]`; the atoms of `G′` take
/// the place of the resolved atom. Body-only variables of the definite
/// clause that clash with variables of the goal are renamed first.
pub fn resolve(
    goal: &GoalClause,
    atom_index: usize,
    def: &DefiniteClause,
    fresh: &mut FreshNames,
) -> Result<Resolvent, RuleError> {
    let atom = goal
        .atoms
        .get(atom_index)
        .ok_or(RuleError::NoSuchAtom(atom_index))?;
    let (head, args) = atom.spine();
    let mismatch = || RuleError::HeadMismatch {
        atom: atom.sexpr(),
        head: def.head().sexpr(),
    };
    if head.as_sym() != Some(&def.head_rel) || args.len() != def.head_args.len() {
        return Err(mismatch());
    }

    let goal_vars = goal.vars();
    let def_vars = def.body.vars();
    let mut renaming: Vec<(Name, Name)> = Vec::new();
    for y in def.body_only_vars() {
        if goal_vars.contains(&y) {
            let taken = |c: &str| {
                goal_vars.iter().any(|v| &**v == c)
                    || def_vars.iter().any(|v| &**v == c)
                    || def.head_args.iter().any(|v| &**v == c)
                    || renaming.iter().any(|(_, n)| &**n == c)
            };
            let new = fresh.fresh(&y, taken);
            renaming.push((y, new));
        }
    }

    let mut subst: Vec<(Name, Term)> = def
        .head_args
        .iter()
        .cloned()
        .zip(args.iter().map(|a| (*a).clone()))
        .collect();
    subst.extend(renaming.iter().map(|(y, n)| (y.clone(), Term::var(n.clone()))));
    let clause = apply_resolution(goal, atom_index, def, &subst);
    Ok(Resolvent { clause, subst })
}

/// Builds the resolvent for a given substitution (used by replay too).
pub(crate) fn apply_resolution(
    goal: &GoalClause,
    atom_index: usize,
    def: &DefiniteClause,
    subst: &[(Name, Term)],
) -> GoalClause {
    let map: HashMap<Name, Term> = subst.iter().cloned().collect();
    let mut atoms = Vec::with_capacity(goal.atoms.len() + def.body.atoms.len());
    atoms.extend(goal.atoms[..atom_index].iter().cloned());
    atoms.extend(def.body.subst(&map));
    atoms.extend(goal.atoms[atom_index + 1..].iter().cloned());

    let mut env = crate::signature::TypeEnv::new();
    for (y, t) in def.body.env.iter() {
        if def.head_args.contains(y) {
            continue;
        }
        let name = match map.get(y).and_then(Term::as_var) {
            Some(n) => n.clone(),
            None => y.clone(),
        };
        env.insert(name, t.clone());
    }
    env.extend(&goal.env);
    GoalClause::new(atoms, &env)
}

/// One head β-step on the selected atom.
pub fn beta_rule(goal: &GoalClause, atom_index: usize) -> Result<GoalClause, RuleError> {
    let atom = goal
        .atoms
        .get(atom_index)
        .ok_or(RuleError::NoSuchAtom(atom_index))?;
    let reduced = atom
        .beta_reduce_head()
        .ok_or_else(|| RuleError::NotARedex(atom.sexpr()))?;
    let mut atoms = goal.atoms.clone();
    atoms[atom_index] = reduced;
    Ok(GoalClause::new(atoms, &goal.env))
}

/// The background atoms of `g` if every other atom has a variable head
/// (the shape required by constraint refutation).
pub fn refutation_candidate(sig: &Signature, g: &GoalClause) -> Option<GoalClause> {
    let mut background = Vec::new();
    for a in &g.atoms {
        match atom_kind(sig, a) {
            AtomKind::Background => background.push(a.clone()),
            AtomKind::Foreground(ForegroundShape::Variable(_)) => {}
            AtomKind::Foreground(_) => return None,
        }
    }
    Some(GoalClause::new(background, &g.env))
}

/// Constraint refutation over a list of candidate goals. For the standard
/// LIA model a single goal suffices; for a finite family each structure must
/// be covered by some goal. Returns the indices (into `goals`) of the
/// premises used and the evidence.
pub fn constraint_refute(
    sig: &Signature,
    theory: &TheoryHandle,
    goals: &[&GoalClause],
) -> Result<Option<(Vec<usize>, Evidence)>, StructureError> {
    let mut positions = Vec::new();
    let mut candidates = Vec::new();
    for (i, g) in goals.iter().enumerate() {
        if let Some(c) = refutation_candidate(sig, g) {
            positions.push(i);
            candidates.push(c);
        }
    }
    let refs: Vec<&GoalClause> = candidates.iter().collect();
    match family_refutes(sig, theory, &refs)? {
        FamilyResult::NotRefuted => Ok(None),
        FamilyResult::Refuted(ev) => {
            let (premises, ev) = match ev {
                Evidence::Lia { goal, model } => (
                    vec![positions[goal]],
                    Evidence::Lia {
                        goal: positions[goal],
                        model,
                    },
                ),
                Evidence::Finite(entries) => {
                    let entries: Vec<_> = entries
                        .into_iter()
                        .map(|(s, g, v)| (s, positions[g], v))
                        .collect();
                    let mut premises: Vec<usize> = entries.iter().map(|e| e.1).collect();
                    premises.sort_unstable();
                    premises.dedup();
                    (premises, Evidence::Finite(entries))
                }
            };
            Ok(Some((premises, ev)))
        }
    }
}
