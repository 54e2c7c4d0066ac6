//! Derivation traces: rendering and independent replay.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::clause::{Clause, GoalClause};
use crate::engine::rules::{apply_resolution, beta_rule, refutation_candidate};
use crate::lia;
use crate::signature::Signature;
use crate::structure::{Evidence, TheoryHandle};
use crate::term::Term;
use crate::types::Name;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Resolution,
    BetaReduction,
    ConstraintRefutation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub rule: Rule,
    /// Goal premise first, then the definite clause (for resolution).
    pub premises: Vec<usize>,
    /// Selected atom of the goal premise.
    pub atom: Option<usize>,
    pub subst: Vec<(Name, Term)>,
    pub evidence: Option<Evidence>,
    pub conclusion: usize,
    pub clause: GoalClause,
}

/// Steps numbered after the input clauses `0..input_count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationTrace {
    pub input_count: usize,
    pub steps: Vec<Step>,
}

impl DerivationTrace {
    pub fn count(&self, rule: Rule) -> usize {
        self.steps.iter().filter(|s| s.rule == rule).count()
    }

    pub fn concludes_bottom(&self) -> bool {
        self.steps.last().is_some_and(|s| s.clause.is_bottom())
    }

    /// Line-oriented rendering, one step per line, ending in `QED`.
    pub fn render(&self, theory: &TheoryHandle) -> String {
        let mut out = String::new();
        for (k, s) in self.steps.iter().enumerate() {
            let premises: Vec<String> = s.premises.iter().map(|p| p.to_string()).collect();
            let (name, payload) = match (&s.rule, &s.evidence) {
                (Rule::ConstraintRefutation, Some(Evidence::Finite(entries))) => {
                    ("Comp-Constraint-Refutation", render_finite(theory, entries))
                }
                (Rule::ConstraintRefutation, Some(Evidence::Lia { model, .. })) => {
                    let parts: Vec<String> =
                        model.iter().map(|(n, v)| format!("{n}:={v}")).collect();
                    ("Constraint-Refutation", parts.join(","))
                }
                (rule, _) => {
                    let parts: Vec<String> =
                        s.subst.iter().map(|(n, t)| format!("{n}:={}", t.sexpr())).collect();
                    let name = match rule {
                        Rule::Resolution => "Resolution",
                        Rule::BetaReduction => "Beta-Reduction",
                        Rule::ConstraintRefutation => "Constraint-Refutation",
                    };
                    (name, parts.join(","))
                }
            };
            out.push_str(&format!(
                "step {}: {name} premises=[{}] subst={{{payload}}} => clause {}: {}\n",
                k + 1,
                premises.join(","),
                s.conclusion,
                s.clause.sexpr()
            ));
        }
        if self.concludes_bottom() {
            out.push_str("QED\n");
        }
        out
    }
}

fn render_finite(
    theory: &TheoryHandle,
    entries: &[(usize, usize, crate::structure::Valuation)],
) -> String {
    let structures = match theory {
        TheoryHandle::Finite(s) => Some(s),
        TheoryHandle::LiaStandard => None,
    };
    let parts: Vec<String> = entries
        .iter()
        .map(|(s, g, val)| {
            let binds: Vec<String> = val
                .iter()
                .map(|(n, e)| {
                    let elem = structures
                        .and_then(|st| st.get(*s))
                        .and_then(|st| st.carrier.get(*e as usize))
                        .map(|x| x.to_string())
                        .unwrap_or_else(|| format!("#{e}"));
                    format!("{n}:={elem}")
                })
                .collect();
            format!("A{s}@{g}: {}", binds.join(","))
        })
        .collect();
    parts.join("; ")
}

impl fmt::Display for DerivationTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&TheoryHandle::LiaStandard))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("replay failed at step {step}: {reason}")]
pub struct ReplayMismatch {
    pub step: usize,
    pub reason: String,
}

/// Re-derives every step of `trace` from `input` and re-checks the side
/// conditions of constraint refutation.
pub fn replay(
    sig: &Signature,
    theory: &TheoryHandle,
    input: &[Clause],
    trace: &DerivationTrace,
) -> Result<(), ReplayMismatch> {
    if trace.input_count != input.len() {
        return Err(ReplayMismatch {
            step: 0,
            reason: format!(
                "trace expects {} input clauses, got {}",
                trace.input_count,
                input.len()
            ),
        });
    }
    let mut clauses: Vec<Clause> = input.to_vec();
    for (k, step) in trace.steps.iter().enumerate() {
        let fail = |reason: String| ReplayMismatch { step: k + 1, reason };
        if step.conclusion != clauses.len() {
            return Err(fail(format!(
                "conclusion numbered {}, expected {}",
                step.conclusion,
                clauses.len()
            )));
        }
        let goal_at = |i: usize| -> Result<&GoalClause, ReplayMismatch> {
            clauses
                .get(i)
                .and_then(Clause::as_goal)
                .ok_or_else(|| fail(format!("premise {i} is not a goal clause")))
        };
        match step.rule {
            Rule::Resolution => {
                let [gi, di] = step.premises[..] else {
                    return Err(fail("resolution needs two premises".into()));
                };
                let goal = goal_at(gi)?;
                let def = clauses
                    .get(di)
                    .and_then(Clause::as_definite)
                    .ok_or_else(|| fail(format!("premise {di} is not a definite clause")))?;
                let n = def.head_args.len();
                if step.subst.len() < n
                    || step.subst[..n].iter().map(|(x, _)| x).ne(def.head_args.iter())
                {
                    return Err(fail("substitution does not bind the head variables".into()));
                }
                let body_only: HashSet<Name> = def.body_only_vars().into_iter().collect();
                let goal_vars = goal.vars();
                for (y, t) in &step.subst[n..] {
                    let fresh = t.as_var().ok_or_else(|| fail(format!("`{y}` renamed to a non-variable")))?;
                    if !body_only.contains(y) || goal_vars.contains(fresh) {
                        return Err(fail(format!("invalid renaming of `{y}`")));
                    }
                }
                let positions: Vec<usize> = match step.atom {
                    Some(i) => vec![i],
                    None => (0..goal.atoms.len()).collect(),
                };
                let ok = positions.into_iter().any(|i| {
                    let Some(atom) = goal.atoms.get(i) else {
                        return false;
                    };
                    let (head, args) = atom.spine();
                    head.as_sym() == Some(&def.head_rel)
                        && args.len() == n
                        && args.iter().zip(&step.subst[..n]).all(|(a, (_, m))| *a == m)
                        && apply_resolution(goal, i, def, &step.subst).atoms == step.clause.atoms
                });
                if !ok {
                    return Err(fail("conclusion is not the recorded resolvent".into()));
                }
            }
            Rule::BetaReduction => {
                let [gi] = step.premises[..] else {
                    return Err(fail("β-reduction needs one premise".into()));
                };
                let goal = goal_at(gi)?;
                let positions: Vec<usize> = match step.atom {
                    Some(i) => vec![i],
                    None => (0..goal.atoms.len()).collect(),
                };
                let ok = positions.into_iter().any(|i| {
                    beta_rule(goal, i).is_ok_and(|c| c.atoms == step.clause.atoms)
                });
                if !ok {
                    return Err(fail("conclusion is not a β-reduct of the premise".into()));
                }
            }
            Rule::ConstraintRefutation => {
                if !step.clause.is_bottom() {
                    return Err(fail("constraint refutation must conclude ⊥".into()));
                }
                check_refutation(sig, theory, &clauses, step).map_err(fail)?;
            }
        }
        clauses.push(Clause::Goal(step.clause.clone()));
    }
    if !trace.concludes_bottom() {
        return Err(ReplayMismatch {
            step: trace.steps.len(),
            reason: "trace does not end in ⊥".into(),
        });
    }
    Ok(())
}

fn check_refutation(
    sig: &Signature,
    theory: &TheoryHandle,
    clauses: &[Clause],
    step: &Step,
) -> Result<(), String> {
    let candidate = |i: usize| -> Result<GoalClause, String> {
        if !step.premises.contains(&i) {
            return Err(format!("evidence cites clause {i}, which is not a premise"));
        }
        let g = clauses
            .get(i)
            .and_then(Clause::as_goal)
            .ok_or_else(|| format!("premise {i} is not a goal clause"))?;
        refutation_candidate(sig, g)
            .ok_or_else(|| format!("premise {i} has an atom with a non-variable head"))
    };
    match (theory, &step.evidence) {
        (TheoryHandle::LiaStandard, Some(Evidence::Lia { goal, model })) => {
            let g = candidate(*goal)?;
            for a in &g.atoms {
                match lia::eval_term_atom(a, model) {
                    Ok(true) => {}
                    Ok(false) => return Err(format!("witness violates `{}`", a.sexpr())),
                    Err(e) => return Err(e.to_string()),
                }
            }
            Ok(())
        }
        (TheoryHandle::Finite(structures), Some(Evidence::Finite(entries))) => {
            if entries.len() != structures.len()
                || entries.iter().enumerate().any(|(i, e)| e.0 != i)
            {
                return Err("evidence does not cover every structure".into());
            }
            for (s, g, val) in entries {
                let g = candidate(*g)?;
                for a in &g.atoms {
                    match structures[*s].eval_background(a, val) {
                        Ok(true) => {}
                        Ok(false) => {
                            return Err(format!("valuation violates `{}` in structure {s}", a.sexpr()))
                        }
                        Err(e) => return Err(e.to_string()),
                    }
                }
            }
            Ok(())
        }
        _ => Err("evidence does not match the theory".into()),
    }
}
