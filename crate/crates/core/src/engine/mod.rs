//! Fair breadth-first saturation with Resolution, β-Reduction and
//! Constraint refutation.
//!
//! Clauses are processed generation by generation. Within a generation the
//! order is: goal clause (by index), then premise (the β pseudo-premise
//! first, then the definite clauses in input order), then atom position.
//! Derived clauses are goal clauses only; duplicates up to renaming are
//! discarded unless deduplication is switched off.

pub mod rules;
pub mod trace;

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::clause::{Clause, GoalClause};
use crate::signature::{FreshNames, Signature};
use crate::structure::{Evidence, StructureError, TheoryHandle, Valuation};
use crate::term::{Term, TermKind};
use crate::types::{Name, Type};

pub use rules::{beta_rule, constraint_refute, refutation_candidate, resolve, Resolvent, RuleError};
pub use trace::{replay, DerivationTrace, ReplayMismatch, Rule, Step};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Rule applications (including ones producing duplicates).
    pub max_steps: usize,
    /// Stored clauses, inputs included.
    pub max_clauses: usize,
    /// Largest clause size (in term nodes) that is kept.
    pub max_term_size: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_steps: 10_000,
            max_clauses: 5_000,
            max_term_size: 10_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineOptions {
    pub budget: Budget,
    pub dedup: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            budget: Budget::default(),
            dedup: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub steps: usize,
    pub clauses: usize,
    pub generated: usize,
    pub generations: usize,
    pub duplicates: usize,
    pub dropped_by_size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Refuted(DerivationTrace),
    /// No rule adds a new clause.
    Saturated,
    BudgetExhausted(Stats),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error(
        "the standard integer model does not interpret background constants ({0}); \
         decide the problem as a finite family instead"
    )]
    UninterpretedConstants(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Clone, Debug)]
struct Origin {
    rule: Rule,
    premises: Vec<usize>,
    atom: Option<usize>,
    subst: Vec<(Name, Term)>,
}

enum Added {
    Stored(usize),
    Skipped,
    Refuted(Vec<usize>, Evidence),
}

struct Exhausted;

/// State of one saturation run.
pub struct Saturation<'a> {
    sig: &'a Signature,
    theory: &'a TheoryHandle,
    options: EngineOptions,
    clauses: Vec<Clause>,
    origins: Vec<Option<Origin>>,
    input_count: usize,
    definites: Vec<usize>,
    seen: HashSet<(Vec<Term>, Vec<Option<Type>>)>,
    fresh: FreshNames,
    /// Finite families: the first goal (and valuation) covering each structure.
    coverage: Vec<Option<(usize, Valuation)>>,
    stats: Stats,
}

impl<'a> Saturation<'a> {
    pub fn new(
        sig: &'a Signature,
        theory: &'a TheoryHandle,
        input: &[Clause],
        options: EngineOptions,
    ) -> Result<Saturation<'a>, EngineError> {
        if *theory == TheoryHandle::LiaStandard {
            let consts = sig.constants();
            if !consts.is_empty() {
                let names: Vec<&str> = consts.iter().map(|c| &**c).collect();
                return Err(EngineError::UninterpretedConstants(names.join(", ")));
            }
        }
        let coverage = match theory {
            TheoryHandle::Finite(s) => vec![None; s.len()],
            TheoryHandle::LiaStandard => Vec::new(),
        };
        let definites = input
            .iter()
            .enumerate()
            .filter(|(_, c)| matches!(c, Clause::Definite(_)))
            .map(|(i, _)| i)
            .collect();
        Ok(Saturation {
            sig,
            theory,
            options,
            clauses: input.to_vec(),
            origins: vec![None; input.len()],
            input_count: input.len(),
            definites,
            seen: HashSet::new(),
            fresh: FreshNames::new(),
            coverage,
            stats: Stats {
                clauses: input.len(),
                ..Stats::default()
            },
        })
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    /// All clauses stored so far (inputs first).
    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn run(&mut self) -> Result<Verdict, EngineError> {
        let mut frontier = Vec::new();
        for i in 0..self.input_count {
            let Clause::Goal(g) = &self.clauses[i] else {
                continue;
            };
            self.seen.insert(g.canonical_key());
            if let Some((premises, ev)) = self.check_refutation(i)? {
                return Ok(Verdict::Refuted(self.extract(premises, ev)));
            }
            frontier.push(i);
        }
        while !frontier.is_empty() {
            self.stats.generations += 1;
            let mut next = Vec::new();
            for &gi in &frontier {
                match self.expand(gi, &mut next) {
                    Ok(Some((premises, ev))) => {
                        return Ok(Verdict::Refuted(self.extract(premises, ev)));
                    }
                    Ok(None) => {}
                    Err(Exhausted) => return Ok(Verdict::BudgetExhausted(self.stats)),
                }
            }
            frontier = next;
        }
        if self.stats.dropped_by_size > 0 {
            Ok(Verdict::BudgetExhausted(self.stats))
        } else {
            Ok(Verdict::Saturated)
        }
    }

    #[allow(clippy::type_complexity)]
    fn expand(
        &mut self,
        gi: usize,
        next: &mut Vec<usize>,
    ) -> Result<Option<(Vec<usize>, Evidence)>, Exhausted> {
        let goal = match &self.clauses[gi] {
            Clause::Goal(g) => g.clone(),
            Clause::Definite(_) => return Ok(None),
        };
        for ai in 0..goal.atoms.len() {
            if matches!(goal.atoms[ai].head().kind(), TermKind::Lam(..)) {
                let Ok(clause) = beta_rule(&goal, ai) else {
                    continue;
                };
                let origin = Origin {
                    rule: Rule::BetaReduction,
                    premises: vec![gi],
                    atom: Some(ai),
                    subst: Vec::new(),
                };
                match self.add(clause, origin)? {
                    Added::Stored(i) => next.push(i),
                    Added::Skipped => {}
                    Added::Refuted(p, e) => return Ok(Some((p, e))),
                }
            }
        }
        for d in self.definites.clone() {
            let Clause::Definite(def) = &self.clauses[d] else {
                unreachable!()
            };
            let def = def.clone();
            for ai in 0..goal.atoms.len() {
                if goal.atoms[ai].head().as_sym() != Some(&def.head_rel) {
                    continue;
                }
                let Ok(res) = resolve(&goal, ai, &def, &mut self.fresh) else {
                    continue;
                };
                let origin = Origin {
                    rule: Rule::Resolution,
                    premises: vec![gi, d],
                    atom: Some(ai),
                    subst: res.subst,
                };
                match self.add(res.clause, origin)? {
                    Added::Stored(i) => next.push(i),
                    Added::Skipped => {}
                    Added::Refuted(p, e) => return Ok(Some((p, e))),
                }
            }
        }
        Ok(None)
    }

    fn add(&mut self, clause: GoalClause, origin: Origin) -> Result<Added, Exhausted> {
        self.stats.steps += 1;
        if self.stats.steps > self.options.budget.max_steps {
            return Err(Exhausted);
        }
        if clause.size() > self.options.budget.max_term_size {
            self.stats.dropped_by_size += 1;
            return Ok(Added::Skipped);
        }
        if self.options.dedup && !self.seen.insert(clause.canonical_key()) {
            self.stats.duplicates += 1;
            return Ok(Added::Skipped);
        }
        if self.clauses.len() >= self.options.budget.max_clauses {
            return Err(Exhausted);
        }
        let idx = self.clauses.len();
        self.clauses.push(Clause::Goal(clause));
        self.origins.push(Some(origin));
        self.stats.clauses += 1;
        self.stats.generated += 1;
        // a theory error means the clause is not a constraint candidate
        match self.check_refutation(idx) {
            Ok(Some((p, e))) => Ok(Added::Refuted(p, e)),
            _ => Ok(Added::Stored(idx)),
        }
    }

    #[allow(clippy::type_complexity)]
    fn check_refutation(&mut self, idx: usize) -> Result<Option<(Vec<usize>, Evidence)>, EngineError> {
        let Clause::Goal(g) = &self.clauses[idx] else {
            return Ok(None);
        };
        let Some(candidate) = refutation_candidate(self.sig, g) else {
            return Ok(None);
        };
        match self.theory {
            TheoryHandle::LiaStandard => {
                if let crate::lia::LiaResult::Sat(model) = crate::lia::terms_sat(&candidate.atoms)
                    .map_err(|e| EngineError::Structure(e.into()))?
                {
                    return Ok(Some((vec![idx], Evidence::Lia { goal: idx, model })));
                }
                Ok(None)
            }
            TheoryHandle::Finite(structures) => {
                for (s, st) in structures.iter().enumerate() {
                    if self.coverage[s].is_some() {
                        continue;
                    }
                    if let Some(val) = st.satisfying_valuation(&candidate.atoms)? {
                        self.coverage[s] = Some((idx, val));
                    }
                }
                if self.coverage.iter().all(Option::is_some) {
                    let entries: Vec<(usize, usize, Valuation)> = self
                        .coverage
                        .iter()
                        .enumerate()
                        .map(|(s, c)| {
                            let (g, v) = c.clone().expect("covered");
                            (s, g, v)
                        })
                        .collect();
                    let mut premises: Vec<usize> = entries.iter().map(|e| e.1).collect();
                    premises.sort_unstable();
                    premises.dedup();
                    return Ok(Some((premises, Evidence::Finite(entries))));
                }
                Ok(None)
            }
        }
    }

    /// Builds the trace of the ancestors of the refutation, renumbered so
    /// that derived clauses follow the inputs in derivation order.
    fn extract(&self, premises: Vec<usize>, evidence: Evidence) -> DerivationTrace {
        let mut needed: HashSet<usize> = HashSet::new();
        let mut stack: Vec<usize> = premises.clone();
        while let Some(i) = stack.pop() {
            if i < self.input_count || !needed.insert(i) {
                continue;
            }
            if let Some(o) = &self.origins[i] {
                stack.extend(o.premises.iter().copied());
            }
        }
        let mut derived: Vec<usize> = needed.into_iter().collect();
        derived.sort_unstable();
        let mut renumber: HashMap<usize, usize> = (0..self.input_count).map(|i| (i, i)).collect();
        for (k, &d) in derived.iter().enumerate() {
            renumber.insert(d, self.input_count + k);
        }
        let mut steps = Vec::new();
        for &d in &derived {
            let o = self.origins[d].as_ref().expect("derived clause has an origin");
            let Clause::Goal(g) = &self.clauses[d] else {
                unreachable!("derived clauses are goals")
            };
            steps.push(Step {
                rule: o.rule,
                premises: o.premises.iter().map(|p| renumber[p]).collect(),
                atom: o.atom,
                subst: o.subst.clone(),
                evidence: None,
                conclusion: renumber[&d],
                clause: g.clone(),
            });
        }
        let evidence = match evidence {
            Evidence::Lia { goal, model } => Evidence::Lia {
                goal: renumber[&goal],
                model,
            },
            Evidence::Finite(entries) => Evidence::Finite(
                entries
                    .into_iter()
                    .map(|(s, g, v)| (s, renumber[&g], v))
                    .collect(),
            ),
        };
        steps.push(Step {
            rule: Rule::ConstraintRefutation,
            premises: premises.iter().map(|p| renumber[p]).collect(),
            atom: None,
            subst: Vec::new(),
            evidence: Some(evidence),
            conclusion: self.input_count + derived.len(),
            clause: GoalClause::bottom(),
        });
        DerivationTrace {
            input_count: self.input_count,
            steps,
        }
    }
}

/// Runs the saturation loop to a verdict.
pub fn saturate(
    sig: &Signature,
    theory: &TheoryHandle,
    input: &[Clause],
    options: EngineOptions,
) -> Result<Verdict, EngineError> {
    Saturation::new(sig, theory, input, options)?.run()
}
