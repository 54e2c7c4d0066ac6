//! A parsed problem: signature, background theory, clauses, and printing
//! back to the input syntax.

use std::collections::HashMap;

use crate::clause::{validate, Clause, DefiniteClause, Diagnostic, GoalClause, Span};
use crate::signature::{FreshNames, Signature, TypeEnv};
use crate::structure::{FiniteStructure, TheoryHandle};
use crate::types::{Name, Type};

/// The background theory as declared in the problem header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TheoryDecl {
    Lia,
    /// Equality Datalog over the listed constants.
    Datalog(Vec<Name>),
    Finite(Vec<FiniteStructure>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub sig: Signature,
    pub theory: TheoryDecl,
    /// Declared variables.
    pub vars: TypeEnv,
    /// Declaration order of `vars`.
    pub var_order: Vec<Name>,
    pub clauses: Vec<Clause>,
    /// Source position of each clause (empty for generated problems).
    pub spans: Vec<Span>,
}

impl Problem {
    pub fn new(sig: Signature, theory: TheoryDecl, clauses: Vec<Clause>) -> Problem {
        let mut vars = TypeEnv::new();
        let mut var_order = Vec::new();
        for c in &clauses {
            for (n, t) in c.env().iter() {
                if !vars.contains(n) {
                    vars.insert(n.clone(), t.clone());
                    var_order.push(n.clone());
                }
            }
        }
        Problem {
            sig,
            theory,
            vars,
            var_order,
            clauses,
            spans: Vec::new(),
        }
    }

    /// Typing and shape diagnostics for every clause.
    pub fn validate(&self) -> Vec<Diagnostic> {
        self.clauses
            .iter()
            .enumerate()
            .flat_map(|(i, c)| validate(&self.sig, c, self.spans.get(i).copied()))
            .collect()
    }

    pub fn goals(&self) -> impl Iterator<Item = &GoalClause> {
        self.clauses.iter().filter_map(Clause::as_goal)
    }

    pub fn definites(&self) -> Vec<DefiniteClause> {
        self.clauses.iter().filter_map(Clause::as_definite).cloned().collect()
    }

    pub fn contains_lambda(&self) -> bool {
        self.clauses.iter().any(Clause::contains_lambda)
    }

    /// The theory handle the engine works modulo. Equality Datalog is
    /// replaced by its finite family of constant partitions.
    pub fn theory_handle(&self) -> TheoryHandle {
        match &self.theory {
            TheoryDecl::Lia => TheoryHandle::LiaStandard,
            TheoryDecl::Datalog(consts) => {
                TheoryHandle::Finite(crate::fragments::datalog::partition_structures(consts))
            }
            TheoryDecl::Finite(s) => TheoryHandle::Finite(s.clone()),
        }
    }

    /// Prints the problem in the input syntax. Variables that occur with
    /// different types in different clauses are renamed apart.
    pub fn to_sexpr(&self) -> String {
        let mut out = String::new();
        match &self.theory {
            TheoryDecl::Lia => out.push_str("(theory lia)\n"),
            TheoryDecl::Datalog(consts) => {
                let names: Vec<&str> = consts.iter().map(|c| &**c).collect();
                out.push_str(&format!("(theory eqdl (consts {}))\n", names.join(" ")));
            }
            TheoryDecl::Finite(structures) => {
                out.push_str("(theory finite\n");
                for s in structures {
                    out.push_str(&format!("  {s}\n"));
                }
                out.push_str(")\n");
            }
        }
        if matches!(self.theory, TheoryDecl::Lia) {
            for c in self.sig.constants() {
                out.push_str(&format!("(declare-const {c} {})\n", self.sig.individual()));
            }
        }
        for (r, ty) in self.sig.foreground() {
            let (args, _) = ty.uncurry();
            let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
            out.push_str(&format!("(declare-rel {r} ({}))\n", args.join(" ")));
        }

        let mut declared: HashMap<Name, Type> = HashMap::new();
        let mut order: Vec<Name> = Vec::new();
        let mut fresh = FreshNames::new();
        let mut clauses = Vec::new();
        for c in &self.clauses {
            let mut renaming: HashMap<Name, Name> = HashMap::new();
            for (n, t) in c.env().iter() {
                match declared.get(n) {
                    Some(t2) if t2 == t => {}
                    None => {
                        declared.insert(n.clone(), t.clone());
                        order.push(n.clone());
                    }
                    Some(_) => {
                        let new = loop {
                            let cand = fresh.fresh(n, |s| {
                                self.sig.lookup(s).is_some() || c.env().contains(s)
                            });
                            match declared.get(&cand) {
                                None => break cand,
                                Some(t2) if t2 == t => break cand,
                                Some(_) => {}
                            }
                        };
                        if !declared.contains_key(&new) {
                            declared.insert(new.clone(), t.clone());
                            order.push(new.clone());
                        }
                        renaming.insert(n.clone(), new);
                    }
                }
            }
            clauses.push(rename_clause(c, &renaming));
        }
        for n in &order {
            out.push_str(&format!("(declare-var {n} {})\n", declared[n]));
        }
        for c in &clauses {
            out.push_str(&c.sexpr());
            out.push('\n');
        }
        out
    }
}

fn rename_clause(c: &Clause, renaming: &HashMap<Name, Name>) -> Clause {
    if renaming.is_empty() {
        return c.clone();
    }
    let env: TypeEnv = c
        .env()
        .iter()
        .map(|(n, t)| (renaming.get(n).cloned().unwrap_or_else(|| n.clone()), t.clone()))
        .collect();
    let atoms: Vec<_> = c.atoms().iter().map(|a| a.rename(renaming)).collect();
    match c {
        Clause::Goal(_) => Clause::Goal(GoalClause { atoms, env }),
        Clause::Definite(d) => Clause::Definite(DefiniteClause {
            body: GoalClause { atoms, env },
            head_rel: d.head_rel.clone(),
            head_args: d
                .head_args
                .iter()
                .map(|x| renaming.get(x).cloned().unwrap_or_else(|| x.clone()))
                .collect(),
        }),
    }
}
