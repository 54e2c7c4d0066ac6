//! λ-lifting: every λ-abstraction inside a clause atom is replaced by a
//! fresh relation symbol applied to the abstraction's free variables, with
//! a defining clause `¬(M z̄) ∨ R_M x̄ y z̄` for `λy. M`.
//!
//! Abstractions are lifted innermost first; binders of `∃` stay in place.

use std::collections::HashSet;

use thiserror::Error;

use crate::clause::{Clause, DefiniteClause, GoalClause};
use crate::signature::{infer_type, FreshNames, Signature, TypeEnv, TypeError};
use crate::term::{Term, TermKind};
use crate::types::{Name, Type};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LiftError {
    #[error("λ-abstraction `{0}` does not have a relational body")]
    NonRelationalBody(String),
    #[error(transparent)]
    Type(#[from] TypeError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lifted {
    pub sig: Signature,
    /// The rewritten input clauses followed by the defining clauses, in the
    /// order the symbols were introduced.
    pub clauses: Vec<Clause>,
    pub introduced: Vec<Name>,
}

struct Lifter {
    sig: Signature,
    fresh: FreshNames,
    counter: usize,
    introduced: Vec<Name>,
    defs: Vec<Clause>,
}

impl Lifter {
    fn fresh_symbol(&mut self) -> Name {
        loop {
            let name = format!("_lam{}", self.counter);
            self.counter += 1;
            if self.sig.lookup(&name).is_none() {
                return Name::from(name);
            }
        }
    }

    /// Lifts every abstraction in `m`; `env` types the free variables and
    /// `used` holds every name that must not be reused.
    fn term(&mut self, m: &Term, env: &TypeEnv, used: &mut HashSet<Name>) -> Result<Term, LiftError> {
        if !m.contains_lambda() {
            return Ok(m.clone());
        }
        match m.kind() {
            TermKind::App(f, a) => {
                if let (TermKind::Exists(_), TermKind::Lam(b, body)) = (f.kind(), a.kind()) {
                    let (v, opened) = self.open(&b.hint, body, used);
                    let mut inner = env.clone();
                    inner.insert(v.clone(), b.ty.clone());
                    let lifted = self.term(&opened, &inner, used)?;
                    return Ok(Term::app(f.clone(), Term::lam(v, b.ty.clone(), &lifted)));
                }
                Ok(Term::app(self.term(f, env, used)?, self.term(a, env, used)?))
            }
            TermKind::Lam(b, body) => {
                let (v, opened) = self.open(&b.hint, body, used);
                let mut inner = env.clone();
                inner.insert(v.clone(), b.ty.clone());
                let lifted = self.term(&opened, &inner, used)?;
                self.define(v, b.ty.clone(), lifted, env, &inner, used)
            }
            _ => Ok(m.clone()),
        }
    }

    fn open(&mut self, hint: &Name, body: &Term, used: &mut HashSet<Name>) -> (Name, Term) {
        let v = if used.contains(hint) || self.sig.lookup(hint).is_some() {
            let sig = &self.sig;
            self.fresh.fresh(hint, |c| used.contains(c) || sig.lookup(c).is_some())
        } else {
            hint.clone()
        };
        used.insert(v.clone());
        let opened = Term::instantiate(body, &Term::var(v.clone()));
        (v, opened)
    }

    /// Introduces `R_M` for `λv. body` (with `body` λ-free) and returns
    /// the replacement `R_M x̄`.
    fn define(
        &mut self,
        v: Name,
        v_ty: Type,
        body: Term,
        outer: &TypeEnv,
        inner: &TypeEnv,
        used: &mut HashSet<Name>,
    ) -> Result<Term, LiftError> {
        let body_ty = infer_type(&self.sig, inner, &body)?;
        if !body_ty.is_relational() {
            return Err(LiftError::NonRelationalBody(
                Term::lam(v.clone(), v_ty, &body).math(),
            ));
        }
        let params: Vec<Name> = body
            .vars_in_order()
            .into_iter()
            .filter(|x| *x != v)
            .collect();
        let mut env = TypeEnv::new();
        for x in &params {
            let ty = outer
                .get(x)
                .cloned()
                .ok_or_else(|| TypeError::UnboundName(x.clone()))?;
            env.insert(x.clone(), ty);
        }
        env.insert(v.clone(), v_ty.clone());
        let (extra_tys, _) = body_ty.uncurry();
        let mut zs = Vec::new();
        for t in extra_tys {
            let sig = &self.sig;
            let z = self.fresh.fresh("z", |c| used.contains(c) || sig.lookup(c).is_some());
            used.insert(z.clone());
            env.insert(z.clone(), t.clone());
            zs.push(z);
        }

        let name = self.fresh_symbol();
        let arg_tys: Vec<Type> = params
            .iter()
            .map(|x| env.get(x).cloned().expect("param typed"))
            .chain(std::iter::once(v_ty))
            .chain(zs.iter().map(|z| env.get(z).cloned().expect("z typed")))
            .collect();
        self.sig
            .add_foreground(name.clone(), Type::curried(arg_tys, Type::Bool))
            .expect("fresh symbol");

        let atom = Term::apps(body, zs.iter().map(|z| Term::var(z.clone())));
        let mut head_args = params.clone();
        head_args.push(v);
        head_args.extend(zs);
        self.defs.push(Clause::Definite(DefiniteClause {
            body: GoalClause {
                atoms: vec![atom],
                env,
            },
            head_rel: name.clone(),
            head_args,
        }));
        self.introduced.push(name.clone());
        Ok(Term::apps(
            Term::sym(name),
            params.into_iter().map(Term::var),
        ))
    }

    fn clause(&mut self, c: &Clause) -> Result<Clause, LiftError> {
        if !c.contains_lambda() {
            return Ok(c.clone());
        }
        let env = c.env().clone();
        let mut used: HashSet<Name> = env.iter().map(|(n, _)| n.clone()).collect();
        let atoms = c
            .atoms()
            .iter()
            .map(|a| self.term(a, &env, &mut used))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(match c {
            Clause::Goal(g) => Clause::Goal(GoalClause {
                atoms,
                env: g.env.clone(),
            }),
            Clause::Definite(d) => Clause::Definite(DefiniteClause {
                body: GoalClause {
                    atoms,
                    env: d.body.env.clone(),
                },
                head_rel: d.head_rel.clone(),
                head_args: d.head_args.clone(),
            }),
        })
    }
}

/// Lifts all λ-abstractions out of `clauses`.
pub fn lift(sig: &Signature, clauses: &[Clause]) -> Result<Lifted, LiftError> {
    let mut l = Lifter {
        sig: sig.clone(),
        fresh: FreshNames::new(),
        counter: 0,
        introduced: Vec::new(),
        defs: Vec::new(),
    };
    let mut out = Vec::with_capacity(clauses.len());
    for c in clauses {
        out.push(l.clause(c)?);
    }
    out.append(&mut l.defs);
    Ok(Lifted {
        sig: l.sig,
        clauses: out,
        introduced: l.introduced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clause::validate;

    fn iota() -> Type {
        Type::base("Int")
    }

    #[test]
    fn lifts_constant_abstraction() {
        // ¬U (λz. R x) y  becomes  ¬U (_lam0 x) y  with  ¬(R x) ∨ _lam0 x z
        let mut sig = Signature::lia();
        let pred = Type::predicate(&iota(), 1);
        sig.add_foreground("R".into(), pred.clone()).unwrap();
        sig.add_foreground("U".into(), Type::curried([pred, iota()], Type::Bool))
            .unwrap();
        let env: TypeEnv = [("x".into(), iota()), ("y".into(), iota())].into_iter().collect();
        let lam = Term::lam("z", iota(), &Term::app(Term::sym("R"), Term::var("x")));
        let goal = Clause::Goal(GoalClause::new(
            vec![Term::apps(Term::sym("U"), [lam, Term::var("y")])],
            &env,
        ));
        let out = lift(&sig, &[goal]).unwrap();
        assert_eq!(out.introduced, vec![Name::from("_lam0")]);
        assert_eq!(out.clauses[0].math(), "¬U (_lam0 x) y");
        assert_eq!(out.clauses[1].math(), "¬R x ∨ _lam0 x z");
        for c in &out.clauses {
            assert!(validate(&out.sig, c, None).is_empty(), "{c:?}");
            assert!(!c.contains_lambda());
        }
    }

    #[test]
    fn nested_abstractions_innermost_first() {
        // P (λa. Q (λb. S a b))
        let mut sig = Signature::lia();
        let p1 = Type::predicate(&iota(), 1);
        sig.add_foreground("S".into(), Type::predicate(&iota(), 2)).unwrap();
        sig.add_foreground("Q".into(), Type::arrow(p1.clone(), Type::Bool)).unwrap();
        sig.add_foreground("P".into(), Type::arrow(p1, Type::Bool)).unwrap();
        let inner = Term::lam(
            "b",
            iota(),
            &Term::apps(Term::sym("S"), [Term::var("a"), Term::var("b")]),
        );
        let outer = Term::lam("a", iota(), &Term::app(Term::sym("Q"), inner));
        let goal = Clause::Goal(GoalClause::new(
            vec![Term::app(Term::sym("P"), outer)],
            &TypeEnv::new(),
        ));
        let out = lift(&sig, &[goal]).unwrap();
        assert_eq!(out.introduced.len(), 2);
        let text: Vec<String> = out.clauses.iter().map(|c| c.math()).collect();
        assert_eq!(
            text,
            vec!["¬P _lam1", "¬S a b ∨ _lam0 a b", "¬Q (_lam0 a) ∨ _lam1 a"]
        );
        for c in &out.clauses {
            assert!(validate(&out.sig, c, None).is_empty(), "{c:?}");
        }
    }

    #[test]
    fn lambda_free_input_unchanged() {
        let mut sig = Signature::lia();
        sig.add_foreground("R".into(), Type::predicate(&iota(), 1)).unwrap();
        let env: TypeEnv = [("x".into(), iota())].into_iter().collect();
        let c = Clause::Goal(GoalClause::new(
            vec![Term::app(Term::sym("R"), Term::var("x"))],
            &env,
        ));
        let out = lift(&sig, std::slice::from_ref(&c)).unwrap();
        assert_eq!(out.clauses, vec![c]);
        assert_eq!(out.sig, sig);
    }
}
