//! Signatures, type environments and the typing judgement.

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::term::{Term, TermKind};
use crate::types::{Name, Type};

/// Which family of background structures the signature talks about.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TheoryKind {
    /// Linear integer arithmetic over the standard model (plus declared
    /// background constants).
    Lia,
    /// Constants with (dis)equality only.
    Datalog,
    /// Explicitly tabulated finite structures.
    Finite,
}

pub const LIA_FUNCTIONS: [&str; 2] = ["+", "-"];
pub const LIA_RELATIONS: [&str; 6] = ["<", "<=", "=", "!=", ">=", ">"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    kind: TheoryKind,
    individual: Type,
    background: IndexMap<Name, Type>,
    foreground: IndexMap<Name, Type>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error("symbol `{0}` is declared twice")]
    Duplicate(Name),
    #[error("`{0}` is a reserved name")]
    Reserved(Name),
    #[error("background symbol `{name}` must have a first-order type, got {ty:?}")]
    NotFirstOrder { name: Name, ty: Type },
    #[error("relation symbol `{name}` must have a relational type, got {ty:?}")]
    NotRelational { name: Name, ty: Type },
}

const RESERVED: [&str; 6] = ["not", "and", "or", "exists", "lambda", "=>"];

impl Signature {
    /// Linear integer arithmetic: `+ - < <= = != >= >` and numerals over `Int`.
    pub fn lia() -> Signature {
        let iota = Type::base("Int");
        let mut sig = Signature::empty(TheoryKind::Lia, iota.clone());
        let fun = Type::curried([iota.clone(), iota.clone()], iota.clone());
        let rel = Type::predicate(&iota, 2);
        for f in LIA_FUNCTIONS {
            sig.background.insert(Name::from(f), fun.clone());
        }
        for r in LIA_RELATIONS {
            sig.background.insert(Name::from(r), rel.clone());
        }
        sig
    }

    /// Constants with builtin `=` and `!=`.
    pub fn datalog(sort: &str) -> Signature {
        let iota = Type::base(sort);
        let mut sig = Signature::empty(TheoryKind::Datalog, iota.clone());
        let rel = Type::predicate(&iota, 2);
        sig.background.insert(Name::from("="), rel.clone());
        sig.background.insert(Name::from("!="), rel);
        sig
    }

    /// A finite theory over one sort; `=`/`!=` are available as builtin
    /// identity unless tables redefine them.
    pub fn finite(sort: &str) -> Signature {
        let mut sig = Signature::datalog(sort);
        sig.kind = TheoryKind::Finite;
        sig
    }

    fn empty(kind: TheoryKind, individual: Type) -> Signature {
        Signature {
            kind,
            individual,
            background: IndexMap::new(),
            foreground: IndexMap::new(),
        }
    }

    pub fn kind(&self) -> &TheoryKind {
        &self.kind
    }

    pub fn individual(&self) -> &Type {
        &self.individual
    }

    pub fn background(&self) -> &IndexMap<Name, Type> {
        &self.background
    }

    pub fn foreground(&self) -> &IndexMap<Name, Type> {
        &self.foreground
    }

    /// Background constants of the individual sort, in declaration order.
    pub fn constants(&self) -> Vec<Name> {
        self.background
            .iter()
            .filter(|(_, t)| t.is_base())
            .map(|(n, _)| n.clone())
            .collect()
    }

    pub fn is_background(&self, name: &str) -> bool {
        self.background.contains_key(name)
    }

    pub fn is_foreground(&self, name: &str) -> bool {
        self.foreground.contains_key(name)
    }

    pub fn lookup(&self, name: &str) -> Option<&Type> {
        self.background.get(name).or_else(|| self.foreground.get(name))
    }

    pub fn numerals_allowed(&self) -> bool {
        self.kind == TheoryKind::Lia
    }

    fn check_fresh(&self, name: &Name) -> Result<(), SignatureError> {
        if RESERVED.contains(&&**name) {
            return Err(SignatureError::Reserved(name.clone()));
        }
        if self.lookup(name).is_some() {
            return Err(SignatureError::Duplicate(name.clone()));
        }
        Ok(())
    }

    pub fn add_background(&mut self, name: Name, ty: Type) -> Result<(), SignatureError> {
        self.check_fresh(&name)?;
        if !ty.is_first_order() {
            return Err(SignatureError::NotFirstOrder { name, ty });
        }
        self.background.insert(name, ty);
        Ok(())
    }

    /// Replaces the type of an existing background symbol or adds it.
    pub fn set_background(&mut self, name: Name, ty: Type) -> Result<(), SignatureError> {
        if !ty.is_first_order() {
            return Err(SignatureError::NotFirstOrder { name, ty });
        }
        if self.foreground.contains_key(&name) {
            return Err(SignatureError::Duplicate(name));
        }
        self.background.insert(name, ty);
        Ok(())
    }

    pub fn add_foreground(&mut self, name: Name, ty: Type) -> Result<(), SignatureError> {
        self.check_fresh(&name)?;
        if !ty.is_relational() {
            return Err(SignatureError::NotRelational { name, ty });
        }
        self.foreground.insert(name, ty);
        Ok(())
    }

    pub fn remove_foreground(&mut self, name: &str) -> Option<Type> {
        self.foreground.shift_remove(name)
    }

    /// A closed formula that is true in every structure of the theory.
    pub fn truth(&self) -> Term {
        self.canonical(true)
    }

    /// A closed formula that is false in every structure of the theory.
    pub fn falsity(&self) -> Term {
        self.canonical(false)
    }

    fn canonical(&self, value: bool) -> Term {
        let rel = if value { "=" } else { "!=" };
        match self.kind {
            TheoryKind::Lia => {
                Term::binop("=", Term::int(0), Term::int(if value { 0 } else { 1 }))
            }
            TheoryKind::Datalog | TheoryKind::Finite => match self.constants().first() {
                Some(c) => Term::binop(rel, Term::sym(c.clone()), Term::sym(c.clone())),
                None => {
                    let x = Term::var("x");
                    Term::exists("x", self.individual.clone(), &Term::binop(rel, x.clone(), x))
                }
            },
        }
    }
}

/// Types of free variables.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct TypeEnv(BTreeMap<Name, Type>);

impl TypeEnv {
    pub fn new() -> TypeEnv {
        TypeEnv::default()
    }

    pub fn get(&self, name: &str) -> Option<&Type> {
        self.0.get(name)
    }

    pub fn insert(&mut self, name: Name, ty: Type) -> Option<Type> {
        self.0.insert(name, ty)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Type)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The environment restricted to the given names (missing ones skipped).
    pub fn restrict<'a>(&self, names: impl IntoIterator<Item = &'a Name>) -> TypeEnv {
        TypeEnv(
            names
                .into_iter()
                .filter_map(|n| self.0.get(n).map(|t| (n.clone(), t.clone())))
                .collect(),
        )
    }

    pub fn extend(&mut self, other: &TypeEnv) {
        for (n, t) in other.iter() {
            self.0.insert(n.clone(), t.clone());
        }
    }
}

impl FromIterator<(Name, Type)> for TypeEnv {
    fn from_iter<I: IntoIterator<Item = (Name, Type)>>(iter: I) -> Self {
        TypeEnv(iter.into_iter().collect())
    }
}

impl fmt::Debug for TypeEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.0.iter()).finish()
    }
}

/// Generates `base_k` names avoiding a set of used names.
#[derive(Clone, Debug, Default)]
pub struct FreshNames {
    counter: usize,
}

impl FreshNames {
    pub fn new() -> FreshNames {
        FreshNames::default()
    }

    pub fn fresh(&mut self, base: &str, taken: impl Fn(&str) -> bool) -> Name {
        let stem = base.trim_end_matches(|c: char| c.is_ascii_digit() || c == '_' || c == '\'');
        let stem = if stem.is_empty() { "v" } else { stem };
        loop {
            self.counter += 1;
            let cand = format!("{stem}_{}", self.counter);
            if !taken(&cand) {
                return Name::from(cand);
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error("unbound name `{0}`")]
    UnboundName(Name),
    #[error("type mismatch in `{location}`: expected {expected:?}, found {found:?}")]
    Mismatch {
        location: String,
        expected: Type,
        found: Type,
    },
    #[error("`{location}` is applied but has non-function type {found:?}")]
    NotAFunction { location: String, found: Type },
    #[error("body of `{location}` must have relational type, found {found:?}")]
    NonRelationalBody { location: String, found: Type },
    #[error("bound variable of `{location}` has non-argument type {found:?}")]
    BadBinderType { location: String, found: Type },
}

/// Infers the unique type of `m` under `env` (rules Var, Cst, App, Abs,
/// And/Or, Neg, Ex).
pub fn infer_type(sig: &Signature, env: &TypeEnv, m: &Term) -> Result<Type, TypeError> {
    infer(sig, env, &mut Vec::new(), m)
}

fn infer(
    sig: &Signature,
    env: &TypeEnv,
    binders: &mut Vec<Type>,
    m: &Term,
) -> Result<Type, TypeError> {
    let o = Type::Bool;
    match m.kind() {
        TermKind::Var(x) => env.get(x).cloned().ok_or_else(|| TypeError::UnboundName(x.clone())),
        TermKind::Bound(i) => binders
            .len()
            .checked_sub(1 + *i as usize)
            .map(|k| binders[k].clone())
            .ok_or_else(|| TypeError::UnboundName(Name::from(format!("#{i}")))),
        TermKind::Sym(c) => sig
            .lookup(c)
            .cloned()
            .ok_or_else(|| TypeError::UnboundName(c.clone())),
        TermKind::Int(v) => {
            if sig.numerals_allowed() {
                Ok(sig.individual().clone())
            } else {
                Err(TypeError::UnboundName(Name::from(v.to_string())))
            }
        }
        TermKind::Neg => Ok(Type::arrow(o.clone(), o)),
        TermKind::And | TermKind::Or => Ok(Type::curried([o.clone(), o.clone()], o)),
        TermKind::Exists(t) => Ok(Type::arrow(Type::arrow(t.clone(), o.clone()), o)),
        TermKind::App(f, a) => {
            let ft = infer(sig, env, binders, f)?;
            let at = infer(sig, env, binders, a)?;
            match ft {
                Type::Arrow(arg, res) => {
                    if *arg == at {
                        Ok((*res).clone())
                    } else {
                        Err(TypeError::Mismatch {
                            location: m.sexpr(),
                            expected: (*arg).clone(),
                            found: at,
                        })
                    }
                }
                other => Err(TypeError::NotAFunction {
                    location: m.sexpr(),
                    found: other,
                }),
            }
        }
        TermKind::Lam(b, body) => {
            if !b.ty.is_argument() {
                return Err(TypeError::BadBinderType {
                    location: m.sexpr(),
                    found: b.ty.clone(),
                });
            }
            binders.push(b.ty.clone());
            let bt = infer(sig, env, binders, body);
            binders.pop();
            let bt = bt?;
            if !bt.is_relational() {
                return Err(TypeError::NonRelationalBody {
                    location: m.sexpr(),
                    found: bt,
                });
            }
            Ok(Type::arrow(b.ty.clone(), bt))
        }
    }
}

/// Checks `m` against an expected type.
pub fn check_type(sig: &Signature, env: &TypeEnv, m: &Term, expected: &Type) -> Result<(), TypeError> {
    let found = infer_type(sig, env, m)?;
    if &found == expected {
        Ok(())
    } else {
        Err(TypeError::Mismatch {
            location: m.sexpr(),
            expected: expected.clone(),
            found,
        })
    }
}

/// Substitution that first checks every replacement against the declared
/// type of its variable.
pub fn substitute_checked(
    sig: &Signature,
    env: &TypeEnv,
    m: &Term,
    bindings: &[(Name, Term)],
) -> Result<Term, TypeError> {
    for (x, n) in bindings {
        let expected = env.get(x).ok_or_else(|| TypeError::UnboundName(x.clone()))?;
        check_type(sig, env, n, expected)?;
    }
    Ok(m.substitute(bindings))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iota() -> Type {
        Type::base("Int")
    }

    fn example_sig() -> Signature {
        let mut sig = Signature::lia();
        let add = Type::predicate(&iota(), 3);
        sig.add_foreground("Add".into(), add.clone()).unwrap();
        sig.add_foreground(
            "Iter".into(),
            Type::curried([add, iota(), iota(), iota()], Type::Bool),
        )
        .unwrap();
        sig
    }

    fn env() -> TypeEnv {
        let mut env: TypeEnv = ["x", "y", "z", "n", "s"]
            .into_iter()
            .map(|v| (Name::from(v), iota()))
            .collect();
        env.insert("f".into(), Type::predicate(&iota(), 3));
        env
    }

    #[test]
    fn add_atom_is_boolean() {
        let t = Term::apps(Term::sym("Add"), [Term::var("x"), Term::var("y"), Term::var("z")]);
        assert_eq!(infer_type(&example_sig(), &env(), &t), Ok(Type::Bool));
    }

    #[test]
    fn variable_rule() {
        let env: TypeEnv = [(Name::from("x"), iota())].into_iter().collect();
        assert_eq!(infer_type(&Signature::lia(), &env, &Term::var("x")), Ok(iota()));
    }

    #[test]
    fn self_application_is_rejected() {
        let env: TypeEnv = [(Name::from("x"), iota())].into_iter().collect();
        let t = Term::app(Term::var("x"), Term::var("x"));
        assert!(matches!(
            infer_type(&Signature::lia(), &env, &t),
            Err(TypeError::NotAFunction { .. })
        ));
    }

    #[test]
    fn higher_order_application() {
        let t = Term::apps(
            Term::sym("Iter"),
            [Term::sym("Add"), Term::var("n"), Term::var("n"), Term::var("x")],
        );
        assert_eq!(infer_type(&example_sig(), &env(), &t), Ok(Type::Bool));
        let bad = Term::apps(Term::sym("Iter"), [Term::var("n")]);
        assert!(matches!(
            infer_type(&example_sig(), &env(), &bad),
            Err(TypeError::Mismatch { .. })
        ));
    }

    #[test]
    fn lambda_needs_relational_body() {
        let ok = Term::lam("x", iota(), &Term::binop(">=", Term::var("x"), Term::int(5)));
        assert_eq!(
            infer_type(&Signature::lia(), &TypeEnv::new(), &ok),
            Ok(Type::predicate(&iota(), 1))
        );
        let bad = Term::lam("x", iota(), &Term::binop("+", Term::var("x"), Term::int(5)));
        assert!(matches!(
            infer_type(&Signature::lia(), &TypeEnv::new(), &bad),
            Err(TypeError::NonRelationalBody { .. })
        ));
    }

    #[test]
    fn unbound_symbol() {
        assert_eq!(
            infer_type(&Signature::lia(), &TypeEnv::new(), &Term::sym("Q")),
            Err(TypeError::UnboundName("Q".into()))
        );
    }

    #[test]
    fn checked_substitution() {
        let t = Term::apps(
            Term::sym("Iter"),
            [Term::var("f"), Term::var("s"), Term::var("n"), Term::var("x")],
        );
        let s = substitute_checked(
            &example_sig(),
            &env(),
            &t,
            &[("f".into(), Term::sym("Add")), ("n".into(), Term::int(5))],
        )
        .unwrap();
        assert_eq!(s.sexpr(), "(Iter Add s 5 x)");
        assert!(substitute_checked(&example_sig(), &env(), &t, &[("f".into(), Term::int(5))]).is_err());
    }

    #[test]
    fn signature_rejects_bad_declarations() {
        let mut sig = Signature::lia();
        assert!(sig.add_foreground("R".into(), iota()).is_err());
        assert!(sig
            .add_background("g".into(), Type::arrow(Type::predicate(&iota(), 1), iota()))
            .is_err());
        assert!(sig.add_foreground("+".into(), Type::Bool).is_err());
        assert!(sig.add_foreground("and".into(), Type::Bool).is_err());
    }
}
