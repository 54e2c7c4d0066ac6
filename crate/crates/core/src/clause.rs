//! Clause forms, atom classification, `posex` and program extraction.

use std::collections::HashMap;
use std::fmt;

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::signature::{infer_type, Signature, TypeEnv, TypeError};
use crate::term::{Term, TermKind};
use crate::types::{Name, Type};

/// Position in a source file (1-based).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub span: Option<Span>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.span {
            Some(s) => write!(f, "{s}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClauseError {
    #[error("`{0}` is not an atom: it contains a logical symbol")]
    LogicalSymbol(String),
    #[error("`{term}` is not an atom: it has type {found:?}")]
    NotBoolean { term: String, found: Type },
    #[error(transparent)]
    Type(#[from] TypeError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ForegroundShape {
    /// `R M̄` with `R` a foreground symbol.
    Symbol(Name),
    /// `x M̄` with `x` a variable.
    Variable(Name),
    /// `(λy.N) M̄`.
    Redex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AtomKind {
    Background,
    Foreground(ForegroundShape),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub term: Term,
    pub kind: AtomKind,
}

/// Syntactic classification of a well-typed atom.
pub fn atom_kind(sig: &Signature, a: &Term) -> AtomKind {
    let head = a.head();
    match head.kind() {
        TermKind::Var(x) => AtomKind::Foreground(ForegroundShape::Variable(x.clone())),
        TermKind::Lam(..) => AtomKind::Foreground(ForegroundShape::Redex),
        TermKind::Sym(s) if sig.is_foreground(s) => {
            AtomKind::Foreground(ForegroundShape::Symbol(s.clone()))
        }
        _ => {
            let foreign = a.any_node(&mut |t| match t.kind() {
                TermKind::Sym(s) => !sig.is_background(s),
                TermKind::Lam(..) => true,
                _ => false,
            });
            if foreign {
                // e.g. a background relation applied to a term built from a
                // foreground symbol; cannot be well-typed, but keep it out of
                // the theory solver
                AtomKind::Foreground(ForegroundShape::Redex)
            } else {
                AtomKind::Background
            }
        }
    }
}

pub fn is_background_atom(sig: &Signature, a: &Term) -> bool {
    atom_kind(sig, a) == AtomKind::Background
}

/// Checks that `a` is a formula without logical symbols and classifies it.
pub fn classify_atom(sig: &Signature, env: &TypeEnv, a: &Term) -> Result<Atom, ClauseError> {
    if a.contains_logical() {
        return Err(ClauseError::LogicalSymbol(a.sexpr()));
    }
    let ty = infer_type(sig, env, a)?;
    if ty != Type::Bool {
        return Err(ClauseError::NotBoolean {
            term: a.sexpr(),
            found: ty,
        });
    }
    Ok(Atom {
        term: a.clone(),
        kind: atom_kind(sig, a),
    })
}

/// `¬A₁ ∨ ⋯ ∨ ¬Aₙ`; the empty clause is ⊥.
#[derive(Clone, PartialEq, Eq)]
pub struct GoalClause {
    pub atoms: Vec<Term>,
    /// Types of (at least) the free variables.
    pub env: TypeEnv,
}

/// `G ∨ R x̄`.
#[derive(Clone, PartialEq, Eq)]
pub struct DefiniteClause {
    pub body: GoalClause,
    pub head_rel: Name,
    pub head_args: Vec<Name>,
}

#[derive(Clone, PartialEq, Eq)]
pub enum Clause {
    Goal(GoalClause),
    Definite(DefiniteClause),
}

impl GoalClause {
    pub fn new(atoms: Vec<Term>, env: &TypeEnv) -> GoalClause {
        let mut names = IndexSet::new();
        for a in &atoms {
            a.collect_vars(&mut names);
        }
        GoalClause {
            env: env.restrict(names.iter()),
            atoms,
        }
    }

    pub fn bottom() -> GoalClause {
        GoalClause {
            atoms: Vec::new(),
            env: TypeEnv::new(),
        }
    }

    pub fn is_bottom(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Free variables in first-occurrence order.
    pub fn vars(&self) -> Vec<Name> {
        let mut out = IndexSet::new();
        for a in &self.atoms {
            a.collect_vars(&mut out);
        }
        out.into_iter().collect()
    }

    pub fn size(&self) -> usize {
        self.atoms.iter().map(Term::size).sum()
    }

    pub fn subst(&self, map: &HashMap<Name, Term>) -> Vec<Term> {
        self.atoms.iter().map(|a| a.subst(map)).collect()
    }

    /// α-canonical key: variables renamed by first occurrence.
    pub fn canonical_key(&self) -> (Vec<Term>, Vec<Option<Type>>) {
        let vars = self.vars();
        let renaming: HashMap<Name, Term> = vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), Term::var(format!("\u{0}{i}"))))
            .collect();
        let atoms = self.atoms.iter().map(|a| a.subst(&renaming)).collect();
        let types = vars.iter().map(|v| self.env.get(v).cloned()).collect();
        (atoms, types)
    }

    pub fn sexpr(&self) -> String {
        if self.atoms.is_empty() {
            return "false".to_string();
        }
        let parts: Vec<String> = self.atoms.iter().map(Term::sexpr).collect();
        format!("(goal {})", parts.join(" "))
    }

    pub fn math(&self) -> String {
        if self.atoms.is_empty() {
            return "⊥".to_string();
        }
        let parts: Vec<String> = self.atoms.iter().map(negated_math).collect();
        parts.join(" ∨ ")
    }
}

fn negated_math(a: &Term) -> String {
    let s = a.math();
    if is_math_atomic(a) {
        format!("¬{s}")
    } else {
        format!("¬({s})")
    }
}

/// Infix atoms need parentheses under a negation; applications do not.
fn is_math_atomic(a: &Term) -> bool {
    let (head, args) = a.spine();
    !(args.len() == 2 && head.as_sym().is_some_and(|s| crate::term::is_infix(s)))
}

impl DefiniteClause {
    pub fn head(&self) -> Term {
        Term::apps(
            Term::sym(self.head_rel.clone()),
            self.head_args.iter().map(|x| Term::var(x.clone())),
        )
    }

    /// Variables of the body not among the head arguments.
    pub fn body_only_vars(&self) -> Vec<Name> {
        self.body
            .vars()
            .into_iter()
            .filter(|v| !self.head_args.contains(v))
            .collect()
    }

    pub fn sexpr(&self) -> String {
        let head = self.head().sexpr();
        if self.body.atoms.is_empty() {
            format!("(rule {head})")
        } else {
            let parts: Vec<String> = self.body.atoms.iter().map(Term::sexpr).collect();
            format!("(rule (=> (and {}) {head}))", parts.join(" "))
        }
    }

    pub fn math(&self) -> String {
        let head = self.head().math();
        if self.body.atoms.is_empty() {
            head
        } else {
            format!("{} ∨ {head}", self.body.math())
        }
    }
}

impl Clause {
    pub fn atoms(&self) -> &[Term] {
        match self {
            Clause::Goal(g) => &g.atoms,
            Clause::Definite(d) => &d.body.atoms,
        }
    }

    pub fn env(&self) -> &TypeEnv {
        match self {
            Clause::Goal(g) => &g.env,
            Clause::Definite(d) => &d.body.env,
        }
    }

    pub fn sexpr(&self) -> String {
        match self {
            Clause::Goal(g) => g.sexpr(),
            Clause::Definite(d) => d.sexpr(),
        }
    }

    pub fn math(&self) -> String {
        match self {
            Clause::Goal(g) => g.math(),
            Clause::Definite(d) => d.math(),
        }
    }

    pub fn as_goal(&self) -> Option<&GoalClause> {
        match self {
            Clause::Goal(g) => Some(g),
            Clause::Definite(_) => None,
        }
    }

    pub fn as_definite(&self) -> Option<&DefiniteClause> {
        match self {
            Clause::Definite(d) => Some(d),
            Clause::Goal(_) => None,
        }
    }

    pub fn contains_lambda(&self) -> bool {
        self.atoms().iter().any(Term::contains_lambda)
    }
}

impl fmt::Display for GoalClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.sexpr())
    }
}

impl fmt::Debug for GoalClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.math())
    }
}

impl fmt::Display for DefiniteClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.sexpr())
    }
}

impl fmt::Debug for DefiniteClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.math())
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.sexpr())
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.math())
    }
}

/// `∃ȳ. A₁ ∧ ⋯ ∧ Aₙ` where `ȳ` are the free variables of `g` outside
/// `keep_free`, bound in order of first occurrence (outermost first).
pub fn posex(sig: &Signature, g: &GoalClause, keep_free: &[Name]) -> Term {
    let matrix = Term::conj(g.atoms.clone()).unwrap_or_else(|| sig.truth());
    let bound: Vec<Name> = g
        .vars()
        .into_iter()
        .filter(|v| !keep_free.contains(v))
        .collect();
    bound.iter().rev().fold(matrix, |acc, y| {
        let ty = g
            .env
            .get(y)
            .cloned()
            .unwrap_or_else(|| sig.individual().clone());
        Term::exists(y.clone(), ty, &acc)
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgramEntry {
    pub params: Vec<(Name, Type)>,
    /// Positive existential, free variables among `params`.
    pub body: Term,
}

impl ProgramEntry {
    /// `λx̄_R. F_R`.
    pub fn as_lambda(&self) -> Term {
        Term::lams(&self.params, &self.body)
    }
}

/// One defining body per foreground symbol, in signature order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub entries: IndexMap<Name, ProgramEntry>,
}

impl Program {
    pub fn get(&self, rel: &str) -> Option<&ProgramEntry> {
        self.entries.get(rel)
    }

    pub fn math(&self) -> String {
        let mut out = String::new();
        for (r, e) in &self.entries {
            let params: Vec<&str> = e.params.iter().map(|(n, _)| &**n).collect();
            let head = if params.is_empty() {
                r.to_string()
            } else {
                format!("{r} {}", params.join(" "))
            };
            out.push_str(&format!("{head} ⇐ {}\n", e.body.math()));
        }
        out
    }
}

fn default_params(ty: &Type) -> Vec<(Name, Type)> {
    ty.uncurry()
        .0
        .into_iter()
        .enumerate()
        .map(|(i, t)| (Name::from(format!("x_{}", i + 1)), t.clone()))
        .collect()
}

/// Builds `Π_Γ`: for each foreground symbol the disjunction of the `posex`
/// images of its defining clauses, renamed to a common parameter list (the
/// head variables of the first defining clause).
pub fn program_of(sig: &Signature, clauses: &[DefiniteClause]) -> Program {
    let mut entries = IndexMap::new();
    for (rel, ty) in sig.foreground() {
        let defs: Vec<&DefiniteClause> = clauses.iter().filter(|d| &d.head_rel == rel).collect();
        let arg_types: Vec<Type> = ty.uncurry().0.into_iter().cloned().collect();
        let params: Vec<(Name, Type)> = match defs.first() {
            Some(d) => d
                .head_args
                .iter()
                .cloned()
                .zip(arg_types.iter().cloned())
                .collect(),
            None => default_params(ty),
        };
        let mut disjuncts = Vec::new();
        for d in defs {
            let f = posex(sig, &d.body, &d.head_args);
            let map: HashMap<Name, Term> = d
                .head_args
                .iter()
                .zip(&params)
                .map(|(h, (p, _))| (h.clone(), Term::var(p.clone())))
                .collect();
            disjuncts.push(f.subst(&map));
        }
        let body = Term::disj(disjuncts).unwrap_or_else(|| sig.falsity());
        entries.insert(rel.clone(), ProgramEntry { params, body });
    }
    Program { entries }
}

/// Re-expands a program into one definite clause per foreground symbol
/// (`¬F_R ∨ R x̄_R` with the existential prefix left inside the atom).
pub fn program_clauses(program: &Program) -> Vec<DefiniteClause> {
    program
        .entries
        .iter()
        .map(|(r, e)| {
            let env: TypeEnv = e.params.iter().cloned().collect();
            DefiniteClause {
                body: GoalClause {
                    atoms: vec![e.body.clone()],
                    env,
                },
                head_rel: r.clone(),
                head_args: e.params.iter().map(|(n, _)| n.clone()).collect(),
            }
        })
        .collect()
}

fn diag(span: Option<Span>, message: String) -> Diagnostic {
    Diagnostic { span, message }
}

/// Well-formedness diagnostics for a clause; empty iff the clause is a
/// well-typed HoCHC.
pub fn validate(sig: &Signature, clause: &Clause, span: Option<Span>) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let env = clause.env();
    for v in clause.atoms().iter().flat_map(|a| a.vars_in_order()) {
        match env.get(&v) {
            None => out.push(diag(span, format!("variable `{v}` is not declared"))),
            Some(t) if !t.is_argument() => out.push(diag(
                span,
                format!("variable `{v}` has type {t:?}, which is not an argument type"),
            )),
            _ => {}
        }
    }
    if !out.is_empty() {
        return out;
    }
    for a in clause.atoms() {
        if let Err(e) = classify_atom(sig, env, a) {
            out.push(diag(span, e.to_string()));
        }
    }
    match clause {
        Clause::Goal(g) => {
            if g.is_bottom() {
                out.push(diag(span, "the empty goal clause is not allowed as input".into()));
            }
        }
        Clause::Definite(d) => {
            match sig.foreground().get(&d.head_rel) {
                None if sig.is_background(&d.head_rel) => out.push(diag(
                    span,
                    format!("head symbol `{}` belongs to the background theory", d.head_rel),
                )),
                None => out.push(diag(
                    span,
                    format!("head symbol `{}` is not a declared relation", d.head_rel),
                )),
                Some(ty) => {
                    let args = ty.uncurry().0;
                    if args.len() != d.head_args.len() {
                        out.push(diag(
                            span,
                            format!(
                                "head `{}` expects {} arguments, got {}",
                                d.head_rel,
                                args.len(),
                                d.head_args.len()
                            ),
                        ));
                    } else {
                        for (x, t) in d.head_args.iter().zip(args) {
                            match env.get(x) {
                                Some(found) if found != t => out.push(diag(
                                    span,
                                    format!(
                                        "head variable `{x}` has type {found:?}, expected {t:?}"
                                    ),
                                )),
                                None => out.push(diag(
                                    span,
                                    format!("head variable `{x}` is not declared"),
                                )),
                                _ => {}
                            }
                        }
                    }
                }
            }
            for (i, x) in d.head_args.iter().enumerate() {
                if d.head_args[..i].contains(x) {
                    out.push(diag(
                        span,
                        format!("head variable `{x}` occurs more than once"),
                    ));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iota() -> Type {
        Type::base("Int")
    }

    fn v(n: &str) -> Term {
        Term::var(n)
    }

    fn sig() -> Signature {
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

    fn definite(body: Vec<Term>, rel: &str, args: &[&str]) -> DefiniteClause {
        let mut all = body.clone();
        all.extend(args.iter().map(|a| v(a)));
        let env = GoalClause::new(all, &env()).env;
        DefiniteClause {
            body: GoalClause { atoms: body, env },
            head_rel: rel.into(),
            head_args: args.iter().map(|a| Name::from(*a)).collect(),
        }
    }

    fn example_definites() -> Vec<DefiniteClause> {
        vec![
            definite(
                vec![Term::binop("=", v("z"), Term::binop("+", v("x"), v("y")))],
                "Add",
                &["x", "y", "z"],
            ),
            definite(
                vec![Term::binop("<=", v("n"), Term::int(0)), Term::binop("=", v("s"), v("x"))],
                "Iter",
                &["f", "s", "n", "x"],
            ),
            definite(
                vec![
                    Term::binop(">", v("n"), Term::int(0)),
                    Term::apps(
                        Term::sym("Iter"),
                        [v("f"), v("s"), Term::binop("-", v("n"), Term::int(1)), v("y")],
                    ),
                    Term::apps(v("f"), [v("n"), v("y"), v("x")]),
                ],
                "Iter",
                &["f", "s", "n", "x"],
            ),
        ]
    }

    #[test]
    fn classification() {
        let s = sig();
        let e = env();
        let bg = Term::binop("=", v("z"), Term::binop("+", v("x"), v("y")));
        assert_eq!(classify_atom(&s, &e, &bg).unwrap().kind, AtomKind::Background);
        let it = Term::apps(Term::sym("Iter"), [Term::sym("Add"), v("n"), v("n"), v("x")]);
        assert_eq!(
            classify_atom(&s, &e, &it).unwrap().kind,
            AtomKind::Foreground(ForegroundShape::Symbol("Iter".into()))
        );
        let fx = Term::apps(v("f"), [v("n"), v("y"), v("x")]);
        assert_eq!(
            classify_atom(&s, &e, &fx).unwrap().kind,
            AtomKind::Foreground(ForegroundShape::Variable("f".into()))
        );
        assert!(matches!(
            classify_atom(&s, &e, &Term::neg(bg)),
            Err(ClauseError::LogicalSymbol(_))
        ));
        assert!(matches!(
            classify_atom(&s, &e, &v("x")),
            Err(ClauseError::NotBoolean { .. })
        ));
    }

    #[test]
    fn posex_of_example_goal() {
        let g = GoalClause::new(
            vec![
                Term::binop(">=", v("n"), Term::int(1)),
                Term::apps(Term::sym("Iter"), [Term::sym("Add"), v("n"), v("n"), v("x")]),
                Term::binop("<=", v("x"), Term::binop("+", v("n"), v("n"))),
            ],
            &env(),
        );
        let p = posex(&sig(), &g, &[]);
        assert_eq!(p.math(), "∃n. ∃x. n ≥ 1 ∧ Iter Add n n x ∧ x ≤ n + n");
        assert!(p.is_closed());
        assert!(p.is_positive_existential());
        assert_eq!(posex(&sig(), &GoalClause::bottom(), &[]), sig().truth());
        let ry = GoalClause::new(vec![Term::app(Term::sym("Add"), v("y"))], &env());
        assert_eq!(posex(&sig(), &ry, &["y".into()]), Term::app(Term::sym("Add"), v("y")));
    }

    #[test]
    fn program_of_example() {
        let p = program_of(&sig(), &example_definites());
        let iter = p.get("Iter").unwrap();
        assert_eq!(
            iter.body.math(),
            "(n ≤ 0 ∧ s = x) ∨ (∃y. n > 0 ∧ Iter f s (n - 1) y ∧ f n y x)"
        );
        let names: Vec<&str> = iter.params.iter().map(|(n, _)| &**n).collect();
        assert_eq!(names, ["f", "s", "n", "x"]);
        assert_eq!(
            p.get("Add").unwrap().body,
            Term::binop("=", v("z"), Term::binop("+", v("x"), v("y")))
        );
    }

    #[test]
    fn program_of_renames_to_common_parameters() {
        let mut s = Signature::lia();
        s.add_foreground("R".into(), Type::predicate(&iota(), 1)).unwrap();
        let e: TypeEnv = ["x", "y"].into_iter().map(|n| (Name::from(n), iota())).collect();
        let d1 = DefiniteClause {
            body: GoalClause::new(vec![Term::binop("=", v("x"), v("x"))], &e),
            head_rel: "R".into(),
            head_args: vec!["x".into()],
        };
        // second clause uses y as head variable and x as a body-only variable
        let mut d2 = DefiniteClause {
            body: GoalClause::new(vec![Term::binop("<", v("y"), v("x"))], &e),
            head_rel: "R".into(),
            head_args: vec!["y".into()],
        };
        d2.body.env = e.clone();
        let p = program_of(&s, &[d1, d2]);
        assert_eq!(p.get("R").unwrap().body.math(), "x = x ∨ (∃x'. x < x')");
    }

    #[test]
    fn undefined_relation_gets_falsity() {
        let mut s = Signature::lia();
        s.add_foreground("R".into(), Type::predicate(&iota(), 2)).unwrap();
        let p = program_of(&s, &[]);
        let e = p.get("R").unwrap();
        assert_eq!(e.body, s.falsity());
        assert_eq!(e.params.len(), 2);
    }

    #[test]
    fn program_extraction_is_idempotent() {
        let p = program_of(&sig(), &example_definites());
        let again = program_of(&sig(), &program_clauses(&p));
        assert_eq!(p, again);
    }

    #[test]
    fn validation() {
        let good = Clause::Definite(example_definites().remove(0));
        assert!(validate(&sig(), &good, None).is_empty());
        let dup = Clause::Definite(definite(
            vec![Term::binop("=", v("x"), v("x"))],
            "Add",
            &["x", "x", "z"],
        ));
        let diags = validate(&sig(), &dup, None);
        assert!(diags.iter().any(|d| d.message.contains("more than once")));
        let bg_head = Clause::Definite(definite(vec![], "<=", &["x", "y"]));
        assert!(validate(&sig(), &bg_head, None)
            .iter()
            .any(|d| d.message.contains("background")));
        let bottom = Clause::Goal(GoalClause::bottom());
        assert!(!validate(&sig(), &bottom, None).is_empty());
    }

    #[test]
    fn canonical_key_is_alpha_invariant() {
        let g1 = GoalClause::new(vec![Term::binop("<", v("x"), v("y"))], &env());
        let g2 = GoalClause::new(vec![Term::binop("<", v("n"), v("s"))], &env());
        let g3 = GoalClause::new(vec![Term::binop("<", v("y"), v("x"))], &env());
        assert_eq!(g1.canonical_key(), g2.canonical_key());
        assert_eq!(g1.canonical_key(), g3.canonical_key());
        let g4 = GoalClause::new(vec![Term::binop("<", v("x"), v("x"))], &env());
        assert_ne!(g1.canonical_key(), g4.canonical_key());
    }
}
