//! Translation of λ-free clause sets into first-order Horn clauses.
//!
//! Relational types become sorts, foreground relations become constants,
//! application becomes one `app` symbol per function sort and truth is the
//! unary predicate `H`. Each relational type of a variable gets a
//! comprehension axiom `H (app (⋯(app c_ρ x₁)⋯) xₙ)`.

use std::collections::HashMap;

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::clause::{atom_kind, AtomKind, Clause};
use crate::signature::{infer_type, Signature, TheoryKind, TypeEnv, TypeError};
use crate::term::{Term, TermKind};
use crate::types::{Name, Type};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FolError {
    #[error("λ-abstraction in `{0}`; lift it first")]
    LambdaPresent(String),
    #[error("logical symbol inside the atom `{0}`")]
    LogicalSymbol(String),
    #[error("background symbol `{0}` is used as a relational argument")]
    PartialBackground(String),
    #[error(transparent)]
    Type(#[from] TypeError),
}

/// Sort-name fragment of a type: `i` for individuals, `o` for truth values,
/// arguments joined by `_`, arrow-typed arguments wrapped in `L…J`.
pub fn mangle(ty: &Type) -> String {
    match ty {
        Type::Base(_) => "i".into(),
        Type::Bool => "o".into(),
        Type::Arrow(..) => {
            let (args, res) = ty.uncurry();
            let mut parts: Vec<String> = args
                .iter()
                .map(|a| match a {
                    Type::Arrow(..) => format!("L{}J", mangle(a)),
                    _ => mangle(a),
                })
                .collect();
            parts.push(mangle(res));
            parts.join("_")
        }
    }
}

pub fn sort_name(ty: &Type) -> Name {
    match ty {
        Type::Base(n) => n.clone(),
        _ => Name::from(format!("S_{}", mangle(ty))),
    }
}

fn app_name(fun_ty: &Type) -> Name {
    Name::from(format!("app_{}", mangle(fun_ty)))
}

fn const_name(rel: &str) -> Name {
    Name::from(format!("c_{rel}"))
}

fn comp_name(ty: &Type) -> Name {
    Name::from(format!("comp_{}", mangle(ty)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoFunction {
    pub name: Name,
    pub args: Vec<Name>,
    pub result: Name,
    /// Name used in the conventional rendering (`app`, `Add`, `c_{ι→o}`).
    pub display: String,
}

/// The extension of the background signature by sorts, constants, `app`
/// symbols and `H`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FoSignature {
    /// Sorts for relational types, in order of first use.
    pub sorts: IndexSet<Name>,
    pub functions: IndexMap<Name, FoFunction>,
}

impl FoSignature {
    fn sort(&mut self, ty: &Type) -> Name {
        let s = sort_name(ty);
        if !ty.is_base() {
            self.sorts.insert(s.clone());
        }
        s
    }

    fn function(&mut self, name: Name, args: Vec<Name>, result: Name, display: String) {
        self.functions.entry(name.clone()).or_insert(FoFunction {
            name,
            args,
            result,
            display,
        });
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoClause {
    /// Universally quantified variables with their sorts.
    pub vars: Vec<(Name, Name)>,
    pub negative: Vec<Term>,
    pub positive: Option<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoProblem {
    pub theory: TheoryKind,
    /// Background symbols with their first-order types.
    pub background: Vec<(Name, Type)>,
    pub individual: Type,
    pub signature: FoSignature,
    pub clauses: Vec<FoClause>,
}

struct Translator<'a> {
    sig: &'a Signature,
    fo: FoSignature,
}

impl Translator<'_> {
    fn term(&mut self, env: &TypeEnv, m: &Term) -> Result<Term, FolError> {
        match m.kind() {
            TermKind::Var(_) | TermKind::Int(_) => Ok(m.clone()),
            TermKind::Lam(..) => Err(FolError::LambdaPresent(m.math())),
            TermKind::Bound(_) | TermKind::Neg | TermKind::And | TermKind::Or | TermKind::Exists(_) => {
                Err(FolError::LogicalSymbol(m.math()))
            }
            TermKind::Sym(s) => {
                if self.sig.is_foreground(s) {
                    let ty = self.sig.lookup(s).expect("foreground symbol").clone();
                    let sort = self.fo.sort(&ty);
                    let c = const_name(s);
                    self.fo.function(c.clone(), Vec::new(), sort, s.to_string());
                    Ok(Term::sym(c))
                } else if self.sig.lookup(s).is_some_and(Type::is_base) {
                    Ok(m.clone())
                } else {
                    Err(FolError::PartialBackground(s.to_string()))
                }
            }
            TermKind::App(f, a) => {
                let (head, args) = m.spine();
                if let Some(s) = head.as_sym().filter(|s| self.sig.is_background(s)) {
                    let ty = self.sig.lookup(s).expect("background symbol");
                    if ty.arity() == args.len() && ty.uncurry().1.is_base() {
                        // first-order background term, unchanged
                        return Ok(m.clone());
                    }
                    return Err(FolError::PartialBackground(s.to_string()));
                }
                let f_ty = infer_type(self.sig, env, f)?;
                let Type::Arrow(dom, cod) = &f_ty else {
                    return Err(TypeError::NotAFunction {
                        location: f.sexpr(),
                        found: f_ty.clone(),
                    }
                    .into());
                };
                let f_sort = self.fo.sort(&f_ty);
                let dom_sort = self.fo.sort(dom);
                let cod_sort = self.fo.sort(cod);
                let name = app_name(&f_ty);
                self.fo
                    .function(name.clone(), vec![f_sort, dom_sort], cod_sort, "app".into());
                let f2 = self.term(env, f)?;
                let a2 = self.term(env, a)?;
                Ok(Term::apps(Term::sym(name), [f2, a2]))
            }
        }
    }

    fn atom(&mut self, env: &TypeEnv, a: &Term) -> Result<Term, FolError> {
        if a.contains_lambda() {
            return Err(FolError::LambdaPresent(a.math()));
        }
        match atom_kind(self.sig, a) {
            AtomKind::Background => Ok(a.clone()),
            AtomKind::Foreground(_) => {
                let t = self.term(env, a)?;
                self.h();
                Ok(Term::app(Term::sym("H"), t))
            }
        }
    }

    fn h(&mut self) {
        let o = self.fo.sort(&Type::Bool);
        self.fo.function(
            "H".into(),
            vec![o],
            Name::from("Bool"),
            "H".into(),
        );
    }

    fn vars(&mut self, env: &TypeEnv) -> Vec<(Name, Name)> {
        env.iter().map(|(n, t)| (n.clone(), self.fo.sort(t))).collect()
    }

    fn clause(&mut self, c: &Clause) -> Result<FoClause, FolError> {
        let env = c.env();
        let negative = c
            .atoms()
            .iter()
            .map(|a| self.atom(env, a))
            .collect::<Result<Vec<_>, _>>()?;
        let positive = match c {
            Clause::Goal(_) => None,
            Clause::Definite(d) => Some(self.atom(env, &d.head())?),
        };
        let vars = self.vars(env);
        Ok(FoClause {
            vars,
            negative,
            positive,
        })
    }

    /// `Comp_ρ`.
    fn comprehension(&mut self, rho: &Type) -> Result<FoClause, FolError> {
        let c = comp_name(rho);
        let sort = self.fo.sort(rho);
        self.fo
            .function(c.clone(), Vec::new(), sort, format!("c_{{{}}}", rho.math()));
        let (args, _) = rho.uncurry();
        let mut env = TypeEnv::new();
        let mut vars = Vec::new();
        let mut term = Term::sym(c);
        let mut cur = rho.clone();
        for (i, t) in args.iter().enumerate() {
            let x = Name::from(format!("x{}", i + 1));
            env.insert(x.clone(), (*t).clone());
            vars.push((x.clone(), self.fo.sort(t)));
            let name = app_name(&cur);
            let Type::Arrow(_, cod) = cur.clone() else {
                unreachable!("relational type has {} arguments", args.len())
            };
            let f_sort = self.fo.sort(&cur);
            let dom_sort = self.fo.sort(t);
            let cod_sort = self.fo.sort(&cod);
            self.fo
                .function(name.clone(), vec![f_sort, dom_sort], cod_sort, "app".into());
            term = Term::apps(Term::sym(name), [term, Term::var(x)]);
            cur = (*cod).clone();
        }
        self.h();
        Ok(FoClause {
            vars,
            negative: Vec::new(),
            positive: Some(Term::app(Term::sym("H"), term)),
        })
    }
}

/// `⌊M⌋′` for a single λ-free term typed by `env`.
pub fn floor_term(sig: &Signature, env: &TypeEnv, m: &Term) -> Result<Term, FolError> {
    Translator {
        sig,
        fo: FoSignature::default(),
    }
    .term(env, m)
}

/// `⌊C⌋`: background atoms are kept, foreground atoms `A` become `H ⌊A⌋′`.
pub fn floor_clause(sig: &Signature, c: &Clause) -> Result<FoClause, FolError> {
    Translator {
        sig,
        fo: FoSignature::default(),
    }
    .clause(c)
}

/// The comprehension axiom for a relational type.
pub fn comprehension_axiom(rho: &Type) -> FoClause {
    let sig = Signature::lia();
    Translator {
        sig: &sig,
        fo: FoSignature::default(),
    }
    .comprehension(rho)
    .expect("relational type")
}

/// `⌊Γ⌋`: the translated clauses followed by one comprehension axiom per
/// relational variable type, in order of first occurrence.
pub fn translate(sig: &Signature, clauses: &[Clause]) -> Result<FoProblem, FolError> {
    let mut tr = Translator {
        sig,
        fo: FoSignature::default(),
    };
    let mut out = Vec::new();
    let mut rel_types: IndexSet<Type> = IndexSet::new();
    for c in clauses {
        out.push(tr.clause(c)?);
        let env = c.env();
        let mut order: Vec<Name> = Vec::new();
        for a in c.atoms() {
            order.extend(a.vars_in_order());
        }
        if let Clause::Definite(d) = c {
            order.extend(d.head_args.iter().cloned());
        }
        for x in order {
            if let Some(t) = env.get(&x).filter(|t| t.is_relational()) {
                rel_types.insert(t.clone());
            }
        }
    }
    for rho in &rel_types {
        out.push(tr.comprehension(rho)?);
    }
    let background = sig
        .background()
        .iter()
        .map(|(n, t)| (n.clone(), t.clone()))
        .collect();
    Ok(FoProblem {
        theory: sig.kind().clone(),
        background,
        individual: sig.individual().clone(),
        signature: tr.fo,
        clauses: out,
    })
}

impl FoClause {
    fn rename_syms(&self, names: &HashMap<Name, String>) -> (Vec<Term>, Option<Term>) {
        let map = |t: &Term| rename_syms(t, names);
        (self.negative.iter().map(map).collect(), self.positive.as_ref().map(map))
    }
}

fn rename_syms(t: &Term, names: &HashMap<Name, String>) -> Term {
    match t.kind() {
        TermKind::Sym(s) => match names.get(s) {
            Some(d) => Term::sym(d.as_str()),
            None => t.clone(),
        },
        TermKind::App(f, a) => Term::app(rename_syms(f, names), rename_syms(a, names)),
        _ => t.clone(),
    }
}

fn negated_math(a: &Term) -> String {
    let (head, args) = a.spine();
    let infix = head
        .as_sym()
        .is_some_and(|s| crate::term::is_infix(s) && args.len() == 2);
    if infix {
        format!("¬({})", a.math())
    } else {
        format!("¬{}", a.math())
    }
}

impl FoProblem {
    /// Conventional rendering, one clause per line: `app` for every
    /// application symbol, bare relation names for their constants.
    pub fn math(&self) -> String {
        let names: HashMap<Name, String> = self
            .signature
            .functions
            .iter()
            .map(|(n, f)| (n.clone(), f.display.clone()))
            .collect();
        let mut out = String::new();
        for c in &self.clauses {
            let (neg, pos) = c.rename_syms(&names);
            let mut lits: Vec<String> = neg.iter().map(negated_math).collect();
            if let Some(p) = pos {
                lits.push(p.math());
            }
            if lits.is_empty() {
                out.push_str("⊥\n");
            } else {
                out.push_str(&lits.join(" ∨ "));
                out.push('\n');
            }
        }
        out
    }

    fn is_lia(&self) -> bool {
        self.theory == TheoryKind::Lia
    }

    /// The S-expression format: sort and function declarations followed by
    /// `(rule ((x S) ...) (=> (and A ...) H))` and `(goal ((x S) ...) A ...)`.
    pub fn native(&self) -> String {
        let mut out = String::new();
        out.push_str(match self.theory {
            TheoryKind::Lia => "(theory lia)\n",
            TheoryKind::Datalog => "(theory eqdl)\n",
            TheoryKind::Finite => "(theory finite)\n",
        });
        if !self.is_lia() {
            out.push_str(&format!("(sort {})\n", self.individual));
            for (n, t) in &self.background {
                let (args, res) = t.uncurry();
                let args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                out.push_str(&format!("(declare-fun {n} ({}) {res})\n", args.join(" ")));
            }
        } else {
            for (n, t) in &self.background {
                if t.is_base() {
                    out.push_str(&format!("(declare-fun {n} () {t})\n"));
                }
            }
        }
        for s in &self.signature.sorts {
            out.push_str(&format!("(sort {s})\n"));
        }
        for f in self.signature.functions.values() {
            out.push_str(&format!(
                "(declare-fun {} ({}) {})\n",
                f.name,
                f.args.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" "),
                f.result
            ));
        }
        for c in &self.clauses {
            let binders: Vec<String> = c.vars.iter().map(|(x, s)| format!("({x} {s})")).collect();
            let binders = format!("({})", binders.join(" "));
            let body: Vec<String> = c.negative.iter().map(Term::sexpr).collect();
            match &c.positive {
                Some(h) if body.is_empty() => {
                    out.push_str(&format!("(rule {binders} {})\n", h.sexpr()));
                }
                Some(h) => out.push_str(&format!(
                    "(rule {binders} (=> (and {}) {}))\n",
                    body.join(" "),
                    h.sexpr()
                )),
                None => out.push_str(&format!("(goal {binders} {})\n", body.join(" "))),
            }
        }
        out
    }

    /// SMT-LIB 2 Horn clauses: `declare-sort`, `declare-fun` and one
    /// universally closed implication per clause.
    pub fn smtlib(&self) -> String {
        let mut out = String::new();
        out.push_str("(set-logic ALL)\n");
        if !self.is_lia() {
            out.push_str(&format!("(declare-sort {} 0)\n", smt_symbol(&self.individual.to_string())));
            for (n, t) in &self.background {
                if matches!(&**n, "=" | "!=") {
                    continue;
                }
                let (args, res) = t.uncurry();
                let args: Vec<String> = args.iter().map(|a| smt_sort(a, true)).collect();
                out.push_str(&format!(
                    "(declare-fun {} ({}) {})\n",
                    smt_symbol(n),
                    args.join(" "),
                    smt_sort(res, true)
                ));
            }
        } else {
            for (n, t) in &self.background {
                if t.is_base() {
                    out.push_str(&format!("(declare-fun {} () Int)\n", smt_symbol(n)));
                }
            }
        }
        for s in &self.signature.sorts {
            out.push_str(&format!("(declare-sort {s} 0)\n"));
        }
        let fix = |s: &Name| -> String {
            if self.is_lia() && &**s == "Int" {
                "Int".into()
            } else {
                smt_symbol(s)
            }
        };
        for f in self.signature.functions.values() {
            let args: Vec<String> = f.args.iter().map(fix).collect();
            out.push_str(&format!(
                "(declare-fun {} ({}) {})\n",
                f.name,
                args.join(" "),
                fix(&f.result)
            ));
        }
        for c in &self.clauses {
            let lits: Vec<String> = c.negative.iter().map(|a| smt_term(a, self.is_lia())).collect();
            let head = c
                .positive
                .as_ref()
                .map_or_else(|| "false".to_string(), |h| smt_term(h, self.is_lia()));
            let body = match lits.len() {
                0 => head,
                1 => format!("(=> {} {head})", lits[0]),
                _ => format!("(=> (and {}) {head})", lits.join(" ")),
            };
            if c.vars.is_empty() {
                out.push_str(&format!("(assert {body})\n"));
            } else {
                let binders: Vec<String> =
                    c.vars.iter().map(|(x, s)| format!("({} {})", smt_symbol(x), fix(s))).collect();
                out.push_str(&format!("(assert (forall ({}) {body}))\n", binders.join(" ")));
            }
        }
        out.push_str("(check-sat)\n");
        out
    }
}

fn smt_sort(t: &Type, _uninterpreted: bool) -> String {
    match t {
        Type::Bool => "Bool".into(),
        Type::Base(n) => smt_symbol(n),
        Type::Arrow(..) => sort_name(t).to_string(),
    }
}

fn smt_symbol(s: &str) -> String {
    let simple = !s.is_empty()
        && !s.starts_with(|c: char| c.is_ascii_digit())
        && s.chars().all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c))
        && !matches!(s, "<=" | "<" | ">=" | ">" | "+" | "-" | "=" | "!=");
    if simple {
        s.to_string()
    } else {
        format!("|{s}|")
    }
}

fn smt_term(t: &Term, lia: bool) -> String {
    match t.kind() {
        TermKind::Var(x) => smt_symbol(x),
        TermKind::Sym(s) => smt_symbol(s),
        TermKind::Int(n) => {
            if n.sign() == num_bigint::Sign::Minus {
                format!("(- {})", -n)
            } else {
                n.to_string()
            }
        }
        _ => {
            let (head, args) = t.spine();
            let args: Vec<String> = args.iter().map(|a| smt_term(a, lia)).collect();
            let h = match head.as_sym().map(|s| &**s) {
                Some("!=") => "distinct".to_string(),
                Some("=") => "=".to_string(),
                Some(op @ ("<=" | "<" | ">=" | ">" | "+" | "-")) if lia => op.to_string(),
                _ => smt_term(head, lia),
            };
            format!("({h} {})", args.join(" "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mangling() {
        let i = Type::base("Int");
        let p3 = Type::predicate(&i, 3);
        assert_eq!(mangle(&p3), "i_i_i_o");
        let iter = Type::curried([p3.clone(), i.clone(), i.clone(), i.clone()], Type::Bool);
        assert_eq!(mangle(&iter), "Li_i_i_oJ_i_i_i_o");
        assert_eq!(sort_name(&Type::Bool).as_ref(), "S_o");
        assert_eq!(sort_name(&i).as_ref(), "Int");
    }

    #[test]
    fn comprehension_shapes() {
        let i = Type::base("Int");
        let c = comprehension_axiom(&Type::predicate(&i, 3));
        let p = FoProblem {
            theory: TheoryKind::Lia,
            background: Vec::new(),
            individual: i.clone(),
            signature: {
                let mut t = Translator {
                    sig: &Signature::lia(),
                    fo: FoSignature::default(),
                };
                t.comprehension(&Type::predicate(&i, 3)).unwrap();
                t.fo
            },
            clauses: vec![c],
        };
        assert_eq!(p.math(), "H (app (app (app c_{ι³→o} x1) x2) x3)\n");
        let o = comprehension_axiom(&Type::Bool);
        assert_eq!(o.positive.unwrap().sexpr(), "(H comp_o)");
        let ho = comprehension_axiom(&Type::arrow(Type::predicate(&i, 1), Type::Bool));
        assert_eq!(ho.vars, vec![(Name::from("x1"), Name::from("S_i_o"))]);
    }
}
