//! Terms of the relational higher-order language.
//!
//! Bound variables are de Bruijn indices, so structural equality of [`Term`]
//! is α-equivalence and substitution of free variables never captures.
//! Binders keep the surface name as a display hint only; printing renames a
//! hint lazily when it would clash with a free variable or an enclosing
//! binder.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use indexmap::IndexSet;

use crate::types::{Name, Type};

#[derive(Clone)]
pub struct Term(Arc<Node>);

struct Node {
    kind: TermKind,
    /// Sorted, deduplicated free variables.
    free: Arc<[Name]>,
    /// One more than the largest loose de Bruijn index (0 when closed).
    loose: u32,
    size: usize,
}

#[derive(Clone)]
pub enum TermKind {
    Var(Name),
    Bound(u32),
    Sym(Name),
    Int(BigInt),
    Neg,
    And,
    Or,
    Exists(Type),
    App(Term, Term),
    Lam(Binder, Term),
}

#[derive(Clone, Debug)]
pub struct Binder {
    pub hint: Name,
    pub ty: Type,
}

impl PartialEq for TermKind {
    fn eq(&self, other: &Self) -> bool {
        use TermKind::*;
        match (self, other) {
            (Var(a), Var(b)) | (Sym(a), Sym(b)) => a == b,
            (Bound(a), Bound(b)) => a == b,
            (Int(a), Int(b)) => a == b,
            (Neg, Neg) | (And, And) | (Or, Or) => true,
            (Exists(a), Exists(b)) => a == b,
            (App(f, a), App(g, b)) => f == g && a == b,
            // hints are irrelevant for α-equivalence
            (Lam(x, m), Lam(y, n)) => x.ty == y.ty && m == n,
            _ => false,
        }
    }
}

impl Eq for TermKind {}

impl Hash for TermKind {
    fn hash<H: Hasher>(&self, state: &mut H) {
        use TermKind::*;
        std::mem::discriminant(self).hash(state);
        match self {
            Var(n) | Sym(n) => n.hash(state),
            Bound(i) => i.hash(state),
            Int(i) => i.hash(state),
            Neg | And | Or => {}
            Exists(t) => t.hash(state),
            App(f, a) => {
                f.hash(state);
                a.hash(state);
            }
            Lam(b, m) => {
                b.ty.hash(state);
                m.hash(state);
            }
        }
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.size == other.0.size && self.0.kind == other.0.kind)
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.kind.hash(state)
    }
}

fn merge_free(a: &Arc<[Name]>, b: &Arc<[Name]>) -> Arc<[Name]> {
    if b.is_empty() {
        return a.clone();
    }
    if a.is_empty() {
        return b.clone();
    }
    let mut out: Vec<Name> = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    out.extend(a[i..].iter().cloned());
    out.extend(b[j..].iter().cloned());
    out.into()
}

impl Term {
    pub fn new(kind: TermKind) -> Term {
        let empty: Arc<[Name]> = Arc::from(Vec::new());
        let (free, loose, size) = match &kind {
            TermKind::Var(n) => (Arc::from(vec![n.clone()]), 0, 1),
            TermKind::Bound(i) => (empty, i + 1, 1),
            TermKind::App(f, a) => (
                merge_free(&f.0.free, &a.0.free),
                f.0.loose.max(a.0.loose),
                f.0.size + a.0.size + 1,
            ),
            TermKind::Lam(_, body) => (
                body.0.free.clone(),
                body.0.loose.saturating_sub(1),
                body.0.size + 1,
            ),
            _ => (empty, 0, 1),
        };
        Term(Arc::new(Node {
            kind,
            free,
            loose,
            size,
        }))
    }

    pub fn kind(&self) -> &TermKind {
        &self.0.kind
    }

    pub fn var(name: impl Into<Name>) -> Term {
        Term::new(TermKind::Var(name.into()))
    }

    pub fn sym(name: impl Into<Name>) -> Term {
        Term::new(TermKind::Sym(name.into()))
    }

    pub fn int(value: impl Into<BigInt>) -> Term {
        Term::new(TermKind::Int(value.into()))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::new(TermKind::App(f, a))
    }

    pub fn apps<I: IntoIterator<Item = Term>>(head: Term, args: I) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    /// `(op lhs rhs)` for a binary background symbol.
    pub fn binop(op: &str, lhs: Term, rhs: Term) -> Term {
        Term::apps(Term::sym(op), [lhs, rhs])
    }

    pub fn neg(m: Term) -> Term {
        Term::app(Term::new(TermKind::Neg), m)
    }

    pub fn and(a: Term, b: Term) -> Term {
        Term::apps(Term::new(TermKind::And), [a, b])
    }

    pub fn or(a: Term, b: Term) -> Term {
        Term::apps(Term::new(TermKind::Or), [a, b])
    }

    /// Right-nested conjunction; `None` for the empty list.
    pub fn conj(mut items: Vec<Term>) -> Option<Term> {
        let last = items.pop()?;
        Some(items.into_iter().rev().fold(last, |acc, t| Term::and(t, acc)))
    }

    /// Right-nested disjunction; `None` for the empty list.
    pub fn disj(mut items: Vec<Term>) -> Option<Term> {
        let last = items.pop()?;
        Some(items.into_iter().rev().fold(last, |acc, t| Term::or(t, acc)))
    }

    /// `λname:ty. body`, binding the free variable `name` of `body`.
    pub fn lam(name: impl Into<Name>, ty: Type, body: &Term) -> Term {
        let name = name.into();
        let body = body.abstract_var(&name, 0);
        Term::new(TermKind::Lam(Binder { hint: name, ty }, body))
    }

    /// `λx̄. body` for the given parameter list.
    pub fn lams(params: &[(Name, Type)], body: &Term) -> Term {
        params
            .iter()
            .rev()
            .fold(body.clone(), |acc, (n, t)| Term::lam(n.clone(), t.clone(), &acc))
    }

    /// `∃name:ty. body`.
    pub fn exists(name: impl Into<Name>, ty: Type, body: &Term) -> Term {
        Term::app(
            Term::new(TermKind::Exists(ty.clone())),
            Term::lam(name, ty, body),
        )
    }

    pub fn free_vars(&self) -> &[Name] {
        &self.0.free
    }

    pub fn has_free(&self, name: &str) -> bool {
        self.0.free.binary_search_by(|n| (**n).cmp(name)).is_ok()
    }

    pub fn is_closed(&self) -> bool {
        self.0.free.is_empty() && self.0.loose == 0
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn as_var(&self) -> Option<&Name> {
        match self.kind() {
            TermKind::Var(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_sym(&self) -> Option<&Name> {
        match self.kind() {
            TermKind::Sym(n) => Some(n),
            _ => None,
        }
    }

    /// Decomposes `h N₁ ⋯ Nₙ` with `h` not an application.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let TermKind::App(f, a) = cur.kind() {
            args.push(a);
            cur = f;
        }
        args.reverse();
        (cur, args)
    }

    pub fn head(&self) -> &Term {
        let mut cur = self;
        while let TermKind::App(f, _) = cur.kind() {
            cur = f;
        }
        cur
    }

    /// Replaces the free variable `name` by `Bound(depth)` (closing it under
    /// a new binder), shifting existing loose indices.
    fn abstract_var(&self, name: &Name, depth: u32) -> Term {
        if !self.has_free(name) && self.0.loose <= depth {
            return self.clone();
        }
        match self.kind() {
            TermKind::Var(n) if n == name => Term::new(TermKind::Bound(depth)),
            TermKind::Bound(i) if *i >= depth => Term::new(TermKind::Bound(i + 1)),
            TermKind::App(f, a) => {
                Term::app(f.abstract_var(name, depth), a.abstract_var(name, depth))
            }
            TermKind::Lam(b, body) => Term::new(TermKind::Lam(
                b.clone(),
                body.abstract_var(name, depth + 1),
            )),
            _ => self.clone(),
        }
    }

    fn shift(&self, by: u32, cutoff: u32) -> Term {
        if by == 0 || self.0.loose <= cutoff {
            return self.clone();
        }
        match self.kind() {
            TermKind::Bound(i) if *i >= cutoff => Term::new(TermKind::Bound(i + by)),
            TermKind::App(f, a) => Term::app(f.shift(by, cutoff), a.shift(by, cutoff)),
            TermKind::Lam(b, body) => {
                Term::new(TermKind::Lam(b.clone(), body.shift(by, cutoff + 1)))
            }
            _ => self.clone(),
        }
    }

    /// Substitutes `arg` for index `depth` in a binder body and lowers the
    /// indices above it.
    fn instantiate_at(&self, arg: &Term, depth: u32) -> Term {
        if self.0.loose <= depth {
            return self.clone();
        }
        match self.kind() {
            TermKind::Bound(i) if *i == depth => arg.shift(depth, 0),
            TermKind::Bound(i) if *i > depth => Term::new(TermKind::Bound(i - 1)),
            TermKind::App(f, a) => Term::app(
                f.instantiate_at(arg, depth),
                a.instantiate_at(arg, depth),
            ),
            TermKind::Lam(b, body) => Term::new(TermKind::Lam(
                b.clone(),
                body.instantiate_at(arg, depth + 1),
            )),
            _ => self.clone(),
        }
    }

    /// Body of a λ with its bound variable replaced by `arg`.
    pub fn instantiate(body: &Term, arg: &Term) -> Term {
        body.instantiate_at(arg, 0)
    }

    /// Simultaneous, capture-avoiding substitution of free variables.
    pub fn subst(&self, map: &HashMap<Name, Term>) -> Term {
        if map.is_empty() || !self.0.free.iter().any(|n| map.contains_key(n)) {
            return self.clone();
        }
        self.subst_at(map, 0)
    }

    fn subst_at(&self, map: &HashMap<Name, Term>, depth: u32) -> Term {
        if !self.0.free.iter().any(|n| map.contains_key(n)) {
            return self.clone();
        }
        match self.kind() {
            TermKind::Var(n) => match map.get(n) {
                Some(t) => t.shift(depth, 0),
                None => self.clone(),
            },
            TermKind::App(f, a) => Term::app(f.subst_at(map, depth), a.subst_at(map, depth)),
            TermKind::Lam(b, body) => {
                Term::new(TermKind::Lam(b.clone(), body.subst_at(map, depth + 1)))
            }
            _ => self.clone(),
        }
    }

    /// Substitution from a list of bindings.
    pub fn substitute(&self, bindings: &[(Name, Term)]) -> Term {
        let map: HashMap<Name, Term> = bindings.iter().cloned().collect();
        self.subst(&map)
    }

    /// Renames free variables.
    pub fn rename(&self, renaming: &HashMap<Name, Name>) -> Term {
        let map: HashMap<Name, Term> = renaming
            .iter()
            .map(|(k, v)| (k.clone(), Term::var(v.clone())))
            .collect();
        self.subst(&map)
    }

    /// One β-step at the head: `(λx.L) N N̄ ↦ L[N/x] N̄`.
    pub fn beta_reduce_head(&self) -> Option<Term> {
        let (head, args) = self.spine();
        match head.kind() {
            TermKind::Lam(_, body) if !args.is_empty() => {
                let reduced = Term::instantiate(body, args[0]);
                Some(Term::apps(reduced, args[1..].iter().map(|t| (*t).clone())))
            }
            _ => None,
        }
    }

    /// β-normal form (normal-order reduction; no η).
    pub fn beta_normal_form(&self) -> Term {
        let mut cur = self.clone();
        while let Some(next) = cur.beta_reduce_head() {
            cur = next;
        }
        let (head, args) = cur.spine();
        let head = match head.kind() {
            TermKind::Lam(b, body) => {
                Term::new(TermKind::Lam(b.clone(), body.beta_normal_form()))
            }
            _ => head.clone(),
        };
        Term::apps(head, args.into_iter().map(|a| a.beta_normal_form()))
    }

    pub fn any_node(&self, pred: &mut impl FnMut(&Term) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self.kind() {
            TermKind::App(f, a) => f.any_node(pred) || a.any_node(pred),
            TermKind::Lam(_, body) => body.any_node(pred),
            _ => false,
        }
    }

    pub fn contains_lambda(&self) -> bool {
        self.any_node(&mut |t| matches!(t.kind(), TermKind::Lam(..)))
    }

    pub fn contains_logical(&self) -> bool {
        self.any_node(&mut |t| {
            matches!(
                t.kind(),
                TermKind::Neg | TermKind::And | TermKind::Or | TermKind::Exists(_)
            )
        })
    }

    /// No `¬` occurs anywhere in the term.
    pub fn is_positive_existential(&self) -> bool {
        !self.any_node(&mut |t| matches!(t.kind(), TermKind::Neg))
    }

    /// Symbols occurring in the term, in first-occurrence order.
    pub fn symbols(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.any_node(&mut |t| {
            if let TermKind::Sym(s) = t.kind() {
                if !out.contains(s) {
                    out.push(s.clone());
                }
            }
            false
        });
        out
    }

    /// Free variables in first-occurrence order (left to right).
    pub fn vars_in_order(&self) -> Vec<Name> {
        let mut out = IndexSet::new();
        self.collect_vars(&mut out);
        out.into_iter().collect()
    }

    pub(crate) fn collect_vars(&self, out: &mut IndexSet<Name>) {
        if self.0.free.iter().all(|n| out.contains(n)) {
            return;
        }
        match self.kind() {
            TermKind::Var(n) => {
                out.insert(n.clone());
            }
            TermKind::App(f, a) => {
                f.collect_vars(out);
                a.collect_vars(out);
            }
            TermKind::Lam(_, body) => body.collect_vars(out),
            _ => {}
        }
    }

    /// Renders in the S-expression surface syntax.
    pub fn sexpr(&self) -> String {
        let mut out = String::new();
        Printer::new(Style::Sexpr).term(self, &mut Vec::new(), &mut out);
        out
    }

    /// Renders in conventional mathematical notation, e.g.
    /// `Iter f s (n - 1) y` or `z = x + y`.
    pub fn math(&self) -> String {
        let mut out = String::new();
        Printer::new(Style::Math).term(self, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.sexpr())
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.math())
    }
}

/// Infix symbols of the linear arithmetic signature.
pub fn is_infix(sym: &str) -> bool {
    matches!(sym, "+" | "-" | "<" | "<=" | "=" | "!=" | ">=" | ">")
}

fn math_symbol(sym: &str) -> &str {
    match sym {
        "<=" => "≤",
        ">=" => "≥",
        "!=" => "≠",
        other => other,
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Style {
    Sexpr,
    Math,
}

struct Printer {
    style: Style,
}

impl Printer {
    fn new(style: Style) -> Printer {
        Printer { style }
    }

    fn bind_name(&self, hint: &Name, body: &Term, scope: &[Name]) -> Name {
        let mut cand = hint.to_string();
        while body.has_free(&cand) || scope.iter().any(|s| **s == *cand) {
            cand.push('\'');
        }
        Name::from(cand)
    }

    fn term(&self, t: &Term, scope: &mut Vec<Name>, out: &mut String) {
        match self.style {
            Style::Sexpr => self.sexpr(t, scope, out),
            Style::Math => self.math(t, scope, out, 0),
        }
    }

    fn atom(&self, t: &Term, scope: &[Name], out: &mut String) -> bool {
        match t.kind() {
            TermKind::Var(n) | TermKind::Sym(n) => out.push_str(n),
            TermKind::Bound(i) => {
                let idx = scope.len().checked_sub(1 + *i as usize);
                match idx {
                    Some(k) => out.push_str(&scope[k]),
                    None => out.push_str(&format!("#{i}")),
                }
            }
            TermKind::Int(v) => out.push_str(&v.to_string()),
            TermKind::Neg => out.push_str(if self.style == Style::Math { "¬" } else { "not" }),
            TermKind::And => out.push_str(if self.style == Style::Math { "∧" } else { "and" }),
            TermKind::Or => out.push_str(if self.style == Style::Math { "∨" } else { "or" }),
            _ => return false,
        }
        true
    }

    fn sexpr(&self, t: &Term, scope: &mut Vec<Name>, out: &mut String) {
        if self.atom(t, scope, out) {
            return;
        }
        match t.kind() {
            TermKind::Exists(ty) => out.push_str(&format!("(exists {ty})")),
            TermKind::Lam(b, body) => {
                let name = self.bind_name(&b.hint, body, scope);
                out.push_str(&format!("(lambda (({name} {})) ", b.ty));
                scope.push(name);
                self.sexpr(body, scope, out);
                scope.pop();
                out.push(')');
            }
            TermKind::App(..) => {
                let (head, args) = t.spine();
                match (head.kind(), args.len()) {
                    (TermKind::Neg, 1) => {
                        out.push_str("(not ");
                        self.sexpr(args[0], scope, out);
                        out.push(')');
                    }
                    (TermKind::And, 2) | (TermKind::Or, 2) => {
                        let is_and = matches!(head.kind(), TermKind::And);
                        out.push_str(if is_and { "(and" } else { "(or" });
                        let mut items = vec![args[0]];
                        let mut rest = args[1];
                        loop {
                            let (h, a) = rest.spine();
                            let same = match h.kind() {
                                TermKind::And => is_and,
                                TermKind::Or => !is_and,
                                _ => false,
                            };
                            if same && a.len() == 2 {
                                items.push(a[0]);
                                rest = a[1];
                            } else {
                                items.push(rest);
                                break;
                            }
                        }
                        for it in items {
                            out.push(' ');
                            self.sexpr(it, scope, out);
                        }
                        out.push(')');
                    }
                    (TermKind::Exists(ty), 1) if matches!(args[0].kind(), TermKind::Lam(..)) => {
                        let TermKind::Lam(b, body) = args[0].kind() else {
                            unreachable!()
                        };
                        let name = self.bind_name(&b.hint, body, scope);
                        out.push_str(&format!("(exists (({name} {ty})) "));
                        scope.push(name);
                        self.sexpr(body, scope, out);
                        scope.pop();
                        out.push(')');
                    }
                    _ => {
                        out.push('(');
                        self.sexpr(head, scope, out);
                        for a in args {
                            out.push(' ');
                            self.sexpr(a, scope, out);
                        }
                        out.push(')');
                    }
                }
            }
            _ => unreachable!("atomic terms handled above"),
        }
    }

    /// `prec`: 0 top level, 1 operand of a connective, 2 operand of a
    /// comparison, 3 operand of `+`/`-`, 4 argument of an application.
    fn math(&self, t: &Term, scope: &mut Vec<Name>, out: &mut String, prec: u8) {
        if let TermKind::Int(v) = t.kind() {
            if v.sign() == num_bigint::Sign::Minus && prec >= 4 {
                out.push_str(&format!("({v})"));
                return;
            }
        }
        if self.atom(t, scope, out) {
            return;
        }
        let paren = |out: &mut String, open: bool, need: bool| {
            if need {
                out.push(if open { '(' } else { ')' });
            }
        };
        match t.kind() {
            TermKind::Exists(ty) => out.push_str(&format!("∃_{}", ty.math())),
            TermKind::Lam(b, body) => {
                let need = prec > 0;
                paren(out, true, need);
                let name = self.bind_name(&b.hint, body, scope);
                out.push_str(&format!("λ{name}. "));
                scope.push(name);
                self.math(body, scope, out, 0);
                scope.pop();
                paren(out, false, need);
            }
            TermKind::App(..) => {
                let (head, args) = t.spine();
                match (head.kind(), args.len()) {
                    (TermKind::Neg, 1) => {
                        out.push('¬');
                        self.math(args[0], scope, out, 4);
                    }
                    (TermKind::And, 2) | (TermKind::Or, 2) => {
                        let need = prec > 0;
                        paren(out, true, need);
                        self.math(args[0], scope, out, 1);
                        let is_and = matches!(head.kind(), TermKind::And);
                        out.push_str(if is_and { " ∧ " } else { " ∨ " });
                        // connectives associate to the right
                        let same = match args[1].spine() {
                            (h, a) if a.len() == 2 => match h.kind() {
                                TermKind::And => is_and,
                                TermKind::Or => !is_and,
                                _ => false,
                            },
                            _ => false,
                        };
                        self.math(args[1], scope, out, if same { 0 } else { 1 });
                        paren(out, false, need);
                    }
                    (TermKind::Exists(_), 1) if matches!(args[0].kind(), TermKind::Lam(..)) => {
                        let TermKind::Lam(b, body) = args[0].kind() else {
                            unreachable!()
                        };
                        let need = prec > 0;
                        paren(out, true, need);
                        let name = self.bind_name(&b.hint, body, scope);
                        out.push_str(&format!("∃{name}. "));
                        scope.push(name);
                        self.math(body, scope, out, 0);
                        scope.pop();
                        paren(out, false, need);
                    }
                    (TermKind::Sym(s), 2) if is_infix(s) => {
                        let arith = matches!(&**s, "+" | "-");
                        let mine = if arith { 3 } else { 2 };
                        let need = if arith { prec > 3 } else { prec >= 2 };
                        paren(out, true, need);
                        self.math(args[0], scope, out, mine);
                        out.push_str(&format!(" {} ", math_symbol(s)));
                        // sums associate to the left
                        let rhs_prec = if arith && is_sum(args[1]) { 4 } else { mine };
                        self.math(args[1], scope, out, rhs_prec);
                        paren(out, false, need);
                    }
                    _ => {
                        let need = prec >= 4;
                        paren(out, true, need);
                        self.math(head, scope, out, 4);
                        for a in args {
                            out.push(' ');
                            self.math(a, scope, out, 4);
                        }
                        paren(out, false, need);
                    }
                }
            }
            _ => unreachable!(),
        }
    }
}

fn is_sum(t: &Term) -> bool {
    let (h, args) = t.spine();
    args.len() == 2 && matches!(h.as_sym().map(|s| &**s), Some("+" | "-"))
}
