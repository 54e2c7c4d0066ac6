//! S-expression reader and problem-file parser.
//!
//! ```text
//! (theory lia)
//! (declare-rel Add (Int Int Int))
//! (declare-var x Int)
//! (rule (=> (and (= z (+ x y))) (Add x y z)))
//! (goal (Add 1 1 x) (> x 2))
//! ```

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::clause::{Clause, DefiniteClause, GoalClause, Span};
use crate::problem::{Problem, TheoryDecl};
use crate::signature::{Signature, TypeEnv};
use crate::structure::FiniteStructure;
use crate::term::Term;
use crate::types::{Name, Type};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{}:{}: expected {expected}", span.line, span.col)]
pub struct ParseError {
    pub span: Span,
    pub expected: String,
}

fn err<T>(span: Span, expected: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        span,
        expected: expected.into(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Atom(String, Span),
    List(Vec<Sexp>, Span),
}

impl Sexp {
    pub fn span(&self) -> Span {
        match self {
            Sexp::Atom(_, s) | Sexp::List(_, s) => *s,
        }
    }

    fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a, _) => Some(a),
            Sexp::List(..) => None,
        }
    }

    fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            Sexp::Atom(..) => None,
        }
    }

    fn head(&self) -> Option<&str> {
        self.list().and_then(|l| l.first()).and_then(Sexp::atom)
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a, _) => f.write_str(a),
            Sexp::List(items, _) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Reads all top-level S-expressions; `;` starts a line comment.
pub fn read_sexps(text: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut stack: Vec<(Vec<Sexp>, Span)> = Vec::new();
    let mut top = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let here = Span { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                chars.next();
                col += 1;
                stack.push((Vec::new(), here));
            }
            ')' => {
                chars.next();
                col += 1;
                let Some((items, start)) = stack.pop() else {
                    return err(here, "no unmatched `)`");
                };
                let node = Sexp::List(items, start);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(node),
                    None => top.push(node),
                }
            }
            _ => {
                let mut tok = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    tok.push(c);
                    chars.next();
                    col += 1;
                }
                let node = Sexp::Atom(tok, here);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(node),
                    None => top.push(node),
                }
            }
        }
    }
    if let Some((_, start)) = stack.pop() {
        return err(start, "`)` closing this list");
    }
    Ok(top)
}

fn is_individual_alias(s: &str) -> bool {
    matches!(s, "Int" | "I" | "ι")
}

fn parse_type(sig: &Signature, s: &Sexp) -> Result<Type, ParseError> {
    match s {
        Sexp::Atom(a, span) => {
            if a == "Bool" {
                Ok(Type::Bool)
            } else if is_individual_alias(a) || Type::base(a) == *sig.individual() {
                Ok(sig.individual().clone())
            } else {
                err(*span, format!("a type, found `{a}`"))
            }
        }
        Sexp::List(items, span) => {
            if items.first().and_then(Sexp::atom) != Some("->") || items.len() < 3 {
                return err(*span, "a type `(-> T1 ... Tn R)`");
            }
            let parts = items[1..]
                .iter()
                .map(|t| parse_type(sig, t))
                .collect::<Result<Vec<_>, _>>()?;
            let (last, args) = parts.split_last().expect("nonempty");
            Ok(Type::curried(args.iter().cloned(), last.clone()))
        }
    }
}

fn parse_int(a: &str) -> Option<BigInt> {
    let digits = a.strip_prefix('-').unwrap_or(a);
    if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
        a.parse().ok()
    } else {
        None
    }
}

/// `@` is reserved for the constants introduced by flattening.
fn is_identifier(a: &str) -> bool {
    !a.is_empty() && parse_int(a).is_none() && a != "->" && !a.contains('@')
}

struct TermParser<'a> {
    sig: &'a Signature,
    vars: &'a TypeEnv,
    bound: Vec<Name>,
}

impl TermParser<'_> {
    fn binders(&self, s: &Sexp) -> Result<Vec<(Name, Type)>, ParseError> {
        let items = s
            .list()
            .filter(|l| !l.is_empty())
            .ok_or_else(|| ParseError {
                span: s.span(),
                expected: "a binder list `((y T) ...)`".into(),
            })?;
        items
            .iter()
            .map(|b| match b.list() {
                Some([Sexp::Atom(n, sp), t]) => {
                    if !is_identifier(n) {
                        return err(*sp, "a variable name");
                    }
                    Ok((Name::from(n.as_str()), parse_type(self.sig, t)?))
                }
                _ => err(b.span(), "a binder `(y T)`"),
            })
            .collect()
    }

    fn term(&mut self, s: &Sexp) -> Result<Term, ParseError> {
        match s {
            Sexp::Atom(a, span) => {
                if let Some(v) = parse_int(a) {
                    return Ok(Term::int(v));
                }
                let name = Name::from(a.as_str());
                if self.bound.contains(&name) || self.vars.contains(a) {
                    Ok(Term::var(name))
                } else if self.sig.lookup(a).is_some() {
                    Ok(Term::sym(name))
                } else {
                    err(*span, format!("a declared name, found `{a}`"))
                }
            }
            Sexp::List(items, span) => {
                let Some(first) = items.first() else {
                    return err(*span, "a term, found `()`");
                };
                let args = &items[1..];
                match first.atom() {
                    Some("not") => match args {
                        [m] => Ok(Term::neg(self.term(m)?)),
                        _ => err(*span, "`(not M)`"),
                    },
                    Some(op @ ("and" | "or")) => {
                        let parts = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                        let is_and = op == "and";
                        match parts.len() {
                            0 => err(*span, format!("arguments to `{op}`")),
                            1 => {
                                let c = if is_and {
                                    Term::new(crate::term::TermKind::And)
                                } else {
                                    Term::new(crate::term::TermKind::Or)
                                };
                                Ok(Term::app(c, parts.into_iter().next().unwrap()))
                            }
                            _ => Ok(if is_and {
                                Term::conj(parts).unwrap()
                            } else {
                                Term::disj(parts).unwrap()
                            }),
                        }
                    }
                    Some(q @ ("exists" | "lambda")) => {
                        if q == "exists" && args.len() == 1 {
                            let ty = parse_type(self.sig, &args[0])?;
                            return Ok(Term::new(crate::term::TermKind::Exists(ty)));
                        }
                        let [bs, body] = args else {
                            return err(*span, format!("`({q} ((y T) ...) body)`"));
                        };
                        let binders = self.binders(bs)?;
                        let depth = self.bound.len();
                        self.bound.extend(binders.iter().map(|(n, _)| n.clone()));
                        let body = self.term(body);
                        self.bound.truncate(depth);
                        let body = body?;
                        Ok(binders.iter().rev().fold(body, |acc, (n, t)| {
                            if q == "exists" {
                                Term::exists(n.clone(), t.clone(), &acc)
                            } else {
                                Term::lam(n.clone(), t.clone(), &acc)
                            }
                        }))
                    }
                    Some(op @ ("+" | "-")) if self.sig.is_background(op) => {
                        let mut parts = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                        match parts.len() {
                            0 => err(*span, format!("arguments to `{op}`")),
                            1 if op == "-" => Ok(Term::binop("-", Term::int(0), parts.remove(0))),
                            1 => Ok(parts.remove(0)),
                            _ => {
                                let mut it = parts.into_iter();
                                let first = it.next().unwrap();
                                Ok(it.fold(first, |acc, t| Term::binop(op, acc, t)))
                            }
                        }
                    }
                    _ => {
                        let head = self.term(first)?;
                        let args = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                        Ok(Term::apps(head, args))
                    }
                }
            }
        }
    }
}

fn parse_structure(
    sort: &mut Option<Name>,
    items: &[Sexp],
    span: Span,
) -> Result<FiniteStructure, ParseError> {
    let mut structure: Option<FiniteStructure> = None;
    for it in items {
        match it.head() {
            Some("sort") => {
                let Some([_, Sexp::Atom(name, _), Sexp::List(elems, _)]) = it.list() else {
                    return err(it.span(), "`(sort NAME (e1 e2 ...))`");
                };
                let carrier = elems
                    .iter()
                    .map(|e| e.atom().map(Name::from).ok_or(()))
                    .collect::<Result<Vec<_>, _>>()
                    .or_else(|_| err(it.span(), "element names"))?;
                let name = Name::from(name.as_str());
                match sort {
                    Some(s) if *s != name => return err(it.span(), format!("the sort `{s}`")),
                    _ => *sort = Some(name.clone()),
                }
                structure = Some(FiniteStructure::new(name, carrier));
            }
            Some(kind @ ("fun" | "rel")) => {
                let Some(st) = structure.as_mut() else {
                    return err(it.span(), "a `(sort ...)` declaration first");
                };
                let list = it.list().unwrap();
                let Some(Sexp::Atom(name, _)) = list.get(1) else {
                    return err(it.span(), format!("`({kind} NAME rows...)`"));
                };
                let mut rows: Vec<(Vec<u32>, &Sexp)> = Vec::new();
                let mut arity = None;
                for row in &list[2..] {
                    let Some([Sexp::List(args, _), Sexp::Atom(arrow, _), value]) = row.list() else {
                        return err(row.span(), "a table row `((e ...) -> v)`");
                    };
                    if arrow != "->" {
                        return err(row.span(), "`->` in table row");
                    }
                    let args = args
                        .iter()
                        .map(|a| a.atom().and_then(|a| st.element(a)).ok_or(a.span()))
                        .collect::<Result<Vec<u32>, Span>>()
                        .or_else(|sp| err(sp, "a carrier element"))?;
                    if *arity.get_or_insert(args.len()) != args.len() {
                        return err(row.span(), "rows of equal arity");
                    }
                    rows.push((args, value));
                }
                let arity = arity.unwrap_or(0);
                let size = st.size();
                let n_rows = size.pow(arity as u32);
                let index = |args: &[u32]| args.iter().fold(0usize, |acc, a| acc * size + *a as usize);
                if kind == "fun" {
                    let mut values: Vec<Option<u32>> = vec![None; n_rows];
                    for (args, v) in rows {
                        let val = v
                            .atom()
                            .and_then(|a| st.element(a))
                            .ok_or_else(|| ParseError {
                                span: v.span(),
                                expected: "a carrier element".into(),
                            })?;
                        values[index(&args)] = Some(val);
                    }
                    let values = values
                        .into_iter()
                        .collect::<Option<Vec<u32>>>()
                        .ok_or_else(|| ParseError {
                            span: it.span(),
                            expected: format!("a total table for `{name}`"),
                        })?;
                    st.add_function(name.as_str(), arity, values)
                        .or_else(|e| err(it.span(), e.to_string()))?;
                } else {
                    let mut values = vec![false; n_rows];
                    for (args, v) in rows {
                        values[index(&args)] = match v.atom() {
                            Some("1") => true,
                            Some("0") => false,
                            _ => return err(v.span(), "`0` or `1`"),
                        };
                    }
                    st.add_relation(name.as_str(), arity, values)
                        .or_else(|e| err(it.span(), e.to_string()))?;
                }
            }
            _ => return err(it.span(), "`(sort ...)`, `(fun ...)` or `(rel ...)`"),
        }
    }
    structure.ok_or_else(|| ParseError {
        span,
        expected: "a `(sort ...)` declaration".into(),
    })
}

fn parse_theory(items: &[Sexp], span: Span) -> Result<(Signature, TheoryDecl), ParseError> {
    match items.get(1).and_then(Sexp::atom) {
        Some("lia") if items.len() == 2 => Ok((Signature::lia(), TheoryDecl::Lia)),
        Some("eqdl") => {
            let mut sig = Signature::datalog("I");
            let mut consts = Vec::new();
            for it in &items[2..] {
                let Some(list) = it.list().filter(|l| it.head() == Some("consts") && l.len() > 1) else {
                    return err(it.span(), "`(consts a b ...)`");
                };
                for c in &list[1..] {
                    let Some(name) = c.atom().filter(|a| is_identifier(a)) else {
                        return err(c.span(), "a constant name");
                    };
                    sig.add_background(Name::from(name), sig.individual().clone())
                        .or_else(|e| err(c.span(), e.to_string()))?;
                    consts.push(Name::from(name));
                }
            }
            if consts.is_empty() {
                return err(span, "at least one constant in `(consts ...)`");
            }
            Ok((sig, TheoryDecl::Datalog(consts)))
        }
        Some("finite") => {
            let rest = &items[2..];
            let mut sort = None;
            let mut structures = Vec::new();
            if rest.iter().all(|r| r.head() == Some("structure")) && !rest.is_empty() {
                for r in rest {
                    structures.push(parse_structure(&mut sort, &r.list().unwrap()[1..], r.span())?);
                }
            } else {
                structures.push(parse_structure(&mut sort, rest, span)?);
            }
            let sort = sort.expect("structure has a sort");
            let mut sig = Signature::finite(&sort);
            let first = structures[0].symbol_types();
            for s in &structures[1..] {
                if s.symbol_types() != first {
                    return err(span, "all structures to interpret the same symbols");
                }
            }
            for (n, t) in first {
                sig.set_background(n, t).or_else(|e| err(span, e.to_string()))?;
            }
            Ok((sig, TheoryDecl::Finite(structures)))
        }
        _ => err(span, "`(theory lia)`, `(theory eqdl (consts ...))` or `(theory finite ...)`"),
    }
}

/// Parses a problem file. Name resolution happens here; typing and clause
/// shape are checked by [`Problem::validate`].
pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let sexps = read_sexps(text)?;
    let Some(first) = sexps.first() else {
        return err(Span { line: 1, col: 1 }, "a `(theory ...)` header");
    };
    if first.head() != Some("theory") {
        return err(first.span(), "a `(theory ...)` header");
    }
    let (mut sig, decl) = parse_theory(first.list().unwrap(), first.span())?;
    let mut vars = TypeEnv::new();
    let mut clauses = Vec::new();
    let mut spans = Vec::new();
    let mut var_order: Vec<Name> = Vec::new();

    for s in &sexps[1..] {
        let span = s.span();
        let items = s.list().unwrap_or(&[]);
        match s.head() {
            Some("declare-const") => {
                let [_, Sexp::Atom(name, _), ty] = items else {
                    return err(span, "`(declare-const NAME TYPE)`");
                };
                let ty = parse_type(&sig, ty)?;
                if !ty.is_base() {
                    return err(span, "a constant of the individual sort");
                }
                if vars.contains(name) {
                    return err(span, format!("`{name}` not to be declared as a variable too"));
                }
                sig.add_background(Name::from(name.as_str()), ty)
                    .or_else(|e| err(span, e.to_string()))?;
            }
            Some("declare-rel") => {
                let [_, Sexp::Atom(name, _), args] = items else {
                    return err(span, "`(declare-rel NAME (T1 ... Tn))`");
                };
                let args = match args {
                    Sexp::List(ts, _) => ts
                        .iter()
                        .map(|t| parse_type(&sig, t))
                        .collect::<Result<Vec<_>, _>>()?,
                    Sexp::Atom(..) => return err(args.span(), "an argument type list"),
                };
                if !is_identifier(name) || vars.contains(name) {
                    return err(span, "a fresh relation name");
                }
                sig.add_foreground(Name::from(name.as_str()), Type::curried(args, Type::Bool))
                    .or_else(|e| err(span, e.to_string()))?;
            }
            Some("declare-var") => {
                let [_, Sexp::Atom(name, _), ty] = items else {
                    return err(span, "`(declare-var NAME TYPE)`");
                };
                if !is_identifier(name) || sig.lookup(name).is_some() || vars.contains(name) {
                    return err(span, format!("a fresh variable name, found `{name}`"));
                }
                let ty = parse_type(&sig, ty)?;
                vars.insert(Name::from(name.as_str()), ty);
                var_order.push(Name::from(name.as_str()));
            }
            Some("rule") => {
                let [_, body] = items else {
                    return err(span, "`(rule (=> (and A ...) (R x ...)))` or `(rule (R x ...))`");
                };
                let mut tp = TermParser {
                    sig: &sig,
                    vars: &vars,
                    bound: Vec::new(),
                };
                let (atoms, head) = if body.head() == Some("=>") {
                    let [_, pre, head] = body.list().unwrap() else {
                        return err(body.span(), "`(=> BODY HEAD)`");
                    };
                    let atoms = if pre.head() == Some("and") {
                        pre.list().unwrap()[1..]
                            .iter()
                            .map(|a| tp.term(a))
                            .collect::<Result<Vec<_>, _>>()?
                    } else {
                        vec![tp.term(pre)?]
                    };
                    (atoms, head)
                } else {
                    (Vec::new(), body)
                };
                let (rel, args) = match head {
                    Sexp::Atom(r, _) => (r.as_str(), &[][..]),
                    Sexp::List(l, _) => match l.split_first() {
                        Some((Sexp::Atom(r, _), args)) => (r.as_str(), args),
                        _ => return err(head.span(), "a head `(R x ...)`"),
                    },
                };
                let mut head_args = Vec::new();
                for a in args {
                    match a.atom() {
                        Some(x) if vars.contains(x) => head_args.push(Name::from(x)),
                        _ => return err(a.span(), "a declared variable as head argument"),
                    }
                }
                if sig.lookup(rel).is_none() {
                    return err(head.span(), format!("a declared relation, found `{rel}`"));
                }
                let mut names: Vec<Name> = Vec::new();
                for a in &atoms {
                    for v in a.vars_in_order() {
                        if !names.contains(&v) {
                            names.push(v);
                        }
                    }
                }
                names.extend(head_args.iter().cloned());
                clauses.push(Clause::Definite(DefiniteClause {
                    body: GoalClause {
                        atoms,
                        env: vars.restrict(names.iter()),
                    },
                    head_rel: Name::from(rel),
                    head_args,
                }));
                spans.push(span);
            }
            Some("goal") => {
                if items.len() < 2 {
                    return err(span, "at least one atom in `(goal ...)`");
                }
                let mut tp = TermParser {
                    sig: &sig,
                    vars: &vars,
                    bound: Vec::new(),
                };
                let atoms = items[1..]
                    .iter()
                    .map(|a| tp.term(a))
                    .collect::<Result<Vec<_>, _>>()?;
                clauses.push(Clause::Goal(GoalClause::new(atoms, &vars)));
                spans.push(span);
            }
            _ => {
                return err(
                    span,
                    "`declare-const`, `declare-rel`, `declare-var`, `rule` or `goal`",
                )
            }
        }
    }
    let _ = HashMap::<(), ()>::new();
    Ok(Problem {
        sig,
        theory: decl,
        vars,
        var_order,
        clauses,
        spans,
    })
}

/// Parses a single term against a signature and variable environment.
pub fn parse_term(sig: &Signature, vars: &TypeEnv, text: &str) -> Result<Term, ParseError> {
    let sexps = read_sexps(text)?;
    match sexps.as_slice() {
        [s] => TermParser {
            sig,
            vars,
            bound: Vec::new(),
        }
        .term(s),
        _ => err(Span { line: 1, col: 1 }, "exactly one term"),
    }
}
