//! Bernays–Schönfinkel–Ramsey Horn clauses over simple linear arithmetic.
//!
//! Background atoms must be simple (`x ≤ M`, `M ≤ x`, `x ≤ y` with `M`
//! closed) and the remaining atoms must not mention background symbols.
//! Ground terms are replaced by fresh constants over a carrier of ground
//! terms, and the finitely many realizable `≤`-tables are enumerated.

use std::collections::BTreeSet;

use num_bigint::BigInt;

use crate::clause::{atom_kind, AtomKind, Clause, DefiniteClause, GoalClause};
use crate::lia::{self, LiaError, LiaResult, LinExpr, Model};
use crate::signature::{FreshNames, Signature, TypeEnv};
use crate::structure::FiniteStructure;
use crate::term::{Term, TermKind};
use crate::types::{Name, Type};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimpleAtom {
    VarLeConst(Name, Term),
    ConstLeVar(Term, Name),
    VarLeVar(Name, Name),
}

impl SimpleAtom {
    pub fn to_term(&self) -> Term {
        match self {
            SimpleAtom::VarLeConst(x, m) => Term::binop("<=", Term::var(x.clone()), m.clone()),
            SimpleAtom::ConstLeVar(m, x) => Term::binop("<=", m.clone(), Term::var(x.clone())),
            SimpleAtom::VarLeVar(x, y) => {
                Term::binop("<=", Term::var(x.clone()), Term::var(y.clone()))
            }
        }
    }
}

fn is_closed_individual(t: &Term) -> bool {
    t.is_closed() && LinExpr::from_term(t).is_ok()
}

/// Classifies a background atom as simple.
pub fn simple_atom(a: &Term) -> Option<SimpleAtom> {
    let (head, args) = a.spine();
    if head.as_sym().map(|s| &**s) != Some("<=") || args.len() != 2 {
        return None;
    }
    let (l, r) = (args[0], args[1]);
    match (l.as_var(), r.as_var()) {
        (Some(x), Some(y)) => Some(SimpleAtom::VarLeVar(x.clone(), y.clone())),
        (Some(x), None) if is_closed_individual(r) => Some(SimpleAtom::VarLeConst(x.clone(), r.clone())),
        (None, Some(y)) if is_closed_individual(l) => Some(SimpleAtom::ConstLeVar(l.clone(), y.clone())),
        _ => None,
    }
}

fn mentions_background(sig: &Signature, a: &Term) -> bool {
    a.any_node(&mut |t| match t.kind() {
        TermKind::Sym(s) => sig.is_background(s),
        TermKind::Int(_) => true,
        _ => false,
    })
}

/// Whether the clause is a HoBHC(SLA): simple background atoms plus a part
/// free of background symbols.
pub fn check_hobhc_sla(sig: &Signature, c: &Clause) -> bool {
    sla_violation(sig, c).is_none()
}

/// The first reason `c` is outside the fragment.
pub fn sla_violation(sig: &Signature, c: &Clause) -> Option<String> {
    for a in c.atoms() {
        match atom_kind(sig, a) {
            AtomKind::Background => {
                if simple_atom(a).is_none() {
                    return Some(format!("background atom `{}` is not simple", a.sexpr()));
                }
            }
            AtomKind::Foreground(_) => {
                if mentions_background(sig, a) {
                    return Some(format!(
                        "atom `{}` mixes background symbols into a foreground atom",
                        a.sexpr()
                    ));
                }
            }
        }
    }
    None
}

fn closed(t: &Term) -> bool {
    is_closed_individual(t)
}

fn minus_one(t: &Term) -> Term {
    Term::binop("-", t.clone(), Term::int(1))
}

fn plus_one(t: &Term) -> Term {
    Term::binop("+", t.clone(), Term::int(1))
}

/// Alternatives (disjunction of conjunctions) of `≤`-atoms equivalent to
/// `l op r`, or `None` if the atom has no simple form.
fn expand(op: &str, l: &Term, r: &Term) -> Option<Vec<Vec<(Term, Term)>>> {
    let lv = l.as_var().is_some();
    let rv = r.as_var().is_some();
    let (lc, rc) = (closed(l), closed(r));
    if lv && rv {
        return match op {
            "<=" => Some(vec![vec![(l.clone(), r.clone())]]),
            ">=" => Some(vec![vec![(r.clone(), l.clone())]]),
            "=" => Some(vec![vec![(l.clone(), r.clone()), (r.clone(), l.clone())]]),
            _ => None,
        };
    }
    if !((lv || lc) && (rv || rc)) {
        return None;
    }
    let lt = |a: &Term, b: &Term| {
        if closed(b) {
            (a.clone(), minus_one(b))
        } else {
            (plus_one(a), b.clone())
        }
    };
    match op {
        "<=" => Some(vec![vec![(l.clone(), r.clone())]]),
        ">=" => Some(vec![vec![(r.clone(), l.clone())]]),
        "<" => Some(vec![vec![lt(l, r)]]),
        ">" => Some(vec![vec![lt(r, l)]]),
        "=" => Some(vec![vec![(l.clone(), r.clone()), (r.clone(), l.clone())]]),
        "!=" => Some(vec![vec![lt(l, r)], vec![lt(r, l)]]),
        _ => None,
    }
}

/// Rewrites the atoms `M ◁ N`, `x ◁ M` and `x ⊴ y` into simple atoms.
/// A disequality splits the clause in two; `M ≤ N` with both sides closed
/// becomes `M ≤ z ∧ z ≤ N` for a fresh `z`.
pub fn desugar(sig: &Signature, c: &Clause) -> Result<Vec<Clause>, String> {
    let env = c.env().clone();
    let mut fresh = FreshNames::new();
    let mut taken: BTreeSet<Name> = env.iter().map(|(n, _)| n.clone()).collect();
    let mut alternatives: Vec<(Vec<Term>, TypeEnv)> = vec![(Vec::new(), env.clone())];
    for a in c.atoms() {
        let options: Vec<Vec<Term>> = match atom_kind(sig, a) {
            AtomKind::Foreground(_) => vec![vec![a.clone()]],
            AtomKind::Background => {
                let (head, args) = a.spine();
                let op = head.as_sym().map(|s| s.to_string()).unwrap_or_default();
                let expanded = match args.as_slice() {
                    [l, r] => expand(&op, l, r),
                    _ => None,
                }
                .ok_or_else(|| format!("background atom `{}` is not simple", a.sexpr()))?;
                expanded
                    .into_iter()
                    .map(|conj| {
                        conj.into_iter()
                            .flat_map(|(l, r)| {
                                if closed(&l) && closed(&r) {
                                    let z = fresh.fresh("z", |s| taken.contains(s) || sig.lookup(s).is_some());
                                    taken.insert(z.clone());
                                    vec![
                                        Term::binop("<=", l, Term::var(z.clone())),
                                        Term::binop("<=", Term::var(z), r),
                                    ]
                                } else {
                                    vec![Term::binop("<=", l, r)]
                                }
                            })
                            .collect()
                    })
                    .collect()
            }
        };
        let mut next = Vec::new();
        for (atoms, env) in &alternatives {
            for opt in &options {
                let mut atoms = atoms.clone();
                let mut env = env.clone();
                for t in opt {
                    for v in t.free_vars() {
                        if env.get(v).is_none() {
                            env.insert(v.clone(), sig.individual().clone());
                        }
                    }
                }
                atoms.extend(opt.iter().cloned());
                next.push((atoms, env));
            }
        }
        alternatives = next;
    }
    Ok(alternatives
        .into_iter()
        .map(|(atoms, env)| match c {
            Clause::Goal(_) => Clause::Goal(GoalClause { atoms, env }),
            Clause::Definite(d) => Clause::Definite(DefiniteClause {
                body: GoalClause { atoms, env },
                head_rel: d.head_rel.clone(),
                head_args: d.head_args.clone(),
            }),
        })
        .collect())
}

/// Name of the flat constant standing for the `k`-th ground term.
pub fn flat_constant(k: usize) -> Name {
    Name::from(format!("c@{k}"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatProblem {
    /// `gt_ι(Γ)` in order of first occurrence.
    pub ground_terms: Vec<Term>,
    /// `≤`, one constant per ground term, and the foreground symbols.
    pub sig: Signature,
    pub clauses: Vec<Clause>,
}

/// The closed sides of the simple atoms of `clauses`, in order of first
/// occurrence; `0` if there are none (the carrier must be nonempty).
pub fn ground_terms(clauses: &[Clause]) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    for c in clauses {
        for a in c.atoms() {
            let m = match simple_atom(a) {
                Some(SimpleAtom::VarLeConst(_, m)) | Some(SimpleAtom::ConstLeVar(m, _)) => m,
                _ => continue,
            };
            if !out.contains(&m) {
                out.push(m);
            }
        }
    }
    if out.is_empty() {
        out.push(Term::int(0));
    }
    out
}

fn flat_term(ground: &[Term], m: &Term) -> Term {
    let k = ground.iter().position(|g| g == m).expect("ground term collected");
    Term::sym(flat_constant(k))
}

/// `Γ^♭` over `Σ^♭`. Clauses must be HoBHC(SLA).
pub fn flatten(sig: &Signature, clauses: &[Clause]) -> FlatProblem {
    let ground = ground_terms(clauses);
    let sort = match sig.individual() {
        Type::Base(n) => n.clone(),
        _ => Name::from("Int"),
    };
    let mut flat = Signature::finite(&sort);
    let iota = flat.individual().clone();
    flat.set_background("<=".into(), Type::predicate(&iota, 2))
        .expect("fresh background symbol");
    for k in 0..ground.len() {
        flat.set_background(flat_constant(k), iota.clone())
            .expect("fresh constant");
    }
    for (r, t) in sig.foreground() {
        flat.add_foreground(r.clone(), t.clone()).expect("foreground symbol");
    }
    let flat_atom = |a: &Term| match simple_atom(a) {
        Some(SimpleAtom::VarLeConst(x, m)) => {
            Term::binop("<=", Term::var(x), flat_term(&ground, &m))
        }
        Some(SimpleAtom::ConstLeVar(m, x)) => {
            Term::binop("<=", flat_term(&ground, &m), Term::var(x))
        }
        _ => a.clone(),
    };
    let clauses = clauses
        .iter()
        .map(|c| {
            let atoms: Vec<Term> = c.atoms().iter().map(flat_atom).collect();
            match c {
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
            }
        })
        .collect();
    FlatProblem {
        ground_terms: ground,
        sig: flat,
        clauses,
    }
}

/// `·^♯`: flat constants back to their ground terms.
pub fn sharp(ground: &[Term], t: &Term) -> Term {
    match t.kind() {
        TermKind::Sym(s) => match s.strip_prefix("c@").and_then(|k| k.parse::<usize>().ok()) {
            Some(k) if k < ground.len() => ground[k].clone(),
            _ => t.clone(),
        },
        TermKind::App(f, a) => Term::app(sharp(ground, f), sharp(ground, a)),
        TermKind::Lam(..) => t.clone(),
        _ => t.clone(),
    }
}

/// A flat structure with an integer assignment to the background
/// constants that induces its `≤`-table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatStructure {
    pub structure: FiniteStructure,
    pub witness: Model,
}

fn constants_of(ground: &[Term]) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    for g in ground {
        if let Ok(e) = LinExpr::from_term(g) {
            out.extend(e.coeffs.keys().cloned());
        }
    }
    out
}

/// Every `≤`-table over `ground` realizable by integer values of the
/// constants, in lexicographic order of the row-major bit matrix (0 before
/// 1). The carrier is named after the ground terms; constant `c@k` denotes
/// element `k`.
pub fn enumerate_flat_structures(
    sort: &str,
    ground: &[Term],
) -> Result<Vec<FlatStructure>, LiaError> {
    for g in ground {
        LinExpr::from_term(g)?;
    }
    let n = ground.len();
    let consts = constants_of(ground);
    let mut out = Vec::new();
    let mut bits = vec![false; n * n];
    let mut constraints: Vec<Term> = Vec::new();
    dfs(ground, 0, &mut bits, &mut constraints, &mut |bits, model| {
        let mut s = FiniteStructure::new(sort, ground.iter().map(|g| Name::from(g.sexpr())).collect());
        s.add_relation("<=", 2, bits.to_vec()).expect("n² entries");
        for k in 0..n {
            s.add_function(flat_constant(k), 0, vec![k as u32]).expect("element in carrier");
        }
        let mut witness = model;
        for c in &consts {
            witness.entry(c.clone()).or_insert_with(|| BigInt::from(0));
        }
        out.push(FlatStructure {
            structure: s,
            witness,
        });
    })?;
    Ok(out)
}

fn dfs(
    ground: &[Term],
    pos: usize,
    bits: &mut Vec<bool>,
    constraints: &mut Vec<Term>,
    emit: &mut dyn FnMut(&[bool], Model),
) -> Result<(), LiaError> {
    let n = ground.len();
    if pos == n * n {
        if let LiaResult::Sat(model) = lia::terms_sat(constraints)? {
            emit(bits, model);
        }
        return Ok(());
    }
    let (i, j) = (pos / n, pos % n);
    if i == j {
        bits[pos] = true;
        return dfs(ground, pos + 1, bits, constraints, emit);
    }
    for bit in [false, true] {
        let atom = if bit {
            Term::binop("<=", ground[i].clone(), ground[j].clone())
        } else {
            Term::binop(">=", ground[i].clone(), plus_one(&ground[j]))
        };
        constraints.push(atom);
        if lia::terms_sat(constraints)?.is_sat() {
            bits[pos] = bit;
            dfs(ground, pos + 1, bits, constraints, emit)?;
        }
        constraints.pop();
    }
    Ok(())
}

/// The `≤`-table induced by integer values of the constants.
pub fn induced_table(ground: &[Term], model: &Model) -> Result<Vec<bool>, LiaError> {
    let vals = ground
        .iter()
        .map(|g| LinExpr::from_term(g)?.eval(model))
        .collect::<Result<Vec<BigInt>, _>>()?;
    let n = vals.len();
    Ok((0..n * n).map(|p| vals[p / n] <= vals[p % n]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c() -> Term {
        Term::sym("c")
    }

    #[test]
    fn sign_cases_of_one_constant() {
        let s = enumerate_flat_structures("Int", &[c(), Term::int(0)]).unwrap();
        assert_eq!(s.len(), 3);
        for f in &s {
            let table = induced_table(&[c(), Term::int(0)], &f.witness).unwrap();
            assert_eq!(table, f.structure.relations["<="].values);
        }
    }

    #[test]
    fn forced_orders() {
        assert_eq!(
            enumerate_flat_structures("Int", &[Term::int(0), Term::int(1)]).unwrap().len(),
            1
        );
        let c1 = Term::binop("+", c(), Term::int(1));
        let s = enumerate_flat_structures("Int", &[c(), c1]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].structure.relations["<="].values, vec![true, true, false, true]);
    }

    #[test]
    fn simple_atom_shapes() {
        let x = Term::var("x");
        let y = Term::var("y");
        assert!(matches!(
            simple_atom(&Term::binop("<=", x.clone(), Term::binop("-", c(), Term::int(5)))),
            Some(SimpleAtom::VarLeConst(..))
        ));
        assert!(simple_atom(&Term::binop("<=", x.clone(), Term::binop("+", y.clone(), Term::int(1)))).is_none());
        assert!(matches!(simple_atom(&Term::binop("<=", x, y)), Some(SimpleAtom::VarLeVar(..))));
    }
}
