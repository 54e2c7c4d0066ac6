//! Satisfiability of conjunctions of linear integer literals.
//!
//! The decision procedure is an Omega test: equalities are eliminated
//! exactly (with the symmetric-modulo trick when no unit coefficient is
//! available), inequalities by Fourier-Motzkin projection with real and dark
//! shadows, and the remaining gap is closed by enumerating the finitely many
//! gray-shadow splinters. Disequalities are split into two strict cases up
//! front. Witnesses are built by back-substitution, always picking the value
//! of smallest magnitude that the bounds allow, and are re-checked against the
//! input before being returned.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::term::{Term, TermKind};
use crate::types::Name;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl Rel {
    pub fn from_symbol(s: &str) -> Option<Rel> {
        Some(match s {
            "<" => Rel::Lt,
            "<=" => Rel::Le,
            "=" => Rel::Eq,
            "!=" => Rel::Ne,
            ">=" => Rel::Ge,
            ">" => Rel::Gt,
            _ => return None,
        })
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ne => "!=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    pub fn holds(self, lhs: &BigInt, rhs: &BigInt) -> bool {
        match self {
            Rel::Lt => lhs < rhs,
            Rel::Le => lhs <= rhs,
            Rel::Eq => lhs == rhs,
            Rel::Ne => lhs != rhs,
            Rel::Ge => lhs >= rhs,
            Rel::Gt => lhs > rhs,
        }
    }

    /// The relation of the integer negation (`¬(a ≤ b)` is `a > b`).
    pub fn negate(self) -> Rel {
        match self {
            Rel::Lt => Rel::Ge,
            Rel::Le => Rel::Gt,
            Rel::Eq => Rel::Ne,
            Rel::Ne => Rel::Eq,
            Rel::Ge => Rel::Lt,
            Rel::Gt => Rel::Le,
        }
    }
}

/// `Σ cᵢ·xᵢ + k` with exact integer coefficients. Unknowns are variables or
/// background constants, identified by name.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LinExpr {
    pub coeffs: BTreeMap<Name, BigInt>,
    pub constant: BigInt,
}

pub type Model = BTreeMap<Name, BigInt>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LiaError {
    #[error("`{0}` is not a linear arithmetic term")]
    NotLinear(String),
    #[error("`{0}` is not a linear arithmetic literal")]
    NotAtom(String),
    #[error("no value for `{0}`")]
    Unbound(Name),
}

impl LinExpr {
    pub fn constant(k: impl Into<BigInt>) -> LinExpr {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: k.into(),
        }
    }

    pub fn unknown(name: Name) -> LinExpr {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(name, BigInt::one());
        LinExpr {
            coeffs,
            constant: BigInt::zero(),
        }
    }

    pub fn add_scaled(&mut self, other: &LinExpr, factor: &BigInt) {
        for (n, c) in &other.coeffs {
            let entry = self.coeffs.entry(n.clone()).or_default();
            *entry += c * factor;
            if entry.is_zero() {
                self.coeffs.remove(n);
            }
        }
        self.constant += &other.constant * factor;
    }

    /// Reads a term built from numerals, variables, constants, `+` and `-`.
    pub fn from_term(t: &Term) -> Result<LinExpr, LiaError> {
        match t.kind() {
            TermKind::Int(v) => Ok(LinExpr::constant(v.clone())),
            TermKind::Var(n) | TermKind::Sym(n) if !crate::term::is_infix(n) => {
                Ok(LinExpr::unknown(n.clone()))
            }
            _ => {
                let (head, args) = t.spine();
                match (head.as_sym().map(|s| &**s), args.as_slice()) {
                    (Some(op @ ("+" | "-")), [a, b]) => {
                        let mut e = LinExpr::from_term(a)?;
                        let r = LinExpr::from_term(b)?;
                        let sign = if op == "+" { BigInt::one() } else { -BigInt::one() };
                        e.add_scaled(&r, &sign);
                        Ok(e)
                    }
                    _ => Err(LiaError::NotLinear(t.sexpr())),
                }
            }
        }
    }

    pub fn eval(&self, model: &Model) -> Result<BigInt, LiaError> {
        let mut acc = self.constant.clone();
        for (n, c) in &self.coeffs {
            let v = model.get(n).ok_or_else(|| LiaError::Unbound(n.clone()))?;
            acc += c * v;
        }
        Ok(acc)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn to_term(&self, is_var: &dyn Fn(&str) -> bool) -> Term {
        let mut acc: Option<Term> = None;
        for (n, c) in &self.coeffs {
            let atom = if is_var(n) {
                Term::var(n.clone())
            } else {
                Term::sym(n.clone())
            };
            let mag = c.abs();
            let mut piece = atom.clone();
            let mut k = BigInt::one();
            while k < mag {
                piece = Term::binop("+", piece, atom.clone());
                k += 1;
            }
            acc = Some(match acc {
                None if c.is_negative() => Term::binop("-", Term::int(0), piece),
                None => piece,
                Some(a) if c.is_negative() => Term::binop("-", a, piece),
                Some(a) => Term::binop("+", a, piece),
            });
        }
        match acc {
            None => Term::int(self.constant.clone()),
            Some(a) if self.constant.is_zero() => a,
            Some(a) if self.constant.is_negative() => {
                Term::binop("-", a, Term::int(-self.constant.clone()))
            }
            Some(a) => Term::binop("+", a, Term::int(self.constant.clone())),
        }
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in &self.coeffs {
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = c.abs();
            if mag.is_one() {
                write!(f, "{n}")?;
            } else {
                write!(f, "{mag}·{n}")?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant.is_zero() {
            Ok(())
        } else if self.constant.is_negative() {
            write!(f, " - {}", -self.constant.clone())
        } else {
            write!(f, " + {}", self.constant)
        }
    }
}

/// `lhs ⊲ rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearAtom {
    pub lhs: LinExpr,
    pub rel: Rel,
    pub rhs: LinExpr,
}

impl LinearAtom {
    pub fn new(lhs: LinExpr, rel: Rel, rhs: LinExpr) -> LinearAtom {
        LinearAtom { lhs, rel, rhs }
    }

    pub fn from_term(t: &Term) -> Result<LinearAtom, LiaError> {
        let (head, args) = t.spine();
        let rel = head
            .as_sym()
            .and_then(|s| Rel::from_symbol(s))
            .ok_or_else(|| LiaError::NotAtom(t.sexpr()))?;
        match args.as_slice() {
            [a, b] => Ok(LinearAtom {
                lhs: LinExpr::from_term(a)?,
                rel,
                rhs: LinExpr::from_term(b)?,
            }),
            _ => Err(LiaError::NotAtom(t.sexpr())),
        }
    }

    /// `lhs − rhs ⊲ 0`, divided by the gcd of all coefficients and the
    /// constant.
    pub fn normalized(&self) -> (LinExpr, Rel) {
        let mut e = self.lhs.clone();
        e.add_scaled(&self.rhs, &-BigInt::one());
        let mut g = e.constant.abs();
        for c in e.coeffs.values() {
            g = g.gcd(c);
        }
        if !g.is_zero() && !g.is_one() {
            for c in e.coeffs.values_mut() {
                *c /= &g;
            }
            e.constant /= &g;
        }
        (e, self.rel)
    }

    pub fn eval(&self, model: &Model) -> Result<bool, LiaError> {
        Ok(self.rel.holds(&self.lhs.eval(model)?, &self.rhs.eval(model)?))
    }

    pub fn unknowns(&self) -> Vec<Name> {
        let mut out: Vec<Name> = self.lhs.coeffs.keys().cloned().collect();
        for k in self.rhs.coeffs.keys() {
            if !out.contains(k) {
                out.push(k.clone());
            }
        }
        out
    }
}

impl fmt::Display for LinearAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.rel.symbol(), self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LiaResult {
    Sat(Model),
    Unsat,
}

impl LiaResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, LiaResult::Sat(_))
    }
}

/// Decides a conjunction of linear literals over the integers. On success the
/// model covers every unknown of the input.
pub fn lia_conjunction_sat(atoms: &[LinearAtom]) -> LiaResult {
    let mut names: Vec<Name> = Vec::new();
    for a in atoms {
        for n in a.unknowns() {
            if !names.contains(&n) {
                names.push(n);
            }
        }
    }
    names.sort();
    let index: BTreeMap<&Name, usize> = names.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let dense = |e: &LinExpr| -> Lin {
        let mut coeffs = vec![BigInt::zero(); names.len()];
        for (n, c) in &e.coeffs {
            coeffs[index[n]] = c.clone();
        }
        Lin {
            coeffs,
            c: e.constant.clone(),
        }
    };

    let mut base = Problem {
        nvars: names.len(),
        eqs: Vec::new(),
        geqs: Vec::new(),
    };
    let mut disequalities = Vec::new();
    for a in atoms {
        let (e, rel) = a.normalized();
        let l = dense(&e);
        match rel {
            Rel::Eq => base.eqs.push(l),
            Rel::Ge => base.geqs.push(l),
            Rel::Gt => base.geqs.push(l.offset(-1)),
            Rel::Le => base.geqs.push(l.negated()),
            Rel::Lt => base.geqs.push(l.negated().offset(-1)),
            Rel::Ne => disequalities.push(l),
        }
    }

    // each disequality e ≠ 0 becomes e ≥ 1 or −e ≥ 1
    let cases = 1usize << disequalities.len();
    for mask in 0..cases {
        let mut p = base.clone();
        for (i, d) in disequalities.iter().enumerate() {
            if mask & (1 << i) == 0 {
                p.geqs.push(d.negated().offset(-1));
            } else {
                p.geqs.push(d.clone().offset(-1));
            }
        }
        if let Some(values) = solve(p) {
            let model: Model = names.iter().cloned().zip(values).collect();
            for a in atoms {
                assert_eq!(
                    a.eval(&model),
                    Ok(true),
                    "internal error: LIA witness violates {a}"
                );
            }
            return LiaResult::Sat(model);
        }
    }
    LiaResult::Unsat
}

/// Decides a conjunction of background atoms given as terms.
pub fn terms_sat(atoms: &[Term]) -> Result<LiaResult, LiaError> {
    let parsed: Result<Vec<LinearAtom>, LiaError> = atoms.iter().map(LinearAtom::from_term).collect();
    Ok(lia_conjunction_sat(&parsed?))
}

/// Evaluates a background atom under a valuation.
pub fn eval_term_atom(atom: &Term, model: &Model) -> Result<bool, LiaError> {
    LinearAtom::from_term(atom)?.eval(model)
}

/// `Σ coeffs[i]·xᵢ + c`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Lin {
    coeffs: Vec<BigInt>,
    c: BigInt,
}

impl Lin {
    fn negated(&self) -> Lin {
        Lin {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            c: -&self.c,
        }
    }

    fn offset(mut self, k: i64) -> Lin {
        self.c += k;
        self
    }

    fn coeff_gcd(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    fn eval(&self, values: &[BigInt]) -> BigInt {
        let mut acc = self.c.clone();
        for (c, v) in self.coeffs.iter().zip(values) {
            if !c.is_zero() {
                acc += c * v;
            }
        }
        acc
    }

    fn pad(&mut self, n: usize) {
        self.coeffs.resize(n, BigInt::zero());
    }

    /// Replaces `x_k` by `def` (whose own `k` coefficient is zero).
    fn substitute(&self, k: usize, def: &Lin) -> Lin {
        let a = &self.coeffs[k];
        if a.is_zero() {
            return self.clone();
        }
        let mut out = self.clone();
        out.coeffs[k] = BigInt::zero();
        for (o, d) in out.coeffs.iter_mut().zip(&def.coeffs) {
            if !d.is_zero() {
                *o += a * d;
            }
        }
        out.c += a * &def.c;
        out
    }
}

#[derive(Clone, Debug)]
struct Problem {
    nvars: usize,
    eqs: Vec<Lin>,
    geqs: Vec<Lin>,
}

/// `a mod̂ m = a − m·⌊a/m + 1/2⌋`, the residue in `(−m/2, m/2]`.
fn mod_hat(a: &BigInt, m: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    // ⌊a/m + 1/2⌋ = ⌊(2a + m) / 2m⌋
    let q = (two.clone() * a + m).div_floor(&(two * m));
    a - m * q
}

/// Value of smallest magnitude in `[lo, hi]` (either bound may be absent);
/// ties go to the non-negative value.
fn closest_to_zero(lo: Option<BigInt>, hi: Option<BigInt>) -> BigInt {
    let zero = BigInt::zero();
    match (lo, hi) {
        (Some(l), _) if l > zero => l,
        (_, Some(h)) if h < zero => h,
        _ => zero,
    }
}

fn normalize(mut p: Problem) -> Option<Problem> {
    let mut eqs = Vec::new();
    for mut e in p.eqs.drain(..) {
        let g = e.coeff_gcd();
        if g.is_zero() {
            if !e.c.is_zero() {
                return None;
            }
            continue;
        }
        if !(&e.c % &g).is_zero() {
            return None;
        }
        if !g.is_one() {
            for c in &mut e.coeffs {
                *c /= &g;
            }
            e.c /= &g;
        }
        eqs.push(e);
    }
    let mut tightest: BTreeMap<Vec<BigInt>, BigInt> = BTreeMap::new();
    for mut e in p.geqs.drain(..) {
        let g = e.coeff_gcd();
        if g.is_zero() {
            if e.c.is_negative() {
                return None;
            }
            continue;
        }
        if !g.is_one() {
            for c in &mut e.coeffs {
                *c /= &g;
            }
            e.c = e.c.div_floor(&g);
        }
        tightest
            .entry(e.coeffs)
            .and_modify(|c| {
                if e.c < *c {
                    *c = e.c.clone()
                }
            })
            .or_insert(e.c);
    }
    let mut geqs = Vec::new();
    for (coeffs, c) in &tightest {
        let neg: Vec<BigInt> = coeffs.iter().map(|x| -x).collect();
        if let Some(d) = tightest.get(&neg) {
            // e + c ≥ 0 and −e + d ≥ 0
            let sum = c + d;
            if sum.is_negative() {
                return None;
            }
            if sum.is_zero() {
                if coeffs > &neg {
                    eqs.push(Lin {
                        coeffs: coeffs.clone(),
                        c: c.clone(),
                    });
                }
                continue;
            }
        }
        geqs.push(Lin {
            coeffs: coeffs.clone(),
            c: c.clone(),
        });
    }
    p.eqs = eqs;
    p.geqs = geqs;
    Some(p)
}

/// Returns integer values for all `nvars` unknowns, or `None` if unsatisfiable.
fn solve(p: Problem) -> Option<Vec<BigInt>> {
    let p = normalize(p)?;
    if !p.eqs.is_empty() {
        return solve_equality(p);
    }
    if p.geqs.is_empty() {
        return Some(vec![BigInt::zero(); p.nvars]);
    }
    solve_inequalities(p)
}

fn solve_equality(mut p: Problem) -> Option<Vec<BigInt>> {
    // the equality and variable with the smallest nonzero coefficient
    let mut best: Option<(usize, usize, BigInt)> = None;
    for (ei, e) in p.eqs.iter().enumerate() {
        for (k, c) in e.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if best.as_ref().is_none_or(|(_, _, b)| mag < *b) {
                best = Some((ei, k, mag));
            }
        }
    }
    let (ei, k, mag) = best.expect("normalized equalities mention a variable");
    if mag.is_one() {
        let eq = p.eqs.swap_remove(ei);
        let a = eq.coeffs[k].clone();
        // a·x_k + rest = 0 with a = ±1, so x_k = −a·rest
        let mut def = eq.clone();
        def.coeffs[k] = BigInt::zero();
        let def = if a.is_one() { def.negated() } else { def };
        let sub = Problem {
            nvars: p.nvars,
            eqs: p.eqs.iter().map(|e| e.substitute(k, &def)).collect(),
            geqs: p.geqs.iter().map(|e| e.substitute(k, &def)).collect(),
        };
        let mut values = solve(sub)?;
        values[k] = def.eval(&values);
        Some(values)
    } else {
        let mut eq = p.eqs[ei].clone();
        if eq.coeffs[k].is_negative() {
            eq = eq.negated();
        }
        let m = &eq.coeffs[k] + BigInt::one();
        let sigma = p.nvars;
        let n = p.nvars + 1;
        // x_k = −m·σ + Σ_{i≠k} (aᵢ mod̂ m)·xᵢ + (c mod̂ m)
        let mut def = Lin {
            coeffs: eq.coeffs.iter().map(|a| mod_hat(a, &m)).collect(),
            c: mod_hat(&eq.c, &m),
        };
        def.coeffs[k] = BigInt::zero();
        def.pad(n);
        def.coeffs[sigma] = -m;
        let widen = |e: &Lin| {
            let mut e = e.clone();
            e.pad(n);
            e.substitute(k, &def)
        };
        let sub = Problem {
            nvars: n,
            eqs: p.eqs.iter().map(widen).collect(),
            geqs: p.geqs.iter().map(widen).collect(),
        };
        let mut values = solve(sub)?;
        values[k] = def.eval(&values);
        values.truncate(p.nvars);
        Some(values)
    }
}

/// Chooses `x_k` from its bounds once all other unknowns are fixed.
fn pick_value(constraints: &[Lin], k: usize, values: &[BigInt]) -> BigInt {
    let mut lo: Option<BigInt> = None;
    let mut hi: Option<BigInt> = None;
    for e in constraints {
        let a = &e.coeffs[k];
        if a.is_zero() {
            continue;
        }
        let mut rest = e.clone();
        rest.coeffs[k] = BigInt::zero();
        let r = rest.eval(values);
        if a.is_positive() {
            // a·x + r ≥ 0  ⇒  x ≥ ⌈−r/a⌉
            let bound = (-r).div_ceil(a);
            if lo.as_ref().is_none_or(|l| bound > *l) {
                lo = Some(bound);
            }
        } else {
            // −|a|·x + r ≥ 0  ⇒  x ≤ ⌊r/|a|⌋
            let bound = r.div_floor(&a.abs());
            if hi.as_ref().is_none_or(|h| bound < *h) {
                hi = Some(bound);
            }
        }
    }
    if let (Some(l), Some(h)) = (&lo, &hi) {
        assert!(l <= h, "internal error: empty integer range while back-substituting");
    }
    closest_to_zero(lo, hi)
}

fn solve_inequalities(p: Problem) -> Option<Vec<BigInt>> {
    let n = p.nvars;
    let mut lowers = vec![0usize; n];
    let mut uppers = vec![0usize; n];
    let mut unit_lower = vec![true; n];
    let mut unit_upper = vec![true; n];
    for e in &p.geqs {
        for (k, c) in e.coeffs.iter().enumerate() {
            if c.is_positive() {
                lowers[k] += 1;
                unit_lower[k] &= c.is_one();
            } else if c.is_negative() {
                uppers[k] += 1;
                unit_upper[k] &= (-c).is_one();
            }
        }
    }
    let occurring: Vec<usize> = (0..n).filter(|&k| lowers[k] + uppers[k] > 0).collect();

    // an unknown bounded on one side only can absorb all its constraints
    if let Some(&k) = occurring.iter().find(|&&k| lowers[k] == 0 || uppers[k] == 0) {
        let (with, without): (Vec<Lin>, Vec<Lin>) =
            p.geqs.into_iter().partition(|e| !e.coeffs[k].is_zero());
        let mut values = solve(Problem {
            nvars: n,
            eqs: Vec::new(),
            geqs: without,
        })?;
        values[k] = pick_value(&with, k, &values);
        return Some(values);
    }

    let cost = |k: usize| lowers[k] * uppers[k];
    let exact = occurring
        .iter()
        .copied()
        .filter(|&k| unit_lower[k] || unit_upper[k])
        .min_by_key(|&k| (cost(k), k));
    let k = exact.unwrap_or_else(|| {
        occurring
            .iter()
            .copied()
            .min_by_key(|&k| (cost(k), k))
            .expect("nontrivial inequalities mention a variable")
    });

    let (with, without): (Vec<Lin>, Vec<Lin>) =
        p.geqs.iter().cloned().partition(|e| !e.coeffs[k].is_zero());
    let lows: Vec<&Lin> = with.iter().filter(|e| e.coeffs[k].is_positive()).collect();
    let ups: Vec<&Lin> = with.iter().filter(|e| e.coeffs[k].is_negative()).collect();

    let shadow = |dark: bool| -> Problem {
        let mut geqs = without.clone();
        for l in &lows {
            for u in &ups {
                let b = l.coeffs[k].clone();
                let a = -u.coeffs[k].clone();
                // a·(b·x + rL) + b·(−a·x + rU) ≥ 0
                let mut comb = Lin {
                    coeffs: l
                        .coeffs
                        .iter()
                        .zip(&u.coeffs)
                        .map(|(lc, uc)| &a * lc + &b * uc)
                        .collect(),
                    c: &a * &l.c + &b * &u.c,
                };
                if dark {
                    comb.c -= (&a - 1) * (&b - 1);
                }
                geqs.push(comb);
            }
        }
        Problem {
            nvars: n,
            eqs: Vec::new(),
            geqs,
        }
    };

    if exact.is_some() {
        let mut values = solve(shadow(false))?;
        values[k] = pick_value(&with, k, &values);
        return Some(values);
    }

    // no integer point when even the real shadow is empty
    solve(shadow(false))?;
    if let Some(mut values) = solve(shadow(true)) {
        values[k] = pick_value(&with, k, &values);
        return Some(values);
    }

    // gray shadow: some lower bound b·x ≥ −rL is met within a small window
    let a_max = ups
        .iter()
        .map(|u| -u.coeffs[k].clone())
        .max()
        .expect("upper bounds present");
    for l in &lows {
        let b = l.coeffs[k].clone();
        let limit = (&a_max * &b - &a_max - &b).div_floor(&a_max);
        let mut i = BigInt::zero();
        while i <= limit {
            // b·x + rL − i = 0
            let mut eq = (*l).clone();
            eq.c -= &i;
            let splinter = Problem {
                nvars: n,
                eqs: vec![eq],
                geqs: p.geqs.clone(),
            };
            if let Some(values) = solve(splinter) {
                return Some(values);
            }
            i += 1;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::var(n)
    }

    fn atoms(ts: &[Term]) -> Vec<LinearAtom> {
        ts.iter().map(|t| LinearAtom::from_term(t).unwrap()).collect()
    }

    fn model(pairs: &[(&str, i64)]) -> Model {
        pairs.iter().map(|(n, v)| (Name::from(*n), BigInt::from(*v))).collect()
    }

    #[test]
    fn figure_two_constraints() {
        let n = v("n");
        let x = v("x");
        let y = v("y");
        let a = atoms(&[
            Term::binop(">=", n.clone(), Term::int(1)),
            Term::binop(">", n.clone(), Term::int(0)),
            Term::binop("<=", Term::binop("-", n.clone(), Term::int(1)), Term::int(0)),
            Term::binop("=", n.clone(), y.clone()),
            Term::binop("=", x.clone(), Term::binop("+", n.clone(), y.clone())),
            Term::binop("<=", x, Term::binop("+", n.clone(), n)),
        ]);
        assert_eq!(
            lia_conjunction_sat(&a),
            LiaResult::Sat(model(&[("n", 1), ("x", 2), ("y", 1)]))
        );
    }

    #[test]
    fn trivial_cases() {
        assert_eq!(lia_conjunction_sat(&[]), LiaResult::Sat(Model::new()));
        let parity = atoms(&[Term::binop(
            "=",
            Term::binop("+", v("x"), v("x")),
            Term::int(1),
        )]);
        assert_eq!(lia_conjunction_sat(&parity), LiaResult::Unsat);
        let gap = atoms(&[
            Term::binop(">=", v("x"), Term::int(5)),
            Term::binop("<=", v("x"), Term::int(4)),
        ]);
        assert_eq!(lia_conjunction_sat(&gap), LiaResult::Unsat);
    }

    #[test]
    fn ground_atoms() {
        let a = atoms(&[Term::binop(">=", Term::int(5), Term::int(5))]);
        assert_eq!(lia_conjunction_sat(&a), LiaResult::Sat(Model::new()));
        let b = atoms(&[Term::binop("!=", Term::int(5), Term::int(5))]);
        assert_eq!(lia_conjunction_sat(&b), LiaResult::Unsat);
    }

    #[test]
    fn disequality_split() {
        // 0 ≤ x ≤ 1, x ≠ 0 → x = 1
        let a = atoms(&[
            Term::binop(">=", v("x"), Term::int(0)),
            Term::binop("<=", v("x"), Term::int(1)),
            Term::binop("!=", v("x"), Term::int(0)),
        ]);
        assert_eq!(lia_conjunction_sat(&a), LiaResult::Sat(model(&[("x", 1)])));
    }

    #[test]
    fn smallest_magnitude_witness() {
        let a = atoms(&[Term::binop("<=", v("x"), Term::int(-3))]);
        assert_eq!(lia_conjunction_sat(&a), LiaResult::Sat(model(&[("x", -3)])));
        let b = atoms(&[Term::binop("!=", v("x"), Term::int(0))]);
        assert_eq!(lia_conjunction_sat(&b), LiaResult::Sat(model(&[("x", -1)])));
    }

    #[test]
    fn needs_gray_shadow() {
        // 27 ≤ 11x + 13y ≤ 45, −10 ≤ 7x − 9y ≤ 4 has no integer point even
        // though the real shadow is nonempty
        let lhs = Term::binop(
            "+",
            Term::binop("+", mul(11, "x"), Term::int(0)),
            mul(13, "y"),
        );
        let rhs = Term::binop("-", mul(7, "x"), mul(9, "y"));
        let a = atoms(&[
            Term::binop(">=", lhs.clone(), Term::int(27)),
            Term::binop("<=", lhs, Term::int(45)),
            Term::binop(">=", rhs.clone(), Term::int(-10)),
            Term::binop("<=", rhs, Term::int(4)),
        ]);
        assert_eq!(lia_conjunction_sat(&a), LiaResult::Unsat);
    }

    #[test]
    fn equalities_without_unit_coefficients() {
        // 3x + 5y = 7 has integer solutions; 6x + 9y = 4 does not
        let a = atoms(&[Term::binop(
            "=",
            Term::binop("+", mul(3, "x"), mul(5, "y")),
            Term::int(7),
        )]);
        match lia_conjunction_sat(&a) {
            LiaResult::Sat(m) => assert!(a[0].eval(&m).unwrap()),
            LiaResult::Unsat => panic!("expected sat"),
        }
        let b = atoms(&[Term::binop(
            "=",
            Term::binop("+", mul(6, "x"), mul(9, "y")),
            Term::int(4),
        )]);
        assert_eq!(lia_conjunction_sat(&b), LiaResult::Unsat);
    }

    fn mul(k: usize, name: &str) -> Term {
        (1..k).fold(v(name), |acc, _| Term::binop("+", acc, v(name)))
    }

    #[test]
    fn mod_hat_range() {
        let m = BigInt::from(5);
        for a in -12..12 {
            let r = mod_hat(&BigInt::from(a), &m);
            assert!(r > BigInt::from(-3) && r <= BigInt::from(2));
            assert!(((BigInt::from(a) - &r) % &m).is_zero());
        }
    }

    #[test]
    fn normalized_form() {
        let a = LinearAtom::from_term(&Term::binop(
            "<=",
            Term::binop("+", v("x"), v("x")),
            Term::int(4),
        ))
        .unwrap();
        let (e, rel) = a.normalized();
        assert_eq!(rel, Rel::Le);
        assert_eq!(e.to_string(), "x - 2");
    }
}
