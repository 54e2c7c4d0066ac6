//! Explicit finite background structures, theory handles and the
//! family-wide constraint refutation check.

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::clause::{is_background_atom, GoalClause};
use crate::lia::{self, LiaError, Model};
use crate::signature::Signature;
use crate::term::{Term, TermKind};
use crate::types::{Name, Type};

/// Element indices into a carrier, keyed by variable name.
pub type Valuation = BTreeMap<Name, u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table<T> {
    pub arity: usize,
    /// Row-major over argument tuples, first argument most significant.
    pub values: Vec<T>,
}

impl<T: Clone> Table<T> {
    pub fn get(&self, args: &[u32], size: usize) -> &T {
        let mut idx = 0usize;
        for a in args {
            idx = idx * size + *a as usize;
        }
        &self.values[idx]
    }
}

/// A single-sorted finite structure with function and relation tables.
/// Constants are nullary functions. `=` and `!=` denote identity unless
/// given explicit tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteStructure {
    pub sort: Name,
    pub carrier: Vec<Name>,
    pub functions: IndexMap<Name, Table<u32>>,
    pub relations: IndexMap<Name, Table<bool>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("no value for variable `{0}`")]
    UnboundValuation(Name),
    #[error("symbol `{0}` is not interpreted by the structure")]
    Uninterpreted(String),
    #[error("table for `{name}` has {found} entries, expected {expected}")]
    BadTable {
        name: Name,
        expected: usize,
        found: usize,
    },
    #[error("table for `{name}` maps to element {value}, outside the carrier")]
    OutOfCarrier { name: Name, value: u32 },
    #[error("`{0}` is not a background atom")]
    PreconditionViolated(String),
    #[error(transparent)]
    Lia(#[from] LiaError),
}

impl FiniteStructure {
    pub fn new(sort: impl Into<Name>, carrier: Vec<Name>) -> FiniteStructure {
        FiniteStructure {
            sort: sort.into(),
            carrier,
            functions: IndexMap::new(),
            relations: IndexMap::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.carrier.len()
    }

    pub fn element(&self, name: &str) -> Option<u32> {
        self.carrier.iter().position(|e| &**e == name).map(|i| i as u32)
    }

    fn rows(&self, arity: usize) -> usize {
        self.size().pow(arity as u32)
    }

    pub fn add_function(
        &mut self,
        name: impl Into<Name>,
        arity: usize,
        values: Vec<u32>,
    ) -> Result<(), StructureError> {
        let name = name.into();
        let expected = self.rows(arity);
        if values.len() != expected {
            return Err(StructureError::BadTable {
                name,
                expected,
                found: values.len(),
            });
        }
        if let Some(&bad) = values.iter().find(|v| **v as usize >= self.size()) {
            return Err(StructureError::OutOfCarrier { name, value: bad });
        }
        self.functions.insert(name, Table { arity, values });
        Ok(())
    }

    pub fn add_relation(
        &mut self,
        name: impl Into<Name>,
        arity: usize,
        values: Vec<bool>,
    ) -> Result<(), StructureError> {
        let name = name.into();
        let expected = self.rows(arity);
        if values.len() != expected {
            return Err(StructureError::BadTable {
                name,
                expected,
                found: values.len(),
            });
        }
        self.relations.insert(name, Table { arity, values });
        Ok(())
    }

    /// The first-order types of the interpreted symbols (including the
    /// builtin identity).
    pub fn symbol_types(&self) -> Vec<(Name, Type)> {
        let iota = Type::Base(self.sort.clone());
        let mut out: Vec<(Name, Type)> = Vec::new();
        for (n, t) in &self.functions {
            let ty = Type::curried(std::iter::repeat_n(iota.clone(), t.arity), iota.clone());
            out.push((n.clone(), ty));
        }
        for (n, t) in &self.relations {
            out.push((n.clone(), Type::predicate(&iota, t.arity)));
        }
        out
    }

    pub fn eval_individual(&self, t: &Term, val: &Valuation) -> Result<u32, StructureError> {
        match t.kind() {
            TermKind::Var(x) => val
                .get(x)
                .copied()
                .ok_or_else(|| StructureError::UnboundValuation(x.clone())),
            _ => {
                let (head, args) = t.spine();
                let f = head
                    .as_sym()
                    .ok_or_else(|| StructureError::Uninterpreted(t.sexpr()))?;
                let table = self
                    .functions
                    .get(f)
                    .filter(|tb| tb.arity == args.len())
                    .ok_or_else(|| StructureError::Uninterpreted(f.to_string()))?;
                let vals = args
                    .iter()
                    .map(|a| self.eval_individual(a, val))
                    .collect::<Result<Vec<u32>, _>>()?;
                Ok(*table.get(&vals, self.size()))
            }
        }
    }

    /// Applies relation `rel` to elements.
    pub fn holds(&self, rel: &str, args: &[u32]) -> Result<bool, StructureError> {
        if let Some(table) = self.relations.get(rel).filter(|t| t.arity == args.len()) {
            return Ok(*table.get(args, self.size()));
        }
        match (rel, args) {
            ("=", [a, b]) => Ok(a == b),
            ("!=", [a, b]) => Ok(a != b),
            _ => Err(StructureError::Uninterpreted(rel.to_string())),
        }
    }

    /// Table-driven truth value of a background atom.
    pub fn eval_background(&self, atom: &Term, val: &Valuation) -> Result<bool, StructureError> {
        let (head, args) = atom.spine();
        let rel = head
            .as_sym()
            .ok_or_else(|| StructureError::PreconditionViolated(atom.sexpr()))?;
        let vals = args
            .iter()
            .map(|a| self.eval_individual(a, val))
            .collect::<Result<Vec<u32>, _>>()?;
        self.holds(rel, &vals)
    }

    /// The first valuation (lexicographic over the variables sorted by name)
    /// satisfying every atom, if any. Variables that share no atom are
    /// solved independently; each atom is checked as soon as its variables
    /// are bound.
    pub fn satisfying_valuation(&self, atoms: &[Term]) -> Result<Option<Valuation>, StructureError> {
        let mut vars: Vec<Name> = Vec::new();
        for a in atoms {
            for v in a.free_vars() {
                if !vars.contains(v) {
                    vars.push(v.clone());
                }
            }
        }
        vars.sort();
        let n = self.size() as u32;
        if n == 0 && !vars.is_empty() {
            return Ok(None);
        }
        let empty = Valuation::new();
        for a in atoms.iter().filter(|a| a.free_vars().is_empty()) {
            if !self.eval_background(a, &empty)? {
                return Ok(None);
            }
        }
        let mut result = Valuation::new();
        for component in components(&vars, atoms) {
            let local: Vec<&Term> = atoms
                .iter()
                .filter(|a| a.free_vars().iter().any(|v| component.contains(v)))
                .collect();
            // atoms become checkable once their last variable is bound
            let mut ready: Vec<Vec<&Term>> = vec![Vec::new(); component.len()];
            for a in local {
                let last = a
                    .free_vars()
                    .iter()
                    .filter_map(|v| component.iter().position(|c| c == v))
                    .max()
                    .expect("atom mentions the component");
                ready[last].push(a);
            }
            let mut val = Valuation::new();
            if !self.search(&component, &ready, 0, &mut val)? {
                return Ok(None);
            }
            result.extend(val);
        }
        Ok(Some(result))
    }

    fn search(
        &self,
        vars: &[Name],
        ready: &[Vec<&Term>],
        depth: usize,
        val: &mut Valuation,
    ) -> Result<bool, StructureError> {
        if depth == vars.len() {
            return Ok(true);
        }
        for e in 0..self.size() as u32 {
            val.insert(vars[depth].clone(), e);
            let mut ok = true;
            for a in &ready[depth] {
                if !self.eval_background(a, val)? {
                    ok = false;
                    break;
                }
            }
            if ok && self.search(vars, ready, depth + 1, val)? {
                return Ok(true);
            }
        }
        val.remove(&vars[depth]);
        Ok(false)
    }
}

impl fmt::Display for FiniteStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.carrier.iter().map(|e| &**e).collect();
        write!(f, "(structure (sort {} ({}))", self.sort, names.join(" "))?;
        let n = self.size();
        for (name, t) in &self.functions {
            write!(f, " (fun {name}")?;
            for (row, v) in t.values.iter().enumerate() {
                let args = decode(row, t.arity, n);
                let args: Vec<&str> = args.iter().map(|a| &*self.carrier[*a as usize]).collect();
                write!(f, " (({}) -> {})", args.join(" "), self.carrier[*v as usize])?;
            }
            write!(f, ")")?;
        }
        for (name, t) in &self.relations {
            write!(f, " (rel {name}")?;
            for (row, v) in t.values.iter().enumerate() {
                let args = decode(row, t.arity, n);
                let args: Vec<&str> = args.iter().map(|a| &*self.carrier[*a as usize]).collect();
                write!(f, " (({}) -> {})", args.join(" "), u8::from(*v))?;
            }
            write!(f, ")")?;
        }
        write!(f, ")")
    }
}

/// Groups `vars` (kept in order) into classes connected by shared atoms.
fn components(vars: &[Name], atoms: &[Term]) -> Vec<Vec<Name>> {
    let mut parent: Vec<usize> = (0..vars.len()).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for a in atoms {
        let idx: Vec<usize> = a
            .free_vars()
            .iter()
            .filter_map(|v| vars.iter().position(|x| x == v))
            .collect();
        for w in idx.windows(2) {
            let (r0, r1) = (root(&mut parent, w[0]), root(&mut parent, w[1]));
            parent[r1] = r0;
        }
    }
    let mut groups: IndexMap<usize, Vec<Name>> = IndexMap::new();
    for (i, v) in vars.iter().enumerate() {
        let r = root(&mut parent, i);
        groups.entry(r).or_default().push(v.clone());
    }
    groups.into_values().collect()
}

/// Argument tuple of a table row.
pub fn decode(mut row: usize, arity: usize, size: usize) -> Vec<u32> {
    let mut out = vec![0u32; arity];
    for slot in out.iter_mut().rev() {
        *slot = (row % size.max(1)) as u32;
        row /= size.max(1);
    }
    out
}

/// The background theory the engine works modulo.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TheoryHandle {
    LiaStandard,
    /// A nonempty (hence compact) finite family.
    Finite(Vec<FiniteStructure>),
}

/// Why a set of background goals is unsatisfiable in the theory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Evidence {
    /// A single goal whose atoms hold under the model.
    Lia { goal: usize, model: Model },
    /// For each structure (in order), a goal and a valuation satisfying it.
    Finite(Vec<(usize, usize, Valuation)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyResult {
    Refuted(Evidence),
    NotRefuted,
}

/// Decides whether the background goal clauses `goals` are jointly
/// unsatisfiable in the theory: over the standard LIA model some goal's
/// atoms must be satisfiable; over a finite family every structure must
/// satisfy the atoms of some goal under some valuation.
pub fn family_refutes(
    sig: &Signature,
    theory: &TheoryHandle,
    goals: &[&GoalClause],
) -> Result<FamilyResult, StructureError> {
    for g in goals {
        if let Some(a) = g.atoms.iter().find(|a| !is_background_atom(sig, a)) {
            return Err(StructureError::PreconditionViolated(a.sexpr()));
        }
    }
    match theory {
        TheoryHandle::LiaStandard => {
            for (i, g) in goals.iter().enumerate() {
                if let lia::LiaResult::Sat(model) = lia::terms_sat(&g.atoms)? {
                    return Ok(FamilyResult::Refuted(Evidence::Lia { goal: i, model }));
                }
            }
            Ok(FamilyResult::NotRefuted)
        }
        TheoryHandle::Finite(structures) => {
            let mut evidence = Vec::new();
            for (si, s) in structures.iter().enumerate() {
                let mut found = None;
                for (gi, g) in goals.iter().enumerate() {
                    if let Some(val) = s.satisfying_valuation(&g.atoms)? {
                        found = Some((si, gi, val));
                        break;
                    }
                }
                match found {
                    Some(e) => evidence.push(e),
                    None => return Ok(FamilyResult::NotRefuted),
                }
            }
            Ok(FamilyResult::Refuted(Evidence::Finite(evidence)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::TypeEnv;

    fn two() -> FiniteStructure {
        let mut s = FiniteStructure::new("I", vec!["e0".into(), "e1".into()]);
        s.add_relation("<=", 2, vec![true, true, false, true]).unwrap();
        s.add_function("zero", 0, vec![0]).unwrap();
        s.add_function("one", 0, vec![1]).unwrap();
        s
    }

    fn le(a: Term, b: Term) -> Term {
        Term::binop("<=", a, b)
    }

    #[test]
    fn evaluation() {
        let s = two();
        let empty = Valuation::new();
        assert!(s.eval_background(&le(Term::sym("zero"), Term::sym("one")), &empty).unwrap());
        let val: Valuation = [(Name::from("x"), 1)].into_iter().collect();
        assert!(s.eval_background(&le(Term::var("x"), Term::var("x")), &val).unwrap());
        let val0: Valuation = [(Name::from("x"), 0)].into_iter().collect();
        assert!(!s
            .eval_background(&Term::binop("!=", Term::var("x"), Term::var("x")), &val0)
            .unwrap());
        assert_eq!(
            s.eval_background(&le(Term::var("y"), Term::var("x")), &val0),
            Err(StructureError::UnboundValuation("y".into()))
        );
    }

    fn sig() -> Signature {
        let mut sig = Signature::finite("I");
        for (n, t) in two().symbol_types() {
            sig.set_background(n, t).unwrap();
        }
        sig
    }

    fn env() -> TypeEnv {
        [(Name::from("x"), Type::base("I"))].into_iter().collect()
    }

    #[test]
    fn family_refutation() {
        let sig = sig();
        let empty: Vec<&GoalClause> = Vec::new();
        assert_eq!(
            family_refutes(&sig, &TheoryHandle::Finite(vec![two()]), &empty).unwrap(),
            FamilyResult::NotRefuted
        );

        // structure a has p = {e0}, structure b has p = {e1}; goal ¬p(zero)
        // is violated only in a, goal ¬p(one) only in b
        let mut a = two();
        a.add_relation("p", 1, vec![true, false]).unwrap();
        let mut b = two();
        b.add_relation("p", 1, vec![false, true]).unwrap();
        let mut sig = sig;
        sig.set_background("p".into(), Type::predicate(&Type::base("I"), 1)).unwrap();
        let g0 = GoalClause::new(vec![Term::app(Term::sym("p"), Term::sym("zero"))], &env());
        let g1 = GoalClause::new(vec![Term::app(Term::sym("p"), Term::sym("one"))], &env());
        let fam = TheoryHandle::Finite(vec![a.clone(), b.clone()]);
        match family_refutes(&sig, &fam, &[&g0, &g1]).unwrap() {
            FamilyResult::Refuted(Evidence::Finite(ev)) => {
                assert_eq!(ev.len(), 2);
                assert_eq!((ev[0].0, ev[0].1), (0, 0));
                assert_eq!((ev[1].0, ev[1].1), (1, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(
            family_refutes(&sig, &fam, &[&g0]).unwrap(),
            FamilyResult::NotRefuted
        );
        let fg = GoalClause::new(vec![Term::app(Term::sym("R"), Term::var("x"))], &env());
        assert!(family_refutes(&sig, &fam, &[&fg]).is_err());
    }

    #[test]
    fn lia_family() {
        let sig = Signature::lia();
        let e: TypeEnv = [(Name::from("x"), Type::base("Int"))].into_iter().collect();
        let g = GoalClause::new(vec![Term::binop(">=", Term::var("x"), Term::int(5))], &e);
        assert!(matches!(
            family_refutes(&sig, &TheoryHandle::LiaStandard, &[&g]).unwrap(),
            FamilyResult::Refuted(Evidence::Lia { goal: 0, .. })
        ));
    }

    #[test]
    fn lexicographic_valuation_order() {
        let s = two();
        let atoms = vec![le(Term::var("y"), Term::var("x"))];
        let val = s.satisfying_valuation(&atoms).unwrap().unwrap();
        assert_eq!(val.get("x"), Some(&0));
        assert_eq!(val.get("y"), Some(&0));
        let strict = vec![Term::binop("!=", Term::var("x"), Term::var("y"))];
        let val = s.satisfying_valuation(&strict).unwrap().unwrap();
        assert_eq!((val["x"], val["y"]), (0, 1));
    }
}
