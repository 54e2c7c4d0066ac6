//! Finite frames, the immediate consequence operator and the canonical
//! structure of a program, plus exhaustive model checking.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::clause::{program_of, Clause, GoalClause, Program};
use crate::signature::Signature;
use crate::structure::{FiniteStructure, StructureError};
use crate::term::{Term, TermKind};
use crate::types::{Name, Type};

/// An element of some `⟦σ⟧`. Functions are full tables indexed by the
/// position of the argument in [`FiniteFrame::elements`] of the domain.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Elem(u32),
    Bool(bool),
    Fun(Arc<[Value]>),
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Pointwise order on relational values (`0 ≤ 1`).
    pub fn leq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => !a | b,
            (Value::Fun(a), Value::Fun(b)) => a.iter().zip(b.iter()).all(|(x, y)| x.leq(y)),
            (a, b) => a == b,
        }
    }

    /// Pointwise join of relational values.
    pub fn join(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => Value::Bool(a | b),
            (Value::Fun(a), Value::Fun(b)) => {
                Value::Fun(a.iter().zip(b.iter()).map(|(x, y)| x.join(y)).collect())
            }
            (a, _) => a.clone(),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Elem(e) => write!(f, "#{e}"),
            Value::Bool(b) => write!(f, "{}", u8::from(*b)),
            Value::Fun(t) => {
                f.write_str("[")?;
                for (i, v) in t.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{v:?}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("the frame for type {ty} needs {cells} table cells, over the budget of {budget}")]
    FrameBudgetExceeded {
        ty: String,
        cells: String,
        budget: usize,
    },
    #[error("no value for variable `{0}`")]
    Unbound(Name),
    #[error("symbol `{0}` has no interpretation")]
    Uninterpreted(Name),
    #[error("integer literal {0} has no interpretation in a finite structure")]
    Literal(String),
    #[error("ill-typed term `{0}`")]
    IllTyped(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

pub const DEFAULT_CELL_BUDGET: usize = 1_000_000;

/// The full (standard) frame over a finite structure: base types denote
/// the carrier, `o` denotes {0,1} and arrows denote all functions.
pub struct FiniteFrame {
    structure: FiniteStructure,
    sig: Signature,
    budget: usize,
    elements: RefCell<HashMap<Type, Arc<[Value]>>>,
    sym_values: RefCell<HashMap<Name, Value>>,
}

impl FiniteFrame {
    pub fn new(sig: &Signature, structure: FiniteStructure) -> FiniteFrame {
        FiniteFrame::with_budget(sig, structure, DEFAULT_CELL_BUDGET)
    }

    pub fn with_budget(sig: &Signature, structure: FiniteStructure, budget: usize) -> FiniteFrame {
        FiniteFrame {
            structure,
            sig: sig.clone(),
            budget,
            elements: RefCell::new(HashMap::new()),
            sym_values: RefCell::new(HashMap::new()),
        }
    }

    pub fn structure(&self) -> &FiniteStructure {
        &self.structure
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    /// `|⟦ty⟧|`, or `None` on overflow.
    pub fn size(&self, ty: &Type) -> Option<usize> {
        match ty {
            Type::Base(_) => Some(self.structure.size()),
            Type::Bool => Some(2),
            Type::Arrow(a, b) => {
                let exp = u32::try_from(self.size(a)?).ok()?;
                self.size(b)?.checked_pow(exp)
            }
        }
    }

    fn check_budget(&self, ty: &Type) -> Result<(), ModelError> {
        let over = || ModelError::FrameBudgetExceeded {
            ty: ty.to_string(),
            cells: "more than 2^64".into(),
            budget: self.budget,
        };
        let mut cells = self.size(ty).ok_or_else(over)?;
        if let Type::Arrow(a, _) = ty {
            cells = cells.checked_mul(self.size(a).ok_or_else(over)?).ok_or_else(over)?;
        }
        if cells > self.budget {
            return Err(ModelError::FrameBudgetExceeded {
                ty: ty.to_string(),
                cells: cells.to_string(),
                budget: self.budget,
            });
        }
        Ok(())
    }

    /// The elements of `⟦ty⟧` in canonical order: function tables are
    /// enumerated lexicographically, first entry most significant.
    pub fn elements(&self, ty: &Type) -> Result<Arc<[Value]>, ModelError> {
        if let Some(e) = self.elements.borrow().get(ty) {
            return Ok(e.clone());
        }
        self.check_budget(ty)?;
        let out: Arc<[Value]> = match ty {
            Type::Base(_) => (0..self.structure.size() as u32).map(Value::Elem).collect(),
            Type::Bool => vec![Value::Bool(false), Value::Bool(true)].into(),
            Type::Arrow(a, b) => {
                let n = self.size(a).expect("within budget");
                let cod = self.elements(b)?;
                let total = self.size(ty).expect("within budget");
                let mut out = Vec::with_capacity(total);
                let mut digits = vec![0usize; n];
                for _ in 0..total {
                    out.push(Value::Fun(digits.iter().map(|d| cod[*d].clone()).collect()));
                    for i in (0..n).rev() {
                        digits[i] += 1;
                        if digits[i] < cod.len() {
                            break;
                        }
                        digits[i] = 0;
                    }
                }
                out.into()
            }
        };
        self.elements.borrow_mut().insert(ty.clone(), out.clone());
        Ok(out)
    }

    /// Position of `v` in `elements(ty)`.
    pub fn index(&self, v: &Value, ty: &Type) -> Result<usize, ModelError> {
        match (v, ty) {
            (Value::Elem(e), Type::Base(_)) => Ok(*e as usize),
            (Value::Bool(b), Type::Bool) => Ok(usize::from(*b)),
            (Value::Fun(table), Type::Arrow(_, b)) => {
                let radix = self.size(b).unwrap_or(usize::MAX);
                let mut idx = 0usize;
                for entry in table.iter() {
                    idx = idx * radix + self.index(entry, b)?;
                }
                Ok(idx)
            }
            _ => Err(ModelError::IllTyped(format!("{v:?} : {ty}"))),
        }
    }

    /// The least element of a relational type (everything false).
    pub fn bottom(&self, ty: &Type) -> Result<Value, ModelError> {
        self.constant(ty, false)
    }

    /// The greatest element of a relational type.
    pub fn top(&self, ty: &Type) -> Result<Value, ModelError> {
        self.constant(ty, true)
    }

    fn constant(&self, ty: &Type, b: bool) -> Result<Value, ModelError> {
        match ty {
            Type::Bool => Ok(Value::Bool(b)),
            Type::Arrow(a, r) => {
                let n = self
                    .size(a)
                    .ok_or_else(|| ModelError::IllTyped(ty.to_string()))?;
                let inner = self.constant(r, b)?;
                Ok(Value::Fun(vec![inner; n].into()))
            }
            Type::Base(_) => Err(ModelError::IllTyped(ty.to_string())),
        }
    }

    /// Builds the table of a curried function of type `ty` from its
    /// uncurried behaviour on argument tuples.
    pub fn tabulate(
        &self,
        ty: &Type,
        f: &mut dyn FnMut(&[Value]) -> Result<Value, ModelError>,
    ) -> Result<Value, ModelError> {
        let mut args = Vec::new();
        self.tabulate_rec(ty, &mut args, f)
    }

    fn tabulate_rec(
        &self,
        ty: &Type,
        args: &mut Vec<Value>,
        f: &mut dyn FnMut(&[Value]) -> Result<Value, ModelError>,
    ) -> Result<Value, ModelError> {
        match ty {
            Type::Arrow(a, r) => {
                let dom = self.elements(a)?;
                let mut table = Vec::with_capacity(dom.len());
                for d in dom.iter() {
                    args.push(d.clone());
                    table.push(self.tabulate_rec(r, args, f)?);
                    args.pop();
                }
                Ok(Value::Fun(table.into()))
            }
            _ => f(args),
        }
    }

    /// Applies a function value to an argument of type `dom`.
    pub fn apply(&self, f: &Value, arg: &Value, dom: &Type) -> Result<Value, ModelError> {
        match f {
            Value::Fun(table) => {
                let i = self.index(arg, dom)?;
                table
                    .get(i)
                    .cloned()
                    .ok_or_else(|| ModelError::IllTyped(format!("{f:?} applied to {arg:?}")))
            }
            _ => Err(ModelError::IllTyped(format!("{f:?} is not a function"))),
        }
    }

    fn background_value(&self, name: &Name) -> Result<Value, ModelError> {
        if let Some(v) = self.sym_values.borrow().get(name) {
            return Ok(v.clone());
        }
        let ty = self
            .sig
            .lookup(name)
            .cloned()
            .ok_or_else(|| ModelError::Uninterpreted(name.clone()))?;
        let s = &self.structure;
        let value = if let Some(table) = s.functions.get(name) {
            if table.arity == 0 {
                Value::Elem(table.values[0])
            } else {
                self.tabulate(&ty, &mut |args| {
                    let es: Vec<u32> = args.iter().map(elem).collect::<Result<_, _>>()?;
                    Ok(Value::Elem(*table.get(&es, s.size())))
                })?
            }
        } else {
            self.tabulate(&ty, &mut |args| {
                let es: Vec<u32> = args.iter().map(elem).collect::<Result<_, _>>()?;
                Ok(Value::Bool(s.holds(name, &es)?))
            })?
        };
        self.sym_values.borrow_mut().insert(name.clone(), value.clone());
        Ok(value)
    }
}

fn elem(v: &Value) -> Result<u32, ModelError> {
    match v {
        Value::Elem(e) => Ok(*e),
        other => Err(ModelError::IllTyped(format!("{other:?} is not an individual"))),
    }
}

/// An interpretation of the foreground symbols over a frame; background
/// symbols are fixed by the frame's structure.
#[derive(Clone, PartialEq, Eq)]
pub struct Expansion {
    pub foreground: IndexMap<Name, Value>,
}

impl std::hash::Hash for Expansion {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        for (r, v) in &self.foreground {
            r.hash(state);
            v.hash(state);
        }
    }
}

impl Expansion {
    pub fn bottom(frame: &FiniteFrame) -> Result<Expansion, ModelError> {
        let mut foreground = IndexMap::new();
        for (r, ty) in frame.sig.foreground() {
            foreground.insert(r.clone(), frame.bottom(ty)?);
        }
        Ok(Expansion { foreground })
    }

    pub fn top(frame: &FiniteFrame) -> Result<Expansion, ModelError> {
        let mut foreground = IndexMap::new();
        for (r, ty) in frame.sig.foreground() {
            foreground.insert(r.clone(), frame.top(ty)?);
        }
        Ok(Expansion { foreground })
    }

    pub fn get(&self, r: &str) -> Option<&Value> {
        self.foreground.get(r)
    }

    pub fn leq(&self, other: &Expansion) -> bool {
        self.foreground
            .iter()
            .all(|(r, v)| other.foreground.get(r).is_some_and(|w| v.leq(w)))
    }

    pub fn join(&self, other: &Expansion) -> Expansion {
        Expansion {
            foreground: self
                .foreground
                .iter()
                .map(|(r, v)| (r.clone(), other.foreground.get(r).map_or(v.clone(), |w| v.join(w))))
                .collect(),
        }
    }

    /// One `R(args)` row per argument tuple on which `R` holds.
    pub fn dump(&self, frame: &FiniteFrame) -> String {
        let mut out = String::new();
        for (r, v) in &self.foreground {
            let ty = frame.sig.lookup(r).cloned().unwrap_or(Type::Bool);
            let mut rows = Vec::new();
            dump_rows(frame, &ty, v, &mut Vec::new(), &mut rows);
            for (args, _) in rows.iter().filter(|(_, b)| *b) {
                out.push_str(&format!("{r}({})\n", args.join(", ")));
            }
        }
        out
    }
}

impl fmt::Debug for Expansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.foreground.iter()).finish()
    }
}

fn dump_rows(
    frame: &FiniteFrame,
    ty: &Type,
    v: &Value,
    args: &mut Vec<String>,
    rows: &mut Vec<(Vec<String>, bool)>,
) {
    match (ty, v) {
        (Type::Arrow(a, r), Value::Fun(table)) => {
            let dom = frame.elements(a).map(|d| d.to_vec()).unwrap_or_default();
            for (d, entry) in dom.iter().zip(table.iter()) {
                args.push(render_value(frame, a, d));
                dump_rows(frame, r, entry, args, rows);
                args.pop();
            }
        }
        (_, Value::Bool(b)) => rows.push((args.clone(), *b)),
        _ => {}
    }
}

/// Renders an element: carrier names for individuals, `0`/`1` for truth
/// values and `[v1 v2 ...]` tables for functions.
pub fn render_value(frame: &FiniteFrame, ty: &Type, v: &Value) -> String {
    match (ty, v) {
        (_, Value::Elem(e)) => frame
            .structure
            .carrier
            .get(*e as usize)
            .map_or_else(|| format!("#{e}"), |n| n.to_string()),
        (_, Value::Bool(b)) => u8::from(*b).to_string(),
        (Type::Arrow(_, r), Value::Fun(t)) => {
            let parts: Vec<String> = t.iter().map(|x| render_value(frame, r, x)).collect();
            format!("[{}]", parts.join(" "))
        }
        (_, other) => format!("{other:?}"),
    }
}

pub type FrameValuation = BTreeMap<Name, Value>;

struct Evaluator<'a> {
    frame: &'a FiniteFrame,
    exp: &'a Expansion,
    val: &'a FrameValuation,
    /// Values and types of λ/∃-bound variables, innermost last.
    stack: Vec<(Value, Type)>,
    /// Types of free variables (for applying their values).
    types: &'a dyn Fn(&Name) -> Option<Type>,
}

impl Evaluator<'_> {
    fn type_of(&self, m: &Term) -> Result<Type, ModelError> {
        let ill = || ModelError::IllTyped(m.sexpr());
        match m.kind() {
            TermKind::Var(x) => (self.types)(x).ok_or_else(|| ModelError::Unbound(x.clone())),
            TermKind::Bound(i) => {
                let i = *i as usize;
                let k = self.stack.len().checked_sub(i + 1).ok_or_else(ill)?;
                Ok(self.stack[k].1.clone())
            }
            TermKind::Sym(s) => self
                .frame
                .sig
                .lookup(s)
                .cloned()
                .ok_or_else(|| ModelError::Uninterpreted(s.clone())),
            TermKind::Int(_) => Ok(self.frame.sig.individual().clone()),
            TermKind::Neg => Ok(Type::arrow(Type::Bool, Type::Bool)),
            TermKind::And | TermKind::Or => {
                Ok(Type::arrow(Type::Bool, Type::arrow(Type::Bool, Type::Bool)))
            }
            TermKind::Exists(t) => Ok(Type::arrow(Type::arrow(t.clone(), Type::Bool), Type::Bool)),
            TermKind::App(f, _) => match self.type_of(f)? {
                Type::Arrow(_, r) => Ok((*r).clone()),
                _ => Err(ill()),
            },
            TermKind::Lam(b, body) => {
                // the body type does not depend on the bound value
                let dummy = match &b.ty {
                    Type::Base(_) => Value::Elem(0),
                    _ => Value::Bool(false),
                };
                let mut inner = Evaluator {
                    frame: self.frame,
                    exp: self.exp,
                    val: self.val,
                    stack: self.stack.clone(),
                    types: self.types,
                };
                inner.stack.push((dummy, b.ty.clone()));
                Ok(Type::arrow(b.ty.clone(), inner.type_of(body)?))
            }
        }
    }

    fn truth(&mut self, m: &Term) -> Result<bool, ModelError> {
        self.eval(m)?
            .as_bool()
            .ok_or_else(|| ModelError::IllTyped(m.sexpr()))
    }

    fn eval(&mut self, m: &Term) -> Result<Value, ModelError> {
        match m.kind() {
            TermKind::Var(x) => self
                .val
                .get(x)
                .cloned()
                .ok_or_else(|| ModelError::Unbound(x.clone())),
            TermKind::Bound(i) => {
                let k = self
                    .stack
                    .len()
                    .checked_sub(*i as usize + 1)
                    .ok_or_else(|| ModelError::IllTyped(m.sexpr()))?;
                Ok(self.stack[k].0.clone())
            }
            TermKind::Sym(s) => match self.exp.foreground.get(s) {
                Some(v) => Ok(v.clone()),
                None => self.frame.background_value(s),
            },
            TermKind::Int(n) => Err(ModelError::Literal(n.to_string())),
            TermKind::Neg => Ok(Value::Fun(vec![Value::Bool(true), Value::Bool(false)].into())),
            TermKind::And | TermKind::Or => {
                let is_and = matches!(m.kind(), TermKind::And);
                let row = |a: bool| {
                    Value::Fun(
                        vec![
                            Value::Bool(if is_and { false } else { a }),
                            Value::Bool(if is_and { a } else { true }),
                        ]
                        .into(),
                    )
                };
                Ok(Value::Fun(vec![row(false), row(true)].into()))
            }
            TermKind::Exists(t) => {
                let pred_ty = Type::arrow(t.clone(), Type::Bool);
                let t = t.clone();
                self.frame.tabulate(
                    &Type::arrow(pred_ty.clone(), Type::Bool),
                    &mut |args| match &args[0] {
                        Value::Fun(table) => Ok(Value::Bool(
                            table.iter().any(|v| v.as_bool() == Some(true)),
                        )),
                        _ => Err(ModelError::IllTyped(format!("∃ over {t}"))),
                    },
                )
            }
            TermKind::Lam(b, body) => {
                let dom = self.frame.elements(&b.ty)?;
                let mut table = Vec::with_capacity(dom.len());
                for d in dom.iter() {
                    self.stack.push((d.clone(), b.ty.clone()));
                    let v = self.eval(body);
                    self.stack.pop();
                    table.push(v?);
                }
                Ok(Value::Fun(table.into()))
            }
            TermKind::App(..) => self.eval_app(m),
        }
    }

    fn eval_app(&mut self, m: &Term) -> Result<Value, ModelError> {
        let (head, args) = m.spine();
        match (head.kind(), args.as_slice()) {
            (TermKind::Neg, [a]) => return Ok(Value::Bool(!self.truth(a)?)),
            (TermKind::And, [a, b]) => return Ok(Value::Bool(self.truth(a)? && self.truth(b)?)),
            (TermKind::Or, [a, b]) => return Ok(Value::Bool(self.truth(a)? || self.truth(b)?)),
            (TermKind::Exists(ty), [pred]) => {
                if let TermKind::Lam(b, body) = pred.kind() {
                    for d in self.frame.elements(ty)?.iter() {
                        self.stack.push((d.clone(), b.ty.clone()));
                        let v = self.truth(body);
                        self.stack.pop();
                        if v? {
                            return Ok(Value::Bool(true));
                        }
                    }
                    return Ok(Value::Bool(false));
                }
            }
            (TermKind::Sym(s), _) if !self.exp.foreground.contains_key(s) => {
                let s_struct = &self.frame.structure;
                let arity = s_struct
                    .functions
                    .get(s)
                    .map(|t| t.arity)
                    .or_else(|| s_struct.relations.get(s).map(|t| t.arity))
                    .unwrap_or(2);
                if arity == args.len() {
                    let es = args
                        .iter()
                        .map(|a| self.eval(a).and_then(|v| elem(&v)))
                        .collect::<Result<Vec<u32>, _>>()?;
                    if let Some(t) = s_struct.functions.get(s) {
                        return Ok(Value::Elem(*t.get(&es, s_struct.size())));
                    }
                    return Ok(Value::Bool(s_struct.holds(s, &es)?));
                }
            }
            _ => {}
        }
        let TermKind::App(f, a) = m.kind() else {
            unreachable!()
        };
        let fv = self.eval(f)?;
        let dom = match self.type_of(f)? {
            Type::Arrow(d, _) => (*d).clone(),
            _ => return Err(ModelError::IllTyped(m.sexpr())),
        };
        let av = self.eval(a)?;
        self.frame.apply(&fv, &av, &dom)
    }
}

/// The denotation of `m` under `exp` and `val`. `types` gives the types of
/// the free variables of `m`.
pub fn eval_term(
    frame: &FiniteFrame,
    exp: &Expansion,
    m: &Term,
    val: &FrameValuation,
    types: &dyn Fn(&Name) -> Option<Type>,
) -> Result<Value, ModelError> {
    Evaluator {
        frame,
        exp,
        val,
        stack: Vec::new(),
        types,
    }
    .eval(m)
}

/// `T_Π(exp)`: every foreground `R` becomes `⟦λx̄_R. F_R⟧_exp`.
pub fn immediate_consequence(
    frame: &FiniteFrame,
    prog: &Program,
    exp: &Expansion,
) -> Result<Expansion, ModelError> {
    let empty = FrameValuation::new();
    let mut foreground = IndexMap::new();
    for (r, ty) in frame.sig.foreground() {
        let v = match prog.get(r) {
            Some(entry) => eval_term(frame, exp, &entry.as_lambda(), &empty, &|_| None)?,
            None => frame.bottom(ty)?,
        };
        foreground.insert(r.clone(), v);
    }
    Ok(Expansion { foreground })
}

/// `A_Π`, the join of the (transfinite) iteration of `T_Π` from the
/// all-false expansion. Stages are iterated until one recurs; the running
/// join of all stages then becomes the next limit stage. The result is the
/// first limit stage that recurs.
pub fn canonical_structure(frame: &FiniteFrame, prog: &Program) -> Result<Expansion, ModelError> {
    let mut cur = Expansion::bottom(frame)?;
    let mut running = cur.clone();
    let mut seen: HashSet<Expansion> = HashSet::from([cur.clone()]);
    let mut limits: HashSet<Expansion> = HashSet::new();
    loop {
        let next = immediate_consequence(frame, prog, &cur)?;
        if seen.contains(&next) {
            if !limits.insert(running.clone()) {
                return Ok(running);
            }
            seen.clear();
            seen.insert(running.clone());
            cur = running.clone();
            continue;
        }
        running = running.join(&next);
        seen.insert(next.clone());
        cur = next;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckResult {
    Sat,
    /// The first falsified clause (by index) and the lexicographically
    /// first falsifying valuation.
    Unsat {
        clause: usize,
        valuation: FrameValuation,
    },
}

/// Whether a clause is falsified under a valuation.
pub fn falsifies(
    frame: &FiniteFrame,
    exp: &Expansion,
    clause: &Clause,
    val: &FrameValuation,
) -> Result<bool, ModelError> {
    let env = clause.env();
    let types = |x: &Name| env.get(x).cloned();
    let mut ev = Evaluator {
        frame,
        exp,
        val,
        stack: Vec::new(),
        types: &types,
    };
    for a in clause.atoms() {
        if !ev.truth(a)? {
            return Ok(false);
        }
    }
    match clause {
        Clause::Goal(_) => Ok(true),
        Clause::Definite(d) => Ok(!ev.truth(&d.head())?),
    }
}

/// Exhaustively checks every clause under every valuation of its
/// variables (sorted by name, last variable varying fastest).
pub fn model_check(
    frame: &FiniteFrame,
    exp: &Expansion,
    clauses: &[Clause],
) -> Result<CheckResult, ModelError> {
    for (ci, c) in clauses.iter().enumerate() {
        let vars: Vec<(Name, Type)> = c.env().iter().map(|(n, t)| (n.clone(), t.clone())).collect();
        let domains = vars
            .iter()
            .map(|(_, t)| frame.elements(t))
            .collect::<Result<Vec<_>, _>>()?;
        if domains.iter().any(|d| d.is_empty()) {
            continue;
        }
        let mut digits = vec![0usize; vars.len()];
        'outer: loop {
            let val: FrameValuation = vars
                .iter()
                .zip(&digits)
                .zip(&domains)
                .map(|(((n, _), d), dom)| (n.clone(), dom[*d].clone()))
                .collect();
            if falsifies(frame, exp, c, &val)? {
                return Ok(CheckResult::Unsat {
                    clause: ci,
                    valuation: val,
                });
            }
            let mut i = digits.len();
            loop {
                if i == 0 {
                    break 'outer;
                }
                i -= 1;
                digits[i] += 1;
                if digits[i] < domains[i].len() {
                    break;
                }
                digits[i] = 0;
            }
        }
    }
    Ok(CheckResult::Sat)
}

/// Decides satisfiability of `clauses` over a single finite structure by
/// model checking the canonical structure of their program. Returns the
/// canonical structure when it is a model.
pub fn decide_structure(
    sig: &Signature,
    structure: &FiniteStructure,
    clauses: &[Clause],
    budget: usize,
) -> Result<Option<Expansion>, ModelError> {
    let frame = FiniteFrame::with_budget(sig, structure.clone(), budget);
    let definites: Vec<_> = clauses.iter().filter_map(Clause::as_definite).cloned().collect();
    let prog = program_of(sig, &definites);
    let canon = canonical_structure(&frame, &prog)?;
    match model_check(&frame, &canon, clauses)? {
        CheckResult::Sat => Ok(Some(canon)),
        CheckResult::Unsat { .. } => Ok(None),
    }
}

/// Truth of a single goal clause's body under a valuation (all atoms hold).
pub fn goal_holds(
    frame: &FiniteFrame,
    exp: &Expansion,
    goal: &GoalClause,
    val: &FrameValuation,
) -> Result<bool, ModelError> {
    falsifies(frame, exp, &Clause::Goal(goal.clone()), val)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clause::ProgramEntry;
    use crate::signature::TypeEnv;

    fn two_le() -> (Signature, FiniteStructure) {
        let mut s = FiniteStructure::new("I", vec!["e0".into(), "e1".into()]);
        s.add_relation("<=", 2, vec![true, true, false, true]).unwrap();
        s.add_function("zero", 0, vec![0]).unwrap();
        let mut sig = Signature::finite("I");
        for (n, t) in s.symbol_types() {
            sig.set_background(n, t).unwrap();
        }
        (sig, s)
    }

    fn iota() -> Type {
        Type::base("I")
    }

    #[test]
    fn evaluation_examples() {
        let (sig, s) = two_le();
        let frame = FiniteFrame::new(&sig, s);
        let exp = Expansion::bottom(&frame).unwrap();
        let x1: FrameValuation = [(Name::from("x"), Value::Elem(1))].into_iter().collect();
        let types = |_: &Name| Some(iota());
        let ex = Term::exists("y", iota(), &Term::binop("=", Term::var("y"), Term::var("x")));
        assert_eq!(eval_term(&frame, &exp, &ex, &x1, &types).unwrap(), Value::Bool(true));

        let x0: FrameValuation = [(Name::from("x"), Value::Elem(0))].into_iter().collect();
        let lam = Term::lam("y", iota(), &Term::binop("<=", Term::var("x"), Term::var("y")));
        assert_eq!(
            eval_term(&frame, &exp, &lam, &x0, &types).unwrap(),
            Value::Fun(vec![Value::Bool(true), Value::Bool(true)].into())
        );
        let neg = Term::neg(Term::binop("<=", Term::var("x"), Term::sym("zero")));
        assert_eq!(eval_term(&frame, &exp, &neg, &x1, &types).unwrap(), Value::Bool(true));
    }

    fn unary_program(sig: &mut Signature, body: Term) -> Program {
        sig.add_foreground("R".into(), Type::predicate(&iota(), 1)).unwrap();
        let mut entries = IndexMap::new();
        entries.insert(
            Name::from("R"),
            ProgramEntry {
                params: vec![("x".into(), iota())],
                body,
            },
        );
        Program { entries }
    }

    fn table(bits: &[bool]) -> Value {
        Value::Fun(bits.iter().map(|b| Value::Bool(*b)).collect())
    }

    #[test]
    fn consequence_and_canonical() {
        let (mut sig, s) = two_le();
        let rx = Term::app(Term::sym("R"), Term::var("x"));
        let body = Term::or(Term::binop("=", Term::var("x"), Term::sym("zero")), rx.clone());
        let prog = unary_program(&mut sig, body);
        let frame = FiniteFrame::new(&sig, s.clone());
        let bot = Expansion::bottom(&frame).unwrap();
        let once = immediate_consequence(&frame, &prog, &bot).unwrap();
        assert_eq!(once.get("R"), Some(&table(&[true, false])));
        let canon = canonical_structure(&frame, &prog).unwrap();
        assert_eq!(canon.get("R"), Some(&table(&[true, false])));
        assert_eq!(canon.dump(&frame), "R(e0)\n");

        let (mut sig, s) = two_le();
        let prog = unary_program(&mut sig, rx);
        let frame = FiniteFrame::new(&sig, s);
        let canon = canonical_structure(&frame, &prog).unwrap();
        assert_eq!(canon.get("R"), Some(&table(&[false, false])));
    }

    #[test]
    fn model_check_examples() {
        let (sig, s) = two_le();
        let frame = FiniteFrame::new(&sig, s);
        let exp = Expansion::bottom(&frame).unwrap();
        let goal = Clause::Goal(GoalClause::new(
            vec![Term::binop("=", Term::sym("zero"), Term::sym("zero"))],
            &TypeEnv::new(),
        ));
        assert_eq!(
            model_check(&frame, &exp, &[goal]).unwrap(),
            CheckResult::Unsat {
                clause: 0,
                valuation: FrameValuation::new()
            }
        );
    }

    #[test]
    fn element_enumeration_and_budget() {
        let (sig, s) = two_le();
        let frame = FiniteFrame::with_budget(&sig, s, 1000);
        let pred = Type::predicate(&iota(), 3);
        let els = frame.elements(&pred).unwrap();
        assert_eq!(els.len(), 256);
        for (i, e) in els.iter().enumerate() {
            assert_eq!(frame.index(e, &pred).unwrap(), i);
        }
        let big = Type::arrow(pred, Type::Bool);
        assert!(matches!(
            frame.elements(&big),
            Err(ModelError::FrameBudgetExceeded { .. })
        ));
    }
}
