//! Simple types of the relational higher-order language.
//!
//! Types are generated by a set of base sorts (in practice a single sort of
//! individuals), the Boolean type `o` and arrows. Not every type is usable
//! everywhere: variables range over *argument* types, foreground symbols
//! carry *relational* types and background symbols are *first-order*.

use std::fmt;
use std::sync::Arc;

pub type Name = Arc<str>;

/// A simple type `ι | o | τ → σ`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Base(Name),
    Bool,
    Arrow(Arc<Type>, Arc<Type>),
}

/// Coarse classification used by the typing and clause-shape checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TypeClass {
    /// A base sort `ι`.
    Individual,
    /// `o` or `τ → ρ` with `τ` an argument type and `ρ` relational.
    Relational,
    /// `ι^n → ι` with `n ≥ 1`.
    FirstOrderFunction,
    /// Anything else, e.g. `(ι → ι) → o` or `o → ι`.
    Other,
}

impl Type {
    pub fn base(name: &str) -> Type {
        Type::Base(Arc::from(name))
    }

    pub fn arrow(arg: Type, result: Type) -> Type {
        Type::Arrow(Arc::new(arg), Arc::new(result))
    }

    /// `τ₁ → ⋯ → τₙ → result`.
    pub fn curried<I>(args: I, result: Type) -> Type
    where
        I: IntoIterator<Item = Type>,
        I::IntoIter: DoubleEndedIterator,
    {
        args.into_iter()
            .rev()
            .fold(result, |acc, arg| Type::arrow(arg, acc))
    }

    /// `ι^n → o` over the given base sort.
    pub fn predicate(base: &Type, arity: usize) -> Type {
        Type::curried(std::iter::repeat_n(base.clone(), arity), Type::Bool)
    }

    pub fn classify(&self) -> TypeClass {
        if self.is_relational() {
            TypeClass::Relational
        } else {
            match self {
                Type::Base(_) => TypeClass::Individual,
                _ if self.is_first_order_function() => TypeClass::FirstOrderFunction,
                _ => TypeClass::Other,
            }
        }
    }

    pub fn is_base(&self) -> bool {
        matches!(self, Type::Base(_))
    }

    pub fn is_relational(&self) -> bool {
        match self {
            Type::Bool => true,
            Type::Arrow(arg, res) => arg.is_argument() && res.is_relational(),
            Type::Base(_) => false,
        }
    }

    pub fn is_argument(&self) -> bool {
        self.is_base() || self.is_relational()
    }

    /// `ι^n → ι` with `n ≥ 1`.
    pub fn is_first_order_function(&self) -> bool {
        let (args, res) = self.uncurry();
        !args.is_empty() && args.iter().all(|a| a.is_base()) && res.is_base()
    }

    /// `ι`, `ι^n → ι` or `ι^n → o` (`n ≥ 1` for the latter).
    pub fn is_first_order(&self) -> bool {
        let (args, res) = self.uncurry();
        if !args.iter().all(|a| a.is_base()) {
            return false;
        }
        match res {
            Type::Base(_) => true,
            Type::Bool => !args.is_empty(),
            Type::Arrow(..) => unreachable!("uncurry returns a non-arrow result"),
        }
    }

    /// Splits `τ₁ → ⋯ → τₙ → σ` (σ not an arrow) into its parts.
    pub fn uncurry(&self) -> (Vec<&Type>, &Type) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Type::Arrow(a, r) = cur {
            args.push(a.as_ref());
            cur = r.as_ref();
        }
        (args, cur)
    }

    pub fn arity(&self) -> usize {
        self.uncurry().0.len()
    }

    /// Order of the type: base sorts and `o` have order 0.
    pub fn order(&self) -> usize {
        match self {
            Type::Base(_) | Type::Bool => 0,
            Type::Arrow(a, r) => (a.order() + 1).max(r.order()),
        }
    }

    /// Renders the type in arrow notation, abbreviating runs of the base sort
    /// (`ι³→o`).
    pub fn math(&self) -> String {
        let (args, res) = self.uncurry();
        let mut out = String::new();
        let mut i = 0;
        while i < args.len() {
            let a = args[i];
            let mut run = 1;
            if a.is_base() {
                while i + run < args.len() && args[i + run] == a {
                    run += 1;
                }
            }
            let piece = match a {
                Type::Arrow(..) => format!("({})", a.math()),
                _ => a.math(),
            };
            out.push_str(&piece);
            if run > 1 {
                out.push_str(&superscript(run));
            }
            out.push('→');
            i += run;
        }
        match res {
            Type::Base(n) => out.push_str(if &**n == "Int" { "ι" } else { n }),
            Type::Bool => out.push('o'),
            Type::Arrow(..) => unreachable!(),
        }
        out
    }
}

fn superscript(n: usize) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap() as usize])
        .collect()
}

/// Surface syntax: `Int`, `Bool`, `(-> T1 ... Tn R)`.
impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Base(n) => write!(f, "{n}"),
            Type::Bool => write!(f, "Bool"),
            Type::Arrow(..) => {
                let (args, res) = self.uncurry();
                write!(f, "(->")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, " {res})")
            }
        }
    }
}

impl fmt::Debug for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.math())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iota() -> Type {
        Type::base("Int")
    }

    #[test]
    fn classification() {
        let add = Type::predicate(&iota(), 3);
        let iter = Type::curried(
            [add.clone(), iota(), iota(), iota()],
            Type::Bool,
        );
        assert_eq!(add.classify(), TypeClass::Relational);
        assert_eq!(iter.classify(), TypeClass::Relational);
        assert!(add.is_first_order());
        assert!(!iter.is_first_order());
        assert_eq!(iota().classify(), TypeClass::Individual);
        assert_eq!(Type::arrow(iota(), iota()).classify(), TypeClass::FirstOrderFunction);
        assert_eq!(
            Type::arrow(Type::arrow(iota(), iota()), Type::Bool).classify(),
            TypeClass::Other
        );
        assert_eq!(Type::arrow(Type::Bool, iota()).classify(), TypeClass::Other);
        assert_eq!(iter.order(), 2);
    }

    #[test]
    fn rendering() {
        let add = Type::predicate(&iota(), 3);
        assert_eq!(add.math(), "ι³→o");
        assert_eq!(add.to_string(), "(-> Int Int Int Bool)");
        let ho = Type::curried([Type::predicate(&iota(), 1)], Type::Bool);
        assert_eq!(ho.math(), "(ι→o)→o");
    }
}
