//! Higher-order constrained Horn clauses modulo linear integer arithmetic:
//! typing, a resolution-based refutation engine, canonical models over
//! finite frames, λ-lifting, a first-order translation and decision
//! procedures for two decidable fragments.

pub mod clause;
pub mod engine;
pub mod fol;
pub mod fragments;
pub mod frontend;
pub mod lia;
pub mod lift;
pub mod model;
pub mod parse;
pub mod problem;
pub mod signature;
pub mod structure;
pub mod term;
pub mod types;

pub use parse::parse_problem;
pub use problem::{Problem, TheoryDecl};
pub use clause::{Clause, DefiniteClause, GoalClause, Program};
pub use signature::{infer_type, Signature, TypeEnv};
pub use term::Term;
pub use types::{Name, Type};
