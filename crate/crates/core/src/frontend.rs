//! Subcommand dispatch shared by the command-line tool and the tests.

use std::fmt::Write as _;

use crate::clause::{program_of, Clause};
use crate::engine::{replay, saturate, Budget, EngineOptions, Verdict};
use crate::fol::translate;
use crate::fragments::{self, sla_family, Decision};
use crate::lift::lift;
use crate::model::{canonical_structure, model_check, CheckResult, FiniteFrame, DEFAULT_CELL_BUDGET};
use crate::parse::parse_problem;
use crate::problem::{Problem, TheoryDecl};
use crate::signature::Signature;
use crate::structure::TheoryHandle;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Native,
    Smtlib,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Saturation with the resolution engine.
    Check { budget: Budget, trace: bool },
    /// Decision procedure selected by the theory header.
    Decide { cell_budget: usize },
    Translate { format: Format },
    Lift,
    Typecheck,
    /// Canonical structure over each structure of a finite theory.
    Model { cell_budget: usize },
}

impl Command {
    pub fn check() -> Command {
        Command::Check {
            budget: Budget::default(),
            trace: false,
        }
    }

    pub fn decide() -> Command {
        Command::Decide {
            cell_budget: DEFAULT_CELL_BUDGET,
        }
    }
}

pub const EXIT_SAT: i32 = 0;
pub const EXIT_UNSAT: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutput {
    pub stdout: String,
    pub stderr: String,
    pub exit: i32,
}

impl RunOutput {
    fn ok(stdout: String, exit: i32) -> RunOutput {
        RunOutput {
            stdout,
            stderr: String::new(),
            exit,
        }
    }

    fn error(msg: impl Into<String>) -> RunOutput {
        let mut stderr = msg.into();
        if !stderr.ends_with('\n') {
            stderr.push('\n');
        }
        RunOutput {
            stdout: String::new(),
            stderr,
            exit: EXIT_ERROR,
        }
    }
}

/// Parses `text` and runs `cmd` on it.
pub fn run(cmd: Command, text: &str) -> RunOutput {
    let problem = match parse_problem(text) {
        Ok(p) => p,
        Err(e) => return RunOutput::error(format!("parse error: {e}")),
    };
    let diags = problem.validate();
    if !diags.is_empty() {
        let msg: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        return RunOutput::error(msg.join("\n"));
    }
    match cmd {
        Command::Check { budget, trace } => check(&problem, budget, trace),
        Command::Decide { cell_budget } => decide(&problem, cell_budget),
        Command::Translate { format } => {
            match translate(&problem.sig, &problem.clauses) {
                Ok(fo) => RunOutput::ok(
                    match format {
                        Format::Native => fo.native(),
                        Format::Smtlib => fo.smtlib(),
                    },
                    EXIT_SAT,
                ),
                Err(e) => RunOutput::error(format!("translate: {e}")),
            }
        }
        Command::Lift => match lift(&problem.sig, &problem.clauses) {
            Ok(l) => {
                let lifted = Problem::new(l.sig, problem.theory.clone(), l.clauses);
                RunOutput::ok(lifted.to_sexpr(), EXIT_SAT)
            }
            Err(e) => RunOutput::error(format!("lift: {e}")),
        },
        Command::Typecheck => typecheck(&problem),
        Command::Model { cell_budget } => model(&problem, cell_budget),
    }
}

fn typecheck(p: &Problem) -> RunOutput {
    let mut out = String::from("ok\n");
    for (r, t) in p.sig.foreground() {
        let _ = writeln!(out, "{r} : {} (order {})", t.math(), t.order());
    }
    let goals = p.goals().count();
    let _ = writeln!(
        out,
        "{} definite clauses, {goals} goal clauses",
        p.clauses.len() - goals
    );
    RunOutput::ok(out, EXIT_SAT)
}

/// The signature, theory and clauses the engine runs on. Arithmetic with
/// background constants is flattened to its finite family first.
fn engine_input(p: &Problem) -> Result<(Signature, TheoryHandle, Vec<Clause>), String> {
    match &p.theory {
        TheoryDecl::Lia if !p.sig.constants().is_empty() => {
            let (flat, structures) = sla_family(&p.sig, &p.clauses).map_err(|e| {
                format!("background constants need the simple linear arithmetic fragment: {e}")
            })?;
            let family = structures.into_iter().map(|s| s.structure).collect();
            Ok((flat.sig, TheoryHandle::Finite(family), flat.clauses))
        }
        _ => Ok((p.sig.clone(), p.theory_handle(), p.clauses.clone())),
    }
}

fn check(p: &Problem, budget: Budget, verbose: bool) -> RunOutput {
    let (sig, theory, clauses) = match engine_input(p) {
        Ok(x) => x,
        Err(e) => return RunOutput::error(e),
    };
    let options = EngineOptions {
        budget,
        ..EngineOptions::default()
    };
    let verdict = match saturate(&sig, &theory, &clauses, options) {
        Ok(v) => v,
        Err(e) => return RunOutput::error(format!("check: {e}")),
    };
    match verdict {
        Verdict::Refuted(trace) => {
            if let Err(e) = replay(&sig, &theory, &clauses, &trace) {
                return RunOutput::error(format!("internal error: {e}"));
            }
            let mut out = String::from("unsat\n");
            if verbose {
                for (i, c) in clauses.iter().enumerate() {
                    let _ = writeln!(out, "clause {i}: {}", c.sexpr());
                }
            }
            out.push_str(&trace.render(&theory));
            RunOutput::ok(out, EXIT_UNSAT)
        }
        Verdict::Saturated => RunOutput::ok("sat\n".into(), EXIT_SAT),
        Verdict::BudgetExhausted(stats) => RunOutput::ok(
            format!(
                "unknown\nbudget exhausted: steps={} clauses={} generations={} duplicates={} dropped={}\n",
                stats.steps, stats.clauses, stats.generations, stats.duplicates, stats.dropped_by_size
            ),
            EXIT_UNKNOWN,
        ),
    }
}

fn decide(p: &Problem, cell_budget: usize) -> RunOutput {
    let report = match fragments::decide(p, cell_budget) {
        Ok(r) => r,
        Err(e) => return RunOutput::error(format!("decide: {e}")),
    };
    match &report.decision {
        Decision::Unsat => RunOutput::ok(
            format!("unsat\nno model in any of {} structures\n", report.family.len()),
            EXIT_UNSAT,
        ),
        Decision::Sat(m) => {
            let mut out = String::from("sat\n");
            let _ = writeln!(out, "structure {} of {}", m.index, report.family.len());
            if let Some(w) = &m.witness {
                let parts: Vec<String> = w.iter().map(|(c, v)| format!("{c} = {v}")).collect();
                let _ = writeln!(out, "constants: {}", parts.join(", "));
            }
            let _ = writeln!(out, "{}", m.structure);
            let frame = FiniteFrame::with_budget(&report.sig, m.structure.clone(), cell_budget);
            out.push_str(&m.expansion.dump(&frame));
            RunOutput::ok(out, EXIT_SAT)
        }
    }
}

fn model(p: &Problem, cell_budget: usize) -> RunOutput {
    let family = match p.theory_handle() {
        TheoryHandle::Finite(f) => f,
        TheoryHandle::LiaStandard => {
            return RunOutput::error("model: needs a finite theory (eqdl or finite)")
        }
    };
    let definites: Vec<_> = p.definites();
    let prog = program_of(&p.sig, &definites);
    let mut out = String::new();
    let mut any = false;
    for (i, s) in family.iter().enumerate() {
        let frame = FiniteFrame::with_budget(&p.sig, s.clone(), cell_budget);
        let canon = match canonical_structure(&frame, &prog) {
            Ok(c) => c,
            Err(e) => return RunOutput::error(format!("model: {e}")),
        };
        let verdict = match model_check(&frame, &canon, &p.clauses) {
            Ok(CheckResult::Sat) => {
                any = true;
                "model".to_string()
            }
            Ok(CheckResult::Unsat { clause, valuation }) => {
                let parts: Vec<String> = valuation
                    .iter()
                    .map(|(x, v)| {
                        let ty = p.clauses[clause].env().get(x).cloned();
                        let shown = ty.map_or_else(
                            || format!("{v:?}"),
                            |t| crate::model::render_value(&frame, &t, v),
                        );
                        format!("{x}:={shown}")
                    })
                    .collect();
                format!("falsifies clause {clause} at {{{}}}", parts.join(","))
            }
            Err(e) => return RunOutput::error(format!("model: {e}")),
        };
        let _ = writeln!(out, "; structure {i}: {verdict}");
        let _ = writeln!(out, "{s}");
        out.push_str(&canon.dump(&frame));
    }
    RunOutput::ok(out, if any { EXIT_SAT } else { EXIT_UNSAT })
}
