use std::collections::HashMap;

use hochc::clause::program_of;
use hochc::lift::lift;
use hochc::model::{canonical_structure, eval_term, Expansion, FiniteFrame, FrameValuation, Value};
use hochc::parse::parse_term;
use hochc::structure::TheoryHandle;
use hochc::{parse_problem, Name, Problem, Term, Type, TypeEnv};
use proptest::prelude::*;

const FINITE: &str = "\
(theory finite (sort I (e0 e1)) (fun a (() -> e0)) (fun b (() -> e1)) (rel p ((e0) -> 1) ((e1) -> 0)))
(declare-rel R (I)) (declare-rel S (I I)) (declare-rel Q ((-> I Bool) I))
(declare-var x I) (declare-var y I) (declare-var f (-> I Bool))
(rule (=> (and (= x a)) (R x)))
(rule (=> (and (R x) (p y)) (S x y)))
(rule (=> (and (S x y) (f y)) (Q f y)))
";

const LIA: &str = "\
(theory lia)
(declare-rel R (Int)) (declare-rel S (Int Int))
(declare-var x Int) (declare-var y Int) (declare-var z Int)
(rule (=> (and (R x) (<= y z)) (S x y)))
";

fn problem(text: &str) -> Problem {
    let p = parse_problem(text).unwrap();
    assert!(p.validate().is_empty(), "{:?}", p.validate());
    p
}

/// Equality up to source positions.
fn same(p: &Problem, q: &Problem) -> bool {
    p.sig == q.sig && p.theory == q.theory && p.clauses == q.clauses
}

fn env(p: &Problem) -> TypeEnv {
    let mut env = TypeEnv::new();
    for c in &p.clauses {
        env.extend(c.env());
    }
    env
}

// ------------------------------------------------------------- generators

fn individual(depth: usize) -> BoxedStrategy<String> {
    let mut names = vec!["x".to_string(), "y".into(), "a".into(), "b".into()];
    names.extend((0..depth).map(|i| format!("z{i}")));
    proptest::sample::select(names).boxed()
}

/// Text of a Bool-typed term over the finite signature; `depth` counts the
/// enclosing binders `z0 .. z{depth-1}`. Without `logical` the term has no
/// `and`, `or` or `exists`, as clause atoms require.
fn formula(depth: usize, size: u32, logical: bool) -> BoxedStrategy<String> {
    let leaf = prop_oneof![
        individual(depth).prop_map(|m| format!("(p {m})")),
        individual(depth).prop_map(|m| format!("(R {m})")),
        individual(depth).prop_map(|m| format!("(f {m})")),
        (individual(depth), individual(depth)).prop_map(|(m, n)| format!("(S {m} {n})")),
        (individual(depth), individual(depth)).prop_map(|(m, n)| format!("(= {m} {n})")),
    ];
    if size == 0 {
        return leaf.boxed();
    }
    let z = format!("z{depth}");
    let z2 = z.clone();
    let weight = u32::from(logical);
    prop_oneof![
        2 => leaf,
        weight => (formula(depth, size - 1, logical), formula(depth, size - 1, logical))
            .prop_map(|(l, r)| format!("(and {l} {r})")),
        weight => (formula(depth, size - 1, logical), formula(depth, size - 1, logical))
            .prop_map(|(l, r)| format!("(or {l} {r})")),
        1 => (formula(depth + 1, size - 1, logical), individual(depth))
            .prop_map(move |(body, m)| format!("((lambda (({z} I)) {body}) {m})")),
        weight => formula(depth + 1, size - 1, logical)
            .prop_map(move |body| format!("(exists (({z2} I)) {body})")),
        1 => (predicate(depth, size - 1, logical), individual(depth))
            .prop_map(|(q, m)| format!("(Q {q} {m})")),
    ]
    .boxed()
}

fn predicate(depth: usize, size: u32, logical: bool) -> BoxedStrategy<String> {
    let z = format!("z{depth}");
    prop_oneof![
        Just("f".to_string()),
        Just("R".to_string()),
        formula(depth + 1, size, logical)
            .prop_map(move |body| format!("(lambda (({z} I)) {body})")),
    ]
    .boxed()
}

/// A clause atom: λ-abstractions appear only as arguments of `Q`.
fn atom(size: u32) -> BoxedStrategy<String> {
    prop_oneof![
        individual(0).prop_map(|m| format!("(R {m})")),
        (individual(0), individual(0)).prop_map(|(m, n)| format!("(S {m} {n})")),
        (formula(1, size, false), individual(0))
            .prop_map(|(body, m)| format!("(Q (lambda ((z0 I)) {body}) {m})")),
    ]
    .boxed()
}

fn arith(size: u32) -> BoxedStrategy<String> {
    let leaf = prop_oneof![
        proptest::sample::select(vec!["x", "y", "z"]).prop_map(String::from),
        (-30i64..30).prop_map(|k| k.to_string()),
    ];
    if size == 0 {
        return leaf.boxed();
    }
    prop_oneof![
        2 => leaf,
        1 => (arith(size - 1), arith(size - 1)).prop_map(|(l, r)| format!("(+ {l} {r})")),
        1 => (arith(size - 1), arith(size - 1)).prop_map(|(l, r)| format!("(- {l} {r})")),
    ]
    .boxed()
}

fn constraint(size: u32) -> BoxedStrategy<String> {
    let rel = proptest::sample::select(vec!["<=", "<", "=", ">=", ">"]);
    let leaf = prop_oneof![
        (rel, arith(2), arith(2)).prop_map(|(r, m, n)| format!("({r} {m} {n})")),
        arith(2).prop_map(|m| format!("(R {m})")),
        (arith(1), arith(1)).prop_map(|(m, n)| format!("(S {m} {n})")),
    ];
    if size == 0 {
        return leaf.boxed();
    }
    prop_oneof![
        2 => leaf,
        1 => (constraint(size - 1), constraint(size - 1)).prop_map(|(l, r)| format!("(and {l} {r})")),
        1 => (constraint(size - 1), constraint(size - 1)).prop_map(|(l, r)| format!("(or {l} {r})")),
    ]
    .boxed()
}

// ------------------------------------------------------------- evaluation

struct Finite {
    p: Problem,
    env: TypeEnv,
    frame: FiniteFrame,
    canon: Expansion,
}

impl Finite {
    fn new() -> Finite {
        let p = problem(FINITE);
        let TheoryHandle::Finite(family) = p.theory_handle() else {
            panic!("finite theory")
        };
        let frame = FiniteFrame::new(&p.sig, family[0].clone());
        let definites = p.definites();
        let canon = canonical_structure(&frame, &program_of(&p.sig, &definites)).unwrap();
        let env = env(&p);
        Finite { p, env, frame, canon }
    }

    fn term(&self, text: &str) -> Term {
        parse_term(&self.p.sig, &self.env, text).unwrap_or_else(|e| panic!("{e}: {text}"))
    }

    fn eval(&self, m: &Term, val: &FrameValuation) -> Value {
        let env = &self.env;
        eval_term(&self.frame, &self.canon, m, val, &|x: &Name| env.get(x).cloned()).unwrap()
    }

    /// Every valuation of `x`, `y`, `f`.
    fn valuations(&self) -> Vec<FrameValuation> {
        let elems = self.frame.elements(&Type::base("I")).unwrap();
        let preds = self.frame.elements(&self.env.get("f").unwrap().clone()).unwrap();
        let mut out = Vec::new();
        for x in elems.iter() {
            for y in elems.iter() {
                for f in preds.iter() {
                    out.push(FrameValuation::from([
                        ("x".into(), x.clone()),
                        ("y".into(), y.clone()),
                        ("f".into(), f.clone()),
                    ]));
                }
            }
        }
        out
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 256,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn higher_order_terms_print_and_parse_back(text in formula(0, 3, true)) {
        let fin = Finite::new();
        let m = fin.term(&text);
        prop_assert_eq!(fin.term(&m.sexpr()), m);
    }

    #[test]
    fn arithmetic_terms_print_and_parse_back(text in constraint(2)) {
        let p = problem(LIA);
        let env = env(&p);
        let m = parse_term(&p.sig, &env, &text).unwrap();
        prop_assert_eq!(parse_term(&p.sig, &env, &m.sexpr()).unwrap(), m);
    }

    #[test]
    fn beta_normalisation_preserves_denotation(text in formula(0, 3, true)) {
        let fin = Finite::new();
        let m = fin.term(&text);
        let n = m.beta_normal_form();
        prop_assert!(n.beta_reduce_head().is_none());
        for val in fin.valuations() {
            prop_assert_eq!(fin.eval(&m, &val), fin.eval(&n, &val));
        }
    }

    #[test]
    fn substitution_commutes_with_evaluation(
        text in formula(0, 3, true),
        by in individual(0),
        pred in predicate(0, 1, true),
    ) {
        let fin = Finite::new();
        let m = fin.term(&text);
        let n = fin.term(&by);
        let q = fin.term(&pred);
        let map: HashMap<Name, Term> =
            [("x".into(), n.clone()), ("f".into(), q.clone())].into_iter().collect();
        let substituted = m.subst(&map);
        for val in fin.valuations() {
            let mut updated = val.clone();
            updated.insert("x".into(), fin.eval(&n, &val));
            updated.insert("f".into(), fin.eval(&q, &val));
            prop_assert_eq!(fin.eval(&substituted, &val), fin.eval(&m, &updated));
        }
    }

    #[test]
    fn lifting_removes_lambdas_and_keeps_the_canonical_verdict(
        bodies in proptest::collection::vec(atom(2), 1..4),
    ) {
        let mut text = FINITE.to_string();
        for (i, b) in bodies.iter().enumerate() {
            if i + 1 == bodies.len() {
                text.push_str(&format!("(goal {b})\n"));
            } else {
                text.push_str(&format!("(rule (=> (and {b}) (Q f x)))\n"));
            }
        }
        let p = problem(&text);
        let lifted = lift(&p.sig, &p.clauses).unwrap();
        let q = Problem::new(lifted.sig, p.theory.clone(), lifted.clauses);
        prop_assert!(!q.contains_lambda());
        prop_assert!(q.validate().is_empty(), "{:?}", q.validate());
        prop_assert!(same(&problem(&q.to_sexpr()), &q));
        let verdict = |p: &Problem| {
            let TheoryHandle::Finite(family) = p.theory_handle() else { unreachable!() };
            let frame = FiniteFrame::new(&p.sig, family[0].clone());
            let canon = canonical_structure(&frame, &program_of(&p.sig, &p.definites())).unwrap();
            hochc::model::model_check(&frame, &canon, &p.clauses).unwrap()
                == hochc::model::CheckResult::Sat
        };
        prop_assert_eq!(verdict(&p), verdict(&q));
    }
}

#[test]
fn example_problems_print_and_parse_back() {
    for name in ["iter.hochc", "iter_sat.hochc", "step5.hochc", "sla.hochc", "datalog.hochc"] {
        let path = format!("{}/../../problems/{name}", env!("CARGO_MANIFEST_DIR"));
        let p = problem(&std::fs::read_to_string(path).unwrap());
        assert!(same(&problem(&p.to_sexpr()), &p), "{name}");
    }
}

#[test]
fn at_sign_is_reserved() {
    let text = "(theory lia)\n(declare-rel c@0 (Int))\n";
    assert!(parse_problem(text).is_err());
}
