use hochc::fol::{translate, FolError};
use hochc::lift::lift;
use hochc::parse_problem;

fn iter_problem() -> hochc::Problem {
    let path = format!("{}/../../problems/iter.hochc", env!("CARGO_MANIFEST_DIR"));
    parse_problem(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn iteration_translation_golden() {
    let p = iter_problem();
    let fo = translate(&p.sig, &p.clauses).unwrap();
    let expected = "\
¬(z = x + y) ∨ H (app (app (app Add x) y) z)
¬(n ≤ 0) ∨ ¬(s = x) ∨ H (app (app (app (app Iter f) s) n) x)
¬(n > 0) ∨ ¬H (app (app (app (app Iter f) s) (n - 1)) y) ∨ ¬H (app (app (app f n) y) x) ∨ H (app (app (app (app Iter f) s) n) x)
¬(n ≥ 1) ∨ ¬H (app (app (app (app Iter Add) n) n) x) ∨ ¬(x ≤ n + n)
H (app (app (app c_{ι³→o} x1) x2) x3)
";
    assert_eq!(fo.math(), expected);
}

#[test]
fn native_and_smtlib_emission_are_stable() {
    let p = iter_problem();
    let fo = translate(&p.sig, &p.clauses).unwrap();
    let native = fo.native();
    assert!(native.contains("(sort S_i_i_i_o)"));
    assert!(native.contains("(declare-fun c_Iter () S_Li_i_i_oJ_i_i_i_o)"));
    assert!(native.contains("(declare-fun app_i_i_i_o (S_i_i_i_o Int) S_i_i_o)"));
    assert!(native.contains(
        "(rule ((x Int) (y Int) (z Int)) (=> (and (= z (+ x y))) (H (app_i_o (app_i_i_o (app_i_i_i_o c_Add x) y) z))))"
    ));
    let smt = fo.smtlib();
    assert!(smt.contains("(declare-sort S_o 0)"));
    assert!(smt.contains("(assert (forall ((x1 Int) (x2 Int) (x3 Int)) (H (app_i_o (app_i_i_o (app_i_i_i_o comp_i_i_i_o x1) x2) x3))))"));
    assert!(smt.ends_with("(check-sat)\n"));
    assert_eq!(translate(&p.sig, &p.clauses).unwrap().native(), native);
}

#[test]
fn lambdas_are_rejected_until_lifted() {
    let text = "(theory lia) (declare-rel R (Int)) (declare-rel U ((-> Int Bool) Int))
        (declare-var x Int) (declare-var y Int)
        (goal (U (lambda ((z Int)) (R x)) y))";
    let p = parse_problem(text).unwrap();
    assert!(matches!(translate(&p.sig, &p.clauses), Err(FolError::LambdaPresent(_))));
    let lifted = lift(&p.sig, &p.clauses).unwrap();
    let fo = translate(&lifted.sig, &lifted.clauses).unwrap();
    assert_eq!(fo.clauses.len(), 2);
}

#[test]
fn background_only_clauses_are_fixed() {
    let text = "(theory lia) (declare-var x Int) (goal (<= x 3) (>= x 5))";
    let p = parse_problem(text).unwrap();
    let fo = translate(&p.sig, &p.clauses).unwrap();
    assert_eq!(fo.clauses.len(), 1);
    assert_eq!(fo.clauses[0].negative, p.clauses[0].atoms().to_vec());
    assert!(fo.signature.sorts.is_empty());
}
