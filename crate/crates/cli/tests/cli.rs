use std::path::PathBuf;
use std::process::{Command, Output};

fn problem(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../problems")
        .join(name)
}

fn hochc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hochc"))
        .args(args)
        .output()
        .expect("run hochc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn check_iter_is_unsat_with_trace() {
    let p = problem("iter.hochc");
    let o = hochc(&["check", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.starts_with("unsat\n"));
    assert!(out.contains("Constraint-Refutation"));
    assert!(out.trim_end().ends_with("QED"));
}

#[test]
fn check_without_goal_is_sat() {
    let p = problem("iter_sat.hochc");
    let o = hochc(&["check", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "sat\n");
}

#[test]
fn tiny_budget_gives_unknown() {
    let p = problem("iter.hochc");
    let o = hochc(&["check", "--max-steps", "1", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with("unknown\n"));
}

#[test]
fn output_is_deterministic() {
    let p = problem("iter.hochc");
    let a = hochc(&["check", p.to_str().unwrap()]);
    let b = hochc(&["check", p.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn decide_datalog_and_sla() {
    for name in ["datalog.hochc", "sla.hochc"] {
        let p = problem(name);
        let o = hochc(&["decide", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{name}");
        assert!(stdout(&o).starts_with("sat\n"), "{name}");
    }
}

#[test]
fn translate_formats() {
    let p = problem("iter.hochc");
    let native = hochc(&["translate", p.to_str().unwrap()]);
    assert_eq!(native.status.code(), Some(0));
    assert!(stdout(&native).starts_with("(theory lia)\n"));
    let smt = hochc(&["translate", "--format", "smtlib", p.to_str().unwrap()]);
    assert_eq!(smt.status.code(), Some(0));
    let text = stdout(&smt);
    assert!(text.starts_with("(set-logic ALL)\n"));
    assert!(text.trim_end().ends_with("(check-sat)"));
}

#[test]
fn translate_rejects_lambda_but_lift_output_translates() {
    let p = problem("sla.hochc");
    let o = hochc(&["translate", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));

    let dir = std::env::temp_dir().join(format!("hochc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let lifted = dir.join("lifted.hochc");
    let o = hochc(&["lift", p.to_str().unwrap(), "-o", lifted.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let o = hochc(&["translate", lifted.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn typecheck_reports_orders() {
    let p = problem("iter.hochc");
    let o = hochc(&["typecheck", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Iter : (ι³→o)→ι³→o (order 2)"));
}

#[test]
fn model_over_partitions() {
    let p = problem("datalog.hochc");
    let o = hochc(&["model", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("; structure 0: falsifies clause"));
}

#[test]
fn errors_exit_three() {
    let o = hochc(&["check", "/nonexistent/file.hochc"]);
    assert_eq!(o.status.code(), Some(3));

    let dir = std::env::temp_dir().join(format!("hochc-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.hochc");
    std::fs::write(&bad, "(theory lia)\n(declare-rel R (Int))\n(goal (R 1 2))\n").unwrap();
    let o = hochc(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());
    std::fs::remove_dir_all(&dir).unwrap();
}
