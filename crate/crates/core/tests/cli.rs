use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hermite-ocp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn solve_writes_one_row_per_sample() {
    let o = run(&["solve", "--elements", "8", "--samples", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y_h,dy_h,d2y_h,u_h"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8 * 5 + 1);
    assert!(rows.first().unwrap().starts_with("-1.0000000000000000e0,"));
    assert!(rows.last().unwrap().starts_with("1.0000000000000000e0,"));
    // diagnostics stay off stdout
    assert!(String::from_utf8_lossy(&o.stderr).contains("pdas iterations"));
}

#[test]
fn solve_is_deterministic() {
    let a = run(&["solve", "--elements", "33"]);
    let b = run(&["solve", "--elements", "33"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn solve_to_file() {
    let dir = std::env::temp_dir().join(format!("hermite-ocp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sol.csv");
    let o = run(&["solve", "--levels", "3", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written.lines().count(), 1 + 8 * 10 + 1);
    assert!(stdout(&o).contains("active nodes"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn convergence_table_has_one_row_per_level() {
    let o = run(&["convergence", "--levels", "0..7", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    assert!(rows[4].starts_with("16,"));
    assert!(rows[4].contains("1.266029e-1") || rows[4].contains("1.266029e-01"));

    let o = run(&["convergence", "--levels", "0..1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with('|'));
}

#[test]
fn verify_example_passes() {
    let o = run(&["verify", "--problem", "paper"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("[FAIL]"));

    let o = run(&["verify", "--problem", "paper", "--elements", "33"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn tampered_multiplier_fails_verification() {
    let o = run(&["verify", "--problem", "paper", "--debug-lambda", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[FAIL]"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["solve", "--elements", "0"]).status.code(), Some(2));
    assert_eq!(
        run(&["solve", "--problem", "nope", "--elements", "4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["convergence", "--levels", "2,2"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["convergence", "--levels", "3"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["verify", "--problem", "unconstrained-smoke"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        run(&["solve", "--elements", "64", "--pdas-max-iter", "1"])
            .status
            .code(),
        Some(3)
    );
}
