use std::path::Path;
use std::process::{Command, Output};

fn qsr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn gen_table(dir: &Path, calculus: &str, m: &str) -> std::path::PathBuf {
    let path = dir.join(format!("{calculus}-{m}.tbl"));
    let out = qsr(&[
        "table",
        "gen",
        "--calculus",
        calculus,
        "--m",
        m,
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    path
}

#[test]
fn relate_opra_example() {
    let out = qsr(&["relate", "opra", "2", "0 0 0 1", "1 -1 90 1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "2:7-1");
}

#[test]
fn relate_eopra_example() {
    let out = qsr(&["relate", "eopra", "2", "0 0 0 2", "0.7071 -0.7071 180 0.5"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "2:7.0-7.2");
}

#[test]
fn relate_identical_points_is_identity() {
    let out = qsr(&["relate", "opra", "2", "3 4 30 1", "3 4 30 1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "2:s0");
}

#[test]
fn relate_bad_point_spec_exits_2() {
    let out = qsr(&["relate", "opra", "2", "0 0 0", "1 -1 90 1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("expected 4 fields"));
    let out = qsr(&["relate", "opra", "2", "0 0 zero 1", "1 -1 90 1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("field 3"));
}

#[test]
fn converse_examples() {
    for (arg, want) in [
        ("2:7-1", "2:1-7"),
        ("2:s0", "2:s0"),
        ("estar-2:1.0.2", "estar-2:5.2.0"),
        ("star-2:1", "star-2:5"),
    ] {
        let out = qsr(&["converse", arg]);
        assert!(out.status.success());
        assert_eq!(stdout(&out).trim(), want, "converse {arg}");
    }
    let out = qsr(&["converse", "2:bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn enumerate_counts() {
    let out = qsr(&["enumerate", "--calculus", "opra", "--m", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 72);
    let out = qsr(&["enumerate", "--calculus", "eopra", "--m", "2"]);
    assert_eq!(stdout(&out).lines().count(), 584);
}

#[test]
fn table_gen_query_verify_check_duality() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen_table(dir.path(), "opra", "1");
    let p = path.to_str().unwrap();

    // entry of (R, identity) contains R
    let out = qsr(&["table", "query", "1:1-3", "1:s0", "--table", p]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).split_whitespace().any(|t| t == "1:1-3"));

    let out = qsr(&[
        "table", "verify", "--trials", "2000", "--table", p, "--machine",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "violations 0 2000");

    let out = qsr(&["table", "check-duality", "--table", p]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "duality-violations 0");
}

#[test]
fn table_gen_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.tbl");
    let b = dir.path().join("b.tbl");
    for path in [&a, &b] {
        let out = qsr(&[
            "table",
            "gen",
            "--calculus",
            "star",
            "--m",
            "2",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn missing_table_file_exits_3() {
    let out = qsr(&["table", "query", "2:0-0", "2:s0", "--table", "/nonexistent/x.tbl"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn table_dir_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    gen_table(dir.path(), "opra", "1");
    let out = Command::new(env!("CARGO_BIN_EXE_qsr"))
        .args(["table", "query", "1:s0", "1:s0", "--calculus", "opra", "--m", "1"])
        .env("QSR_TABLE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "1:s0");
}

#[test]
fn solve_inconsistent_chain_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let table = gen_table(dir.path(), "opra", "1");
    let net = dir.path().join("chain.net");
    std::fs::write(
        &net,
        "#qsr-net v1\ncalculus opra 1\nnode A\nnode B\nnode C\n\
         constraint A B { 1:s0 }\nconstraint B C { 1:s0 }\nconstraint A C { 1:0-0 }\n#end\n",
    )
    .unwrap();
    let out = qsr(&[
        "solve",
        net.to_str().unwrap(),
        "--table",
        table.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).lines().last().unwrap() == "STATUS inconsistent");
}

#[test]
fn solve_unconstrained_network_is_consistent_so_far() {
    let dir = tempfile::tempdir().unwrap();
    let table = gen_table(dir.path(), "opra", "1");
    let net = dir.path().join("empty.net");
    std::fs::write(&net, "#qsr-net v1\ncalculus opra 1\nnode A\nnode B\n#end\n").unwrap();
    let out = qsr(&[
        "solve",
        net.to_str().unwrap(),
        "--table",
        table.to_str().unwrap(),
        "--machine",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.lines().last().unwrap() == "STATUS consistent-so-far");
    assert!(text.starts_with("constraint A B {"));
}

#[test]
fn solve_bad_network_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("bad.net");
    std::fs::write(&net, "#qsr-net v1\nnode A\n#end\n").unwrap();
    let out = qsr(&["solve", net.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line"));
}
