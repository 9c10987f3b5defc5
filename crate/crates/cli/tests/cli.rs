use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ugs-sched"))
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn unknown_flags_fail() {
    assert!(!run(&["schedule", "--no-such-flag"]).status.success());
    assert!(!run(&["eval", "--algo", "fifo"]).status.success());
    assert!(!run(&["capacity", "--set", "nokey"]).status.success());
}

#[test]
fn bad_rows_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.csv", "capacity=420\nid,data_size,period,deadline,join_frame\n1,abc,3,,0\n");
    let o = run(&["schedule", &p]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn rejected_flows_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(scenario("example4.csv")).unwrap().replace("expect=reject", "");
    let p = write(dir.path(), "tight.csv", &text);
    let o = run(&["schedule", &p]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("rejected by admission control"), "{}", stderr(&o));

    let o = run(&["schedule", scenario("example4.csv").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn outputs_are_reproducible() {
    let s = scenario("example3.csv");
    let a = run(&["schedule", s.to_str().unwrap()]);
    let b = run(&["schedule", s.to_str().unwrap()]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let args = ["eval", "--trials", "5", "--frames", "30", "--seed", "7"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn metrics_file_has_a_total_row() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.csv");
    let out = dir.path().join("a.csv");
    let o = run(&[
        "schedule",
        scenario("example1.csv").to_str().unwrap(),
        "--algo",
        "edf",
        "--out",
        out.to_str().unwrap(),
        "--metrics",
        m.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let text = fs::read_to_string(&m).unwrap();
    let total = text.lines().last().unwrap();
    assert!(total.starts_with("total,"), "{total}");
    assert!(text.contains("9/4"));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 1 + 12 * 5);
}

#[test]
fn capacity_overrides() {
    let o = run(&["capacity"]);
    assert_eq!(String::from_utf8_lossy(&o.stdout), "dl_slots_per_frame=360\nul_slots_per_frame=175\n");
    assert!(!run(&["capacity", "--set", "bogus=1"]).status.success());
}
