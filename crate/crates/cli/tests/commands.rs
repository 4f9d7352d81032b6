use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn agents() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/agents")
}

fn canrt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_canrt")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn check_accepts_the_uav_agent() {
    let uav = agents().join("uav.can");
    let out = canrt(&["check", uav.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("ok (1 events, 1 motivations, 9 plans, 8 actions)"));
}

#[test]
fn unknown_action_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.can", "event e [i].\nplan e : true <- fly.\n");
    let out = canrt(&["check", &f]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("bad.can: ") && stderr(&out).contains("fly"), "{}", stderr(&out));
}

#[test]
fn syntax_errors_exit_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.can", "event e [i].\nplan e : true <- a\n");
    let out = canrt(&["check", &f]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad.can:3:1:"), "{}", stderr(&out));
    let props = write(dir.path(), "bad.props", "p: AG (\n");
    let uav = agents().join("uav.can");
    assert_eq!(canrt(&["verify", uav.to_str().unwrap(), &props]).status.code(), Some(2));
    let props = write(dir.path(), "label.props", "p: AG nonsense\n");
    assert_eq!(canrt(&["verify", uav.to_str().unwrap(), &props]).status.code(), Some(2));
}

#[test]
fn missing_file_exits_1() {
    assert_eq!(canrt(&["check", "/nonexistent/agent.can"]).status.code(), Some(1));
}

#[test]
fn verify_prints_a_table() {
    let uav = agents().join("uav.can");
    let props = agents().join("uav.props");
    let out = canrt(&["verify", uav.to_str().unwrap(), props.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 7);
    for line in text.lines() {
        let cols: Vec<&str> = line.split(' ').collect();
        assert_eq!(cols.len(), 3, "{line}");
        assert_eq!(cols[1], "PASS");
        cols[2].parse::<usize>().unwrap();
    }
}

#[test]
fn failing_property_exits_4_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let props = write(dir.path(), "f.props", "ok: AF init | true\nnever_fails: AG !status(identifier1)=failure\n");
    let uav = agents().join("uav.can");
    let out = canrt(&["verify", uav.to_str().unwrap(), &props]);
    assert_eq!(out.status.code(), Some(4));
    let text = stdout(&out);
    assert!(text.starts_with("ok PASS "));
    assert!(text.contains("never_fails FAIL "));
    assert!(text.contains("  witness: s0 -> "));
}

#[test]
fn traces_dump_one_per_line_with_length() {
    let two = agents().join("two_plans.can");
    let out = canrt(&["traces", two.to_str().unwrap()]);
    assert_eq!(
        stdout(&out),
        "e1;e1.P1;e1.P1.a1#1;e1.P1.a2#2 4\ne1;e1.P2;e1.P2.a3#1;e1.P2.a4#2;e1.P2.a5#3 5\n"
    );
}

#[test]
fn fifo_run_ends_with_main_task_terminal() {
    let uav = agents().join("uav.can");
    let out = canrt(&["run", uav.to_str().unwrap()]);
    let text = stdout(&out);
    let records: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    for (k, r) in records.iter().enumerate() {
        assert_eq!(r["step"], k);
    }
    let last = records.last().unwrap();
    let main = last["identifiers"].as_array().unwrap().iter().find(|r| r["identifier"] == "identifier1").unwrap();
    assert!(main["status"] == "success" || main["status"] == "failure");
}

#[test]
fn explore_writes_requested_exports() {
    let dir = tempfile::tempdir().unwrap();
    let uav = agents().join("uav.can");
    let dot = dir.path().join("ts.dot");
    let prefix = dir.path().join("ts");
    let out = canrt(&[
        "explore",
        uav.to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
        "--explicit",
        prefix.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("states 56\ntransitions 70\ndeadlocks 3\n"));
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph"));
    let tra = std::fs::read_to_string(dir.path().join("ts.tra")).unwrap();
    assert!(tra.starts_with("56 70\n"));
    assert!(dir.path().join("ts.sta").exists() && dir.path().join("ts.lab").exists());
}

#[test]
fn explore_state_limit_is_an_error() {
    let uav = agents().join("uav.can");
    let out = canrt(&["explore", uav.to_str().unwrap(), "--max-states", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("state limit"));
}

#[test]
fn legacy_rules_explore_without_motivation() {
    let uav = agents().join("uav.can");
    let out = canrt(&["explore", uav.to_str().unwrap(), "--legacy"]);
    assert!(out.status.success());
}

#[tokio::test]
async fn serve_opens_a_session_for_the_agent() {
    use std::io::{BufRead, BufReader};
    let uav = agents().join("uav.can");
    let mut child = Command::new(env!("CARGO_BIN_EXE_canrt"))
        .args(["serve", uav.to_str().unwrap(), "--port", "0"])
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    let mut lines = BufReader::new(child.stdout.take().unwrap()).lines();
    let listening = lines.next().unwrap().unwrap();
    let base = listening.strip_prefix("listening on ").unwrap().to_owned();
    let session = lines.next().unwrap().unwrap();
    let id = session.split(' ').nth(1).unwrap().to_owned();
    let state: serde_json::Value = reqwest::get(format!("{base}/v1/sessions/{id}/state"))
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert_eq!(state["events"][0]["identifier"], "identifier1");
    assert_eq!(state["events"][0]["status"], "pending");
}
