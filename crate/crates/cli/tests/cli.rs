use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use cspmon::run_cli_with;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_cli_with(std::iter::once("cspmon").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn without_timing(report: &str) -> String {
    report.lines().filter(|l| !l.starts_with("time:")).collect::<Vec<_>>().join("\n")
}

/// A config next to copies of the rover files, with `extra` appended.
fn rover_config(dir: &Path, extra: &str) -> String {
    for f in ["rover.csp", "rover_mapping.json", "rover_pass.trace"] {
        fs::copy(fixture(f), dir.join(f)).unwrap();
    }
    let path = dir.join("run.yaml");
    fs::write(
        &path,
        format!("spec_path: rover.csp\nentry_process: MAIN\nmode: permissive\nmapping_path: rover_mapping.json\n{extra}"),
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn check_pass() {
    let (code, out, _) = run(&["check", "--config", &fixture("rover.yaml")]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("events checked: 243/243"));
    assert!(out.contains("verdict: pass"));
    assert!(out.contains("time: total "));
}

#[test]
fn check_red_violation() {
    let (code, out, _) = run(&["check", "--config", &fixture("rover.yaml"), "--trace", &fixture("rover_red.trace")]);
    assert_eq!(code, 1);
    assert!(out.contains("events checked: 40/243"), "{out}");
    assert!(out.contains("failing event: inspect.1 (event 40)"));
    assert!(out.contains("acceptable: {move.0}"));
    assert!(out.contains("/odom  (ignored)"));
}

#[test]
fn strict_mode_override_rejects_ros_topics() {
    let (code, out, _) = run(&["check", "--config", &fixture("rover.yaml"), "--mode", "strict"]);
    assert_eq!(code, 1);
    assert!(out.contains("failing event: /odom (event 2)"), "{out}");
    assert!(out.contains("not in the alphabet"), "{out}");
}

#[test]
fn reports_are_reproducible_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.txt");
    let csv = dir.path().join("t.csv");
    let args = |trace: &str| {
        vec![
            "check".to_string(),
            "--config".into(),
            fixture("rover.yaml"),
            "--trace".into(),
            fixture(trace),
            "--report".into(),
            report.to_string_lossy().into(),
            "--csv".into(),
            csv.to_string_lossy().into(),
        ]
    };
    let first = run(&args("rover_swap.trace").iter().map(String::as_str).collect::<Vec<_>>());
    let saved = fs::read_to_string(&report).unwrap();
    let second = run(&args("rover_swap.trace").iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(first.0, 1);
    assert_eq!(saved, first.1);
    assert_eq!(without_timing(&first.1), without_timing(&second.1));
    let rows = fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = rows.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("total_s,synth_s"));
    assert!(rows[1].ends_with(",40,243,fail"), "{}", rows[1]);
}

#[test]
fn verdict_lines_cover_every_event() {
    let dir = tempfile::tempdir().unwrap();
    let v = dir.path().join("v.ndjson");
    let (code, _, _) = run(&[
        "check",
        "--config",
        &fixture("rover.yaml"),
        "--trace",
        &fixture("rover_mismatch.trace"),
        "--verdicts",
        &v.to_string_lossy(),
    ]);
    assert_eq!(code, 1);
    let text = fs::read_to_string(&v).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 243);
    assert!(lines[..122].iter().all(|l| *l == r#"{"verdict":"pass"}"#));
    assert!(lines[122].contains(r#""failing_event":"move.4""#), "{}", lines[122]);
    assert!(lines[122..].iter().all(|l| *l == lines[122]));
}

#[test]
fn detcheck_and_synth() {
    let (code, _, err) = run(&["detcheck", "--spec", &fixture("branch.csp"), "--entry", "P"]);
    assert_eq!(code, 2);
    assert!(err.contains("after <a> `b` may be both accepted and refused"), "{err}");
    let (code, out, _) = run(&["detcheck", "--config", &fixture("rover.yaml")]);
    assert_eq!((code, out.as_str()), (0, "deterministic\n"));

    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("lts.txt");
    let (code, out, _) = run(&["synth", "--config", &fixture("rover.yaml"), "--export", &dump.to_string_lossy()]);
    assert_eq!(code, 0);
    assert!(out.starts_with("states 117\ntransitions 517\n"), "{out}");
    let dump = fs::read_to_string(dump).unwrap();
    assert!(dump.starts_with("initial 0\nalphabet inspect.0, "), "{dump}");
    assert!(dump.contains("\nstate 0 MAIN\n"));
}

#[test]
fn usage_and_config_errors_exit_3() {
    assert_eq!(run(&[]).0, 3);
    assert_eq!(run(&["check"]).0, 3);
    assert_eq!(run(&["check", "--config", &fixture("rover.yaml"), "--mode", "lax"]).0, 3);
    assert_eq!(run(&["detcheck", "--spec", &fixture("rover.csp")]).0, 3);
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["--version"]).0, 0);

    let dir = tempfile::tempdir().unwrap();
    let cfg = rover_config(dir.path(), "input: {trace_file: rover_pass.trace}\nspeed: 3\n");
    let (code, _, err) = run(&["check", "--config", &cfg]);
    assert_eq!(code, 3);
    assert!(err.contains("speed"), "{err}");

    let cfg = rover_config(dir.path(), "input: {trace_file: rover_pass.trace}\n");
    fs::write(dir.path().join("rover_mapping.json"), r#"{"/rover/inspect_9": "inspect.9"}"#).unwrap();
    let (code, _, err) = run(&["check", "--config", &cfg]);
    assert_eq!(code, 3);
    assert!(err.contains("inspect.9"), "{err}");

    let cfg = rover_config(dir.path(), "input: {trace_file: rover_pass.trace}\nobservable_events: [teleport]\n");
    assert_eq!(run(&["check", "--config", &cfg]).0, 3);
}

#[test]
fn limits_and_io_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = rover_config(dir.path(), "input: {trace_file: rover_pass.trace}\nlimits: {max_states: 50}\n");
    let (code, _, err) = run(&["check", "--config", &cfg]);
    assert_eq!(code, 4);
    assert!(err.contains("limit exceeded"), "{err}");
    let cfg = rover_config(dir.path(), "input: {trace_file: missing.trace}\n");
    assert_eq!(run(&["check", "--config", &cfg]).0, 4);
}

#[test]
fn hidden_inspect_fails_the_gate_before_monitoring() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = rover_config(
        dir.path(),
        "input: {trace_file: rover_pass.trace}\nobservable_events: [mission_start, mission_complete, mission_abort, move, radiation_level]\n",
    );
    let (code, out, err) = run(&["check", "--config", &cfg]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("after <mission_start> `move.0`"), "{err}");
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let (code, _, _) = run(&["bench", "--sizes", "4,8", "--lengths", "100", "--reps", "2", "--out", &out.to_string_lossy()]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n_states,n_transitions,trace_len,rep,seed,synth_s,check_s,mean_event_s");
    assert_eq!(lines.len(), 1 + 2 + 4);
    assert!(lines[1].starts_with("4,16,,,0,"));
    assert_eq!(run(&["bench", "--sizes", "0"]).0, 3);
}

#[test]
fn listen_once_over_tcp() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = rover_config(
        dir.path(),
        "input:\n  listen: {protocol: tcp, port: 0}\nreport_path: sessions.log\n",
    );
    let mut child = Command::new(env!("CARGO_BIN_EXE_cspmon"))
        .args(["listen", "--config", &cfg, "--once"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut banner = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut banner).unwrap();
    let addr = banner.split_whitespace().nth(2).unwrap().to_string();
    assert!(banner.ends_with("(tcp, permissive mode)\n"), "{banner}");

    let mut s = TcpStream::connect(&addr).unwrap();
    for e in ["mission_start", "/rover/inspect_2", "radiation_level.Red", "move.2"] {
        writeln!(s, "{{\"event\": \"{e}\"}}").unwrap();
    }
    writeln!(s, "not json").unwrap();
    s.shutdown(std::net::Shutdown::Write).unwrap();
    let replies: Vec<String> = BufReader::new(s).lines().map(Result::unwrap).collect();
    assert_eq!(replies[..3], [r#"{"verdict":"pass"}"#; 3]);
    assert_eq!(
        replies[3],
        r#"{"verdict":"fail","failing_event":"move.2","acceptable":["move.0"],"trace_len":4}"#
    );
    assert!(replies[4].starts_with(r#"{"error":"#));
    assert_eq!(child.wait().unwrap().code(), Some(1));
    let log = fs::read_to_string(dir.path().join("sessions.log")).unwrap();
    assert!(log.contains("closed: fail at event 4 (move.2) after 4 events"), "{log}");
}
