use std::fs;
use std::path::PathBuf;

use cspmon::bench::{inject_fault, rover_trace, FaultKind};
use cspmon::config::{load_config, Input};
use cspmon::mapping::{load_mapping, Mapping};
use cspmon::trace::read_trace;
use cspmon_core::{Mode, Observed, Value};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn lines(trace: &[Observed]) -> String {
    trace.iter().map(|e| format!("{e}\n")).collect()
}

#[test]
fn pass_trace_matches_its_construction() {
    assert_eq!(fs::read_to_string(fixture("rover_pass.trace")).unwrap(), lines(&rover_trace()));
}

#[test]
fn fault_traces_match_injection() {
    let base = rover_trace();
    for (file, kind) in [
        ("rover_red.trace", FaultKind::RadiationViolation),
        ("rover_swap.trace", FaultKind::SwapAdjacent(39)),
        ("rover_mismatch.trace", FaultKind::ParamMismatch(122, Value::Int(4))),
    ] {
        let (mutated, _) = inject_fault(&base, &kind).unwrap();
        assert_eq!(fs::read_to_string(fixture(file)).unwrap(), lines(&mutated), "{file}");
    }
}

#[test]
fn rover_config_loads() {
    let cfg = load_config(&fixture("rover.yaml")).unwrap();
    assert_eq!(cfg.entry_process, "MAIN");
    assert_eq!(cfg.mode, Mode::Permissive);
    assert_eq!(cfg.input, Input::TraceFile(fixture("rover_pass.trace")));
    let listen = load_config(&fixture("rover_listen.yaml")).unwrap();
    assert!(matches!(listen.input, Input::Listen { port: 7878, .. }));
}

#[test]
fn fixture_mapping() {
    let m = load_mapping(&fixture("rover_mapping.json")).unwrap();
    assert_eq!(m.len(), 16);
    assert_eq!(m.map_event("/rover/inspect_2"), Observed::Event("inspect.2".parse().unwrap()));
}

#[test]
fn trace_file_streams_every_line() {
    let events: Vec<Observed> = read_trace(&fixture("rover_pass.trace"), &Mapping::default())
        .unwrap()
        .collect::<Result<_, _>>()
        .unwrap();
    assert_eq!(events, rover_trace());
}
