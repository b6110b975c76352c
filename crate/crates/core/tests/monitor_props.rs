use std::sync::Arc;

use proptest::prelude::*;

use cspmon_core::lts::{determinize, synthesize_lts, SynthesisLimits};
use cspmon_core::monitor::{check_trace, next_strict, TraceReport};
use cspmon_core::syntax::{parse_entry, parse_spec, validate_spec};
use cspmon_core::{Lts, Mode, Observed, Session, Verdict};

const ROVER: &str = include_str!("../../../fixtures/rover_loop.csp");

fn oracle() -> Arc<Lts> {
    let spec = validate_spec(parse_spec(ROVER).unwrap()).unwrap();
    let entry = spec.resolve_entry(&parse_entry("MAIN").unwrap()).unwrap();
    let lts = synthesize_lts(&spec, &entry, &SynthesisLimits::default()).unwrap();
    Arc::new(determinize(&lts, &SynthesisLimits::default()).unwrap())
}

/// Random traces biased towards events the oracle currently offers, so that
/// runs get past the first few steps.
fn traces() -> impl Strategy<Value = Vec<(u8, u8)>> {
    prop::collection::vec((any::<u8>(), any::<u8>()), 0..40)
}

fn materialize(o: &Lts, picks: &[(u8, u8)]) -> Vec<Observed> {
    let foreign = ["/odom", "battery_low", "/tf"];
    let mut s = Some(o.initial());
    picks
        .iter()
        .map(|&(kind, k)| {
            let offered: Vec<_> = s.map(|s| o.event_ids_of(s).collect()).unwrap_or_default();
            let e = match kind % 8 {
                0 => Observed::Unmapped(foreign[k as usize % foreign.len()].into()),
                1 | 2 => Observed::Event(o.alphabet()[k as usize % o.alphabet().len()].clone()),
                _ if !offered.is_empty() => Observed::Event(o.event(offered[k as usize % offered.len()]).clone()),
                _ => Observed::Event(o.alphabet()[0].clone()),
            };
            s = s.and_then(|st| next_strict(o, st, &e).ok());
            e
        })
        .collect()
}

fn fail_index(r: &TraceReport) -> usize {
    r.verdict.failure().map_or(usize::MAX, |f| f.index)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn failure_is_absorbing(picks in traces(), extra in traces()) {
        let o = oracle();
        for mode in [Mode::Strict, Mode::Permissive] {
            let mut session = Session::new(o.clone(), mode).unwrap();
            let mut first_fail: Option<Verdict> = None;
            for e in materialize(&o, &picks).into_iter().chain(materialize(&o, &extra)) {
                let v = session.step(e);
                match &first_fail {
                    Some(f) => prop_assert_eq!(&v, f),
                    None if !v.is_pass() => first_fail = Some(v),
                    None => {}
                }
            }
            prop_assert_eq!(session.trace().len(), picks.len() + extra.len());
        }
    }

    #[test]
    fn strict_fails_no_later_than_permissive(picks in traces()) {
        let o = oracle();
        let trace = materialize(&o, &picks);
        let strict = check_trace(o.clone(), Mode::Strict, trace.clone()).unwrap();
        let permissive = check_trace(o.clone(), Mode::Permissive, trace).unwrap();
        prop_assert!(fail_index(&strict) <= fail_index(&permissive));
    }

    #[test]
    fn permissive_ignores_foreign_events(picks in traces()) {
        let o = oracle();
        let trace = materialize(&o, &picks);
        let filtered: Vec<Observed> = trace
            .iter()
            .filter(|e| matches!(e, Observed::Event(ev) if o.event_id(ev).is_some()))
            .cloned()
            .collect();
        let full = check_trace(o.clone(), Mode::Permissive, trace).unwrap();
        let kept = check_trace(o.clone(), Mode::Permissive, filtered).unwrap();
        match (&full.verdict, &kept.verdict) {
            (Verdict::PassSoFar(a), Verdict::PassSoFar(b)) => prop_assert_eq!(a, b),
            (Verdict::Fail(a), Verdict::Fail(b)) => {
                prop_assert_eq!(&a.event, &b.event);
                prop_assert_eq!(&a.counterexample.acceptable, &b.counterexample.acceptable);
                prop_assert_eq!(a.counterexample.state, b.counterexample.state);
            }
            _ => prop_assert!(false, "verdicts differ: {:?} vs {:?}", full.verdict, kept.verdict),
        }
    }

    #[test]
    fn verdicts_are_reproducible(picks in traces()) {
        let o = oracle();
        let trace = materialize(&o, &picks);
        for mode in [Mode::Strict, Mode::Permissive] {
            let a = check_trace(o.clone(), mode, trace.clone()).unwrap();
            let b = check_trace(o.clone(), mode, trace.clone()).unwrap();
            prop_assert_eq!(a.verdict, b.verdict);
            prop_assert_eq!(a.events_checked, b.events_checked);
        }
    }

    #[test]
    fn counterexamples_are_sound(picks in traces()) {
        let o = oracle();
        for mode in [Mode::Strict, Mode::Permissive] {
            let r = check_trace(o.clone(), mode, materialize(&o, &picks)).unwrap();
            let Some(f) = r.verdict.failure() else { continue };
            let cx = &f.counterexample;
            prop_assert_eq!(&cx.acceptable, &o.events_of(cx.state).unwrap());
            prop_assert_eq!(cx.failing_trace.len(), f.index + 1);
            let prefix = cx.failing_trace[..f.index].to_vec();
            let replay = check_trace(o.clone(), mode, prefix).unwrap();
            prop_assert_eq!(replay.verdict, Verdict::PassSoFar(cx.state));
        }
    }
}

#[test]
fn events_of_stays_in_alphabet() {
    let o = oracle();
    for s in o.states() {
        for e in o.events_of(s).unwrap() {
            assert!(o.event_id(&e).is_some());
        }
    }
}
