use std::collections::BTreeSet;

use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cspmon_core::lts::{check_determinism, determinize, synthesize_lts, SynthesisLimits};
use cspmon_core::monitor::check_trace;
use cspmon_core::syntax::{parse_entry, parse_spec, validate_spec, Entry, ResolvedSpec};
use cspmon_core::{Event, Mode, Observed};
use cspmon_oracle::{compare_exhaustive, generate_spec, monitor_oracle, Interpreter, Outcome, FOREIGN};

const SEEDS: u64 = 300;

fn load(seed: u64) -> (ResolvedSpec, Entry, String) {
    let g = generate_spec(seed);
    let spec = validate_spec(parse_spec(&g.source).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{}", g.source)))
        .unwrap_or_else(|e| panic!("seed {seed}: {e}\n{}", g.source));
    let entry = spec.resolve_entry(&parse_entry(&g.entry).unwrap()).unwrap();
    (spec, entry, g.source)
}

/// Hides up to two random events in about half of the cases.
fn observable(seed: u64, alphabet: &BTreeSet<Event>) -> Option<BTreeSet<Event>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    if rng.gen_bool(0.5) {
        return None;
    }
    let n = rng.gen_range(1..=2).min(alphabet.len());
    let hidden: BTreeSet<&Event> = alphabet.iter().choose_multiple(&mut rng, n).into_iter().collect();
    Some(alphabet.iter().filter(|e| !hidden.contains(e)).cloned().collect())
}

#[test]
fn generated_specs_round_trip_through_the_printer() {
    for seed in 0..SEEDS {
        let g = generate_spec(seed);
        let parsed = parse_spec(&g.source).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{}", g.source));
        assert_eq!(parsed, g.spec, "seed {seed}\n{}", g.source);
    }
}

#[test]
fn generation_is_reproducible() {
    assert_eq!(generate_spec(7).source, generate_spec(7).source);
    assert_ne!(generate_spec(7).source, generate_spec(8).source);
}

#[test]
fn reachability_counts_match_synthesis() {
    for seed in 0..SEEDS {
        let (spec, entry, src) = load(seed);
        let lts = synthesize_lts(&spec, &entry, &SynthesisLimits::default()).unwrap();
        let reach = Interpreter::new(&spec).reachable(&entry);
        assert_eq!(
            (reach.states, reach.transitions),
            (lts.state_count(), lts.transition_count()),
            "seed {seed}\n{src}"
        );
    }
}

#[test]
fn initials_match_events_of_along_every_path() {
    for seed in 0..SEEDS {
        let (spec, entry, src) = load(seed);
        let lts = synthesize_lts(&spec, &entry, &SynthesisLimits::default()).unwrap();
        if !lts.is_deterministic() {
            continue;
        }
        let interp = Interpreter::new(&spec);
        let mut todo = vec![(lts.initial(), interp.start(&entry))];
        let mut seen = std::collections::HashSet::new();
        while let Some((s, st)) = todo.pop() {
            if !seen.insert(s) {
                continue;
            }
            assert_eq!(interp.initials(&st), lts.events_of(s).unwrap(), "seed {seed}\n{src}");
            for e in interp.initials(&st) {
                let next = interp.after(&st, &e);
                assert_eq!(next.len(), 1);
                let t = lts.successor(s, lts.event_id(&e).unwrap()).unwrap();
                todo.push((t, next.into_iter().next().unwrap()));
            }
        }
    }
}

#[test]
fn monitor_agrees_with_interpreter_exhaustively() {
    for seed in 0..SEEDS {
        let (spec, entry, src) = load(seed);
        let alphabet = Interpreter::new(&spec).alphabet();
        let observable = observable(seed, &alphabet);
        if let Err(d) = compare_exhaustive(&spec, &entry, observable.as_ref(), 6) {
            panic!("seed {seed}: {d:?}\nobservable {observable:?}\n{src}");
        }
    }
}

#[test]
fn check_trace_agrees_with_accepts_on_random_traces() {
    for seed in 0..SEEDS {
        let (spec, entry, src) = load(seed);
        let interp = Interpreter::new(&spec);
        let alphabet: Vec<Event> = interp.alphabet().into_iter().collect();
        let observable = observable(seed, &interp.alphabet());
        let oracle = std::sync::Arc::new(monitor_oracle(&spec, &entry, observable.as_ref()));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let len = rng.gen_range(0..=8);
            let trace: Vec<Observed> = (0..len)
                .map(|_| {
                    if rng.gen_bool(0.1) {
                        Observed::Event(Event::bare(FOREIGN))
                    } else {
                        Observed::Event(alphabet[rng.gen_range(0..alphabet.len())].clone())
                    }
                })
                .collect();
            for mode in [Mode::Strict, Mode::Permissive] {
                let report = check_trace(oracle.clone(), mode, trace.clone()).unwrap();
                let monitor = report.verdict.failure().map_or(Outcome::Pass, |f| Outcome::Fail(f.index));
                let reference = interp.accepts(&entry, mode, observable.as_ref(), &trace);
                assert_eq!(monitor, reference, "seed {seed} {mode} {trace:?}\n{src}");
            }
        }
    }
}

#[test]
fn deterministic_without_hiding_means_determinize_is_identity() {
    for seed in 0..SEEDS {
        let (spec, entry, _) = load(seed);
        let lts = synthesize_lts(&spec, &entry, &SynthesisLimits::default()).unwrap();
        let d = determinize(&lts, &SynthesisLimits::default()).unwrap();
        assert!(d.is_deterministic());
        if check_determinism(&lts, &SynthesisLimits::default()).unwrap().deterministic() && lts.is_deterministic() {
            assert_eq!(d, lts);
        }
    }
}
