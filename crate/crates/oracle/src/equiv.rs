//! Exhaustive comparison of the monitor with the interpreter.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use cspmon_core::lts::{determinize, hide, synthesize_lts, StateId, SynthesisLimits};
use cspmon_core::monitor::next_state;
use cspmon_core::syntax::{Entry, ResolvedSpec};
use cspmon_core::{Event, Lts, Mode, Observed};

use crate::interp::{InterpState, Interpreter};

/// Channel name of the event no generated alphabet contains.
pub const FOREIGN: &str = "foreign";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Agreement {
    /// Distinct (monitor state, interpreter state set) pairs visited.
    pub pairs: usize,
    /// Single-event verdicts compared.
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Disagreement {
    pub mode: Mode,
    pub trace: Vec<Observed>,
    pub monitor_accepts: bool,
    pub reference_accepts: bool,
}

/// The oracle LTS the monitor would run: synthesized, with every alphabet
/// event outside `observable` hidden, then determinized.
pub fn monitor_oracle(spec: &ResolvedSpec, entry: &Entry, observable: Option<&BTreeSet<Event>>) -> Lts {
    let limits = SynthesisLimits::default();
    let lts = synthesize_lts(spec, entry, &limits).expect("synthesis");
    let hidden: BTreeSet<Event> = match observable {
        Some(o) => lts.alphabet().iter().filter(|e| !o.contains(e)).cloned().collect(),
        None => BTreeSet::new(),
    };
    let lts = hide(&lts, &hidden).expect("hidden events come from the alphabet");
    determinize(&lts, &limits).expect("determinization")
}

/// Compares single-step verdicts of the monitor and the interpreter for
/// every trace of length up to `depth` over the full alphabet plus one
/// foreign event, in both modes.
///
/// Both sides are functions of their current state, so each pair of states
/// is expanded once, at the smallest depth it is reached.
pub fn compare_exhaustive(
    spec: &ResolvedSpec,
    entry: &Entry,
    observable: Option<&BTreeSet<Event>>,
    depth: usize,
) -> Result<Agreement, Disagreement> {
    let oracle = monitor_oracle(spec, entry, observable);
    let interp = Interpreter::new(spec);
    let visible = interp.visible(observable);
    let mut events: Vec<Observed> = interp.alphabet().into_iter().map(Observed::Event).collect();
    events.push(Observed::Event(Event::bare(FOREIGN)));

    let mut total = Agreement::default();
    for mode in [Mode::Strict, Mode::Permissive] {
        let mut ids: HashMap<InterpState, usize> = HashMap::new();
        let mut key = |set: &[InterpState]| {
            let mut k: Vec<usize> = set
                .iter()
                .map(|s| {
                    let n = ids.len();
                    *ids.entry(s.clone()).or_insert(n)
                })
                .collect();
            k.sort_unstable();
            k
        };
        let start = interp.initial_set(entry, &visible);
        let mut seen: HashSet<(StateId, Vec<usize>)> = HashSet::from([(oracle.initial(), key(&start))]);
        let mut queue = VecDeque::from([(oracle.initial(), start, Vec::<Observed>::new())]);
        while let Some((s, set, trace)) = queue.pop_front() {
            total.pairs += 1;
            if trace.len() == depth {
                continue;
            }
            for e in &events {
                total.steps += 1;
                let m = next_state(&oracle, mode, s, e).ok();
                let r = interp.step_set(&set, mode, &visible, e);
                let mut extended = trace.clone();
                extended.push(e.clone());
                match (m, r) {
                    (None, None) => {}
                    (Some(s2), Some(set2)) => {
                        if seen.insert((s2, key(&set2))) {
                            queue.push_back((s2, set2, extended));
                        }
                    }
                    (m, r) => {
                        return Err(Disagreement {
                            mode,
                            trace: extended,
                            monitor_accepts: m.is_some(),
                            reference_accepts: r.is_some(),
                        })
                    }
                }
            }
        }
    }
    Ok(total)
}
