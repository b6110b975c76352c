use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use super::{EventId, Label, Lts, LtsError, StateId, SynthesisLimits, Transition};
use crate::event::Event;

/// A sorted set of source states, closed under `Tau`.
type Macro = Vec<StateId>;

fn tau_closure(lts: &Lts, seeds: impl IntoIterator<Item = StateId>) -> Macro {
    let mut out: Macro = seeds.into_iter().collect();
    out.sort_unstable();
    out.dedup();
    let mut seen: HashSet<StateId> = out.iter().copied().collect();
    let mut stack = out.clone();
    while let Some(s) = stack.pop() {
        for t in lts.successors(s, Label::Tau) {
            if seen.insert(t) {
                out.push(t);
                stack.push(t);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Visible (label, successor macro-state) pairs of `m`, by ascending label.
fn moves(lts: &Lts, m: &Macro) -> Vec<(Label, Macro)> {
    let mut pairs: Vec<(Label, StateId)> = m
        .iter()
        .flat_map(|&s| lts.transitions(s))
        .filter(|t| t.label != Label::Tau)
        .map(|t| (t.label, t.target))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    let mut out = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let label = pairs[i].0;
        let j = i + pairs[i..].partition_point(|p| p.0 == label);
        out.push((label, tau_closure(lts, pairs[i..j].iter().map(|p| p.1))));
        i = j;
    }
    out
}

fn macro_name(lts: &Lts, m: &Macro) -> String {
    if m.len() == 1 {
        return lts.state_name(m[0]).to_string();
    }
    let names: Vec<&str> = m.iter().map(|&s| lts.state_name(s)).collect();
    format!("{{{}}}", names.join(" | "))
}

/// `Tau`-closure subset construction. The result has no `Tau` transitions
/// and at most one transition per label from every state. `Tick` is kept as
/// an ordinary label, so a macro-state can terminate iff some member can.
///
/// A `Tau`-free, already deterministic LTS with every state reachable is
/// returned unchanged.
pub fn determinize(lts: &Lts, limits: &SynthesisLimits) -> Result<Lts, LtsError> {
    if lts.is_deterministic() && lts.all_reachable() {
        return Ok(lts.clone());
    }
    let start = tau_closure(lts, [lts.initial()]);
    let mut ids: HashMap<Macro, StateId> = HashMap::from([(start.clone(), StateId(0))]);
    let mut queue = VecDeque::from([start]);
    let mut edges = Vec::new();
    let mut names = Vec::new();
    let mut transitions = 0;
    while let Some(m) = queue.pop_front() {
        let mut out = Vec::new();
        for (label, target) in moves(lts, &m) {
            let next = ids.len();
            let id = *ids.entry(target).or_insert_with_key(|k| {
                queue.push_back(k.clone());
                StateId(next as u32)
            });
            if ids.len() > limits.max_states {
                return Err(LtsError::LimitExceeded {
                    what: "states",
                    limit: limits.max_states,
                    reached: ids.len(),
                });
            }
            out.push(Transition { label, target: id });
        }
        transitions += out.len();
        if transitions > limits.max_transitions {
            return Err(LtsError::LimitExceeded {
                what: "transitions",
                limit: limits.max_transitions,
                reached: transitions,
            });
        }
        names.push(macro_name(lts, &m));
        edges.push(out);
    }
    Ok(Lts::from_parts(lts.alphabet().to_vec(), StateId(0), edges, names))
}

/// A visible trace after which the process may both accept and refuse
/// `event`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub trace: Vec<Event>,
    pub event: Event,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let trace: Vec<String> = self.trace.iter().map(ToString::to_string).collect();
        write!(f, "after <{}> `{}` may be both accepted and refused", trace.join(", "), self.event)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterminismReport {
    pub witness: Option<Witness>,
}

impl DeterminismReport {
    pub fn deterministic(&self) -> bool {
        self.witness.is_none()
    }
}

/// Smallest event offered by some member of `m` but refused by a stable one.
fn ambiguous_event(lts: &Lts, m: &Macro) -> Option<EventId> {
    let offers: Vec<Vec<EventId>> = m.iter().map(|&s| lts.event_ids_of(s).collect()).collect();
    let mut union: Vec<EventId> = offers.iter().flatten().copied().collect();
    union.sort_unstable();
    union.dedup();
    let stable = m
        .iter()
        .zip(&offers)
        .filter(|(&s, _)| lts.successors(s, Label::Tau).next().is_none());
    stable
        .filter_map(|(_, own)| union.iter().find(|e| own.binary_search(e).is_err()).copied())
        .min()
}

/// Explores the subset construction breadth-first and reports the first
/// macro-state in which a `Tau`-stable member refuses an event that another
/// member offers. Breadth-first order makes the witness trace a shortest one.
pub fn check_determinism(lts: &Lts, limits: &SynthesisLimits) -> Result<DeterminismReport, LtsError> {
    if lts.is_deterministic() {
        return Ok(DeterminismReport { witness: None });
    }
    let start = tau_closure(lts, [lts.initial()]);
    // Parent pointers for witness reconstruction: (parent index, event).
    let mut parents: Vec<Option<(usize, EventId)>> = vec![None];
    let mut ids: HashMap<Macro, usize> = HashMap::from([(start.clone(), 0)]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((m, idx)) = queue.pop_front() {
        if let Some(event) = ambiguous_event(lts, &m) {
            let mut trace = Vec::new();
            let mut at = idx;
            while let Some((p, e)) = parents[at] {
                trace.push(lts.event(e).clone());
                at = p;
            }
            trace.reverse();
            return Ok(DeterminismReport {
                witness: Some(Witness {
                    trace,
                    event: lts.event(event).clone(),
                }),
            });
        }
        for (label, target) in moves(lts, &m) {
            let Label::Event(e) = label else { continue };
            if ids.contains_key(&target) {
                continue;
            }
            if ids.len() >= limits.max_states {
                return Err(LtsError::LimitExceeded {
                    what: "states",
                    limit: limits.max_states,
                    reached: ids.len() + 1,
                });
            }
            let next = parents.len();
            parents.push(Some((idx, e)));
            ids.insert(target.clone(), next);
            queue.push_back((target, next));
        }
    }
    Ok(DeterminismReport { witness: None })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::lts::{hide, synthesize_lts};
    use crate::syntax::{parse_entry, parse_spec, validate_spec};

    fn synth(src: &str) -> Lts {
        let spec = validate_spec(parse_spec(src).unwrap()).unwrap();
        let entry = spec.resolve_entry(&parse_entry("P").unwrap()).unwrap();
        synthesize_lts(&spec, &entry, &SynthesisLimits::default()).unwrap()
    }

    fn ev(s: &str) -> Event {
        s.parse().unwrap()
    }

    const BRANCH: &str = "channel a, b, c\nP = (a -> b -> SKIP) [] (a -> c -> SKIP)";

    #[test]
    fn linear_process_is_deterministic() {
        let l = synth("channel a\nP = a -> SKIP");
        assert!(check_determinism(&l, &SynthesisLimits::default()).unwrap().deterministic());
        assert_eq!(determinize(&l, &SynthesisLimits::default()).unwrap(), l);
    }

    #[test]
    fn branching_prefix_witness() {
        let l = synth(BRANCH);
        let report = check_determinism(&l, &SynthesisLimits::default()).unwrap();
        assert_eq!(
            report.witness,
            Some(Witness {
                trace: vec![ev("a")],
                event: ev("b"),
            })
        );
    }

    #[test]
    fn branching_prefix_merges_after_a() {
        let d = determinize(&synth(BRANCH), &SynthesisLimits::default()).unwrap();
        assert!(d.is_deterministic());
        let after_a = d.successor(d.initial(), d.event_id(&ev("a")).unwrap()).unwrap();
        assert_eq!(d.events_of(after_a).unwrap(), BTreeSet::from([ev("b"), ev("c")]));
        // {P}, {b -> SKIP, c -> SKIP}, {SKIP}, {terminated}
        assert_eq!(d.state_count(), 4);
    }

    #[test]
    fn hidden_step_leaves_a_loop_on_a() {
        let l = synth("channel a, b\nP = a -> b -> P");
        let h = hide(&l, &BTreeSet::from([ev("b")])).unwrap();
        assert_eq!(h.alphabet(), &[ev("a")]);
        assert!(check_determinism(&h, &SynthesisLimits::default()).unwrap().deterministic());
        let d = determinize(&h, &SynthesisLimits::default()).unwrap();
        // {P} --a--> {b -> P, P} --a--> itself: every state offers exactly a.
        assert_eq!(d.state_count(), 2);
        let a = Label::Event(EventId(0));
        assert_eq!(d.transitions(StateId(0)), &[Transition { label: a, target: StateId(1) }]);
        assert_eq!(d.transitions(StateId(1)), &[Transition { label: a, target: StateId(1) }]);
    }

    #[test]
    fn hiding_can_introduce_refusals() {
        // After hiding h, the initial macro-state holds P (offers a) and the
        // stable Q (offers only b).
        let l = synth("channel a, b, h\nP = a -> P [] h -> Q\nQ = b -> Q");
        let h = hide(&l, &BTreeSet::from([ev("h")])).unwrap();
        let report = check_determinism(&h, &SynthesisLimits::default()).unwrap();
        assert_eq!(report.witness.unwrap(), Witness { trace: vec![], event: ev("a") });
    }

    #[test]
    fn limits_apply() {
        let l = synth(BRANCH);
        let err = determinize(&l, &SynthesisLimits::new(2, 100).unwrap()).unwrap_err();
        assert!(matches!(err, LtsError::LimitExceeded { what: "states", .. }));
    }
}
