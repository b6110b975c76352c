//! Labelled transition systems: synthesis from a resolved specification,
//! hiding, determinization and the determinism gate.

mod alphabet;
mod determinize;
mod hide;
mod synth;
mod term;

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::event::Event;
use crate::value::{EvalError, Value};

pub use alphabet::enumerate_alphabet;
pub use determinize::{check_determinism, determinize, DeterminismReport, Witness};
pub use hide::hide;
pub use synth::synthesize_lts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index into [`Lts::alphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Event(EventId),
    Tau,
    /// Successful termination of `SKIP`. Never part of the alphabet.
    Tick,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub label: Label,
    pub target: StateId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthesisLimits {
    pub max_states: usize,
    pub max_transitions: usize,
}

impl Default for SynthesisLimits {
    fn default() -> Self {
        SynthesisLimits {
            max_states: 1_000_000,
            max_transitions: 10_000_000,
        }
    }
}

impl SynthesisLimits {
    pub fn new(max_states: usize, max_transitions: usize) -> Result<Self, LtsError> {
        if max_states == 0 || max_transitions == 0 {
            return Err(LtsError::BadLimits);
        }
        Ok(SynthesisLimits {
            max_states,
            max_transitions,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtsError {
    #[error("synthesis limit exceeded: {reached} {what} (limit {limit})")]
    LimitExceeded {
        what: &'static str,
        limit: usize,
        reached: usize,
    },
    #[error("synthesis limits must be positive")]
    BadLimits,
    #[error("evaluation failed in {context}: {source}")]
    Eval { context: String, source: EvalError },
    #[error("channel `{channel}` has an empty domain for parameter {param}")]
    EmptyDomain { channel: String, param: usize },
    #[error("value {value} is outside the domain of channel `{channel}`")]
    OutOfDomain { channel: String, value: Value },
    #[error("no clause of `{process}` matches arguments ({args})")]
    NoMatchingClause { process: String, args: String },
    #[error("unguarded recursion through {0}")]
    UnguardedRecursion(String),
    #[error("event {0} is not in the alphabet")]
    NotInAlphabet(Event),
    #[error("unknown state {0}")]
    UnknownState(StateId),
    #[error("transition {0} refers to a state or event that does not exist")]
    BadTransition(usize),
}

/// An explicit LTS. States are `0..state_count()`; transitions leaving each
/// state are kept sorted by label, then target, without duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lts {
    alphabet: Vec<Event>,
    index: HashMap<Event, EventId>,
    initial: StateId,
    edges: Vec<Vec<Transition>>,
    names: Vec<String>,
    transitions: usize,
}

impl Lts {
    /// Builds an LTS from raw parts, checking that every endpoint and label
    /// exists. States are named by their index.
    pub fn new(
        alphabet: impl IntoIterator<Item = Event>,
        states: usize,
        initial: StateId,
        transitions: impl IntoIterator<Item = (StateId, Label, StateId)>,
    ) -> Result<Lts, LtsError> {
        let alphabet: Vec<Event> = alphabet.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if initial.index() >= states {
            return Err(LtsError::UnknownState(initial));
        }
        let mut edges = vec![Vec::new(); states];
        for (i, (src, label, dst)) in transitions.into_iter().enumerate() {
            let label_ok = match label {
                Label::Event(e) => (e.0 as usize) < alphabet.len(),
                _ => true,
            };
            if src.index() >= states || dst.index() >= states || !label_ok {
                return Err(LtsError::BadTransition(i));
            }
            edges[src.index()].push(Transition { label, target: dst });
        }
        let names = (0..states).map(|i| format!("s{i}")).collect();
        Ok(Lts::from_parts(alphabet, initial, edges, names))
    }

    /// `alphabet` must be sorted; `edges` may be unsorted.
    pub(crate) fn from_parts(
        alphabet: Vec<Event>,
        initial: StateId,
        mut edges: Vec<Vec<Transition>>,
        names: Vec<String>,
    ) -> Lts {
        debug_assert!(alphabet.windows(2).all(|w| w[0] < w[1]));
        let mut transitions = 0;
        for out in &mut edges {
            out.sort_unstable();
            out.dedup();
            transitions += out.len();
        }
        let index = alphabet
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), EventId(i as u32)))
            .collect();
        Lts {
            alphabet,
            index,
            initial,
            edges,
            names,
            transitions,
        }
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn state_count(&self) -> usize {
        self.edges.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions
    }

    /// Transitions labelled by visible events only.
    pub fn event_transition_count(&self) -> usize {
        self.edges
            .iter()
            .flatten()
            .filter(|t| matches!(t.label, Label::Event(_)))
            .count()
    }

    /// The alphabet, sorted. `EventId(i)` names `alphabet()[i]`.
    pub fn alphabet(&self) -> &[Event] {
        &self.alphabet
    }

    pub fn event_id(&self, event: &Event) -> Option<EventId> {
        self.index.get(event).copied()
    }

    pub fn event(&self, id: EventId) -> &Event {
        &self.alphabet[id.0 as usize]
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.edges.len() as u32).map(StateId)
    }

    pub fn contains(&self, s: StateId) -> bool {
        s.index() < self.edges.len()
    }

    pub fn transitions(&self, s: StateId) -> &[Transition] {
        &self.edges[s.index()]
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.names[s.index()]
    }

    pub fn label_text(&self, label: Label) -> String {
        match label {
            Label::Event(e) => self.event(e).to_string(),
            Label::Tau => "tau".into(),
            Label::Tick => "tick".into(),
        }
    }

    /// Targets of `s` under `label`.
    pub fn successors(&self, s: StateId, label: Label) -> impl Iterator<Item = StateId> + '_ {
        let out = &self.edges[s.index()];
        let start = out.partition_point(|t| t.label < label);
        out[start..]
            .iter()
            .take_while(move |t| t.label == label)
            .map(|t| t.target)
    }

    /// The target of `s` under event `e`, for a deterministic LTS.
    pub fn successor(&self, s: StateId, e: EventId) -> Option<StateId> {
        let out = &self.edges[s.index()];
        out.binary_search_by(|t| t.label.cmp(&Label::Event(e)))
            .ok()
            .map(|i| out[i].target)
    }

    /// Ids of the events offered at `s`, ascending.
    pub fn event_ids_of(&self, s: StateId) -> impl Iterator<Item = EventId> + '_ {
        let mut last = None;
        self.edges[s.index()].iter().filter_map(move |t| match t.label {
            Label::Event(e) if last != Some(e) => {
                last = Some(e);
                Some(e)
            }
            _ => None,
        })
    }

    /// `Events(s)`: labels of the visible transitions leaving `s`.
    pub fn events_of(&self, s: StateId) -> Result<BTreeSet<Event>, LtsError> {
        if !self.contains(s) {
            return Err(LtsError::UnknownState(s));
        }
        Ok(self.event_ids_of(s).map(|e| self.event(e).clone()).collect())
    }

    pub fn has_tau(&self) -> bool {
        self.edges
            .iter()
            .flatten()
            .any(|t| t.label == Label::Tau)
    }

    /// No `Tau`, and no two transitions from one state share a label.
    pub fn is_deterministic(&self) -> bool {
        self.edges.iter().all(|out| {
            out.iter().all(|t| t.label != Label::Tau)
                && out.windows(2).all(|w| w[0].label != w[1].label)
        })
    }

    pub(crate) fn all_reachable(&self) -> bool {
        let mut seen = vec![false; self.edges.len()];
        let mut stack = vec![self.initial];
        seen[self.initial.index()] = true;
        let mut count = 1;
        while let Some(s) = stack.pop() {
            for t in &self.edges[s.index()] {
                if !seen[t.target.index()] {
                    seen[t.target.index()] = true;
                    count += 1;
                    stack.push(t.target);
                }
            }
        }
        count == self.edges.len()
    }

    /// Text dump: a header followed by one line per transition.
    ///
    /// ```text
    /// initial 0
    /// alphabet a, b.1
    /// states 2
    /// transitions 2
    /// state 0 P
    /// state 1 b.1 -> P
    /// 0 --a--> 1
    /// 1 --b.1--> 0
    /// ```
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "initial {}", self.initial);
        out.push_str("alphabet ");
        for (i, e) in self.alphabet.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{e}");
        }
        out.push('\n');
        let _ = writeln!(out, "states {}", self.state_count());
        let _ = writeln!(out, "transitions {}", self.transitions);
        for s in self.states() {
            let _ = writeln!(out, "state {s} {}", self.state_name(s));
        }
        for s in self.states() {
            for t in self.transitions(s) {
                let _ = writeln!(out, "{s} --{}--> {}", self.label_text(t.label), t.target);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Lts {
        let a = Event::bare("a");
        let b = Event::bare("b");
        Lts::new(
            [b, a],
            2,
            StateId(0),
            [
                (StateId(0), Label::Event(EventId(0)), StateId(1)),
                (StateId(1), Label::Event(EventId(1)), StateId(0)),
                (StateId(1), Label::Tick, StateId(1)),
                (StateId(0), Label::Event(EventId(0)), StateId(1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn construction_normalises() {
        let lts = tiny();
        assert_eq!(lts.alphabet()[0], Event::bare("a"));
        assert_eq!(lts.transition_count(), 3);
        assert_eq!(lts.successor(StateId(0), EventId(0)), Some(StateId(1)));
        assert_eq!(lts.successor(StateId(0), EventId(1)), None);
        assert_eq!(
            lts.events_of(StateId(1)).unwrap(),
            BTreeSet::from([Event::bare("b")])
        );
        assert!(lts.is_deterministic());
    }

    #[test]
    fn rejects_dangling_edges() {
        let err = Lts::new(
            [Event::bare("a")],
            1,
            StateId(0),
            [(StateId(0), Label::Event(EventId(0)), StateId(3))],
        )
        .unwrap_err();
        assert_eq!(err, LtsError::BadTransition(0));
        assert!(Lts::new([], 1, StateId(1), []).is_err());
    }

    #[test]
    fn unknown_state() {
        assert_eq!(
            tiny().events_of(StateId(7)),
            Err(LtsError::UnknownState(StateId(7)))
        );
    }

    #[test]
    fn dump_format() {
        let dump = tiny().dump();
        assert_eq!(
            dump,
            "initial 0\nalphabet a, b\nstates 2\ntransitions 3\nstate 0 s0\nstate 1 s1\n\
             0 --a--> 1\n1 --b--> 0\n1 --tick--> 1\n"
        );
    }
}
