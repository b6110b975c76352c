//! Trace checking against a deterministic oracle LTS.
//!
//! In strict mode every observed event must be in the oracle's alphabet and
//! offered by the current state. Permissive mode ignores events outside the
//! alphabet and leaves the state unchanged.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::event::Event;
use crate::lts::{Lts, StateId};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Mode {
    #[default]
    Strict,
    Permissive,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Permissive => "permissive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown mode `{0}` (expected `strict` or `permissive`)")]
pub struct ModeParseError(String);

impl FromStr for Mode {
    type Err = ModeParseError;

    fn from_str(s: &str) -> Result<Mode, ModeParseError> {
        match s {
            "strict" => Ok(Mode::Strict),
            "permissive" => Ok(Mode::Permissive),
            _ => Err(ModeParseError(s.to_string())),
        }
    }
}

/// An event as received from the system under analysis: either a canonical
/// event or raw text that has no mapping.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Observed {
    Event(Event),
    Unmapped(String),
}

impl From<Event> for Observed {
    fn from(e: Event) -> Observed {
        Observed::Event(e)
    }
}

impl fmt::Display for Observed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observed::Event(e) => e.fmt(f),
            Observed::Unmapped(raw) => f.write_str(raw),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reason {
    NotInAlphabet,
    NotAvailableHere,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reason::NotInAlphabet => "event is not in the alphabet",
            Reason::NotAvailableHere => "event is not available in the current state",
        })
    }
}

fn lookup(oracle: &Lts, e: &Observed) -> Option<crate::lts::EventId> {
    match e {
        Observed::Event(e) => oracle.event_id(e),
        Observed::Unmapped(_) => None,
    }
}

/// Next state in strict mode. Events outside the alphabet are errors.
pub fn next_strict(oracle: &Lts, s: StateId, e: &Observed) -> Result<StateId, Reason> {
    let id = lookup(oracle, e).ok_or(Reason::NotInAlphabet)?;
    oracle.successor(s, id).ok_or(Reason::NotAvailableHere)
}

/// Next state in permissive mode. Events outside the alphabet leave the
/// state unchanged.
pub fn next_permissive(oracle: &Lts, s: StateId, e: &Observed) -> Result<StateId, Reason> {
    match lookup(oracle, e) {
        None => Ok(s),
        Some(id) => oracle.successor(s, id).ok_or(Reason::NotAvailableHere),
    }
}

pub fn next_state(oracle: &Lts, mode: Mode, s: StateId, e: &Observed) -> Result<StateId, Reason> {
    match mode {
        Mode::Strict => next_strict(oracle, s, e),
        Mode::Permissive => next_permissive(oracle, s, e),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    /// Every event received up to and including the failing one.
    pub failing_trace: Vec<Observed>,
    /// Indices into `failing_trace` of events ignored in permissive mode.
    pub stuttered: Vec<usize>,
    /// Events offered by the state the failing event arrived in.
    pub acceptable: BTreeSet<Event>,
    pub reason: Reason,
    pub state: StateId,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "failing trace ({} events):", self.failing_trace.len())?;
        for (i, e) in self.failing_trace.iter().enumerate() {
            let mark = if self.stuttered.binary_search(&i).is_ok() {
                "  (ignored)"
            } else {
                ""
            };
            writeln!(f, "  {:>5}  {e}{mark}", i + 1)?;
        }
        writeln!(f, "reason: {}", self.reason)?;
        let acceptable: Vec<String> = self.acceptable.iter().map(ToString::to_string).collect();
        write!(f, "acceptable: {{{}}}", acceptable.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    /// Zero-based position of the failing event.
    pub index: usize,
    pub event: Observed,
    pub counterexample: Counterexample,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    PassSoFar(StateId),
    Fail(Box<Failure>),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::PassSoFar(_))
    }

    pub fn failure(&self) -> Option<&Failure> {
        match self {
            Verdict::Fail(f) => Some(f),
            Verdict::PassSoFar(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonitorError {
    #[error("oracle is not deterministic: it has tau transitions or a state with two transitions on one label")]
    NondeterministicOracle,
}

/// One monitored event stream. Failure is absorbing: further steps are
/// recorded but return the first `Fail` unchanged.
#[derive(Debug, Clone)]
pub struct Session {
    oracle: Arc<Lts>,
    mode: Mode,
    current: StateId,
    trace: Vec<Observed>,
    stuttered: Vec<usize>,
    failure: Option<Box<Failure>>,
}

impl Session {
    pub fn new(oracle: Arc<Lts>, mode: Mode) -> Result<Session, MonitorError> {
        if !oracle.is_deterministic() {
            return Err(MonitorError::NondeterministicOracle);
        }
        let current = oracle.initial();
        Ok(Session {
            oracle,
            mode,
            current,
            trace: Vec::new(),
            stuttered: Vec::new(),
            failure: None,
        })
    }

    pub fn oracle(&self) -> &Arc<Lts> {
        &self.oracle
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// The current state, or `None` once the session has failed.
    pub fn current(&self) -> Option<StateId> {
        self.failure.is_none().then_some(self.current)
    }

    pub fn trace(&self) -> &[Observed] {
        &self.trace
    }

    /// Steps processed before failure, including the failing one.
    pub fn steps_checked(&self) -> usize {
        self.failure.as_ref().map_or(self.trace.len(), |f| f.index + 1)
    }

    pub fn verdict(&self) -> Verdict {
        match &self.failure {
            Some(f) => Verdict::Fail(f.clone()),
            None => Verdict::PassSoFar(self.current),
        }
    }

    pub fn step(&mut self, e: Observed) -> Verdict {
        self.step_timed(e).0
    }

    /// Like [`Session::step`], also returning the time spent in the
    /// next-state function (zero once failed).
    pub fn step_timed(&mut self, e: Observed) -> (Verdict, Duration) {
        if let Some(f) = &self.failure {
            let v = Verdict::Fail(f.clone());
            self.trace.push(e);
            return (v, Duration::ZERO);
        }
        let start = Instant::now();
        let next = next_state(&self.oracle, self.mode, self.current, &e);
        let spent = start.elapsed();
        let index = self.trace.len();
        if self.mode == Mode::Permissive && lookup(&self.oracle, &e).is_none() {
            self.stuttered.push(index);
        }
        self.trace.push(e);
        match next {
            Ok(s) => {
                self.current = s;
                (Verdict::PassSoFar(s), spent)
            }
            Err(reason) => {
                let acceptable = self
                    .oracle
                    .events_of(self.current)
                    .expect("session state belongs to its oracle");
                let failure = Box::new(Failure {
                    index,
                    event: self.trace[index].clone(),
                    counterexample: Counterexample {
                        failing_trace: self.trace.clone(),
                        stuttered: self.stuttered.clone(),
                        acceptable,
                        reason,
                        state: self.current,
                    },
                });
                self.failure = Some(failure.clone());
                (Verdict::Fail(failure), spent)
            }
        }
    }
}

/// Outcome of checking a whole trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceReport {
    pub verdict: Verdict,
    /// Length of the input, including events after a failure.
    pub total_events: usize,
    /// Events fed to the monitor, up to and including a failing one.
    pub events_checked: usize,
    /// Sum of the time spent in the next-state function.
    pub check_time: Duration,
    pub event_times: Vec<Duration>,
}

impl TraceReport {
    pub fn mean_event_time(&self) -> Duration {
        if self.events_checked == 0 {
            Duration::ZERO
        } else {
            self.check_time / self.events_checked as u32
        }
    }
}

/// Folds `trace` through a fresh session, stopping at the first failure.
/// Events after a failure are counted but not checked.
pub fn check_trace(
    oracle: Arc<Lts>,
    mode: Mode,
    trace: impl IntoIterator<Item = Observed>,
) -> Result<TraceReport, MonitorError> {
    check_trace_with(oracle, mode, trace, |_, _| {})
}

/// [`check_trace`] that also reports each checked event's verdict.
pub fn check_trace_with(
    oracle: Arc<Lts>,
    mode: Mode,
    trace: impl IntoIterator<Item = Observed>,
    mut on_verdict: impl FnMut(&Observed, &Verdict),
) -> Result<TraceReport, MonitorError> {
    let mut session = Session::new(oracle, mode)?;
    let mut trace = trace.into_iter();
    let mut event_times = Vec::new();
    let mut check_time = Duration::ZERO;
    let mut verdict = session.verdict();
    for e in trace.by_ref() {
        let (v, spent) = session.step_timed(e);
        on_verdict(session.trace.last().expect("just pushed"), &v);
        event_times.push(spent);
        check_time += spent;
        verdict = v;
        if !verdict.is_pass() {
            break;
        }
    }
    let events_checked = session.trace.len();
    let total_events = events_checked + trace.count();
    Ok(TraceReport {
        verdict,
        total_events,
        events_checked,
        check_time,
        event_times,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lts::{EventId, Label};

    fn ev(s: &str) -> Observed {
        Observed::Event(s.parse().unwrap())
    }

    /// 0 --a--> 1 --b--> 0, alphabet {a, b, c}.
    fn oracle() -> Arc<Lts> {
        Arc::new(
            Lts::new(
                ["a", "b", "c"].map(|e| e.parse().unwrap()),
                2,
                StateId(0),
                [
                    (StateId(0), Label::Event(EventId(0)), StateId(1)),
                    (StateId(1), Label::Event(EventId(1)), StateId(0)),
                ],
            )
            .unwrap(),
        )
    }

    #[test]
    fn strict_cases() {
        let o = oracle();
        assert_eq!(next_strict(&o, StateId(0), &ev("z")), Err(Reason::NotInAlphabet));
        assert_eq!(
            next_strict(&o, StateId(0), &Observed::Unmapped("/odom".into())),
            Err(Reason::NotInAlphabet)
        );
        assert_eq!(next_strict(&o, StateId(0), &ev("c")), Err(Reason::NotAvailableHere));
        assert_eq!(next_strict(&o, StateId(0), &ev("a")), Ok(StateId(1)));
    }

    #[test]
    fn permissive_cases() {
        let o = oracle();
        assert_eq!(next_permissive(&o, StateId(1), &ev("z")), Ok(StateId(1)));
        assert_eq!(
            next_permissive(&o, StateId(1), &Observed::Unmapped("/odom".into())),
            Ok(StateId(1))
        );
        assert_eq!(next_permissive(&o, StateId(1), &ev("a")), Err(Reason::NotAvailableHere));
        assert_eq!(next_permissive(&o, StateId(1), &ev("b")), Ok(StateId(0)));
    }

    #[test]
    fn failure_is_absorbing() {
        let mut s = Session::new(oracle(), Mode::Strict).unwrap();
        assert!(s.step(ev("a")).is_pass());
        let fail = s.step(ev("a"));
        let f = fail.failure().unwrap();
        assert_eq!(f.index, 1);
        assert_eq!(f.counterexample.acceptable, BTreeSet::from(["b".parse().unwrap()]));
        assert_eq!(s.step(ev("b")), fail);
        assert_eq!(s.trace().len(), 3);
        assert_eq!(s.steps_checked(), 2);
        assert_eq!(s.current(), None);
    }

    #[test]
    fn stuttered_events_are_marked() {
        let report = check_trace(
            oracle(),
            Mode::Permissive,
            [ev("a"), Observed::Unmapped("x".into()), ev("a"), ev("b")],
        )
        .unwrap();
        let f = report.verdict.failure().unwrap();
        assert_eq!(f.counterexample.stuttered, [1]);
        assert_eq!(f.counterexample.failing_trace.len(), 3);
        assert!(f.counterexample.to_string().contains("x  (ignored)"));
        assert_eq!(report.events_checked, 3);
        assert_eq!(report.total_events, 4);
    }

    #[test]
    fn empty_trace() {
        let report = check_trace(oracle(), Mode::Strict, []).unwrap();
        assert_eq!(report.verdict, Verdict::PassSoFar(StateId(0)));
        assert_eq!(report.events_checked, 0);
        assert_eq!(report.mean_event_time(), Duration::ZERO);
    }

    #[test]
    fn rejects_tau() {
        let o = Lts::new([], 1, StateId(0), [(StateId(0), Label::Tau, StateId(0))]).unwrap();
        assert_eq!(
            Session::new(Arc::new(o), Mode::Strict).unwrap_err(),
            MonitorError::NondeterministicOracle
        );
    }

    #[test]
    fn terminal_state_refuses_everything() {
        let o = Arc::new(Lts::new(["a".parse().unwrap()], 1, StateId(0), []).unwrap());
        let report = check_trace(o, Mode::Permissive, [ev("a")]).unwrap();
        let f = report.verdict.failure().unwrap();
        assert!(f.counterexample.acceptable.is_empty());
        assert_eq!(f.counterexample.reason, Reason::NotAvailableHere);
    }

    #[test]
    fn mode_text() {
        assert_eq!("permissive".parse::<Mode>().unwrap(), Mode::Permissive);
        assert_eq!(Mode::default(), Mode::Strict);
        assert!("lenient".parse::<Mode>().is_err());
    }
}
