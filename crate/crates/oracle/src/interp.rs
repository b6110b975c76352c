//! Direct trace acceptance over the resolved syntax tree.
//!
//! A state is a closed process term. Offered events are found by trying every
//! concrete event of the prefix's channel against the prefix pattern, so no
//! graph is built and nothing is memoized: runs fold over sets of states.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::rc::Rc;

use cspmon_core::syntax::ast::{Clause, EventExpr, EventItem, Expr, Name, Pattern, ProcessExpr};
use cspmon_core::syntax::{Entry, ResolvedSpec};
use cspmon_core::value::{eval, Env, Value};
use cspmon_core::{Event, Mode, Observed};

/// Deep enough for any guarded specification; deeper means the spec recurses
/// without consuming an event.
const MAX_CALL_DEPTH: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum InterpState {
    /// A process applied to values.
    Call(Name, Vec<Value>),
    /// Any other closed term.
    Term(Rc<ProcessExpr>),
    /// After `SKIP` terminated.
    Done,
}

/// A move from a state: `None` is termination.
pub type Move = (Option<Event>, InterpState);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    /// Zero-based index of the first rejected event.
    Fail(usize),
}

/// Counts of the states and distinct moves reachable from an entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reach {
    pub states: usize,
    pub transitions: usize,
}

type Bindings = BTreeMap<Name, Value>;

fn env_of(b: &Bindings) -> Env {
    let mut env = Env::new();
    for (k, v) in b {
        env.bind(k.clone(), v.clone());
    }
    env
}

fn value(e: &Expr, b: &Bindings) -> Value {
    eval(e, &env_of(b)).unwrap_or_else(|err| panic!("cannot evaluate `{e}`: {err}"))
}

pub struct Interpreter<'a> {
    spec: &'a ResolvedSpec,
    /// Concrete events per channel name.
    events: BTreeMap<Name, Vec<Event>>,
}

impl<'a> Interpreter<'a> {
    pub fn new(spec: &'a ResolvedSpec) -> Interpreter<'a> {
        let mut events = BTreeMap::new();
        for (i, decl) in spec.spec().channels.iter().enumerate() {
            let mut tuples: Vec<Vec<Value>> = vec![vec![]];
            for domain in spec.domains(i) {
                let mut next = Vec::new();
                for t in &tuples {
                    for v in domain {
                        let mut t = t.clone();
                        t.push(v.clone());
                        next.push(t);
                    }
                }
                tuples = next;
            }
            let evs = tuples
                .into_iter()
                .map(|vs| Event::new(decl.name.clone(), vs))
                .collect();
            events.insert(decl.name.clone(), evs);
        }
        Interpreter { spec, events }
    }

    /// Every event of every channel.
    pub fn alphabet(&self) -> BTreeSet<Event> {
        self.events.values().flatten().cloned().collect()
    }

    pub fn start(&self, entry: &Entry) -> InterpState {
        InterpState::Call(self.spec.process(entry.process).name.clone(), entry.args.clone())
    }

    /// All moves of `state`, without duplicates.
    pub fn moves(&self, state: &InterpState) -> Vec<Move> {
        let mut out = Vec::new();
        match state {
            InterpState::Done => {}
            InterpState::Term(p) => self.collect(p, &Bindings::new(), 0, &mut out),
            InterpState::Call(name, args) => self.call(name, args, 0, &mut out),
        }
        let mut seen = HashSet::new();
        out.retain(|m| seen.insert(m.clone()));
        out
    }

    pub fn initials(&self, state: &InterpState) -> BTreeSet<Event> {
        self.moves(state).into_iter().filter_map(|(e, _)| e).collect()
    }

    pub fn can_terminate(&self, state: &InterpState) -> bool {
        self.moves(state).iter().any(|(e, _)| e.is_none())
    }

    pub fn after(&self, state: &InterpState, event: &Event) -> Vec<InterpState> {
        self.moves(state)
            .into_iter()
            .filter(|(e, _)| e.as_ref() == Some(event))
            .map(|(_, s)| s)
            .collect()
    }

    fn clause_for<'c>(clauses: &'c [Clause], args: &[Value]) -> Option<(&'c Clause, Bindings)> {
        clauses.iter().find_map(|c| {
            let mut b = Bindings::new();
            let fits = c.patterns.iter().zip(args).all(|(p, v)| match p {
                Pattern::Wildcard => true,
                Pattern::Lit(l) => l == v,
                Pattern::Bind(x) | Pattern::Name(x) => {
                    b.insert(x.clone(), v.clone());
                    true
                }
            });
            fits.then_some((c, b))
        })
    }

    fn call(&self, name: &Name, args: &[Value], depth: usize, out: &mut Vec<Move>) {
        assert!(depth < MAX_CALL_DEPTH, "unguarded recursion through `{name}`");
        let idx = self.spec.process_index(name).expect("declared process");
        let def = self.spec.process(idx);
        let (clause, b) = Self::clause_for(&def.clauses, args)
            .unwrap_or_else(|| panic!("no clause of `{name}` matches"));
        self.collect(&clause.body, &b, depth + 1, out);
    }

    fn collect(&self, p: &ProcessExpr, b: &Bindings, depth: usize, out: &mut Vec<Move>) {
        match p {
            ProcessExpr::Skip => out.push((None, InterpState::Done)),
            ProcessExpr::Choice(ops) => ops.iter().for_each(|op| self.collect(op, b, depth, out)),
            ProcessExpr::Guard(c, body) => {
                if value(c, b) == Value::Bool(true) {
                    self.collect(body, b, depth, out);
                }
            }
            ProcessExpr::Call(name, args) => {
                let args: Vec<Value> = args.iter().map(|a| value(a, b)).collect();
                self.call(name, &args, depth, out);
            }
            ProcessExpr::Prefix(ev, cont) => {
                for candidate in &self.events[&ev.channel] {
                    if let Some(bound) = matches(ev, candidate, b) {
                        out.push((Some(candidate.clone()), close_state(cont, &bound)));
                    }
                }
            }
        }
    }

    /// Events a run can observe: the alphabet, or its intersection with
    /// `observable` when given. Every other alphabet event is hidden.
    pub fn visible(&self, observable: Option<&BTreeSet<Event>>) -> BTreeSet<Event> {
        let alphabet = self.alphabet();
        match observable {
            Some(o) => alphabet.intersection(o).cloned().collect(),
            None => alphabet,
        }
    }

    /// The entry state together with everything reachable by hidden events.
    pub fn initial_set(&self, entry: &Entry, visible: &BTreeSet<Event>) -> Vec<InterpState> {
        self.saturate(vec![self.start(entry)], visible)
    }

    /// One step of a run over a state set; `None` rejects the event.
    pub fn step_set(
        &self,
        current: &[InterpState],
        mode: Mode,
        visible: &BTreeSet<Event>,
        observed: &Observed,
    ) -> Option<Vec<InterpState>> {
        let e = match observed {
            Observed::Event(e) if visible.contains(e) => e,
            _ => {
                return match mode {
                    Mode::Strict => None,
                    Mode::Permissive => Some(current.to_vec()),
                }
            }
        };
        let next: Vec<InterpState> = current.iter().flat_map(|s| self.after(s, e)).collect();
        if next.is_empty() {
            None
        } else {
            Some(self.saturate(next, visible))
        }
    }

    /// Folds `trace` over sets of states. Alphabet events outside
    /// `observable` are hidden and closed over after every step; with no
    /// `observable` every event is visible.
    pub fn accepts(
        &self,
        entry: &Entry,
        mode: Mode,
        observable: Option<&BTreeSet<Event>>,
        trace: &[Observed],
    ) -> Outcome {
        let visible = self.visible(observable);
        let mut current = self.initial_set(entry, &visible);
        for (i, o) in trace.iter().enumerate() {
            match self.step_set(&current, mode, &visible, o) {
                Some(next) => current = next,
                None => return Outcome::Fail(i),
            }
        }
        Outcome::Pass
    }

    fn saturate(&self, seeds: Vec<InterpState>, visible: &BTreeSet<Event>) -> Vec<InterpState> {
        let mut seen: HashSet<InterpState> = HashSet::new();
        let mut todo = seeds;
        let mut out = Vec::new();
        while let Some(s) = todo.pop() {
            if !seen.insert(s.clone()) {
                continue;
            }
            for (e, t) in self.moves(&s) {
                if matches!(&e, Some(e) if !visible.contains(e)) {
                    todo.push(t);
                }
            }
            out.push(s);
        }
        out
    }

    /// Breadth-first walk counting reachable states and moves.
    pub fn reachable(&self, entry: &Entry) -> Reach {
        let start = self.start(entry);
        let mut seen: HashSet<InterpState> = HashSet::from([start.clone()]);
        let mut queue = std::collections::VecDeque::from([start]);
        let mut transitions = 0;
        while let Some(s) = queue.pop_front() {
            let moves = self.moves(&s);
            transitions += moves.len();
            for (_, t) in moves {
                if seen.insert(t.clone()) {
                    queue.push_back(t);
                }
            }
        }
        Reach {
            states: seen.len(),
            transitions,
        }
    }
}

/// Bindings after matching `candidate` against the prefix `ev`, or `None`.
fn matches(ev: &EventExpr, candidate: &Event, b: &Bindings) -> Option<Bindings> {
    let mut b = b.clone();
    for (item, v) in ev.items.iter().zip(&candidate.values) {
        match item {
            EventItem::Dot(e) => {
                if &value(e, &b) != v {
                    return None;
                }
            }
            EventItem::Input(x) => {
                b.insert(x.clone(), v.clone());
            }
            EventItem::InputIn(x, s) => {
                let allowed = value(s, &b);
                if !allowed.as_set().is_some_and(|s| s.contains(v)) {
                    return None;
                }
                b.insert(x.clone(), v.clone());
            }
        }
    }
    Some(b)
}

fn close_state(p: &ProcessExpr, b: &Bindings) -> InterpState {
    match p {
        ProcessExpr::Call(name, args) => {
            InterpState::Call(name.clone(), args.iter().map(|a| value(a, b)).collect())
        }
        other => InterpState::Term(Rc::new(close(other, b))),
    }
}

/// Replaces free variables by their values and evaluates every maximal
/// variable-free sub-expression.
fn close(p: &ProcessExpr, b: &Bindings) -> ProcessExpr {
    match p {
        ProcessExpr::Skip => ProcessExpr::Skip,
        ProcessExpr::Choice(ops) => ProcessExpr::Choice(ops.iter().map(|op| close(op, b)).collect()),
        ProcessExpr::Guard(c, body) => ProcessExpr::Guard(close_expr(c, b), Box::new(close(body, b))),
        ProcessExpr::Call(n, args) => ProcessExpr::Call(n.clone(), args.iter().map(|a| close_expr(a, b)).collect()),
        ProcessExpr::Prefix(ev, cont) => {
            let mut inner = b.clone();
            let items = ev
                .items
                .iter()
                .map(|item| match item {
                    EventItem::Dot(e) => EventItem::Dot(close_expr(e, &inner)),
                    EventItem::Input(x) => {
                        inner.remove(x);
                        EventItem::Input(x.clone())
                    }
                    EventItem::InputIn(x, s) => {
                        let s = close_expr(s, &inner);
                        inner.remove(x);
                        EventItem::InputIn(x.clone(), s)
                    }
                })
                .collect();
            ProcessExpr::Prefix(
                EventExpr {
                    channel: ev.channel.clone(),
                    items,
                },
                Box::new(close(cont, &inner)),
            )
        }
    }
}

fn substitute(e: &Expr, b: &Bindings) -> Expr {
    let s = |x: &Expr| Box::new(substitute(x, b));
    match e {
        Expr::Var(x) => b.get(x).map_or_else(|| e.clone(), |v| Expr::Lit(v.clone())),
        Expr::Name(_) | Expr::Lit(_) => e.clone(),
        Expr::SetEnum(xs) => Expr::SetEnum(xs.iter().map(|x| substitute(x, b)).collect()),
        Expr::Range(x, y) => Expr::Range(s(x), s(y)),
        Expr::Member(x, y) => Expr::Member(s(x), s(y)),
        Expr::Diff(x, y) => Expr::Diff(s(x), s(y)),
        Expr::Union(x, y) => Expr::Union(s(x), s(y)),
        Expr::Eq(x, y) => Expr::Eq(s(x), s(y)),
        Expr::Ne(x, y) => Expr::Ne(s(x), s(y)),
        Expr::Not(x) => Expr::Not(s(x)),
        Expr::And(x, y) => Expr::And(s(x), s(y)),
        Expr::Or(x, y) => Expr::Or(s(x), s(y)),
    }
}

/// Evaluates the largest closed sub-expressions, top-down.
fn fold(e: Expr) -> Expr {
    if e.is_closed() {
        return match e {
            Expr::Lit(_) => e,
            _ => Expr::Lit(eval(&e, &Env::new()).unwrap_or_else(|err| panic!("cannot evaluate `{e}`: {err}"))),
        };
    }
    let f = |x: Box<Expr>| Box::new(fold(*x));
    match e {
        Expr::SetEnum(xs) => Expr::SetEnum(xs.into_iter().map(fold).collect()),
        Expr::Range(x, y) => Expr::Range(f(x), f(y)),
        Expr::Member(x, y) => Expr::Member(f(x), f(y)),
        Expr::Diff(x, y) => Expr::Diff(f(x), f(y)),
        Expr::Union(x, y) => Expr::Union(f(x), f(y)),
        Expr::Eq(x, y) => Expr::Eq(f(x), f(y)),
        Expr::Ne(x, y) => Expr::Ne(f(x), f(y)),
        Expr::Not(x) => Expr::Not(f(x)),
        Expr::And(x, y) => Expr::And(f(x), f(y)),
        Expr::Or(x, y) => Expr::Or(f(x), f(y)),
        other => other,
    }
}

fn close_expr(e: &Expr, b: &Bindings) -> Expr {
    fold(substitute(e, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use cspmon_core::syntax::{parse_entry, parse_spec, validate_spec};

    fn with<R>(src: &str, entry: &str, f: impl FnOnce(&Interpreter, &Entry) -> R) -> R {
        let spec = validate_spec(parse_spec(src).unwrap()).unwrap();
        let entry = spec.resolve_entry(&parse_entry(entry).unwrap()).unwrap();
        f(&Interpreter::new(&spec), &entry)
    }

    fn ev(s: &str) -> Event {
        s.parse().unwrap()
    }

    #[test]
    fn skip_offers_nothing_but_terminates() {
        with("channel a\nP = SKIP", "P", |i, e| {
            let s = i.start(e);
            assert!(i.initials(&s).is_empty());
            assert!(i.can_terminate(&s));
        });
    }

    #[test]
    fn false_guard_offers_nothing() {
        with("channel a\nP = false & a -> P", "P", |i, e| {
            assert!(i.initials(&i.start(e)).is_empty());
        });
    }

    #[test]
    fn self_loop() {
        with("channel a\nP = a -> P", "P", |i, e| {
            let s = i.start(e);
            assert_eq!(i.after(&s, &ev("a")), vec![s.clone()]);
            assert!(i.after(&s, &ev("zzz")).is_empty());
        });
    }

    #[test]
    fn branching_prefix_has_two_successors() {
        with("channel a, b, c\nP = (a -> b -> SKIP) [] (a -> c -> SKIP)", "P", |i, e| {
            let after = i.after(&i.start(e), &ev("a"));
            assert_eq!(after.len(), 2);
            assert_ne!(after[0], after[1]);
        });
    }

    #[test]
    fn accepts_with_hiding() {
        with("channel a, b\nP = a -> b -> P", "P", |i, e| {
            let observable = BTreeSet::from([ev("a")]);
            let trace: Vec<Observed> = vec![ev("a").into(), ev("a").into()];
            assert_eq!(i.accepts(e, Mode::Strict, Some(&observable), &trace), Outcome::Pass);
            assert_eq!(i.accepts(e, Mode::Strict, None, &trace), Outcome::Fail(1));
            let b: Vec<Observed> = vec![ev("b").into()];
            assert_eq!(i.accepts(e, Mode::Strict, Some(&observable), &b), Outcome::Fail(0));
            assert_eq!(i.accepts(e, Mode::Permissive, Some(&observable), &b), Outcome::Pass);
        });
    }
}
