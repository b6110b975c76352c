use std::collections::HashMap;
use std::rc::Rc;

use indexmap::IndexSet;

use super::term::{subst_process, Key};
use super::{enumerate_alphabet, EventId, Label, Lts, LtsError, StateId, SynthesisLimits, Transition};
use crate::event::Event;
use crate::syntax::ast::{Clause, EventExpr, EventItem, Pattern, ProcessExpr};
use crate::syntax::{Entry, ResolvedSpec};
use crate::value::{eval, eval_bool, eval_set, Env, EvalError, Value};

/// Unfolds the operational semantics of `entry` breadth-first into an
/// explicit LTS.
///
/// - `SKIP` offers `tick` to a single terminated state.
/// - A prefix yields one transition per instantiation of its event.
/// - A guard contributes its body's transitions iff it holds.
/// - External choice unions the transitions of its operands.
/// - A call matches the first clause whose patterns fit its arguments.
///
/// Call successors are memoized by `(process, arguments)`, other successors
/// by their closed term, so recursion over finite domains terminates.
pub fn synthesize_lts(
    spec: &ResolvedSpec,
    entry: &Entry,
    limits: &SynthesisLimits,
) -> Result<Lts, LtsError> {
    let alphabet: Vec<Event> = enumerate_alphabet(spec)?.into_iter().collect();
    let events = alphabet
        .iter()
        .enumerate()
        .map(|(i, e)| (e.clone(), EventId(i as u32)))
        .collect();
    let mut synth = Synth {
        spec,
        events,
        states: IndexSet::new(),
        limits,
        transitions: 0,
    };
    synth.states.insert(Key::Call(entry.process, entry.args.clone()));

    let mut edges: Vec<Vec<Transition>> = Vec::new();
    let mut next = 0;
    while next < synth.states.len() {
        let key = synth.states[next].clone();
        let mut out = Vec::new();
        match &key {
            Key::Call(p, args) => synth.call(*p, args, &mut Vec::new(), &mut out)?,
            Key::Term(t) => synth.initials(t, &Env::new(), &mut Vec::new(), &mut out)?,
            Key::Terminated => {}
        }
        out.sort_unstable();
        out.dedup();
        synth.transitions += out.len();
        if synth.transitions > limits.max_transitions {
            return Err(LtsError::LimitExceeded {
                what: "transitions",
                limit: limits.max_transitions,
                reached: synth.transitions,
            });
        }
        edges.push(out);
        next += 1;
    }

    let names = synth.states.iter().map(|k| synth.state_name(k)).collect();
    Ok(Lts::from_parts(alphabet, StateId(0), edges, names))
}

struct Synth<'a> {
    spec: &'a ResolvedSpec,
    events: HashMap<Event, EventId>,
    states: IndexSet<Key>,
    limits: &'a SynthesisLimits,
    transitions: usize,
}

type CallStack = Vec<(usize, Vec<Value>)>;

impl Synth<'_> {
    fn eval_err(&self, context: impl std::fmt::Display, source: EvalError) -> LtsError {
        LtsError::Eval {
            context: context.to_string(),
            source,
        }
    }

    fn intern(&mut self, key: Key) -> Result<StateId, LtsError> {
        if let Some(i) = self.states.get_index_of(&key) {
            return Ok(StateId(i as u32));
        }
        if self.states.len() >= self.limits.max_states {
            return Err(LtsError::LimitExceeded {
                what: "states",
                limit: self.limits.max_states,
                reached: self.states.len() + 1,
            });
        }
        let (i, _) = self.states.insert_full(key);
        Ok(StateId(i as u32))
    }

    fn call(
        &mut self,
        process: usize,
        args: &[Value],
        stack: &mut CallStack,
        out: &mut Vec<Transition>,
    ) -> Result<(), LtsError> {
        if stack.iter().any(|(p, a)| *p == process && a == args) {
            let def = self.spec.process(process);
            return Err(LtsError::UnguardedRecursion(call_text(&def.name, args)));
        }
        let spec = self.spec;
        let def = spec.process(process);
        let (clause, env) = match_clause(&def.clauses, args).ok_or_else(|| {
            LtsError::NoMatchingClause {
                process: def.name.to_string(),
                args: args.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "),
            }
        })?;
        stack.push((process, args.to_vec()));
        self.initials(&clause.body, &env, stack, out)?;
        stack.pop();
        Ok(())
    }

    fn initials(
        &mut self,
        p: &ProcessExpr,
        env: &Env,
        stack: &mut CallStack,
        out: &mut Vec<Transition>,
    ) -> Result<(), LtsError> {
        match p {
            ProcessExpr::Skip => {
                let target = self.intern(Key::Terminated)?;
                out.push(Transition {
                    label: Label::Tick,
                    target,
                });
            }
            ProcessExpr::Choice(ops) => {
                for op in ops {
                    self.initials(op, env, stack, out)?;
                }
            }
            ProcessExpr::Guard(cond, body) => {
                let holds = eval_bool(cond, env).map_err(|e| self.eval_err(format_args!("guard `{cond}`"), e))?;
                if holds {
                    self.initials(body, env, stack, out)?;
                }
            }
            ProcessExpr::Call(name, args) => {
                let process = self
                    .spec
                    .process_index(name)
                    .expect("resolved spec has every called process");
                let values = args
                    .iter()
                    .map(|a| eval(a, env))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| self.eval_err(format_args!("call to `{name}`"), e))?;
                self.call(process, &values, stack, out)?;
            }
            ProcessExpr::Prefix(ev, cont) => {
                let mut env = env.clone();
                let mut values = Vec::with_capacity(ev.items.len());
                self.instantiate(ev, 0, &mut env, &mut values, cont, out)?;
            }
        }
        Ok(())
    }

    fn instantiate(
        &mut self,
        ev: &EventExpr,
        item: usize,
        env: &mut Env,
        values: &mut Vec<Value>,
        cont: &ProcessExpr,
        out: &mut Vec<Transition>,
    ) -> Result<(), LtsError> {
        let Some(it) = ev.items.get(item) else {
            let event = Event::new(ev.channel.clone(), values.clone());
            let label = Label::Event(self.events[&event]);
            let target = self.successor(cont, env)?;
            out.push(Transition { label, target });
            return Ok(());
        };
        let channel = self
            .spec
            .channel_index(&ev.channel)
            .expect("resolved spec has every used channel");
        let domain = &self.spec.domains(channel)[item];
        match it {
            EventItem::Dot(e) => {
                let v = eval(e, env).map_err(|err| self.eval_err(format_args!("event `{ev}`"), err))?;
                if domain.binary_search(&v).is_err() {
                    return Err(LtsError::OutOfDomain {
                        channel: ev.channel.to_string(),
                        value: v,
                    });
                }
                values.push(v);
                self.instantiate(ev, item + 1, env, values, cont, out)?;
                values.pop();
            }
            EventItem::Input(x) => {
                for v in domain {
                    values.push(v.clone());
                    env.bind(x.clone(), v.clone());
                    self.instantiate(ev, item + 1, env, values, cont, out)?;
                    env.pop();
                    values.pop();
                }
            }
            EventItem::InputIn(x, s) => {
                let allowed =
                    eval_set(s, env).map_err(|err| self.eval_err(format_args!("event `{ev}`"), err))?;
                for v in domain.iter().filter(|v| allowed.contains(v)) {
                    values.push(v.clone());
                    env.bind(x.clone(), v.clone());
                    self.instantiate(ev, item + 1, env, values, cont, out)?;
                    env.pop();
                    values.pop();
                }
            }
        }
        Ok(())
    }

    fn successor(&mut self, cont: &ProcessExpr, env: &Env) -> Result<StateId, LtsError> {
        let key = match cont {
            ProcessExpr::Call(name, args) => {
                let process = self
                    .spec
                    .process_index(name)
                    .expect("resolved spec has every called process");
                let values = args
                    .iter()
                    .map(|a| eval(a, env))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| self.eval_err(format_args!("call to `{name}`"), e))?;
                Key::Call(process, values)
            }
            ProcessExpr::Skip => Key::Term(Rc::new(ProcessExpr::Skip)),
            other => Key::Term(Rc::new(
                subst_process(other, env, &mut Vec::new())
                    .map_err(|e| self.eval_err("continuation", e))?,
            )),
        };
        self.intern(key)
    }

    fn state_name(&self, key: &Key) -> String {
        match key {
            Key::Call(p, args) => call_text(&self.spec.process(*p).name, args),
            Key::Term(t) => t.to_string(),
            Key::Terminated => "<terminated>".into(),
        }
    }
}

fn call_text(name: &str, args: &[Value]) -> String {
    if args.is_empty() {
        name.to_string()
    } else {
        let args: Vec<String> = args.iter().map(ToString::to_string).collect();
        format!("{name}({})", args.join(", "))
    }
}

/// First clause whose patterns match, with its parameter bindings.
pub(crate) fn match_clause<'c>(clauses: &'c [Clause], args: &[Value]) -> Option<(&'c Clause, Env)> {
    'clauses: for clause in clauses {
        let mut env = Env::new();
        for (pat, v) in clause.patterns.iter().zip(args) {
            match pat {
                Pattern::Wildcard => {}
                Pattern::Bind(n) | Pattern::Name(n) => env.bind(n.clone(), v.clone()),
                Pattern::Lit(lit) => {
                    if lit != v {
                        continue 'clauses;
                    }
                }
            }
        }
        return Some((clause, env));
    }
    None
}
