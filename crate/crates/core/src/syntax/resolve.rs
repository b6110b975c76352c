//! Name resolution and static checks.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use super::ast::*;
use super::parser::EntryRef;
use crate::value::{eval, Env, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Duplicate { kind: &'static str, name: Name },
    UndeclaredChannel { name: Name, context: String },
    UndeclaredProcess { name: Name, context: String },
    UndeclaredType { name: Name, context: String },
    UnboundName { name: Name, context: String },
    NonFiniteDomain { name: Name, context: String },
    BadDomain { context: String, reason: String },
    EventArity { channel: Name, expected: usize, found: usize, context: String },
    CallArity { process: Name, expected: usize, found: usize, context: String },
    ClauseArity { process: Name, expected: usize, found: usize },
    DuplicateBinder { name: Name, context: String },
    OutOfDomain { channel: Name, value: Value, context: String },
    BadConstant { context: String, reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Duplicate { kind, name } => write!(f, "duplicate {kind} `{name}`"),
            Violation::UndeclaredChannel { name, context } => {
                write!(f, "{context}: undeclared channel `{name}`")
            }
            Violation::UndeclaredProcess { name, context } => {
                write!(f, "{context}: undeclared process `{name}`")
            }
            Violation::UndeclaredType { name, context } => {
                write!(f, "{context}: undeclared type `{name}`")
            }
            Violation::UnboundName { name, context } => {
                write!(f, "{context}: unbound variable or undeclared name `{name}`")
            }
            Violation::NonFiniteDomain { name, context } => {
                write!(f, "{context}: type `{name}` is not a finite domain")
            }
            Violation::BadDomain { context, reason } => write!(f, "{context}: {reason}"),
            Violation::EventArity {
                channel,
                expected,
                found,
                context,
            } => write!(
                f,
                "{context}: channel `{channel}` takes {expected} parameter(s), event has {found}"
            ),
            Violation::CallArity {
                process,
                expected,
                found,
                context,
            } => write!(
                f,
                "{context}: process `{process}` takes {expected} argument(s), call has {found}"
            ),
            Violation::ClauseArity {
                process,
                expected,
                found,
            } => write!(
                f,
                "process `{process}`: clauses disagree on arity ({expected} vs {found})"
            ),
            Violation::DuplicateBinder { name, context } => {
                write!(f, "{context}: `{name}` is bound twice")
            }
            Violation::OutOfDomain {
                channel,
                value,
                context,
            } => write!(f, "{context}: value {value} is outside the domain of `{channel}`"),
            Violation::BadConstant { context, reason } => write!(f, "{context}: {reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ResolveError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ResolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} resolution error(s)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

/// A validated specification with lookup tables.
#[derive(Debug, Clone)]
pub struct ResolvedSpec {
    spec: Spec,
    processes: HashMap<Name, usize>,
    channels: HashMap<Name, usize>,
    /// Per channel, per parameter: the sorted domain.
    domains: Vec<Vec<Vec<Value>>>,
}

impl PartialEq for ResolvedSpec {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

/// A resolved entry point: process index plus concrete arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Entry {
    pub process: usize,
    pub args: Vec<Value>,
}

impl ResolvedSpec {
    pub fn spec(&self) -> &Spec {
        &self.spec
    }

    pub fn into_spec(self) -> Spec {
        self.spec
    }

    pub fn process_index(&self, name: &str) -> Option<usize> {
        self.processes.get(name).copied()
    }

    pub fn process(&self, index: usize) -> &ProcessDef {
        &self.spec.processes[index]
    }

    pub fn channel_index(&self, name: &str) -> Option<usize> {
        self.channels.get(name).copied()
    }

    pub fn channel(&self, index: usize) -> &ChannelDecl {
        &self.spec.channels[index]
    }

    /// Sorted domain of each parameter of channel `index`.
    pub fn domains(&self, index: usize) -> &[Vec<Value>] {
        &self.domains[index]
    }

    /// Resolves an entry reference like `ROVER({0..4}, Green)`.
    pub fn resolve_entry(&self, entry: &EntryRef) -> Result<Entry, ResolveError> {
        let fail = |v| ResolveError {
            violations: vec![v],
        };
        let context = "entry point".to_string();
        let process = self.process_index(&entry.name).ok_or_else(|| {
            fail(Violation::UndeclaredProcess {
                name: entry.name.clone(),
                context: context.clone(),
            })
        })?;
        let expected = self.spec.processes[process].arity();
        if expected != entry.args.len() {
            return Err(fail(Violation::CallArity {
                process: entry.name.clone(),
                expected,
                found: entry.args.len(),
                context,
            }));
        }
        let names = Names::of(&self.spec);
        let mut r = Resolver {
            names: &names,
            violations: Vec::new(),
            context: context.clone(),
        };
        let args: Vec<Expr> = entry.args.iter().map(|a| r.expr(a, &[])).collect();
        if !r.violations.is_empty() {
            return Err(ResolveError {
                violations: r.violations,
            });
        }
        let args = args
            .iter()
            .map(|a| eval(a, &Env::new()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| {
                fail(Violation::BadConstant {
                    context,
                    reason: e.to_string(),
                })
            })?;
        Ok(Entry { process, args })
    }
}

/// Declared value-level names: constructors and named sets (datatype names
/// also denote the set of their constructors).
struct Names {
    constructors: HashSet<Name>,
    sets: HashMap<Name, Value>,
    channels: HashMap<Name, usize>,
    channel_arity: Vec<usize>,
    processes: HashMap<Name, usize>,
    process_arity: Vec<usize>,
}

impl Names {
    /// Tables for an already-checked spec.
    fn of(spec: &Spec) -> Names {
        let mut names = Names::declare(spec, &mut Vec::new());
        names.evaluate_sets(spec, &mut Vec::new());
        names
    }

    fn declare(spec: &Spec, violations: &mut Vec<Violation>) -> Names {
        let mut types = HashSet::new();
        let mut values = HashSet::new();
        let mut constructors = HashSet::new();
        let mut sets = HashMap::new();
        for d in &spec.datatypes {
            if !types.insert(d.name.clone()) || !values.insert(d.name.clone()) {
                violations.push(Violation::Duplicate {
                    kind: "type",
                    name: d.name.clone(),
                });
            }
            let mut ctor_set = BTreeSet::new();
            for c in &d.constructors {
                if !values.insert(c.clone()) {
                    violations.push(Violation::Duplicate {
                        kind: "constructor",
                        name: c.clone(),
                    });
                }
                constructors.insert(c.clone());
                ctor_set.insert(Value::Ctor(c.clone()));
            }
            sets.insert(d.name.clone(), Value::Set(ctor_set));
        }
        for s in &spec.named_sets {
            if !types.insert(s.name.clone()) || !values.insert(s.name.clone()) {
                violations.push(Violation::Duplicate {
                    kind: "type",
                    name: s.name.clone(),
                });
            }
        }
        let mut channels = HashMap::new();
        for (i, c) in spec.channels.iter().enumerate() {
            if channels.insert(c.name.clone(), i).is_some() {
                violations.push(Violation::Duplicate {
                    kind: "channel",
                    name: c.name.clone(),
                });
            }
        }
        let mut processes = HashMap::new();
        for (i, p) in spec.processes.iter().enumerate() {
            if processes.insert(p.name.clone(), i).is_some() {
                violations.push(Violation::Duplicate {
                    kind: "process",
                    name: p.name.clone(),
                });
            }
        }
        Names {
            constructors,
            sets,
            channels,
            channel_arity: spec.channels.iter().map(|c| c.param_types.len()).collect(),
            processes,
            process_arity: spec.processes.iter().map(ProcessDef::arity).collect(),
        }
    }

    /// Evaluates named sets in declaration order; each may use earlier ones.
    fn evaluate_sets(&mut self, spec: &Spec, violations: &mut Vec<Violation>) -> Vec<Expr> {
        let mut resolved = Vec::new();
        for s in &spec.named_sets {
            let context = format!("nametype `{}`", s.name);
            let mut r = Resolver {
                names: self,
                violations: Vec::new(),
                context: context.clone(),
            };
            let e = r.expr(&s.value, &[]);
            let ok = r.violations.is_empty();
            violations.extend(r.violations);
            resolved.push(e.clone());
            if !ok {
                continue;
            }
            match eval(&e, &Env::new()) {
                Ok(v @ Value::Set(_)) => {
                    self.sets.insert(s.name.clone(), v);
                }
                Ok(other) => violations.push(Violation::BadDomain {
                    context,
                    reason: format!("expected a set, found {}", other.kind()),
                }),
                Err(err) => violations.push(Violation::BadConstant {
                    context,
                    reason: err.to_string(),
                }),
            }
        }
        resolved
    }
}

struct Resolver<'n> {
    names: &'n Names,
    violations: Vec<Violation>,
    context: String,
}

impl Resolver<'_> {
    fn name(&mut self, n: &Name, scope: &[Name]) -> Expr {
        if scope.contains(n) {
            Expr::Var(n.clone())
        } else if self.names.constructors.contains(n) {
            Expr::Lit(Value::Ctor(n.clone()))
        } else if let Some(v) = self.names.sets.get(n) {
            Expr::Lit(v.clone())
        } else {
            self.violations.push(Violation::UnboundName {
                name: n.clone(),
                context: self.context.clone(),
            });
            Expr::Name(n.clone())
        }
    }

    fn expr(&mut self, e: &Expr, scope: &[Name]) -> Expr {
        let bin = |r: &mut Self, a: &Expr, b: &Expr| {
            (Box::new(r.expr(a, scope)), Box::new(r.expr(b, scope)))
        };
        match e {
            Expr::Name(n) => self.name(n, scope),
            Expr::Var(n) => {
                if !scope.contains(n) {
                    self.violations.push(Violation::UnboundName {
                        name: n.clone(),
                        context: self.context.clone(),
                    });
                }
                e.clone()
            }
            Expr::Lit(_) => e.clone(),
            Expr::SetEnum(items) => {
                Expr::SetEnum(items.iter().map(|i| self.expr(i, scope)).collect())
            }
            Expr::Not(a) => Expr::Not(Box::new(self.expr(a, scope))),
            Expr::Range(a, b) => {
                let (a, b) = bin(self, a, b);
                Expr::Range(a, b)
            }
            Expr::Member(a, b) => {
                let (a, b) = bin(self, a, b);
                Expr::Member(a, b)
            }
            Expr::Diff(a, b) => {
                let (a, b) = bin(self, a, b);
                Expr::Diff(a, b)
            }
            Expr::Union(a, b) => {
                let (a, b) = bin(self, a, b);
                Expr::Union(a, b)
            }
            Expr::Eq(a, b) => {
                let (a, b) = bin(self, a, b);
                Expr::Eq(a, b)
            }
            Expr::Ne(a, b) => {
                let (a, b) = bin(self, a, b);
                Expr::Ne(a, b)
            }
            Expr::And(a, b) => {
                let (a, b) = bin(self, a, b);
                Expr::And(a, b)
            }
            Expr::Or(a, b) => {
                let (a, b) = bin(self, a, b);
                Expr::Or(a, b)
            }
        }
    }

    fn process(
        &mut self,
        p: ProcessExpr,
        scope: &mut Vec<Name>,
        domains: &[Vec<Vec<Value>>],
    ) -> ProcessExpr {
        match p {
            ProcessExpr::Skip => ProcessExpr::Skip,
            ProcessExpr::Choice(ops) => ProcessExpr::Choice(
                ops.into_iter()
                    .map(|op| self.process(op, scope, domains))
                    .collect(),
            ),
            ProcessExpr::Guard(cond, body) => {
                let cond = self.expr(&cond, scope);
                ProcessExpr::guard(cond, self.process(*body, scope, domains))
            }
            ProcessExpr::Call(name, args) => {
                match self.names.processes.get(&name) {
                    None => self.violations.push(Violation::UndeclaredProcess {
                        name: name.clone(),
                        context: self.context.clone(),
                    }),
                    Some(&i) => {
                        let expected = self.names.process_arity[i];
                        if expected != args.len() {
                            self.violations.push(Violation::CallArity {
                                process: name.clone(),
                                expected,
                                found: args.len(),
                                context: self.context.clone(),
                            });
                        }
                    }
                }
                let args = args.iter().map(|a| self.expr(a, scope)).collect();
                ProcessExpr::Call(name, args)
            }
            ProcessExpr::Prefix(ev, cont) => {
                let depth = scope.len();
                let channel = self.names.channels.get(&ev.channel).copied();
                match channel {
                    None => self.violations.push(Violation::UndeclaredChannel {
                        name: ev.channel.clone(),
                        context: self.context.clone(),
                    }),
                    Some(c) => {
                        let expected = self.names.channel_arity[c];
                        if expected != ev.items.len() {
                            self.violations.push(Violation::EventArity {
                                channel: ev.channel.clone(),
                                expected,
                                found: ev.items.len(),
                                context: self.context.clone(),
                            });
                        }
                    }
                }
                let mut items = Vec::with_capacity(ev.items.len());
                for (i, item) in ev.items.into_iter().enumerate() {
                    let item = match item {
                        EventItem::Dot(e) => EventItem::Dot(self.expr(&e, scope)),
                        // `?Green` matches the constant rather than binding.
                        EventItem::Input(x)
                            if !scope.contains(&x) && self.names.constructors.contains(&x) =>
                        {
                            EventItem::Dot(Expr::Lit(Value::Ctor(x)))
                        }
                        EventItem::Input(x) => {
                            scope.push(x.clone());
                            EventItem::Input(x)
                        }
                        EventItem::InputIn(x, s) => {
                            let s = self.expr(&s, scope);
                            scope.push(x.clone());
                            EventItem::InputIn(x, s)
                        }
                    };
                    if let (EventItem::Dot(e), Some(c)) = (&item, channel) {
                        self.check_constant_in_domain(e, &ev.channel, &domains[c], i);
                    }
                    items.push(item);
                }
                let cont = self.process(*cont, scope, domains);
                scope.truncate(depth);
                ProcessExpr::prefix(
                    EventExpr {
                        channel: ev.channel,
                        items,
                    },
                    cont,
                )
            }
        }
    }

    fn check_constant_in_domain(&mut self, e: &Expr, channel: &Name, domains: &[Vec<Value>], i: usize) {
        let Some(domain) = domains.get(i) else { return };
        if !e.is_closed() {
            return;
        }
        match eval(e, &Env::new()) {
            Ok(v) if domain.binary_search(&v).is_err() => self.violations.push(Violation::OutOfDomain {
                channel: channel.clone(),
                value: v,
                context: self.context.clone(),
            }),
            Ok(_) => {}
            Err(err) => self.violations.push(Violation::BadConstant {
                context: self.context.clone(),
                reason: err.to_string(),
            }),
        }
    }
}

/// Resolves names and checks arities, scoping and domains. Every problem
/// found is reported, not just the first.
pub fn validate_spec(raw: Spec) -> Result<ResolvedSpec, ResolveError> {
    let mut violations = Vec::new();
    let mut names = Names::declare(&raw, &mut violations);
    let set_exprs = names.evaluate_sets(&raw, &mut violations);

    let mut spec = raw;
    for (decl, e) in spec.named_sets.iter_mut().zip(set_exprs) {
        decl.value = e;
    }

    // Channel domains.
    let mut domains = Vec::with_capacity(spec.channels.len());
    for c in &mut spec.channels {
        let context = format!("channel `{}`", c.name);
        let mut per_param = Vec::new();
        for t in &mut c.param_types {
            let value = match t {
                TypeRef::Named(n) => match names.sets.get(n) {
                    Some(v) => Some(v.clone()),
                    None => {
                        if matches!(&**n, "Int" | "Integer" | "Seq" | "Set") {
                            violations.push(Violation::NonFiniteDomain {
                                name: n.clone(),
                                context: context.clone(),
                            });
                        } else {
                            violations.push(Violation::UndeclaredType {
                                name: n.clone(),
                                context: context.clone(),
                            });
                        }
                        None
                    }
                },
                TypeRef::Inline(e) => {
                    let mut r = Resolver {
                        names: &names,
                        violations: Vec::new(),
                        context: context.clone(),
                    };
                    *e = r.expr(e, &[]);
                    let ok = r.violations.is_empty();
                    violations.extend(r.violations);
                    if ok {
                        match eval(e, &Env::new()) {
                            Ok(v) => Some(v),
                            Err(err) => {
                                violations.push(Violation::BadConstant {
                                    context: context.clone(),
                                    reason: err.to_string(),
                                });
                                None
                            }
                        }
                    } else {
                        None
                    }
                }
            };
            let domain = match value {
                Some(Value::Set(items)) => {
                    if items.iter().any(|v| matches!(v, Value::Set(_))) {
                        violations.push(Violation::BadDomain {
                            context: context.clone(),
                            reason: "channel parameters must be integers or constructors".into(),
                        });
                    }
                    items.into_iter().collect()
                }
                Some(other) => {
                    violations.push(Violation::BadDomain {
                        context: context.clone(),
                        reason: format!("expected a set, found {}", other.kind()),
                    });
                    Vec::new()
                }
                None => Vec::new(),
            };
            per_param.push(domain);
        }
        domains.push(per_param);
    }

    // Process bodies.
    for def in &mut spec.processes {
        let arity = def.arity();
        let n_clauses = def.clauses.len();
        for (k, clause) in def.clauses.iter_mut().enumerate() {
            if clause.patterns.len() != arity {
                violations.push(Violation::ClauseArity {
                    process: def.name.clone(),
                    expected: arity,
                    found: clause.patterns.len(),
                });
            }
            let context = if n_clauses > 1 {
                format!("process `{}` clause {}", def.name, k + 1)
            } else {
                format!("process `{}`", def.name)
            };
            let mut scope: Vec<Name> = Vec::new();
            for pat in &mut clause.patterns {
                let resolved = match &*pat {
                    Pattern::Name(n) if names.constructors.contains(n) => {
                        Pattern::Lit(Value::Ctor(n.clone()))
                    }
                    Pattern::Name(n) if names.sets.contains_key(n) => {
                        Pattern::Lit(names.sets[n].clone())
                    }
                    Pattern::Name(n) | Pattern::Bind(n) => {
                        if scope.contains(n) {
                            violations.push(Violation::DuplicateBinder {
                                name: n.clone(),
                                context: context.clone(),
                            });
                        }
                        scope.push(n.clone());
                        Pattern::Bind(n.clone())
                    }
                    other => other.clone(),
                };
                *pat = resolved;
            }
            let mut r = Resolver {
                names: &names,
                violations: Vec::new(),
                context,
            };
            let body = std::mem::replace(&mut clause.body, ProcessExpr::Skip);
            clause.body = r.process(body, &mut scope, &domains);
            violations.extend(r.violations);
        }
    }

    if !violations.is_empty() {
        return Err(ResolveError { violations });
    }
    Ok(ResolvedSpec {
        processes: names.processes,
        channels: names.channels,
        spec,
        domains,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_spec;

    fn resolve(src: &str) -> Result<ResolvedSpec, ResolveError> {
        validate_spec(parse_spec(src).unwrap())
    }

    #[test]
    fn undeclared_channel() {
        let err = resolve("channel a\nP = telemetry -> SKIP").unwrap_err();
        assert!(matches!(
            &err.violations[..],
            [Violation::UndeclaredChannel { name, .. }] if &**name == "telemetry"
        ));
        assert!(err.to_string().contains("undeclared channel"));
    }

    #[test]
    fn restricted_input_over_parameter_set() {
        let r = resolve(
            "nametype W = {0..4}\nchannel inspect : W\n\
             P(WaypointSet) = inspect?wp:(WaypointSet) -> P(diff(WaypointSet, {wp}))",
        )
        .unwrap();
        let body = &r.spec().processes[0].clauses[0].body;
        let ProcessExpr::Prefix(ev, cont) = body else {
            panic!()
        };
        assert_eq!(
            ev.items[0],
            EventItem::InputIn("wp".into(), Expr::Var("WaypointSet".into()))
        );
        let ProcessExpr::Call(_, args) = &**cont else {
            panic!()
        };
        assert!(matches!(&args[0], Expr::Diff(a, _) if **a == Expr::Var("WaypointSet".into())));
    }

    #[test]
    fn reports_every_violation() {
        let err = resolve(
            "channel a, b : {0..1}\nchannel a\n\
             P = a.0 -> Q [] b -> R(1) [] b.x -> SKIP [] b.5 -> SKIP\n\
             R(x) = a -> R(x, x)",
        )
        .unwrap_err();
        let kinds: Vec<_> = err
            .violations
            .iter()
            .map(|v| match v {
                Violation::Duplicate { .. } => "dup",
                Violation::EventArity { .. } => "event-arity",
                Violation::UndeclaredProcess { .. } => "undeclared-process",
                Violation::UnboundName { .. } => "unbound",
                Violation::OutOfDomain { .. } => "domain",
                Violation::CallArity { .. } => "call-arity",
                _ => "other",
            })
            .collect();
        for k in ["dup", "event-arity", "undeclared-process", "unbound", "domain", "call-arity"] {
            assert!(kinds.contains(&k), "missing {k} in {err}");
        }
    }

    #[test]
    fn non_finite_domain() {
        let err = resolve("channel c : Int").unwrap_err();
        assert!(matches!(err.violations[0], Violation::NonFiniteDomain { .. }));
    }

    #[test]
    fn constructor_input_is_a_literal() {
        let r = resolve(
            "datatype L = Red | Green\nchannel lvl : L\nP = lvl?Green -> P",
        )
        .unwrap();
        let ProcessExpr::Prefix(ev, _) = &r.spec().processes[0].clauses[0].body else {
            panic!()
        };
        assert_eq!(ev.items[0], EventItem::Dot(Expr::Lit(Value::Ctor("Green".into()))));
    }

    #[test]
    fn clause_arity_mismatch() {
        let err = resolve("channel a\nP(x) = a -> SKIP\nP(x, y) = a -> SKIP").unwrap_err();
        assert!(matches!(err.violations[0], Violation::ClauseArity { .. }));
    }

    #[test]
    fn idempotent() {
        let r = resolve(
            "datatype L = Red | Green\nnametype W = {0..2}\nchannel c : W.L\n\
             P({}, _) = SKIP\nP(s, l) = c?x:(s)!l -> P(diff(s, {x}), Green)",
        )
        .unwrap();
        let again = validate_spec(r.spec().clone()).unwrap();
        assert_eq!(again.spec(), r.spec());
    }

    #[test]
    fn entry_resolution() {
        let r = resolve(
            "datatype L = Red | Green\nnametype W = {0..2}\nchannel c : W\n\
             P(s, l) = c?x:(s) -> P(s, l)",
        )
        .unwrap();
        let entry = r
            .resolve_entry(&crate::syntax::parse_entry("P(W, Green)").unwrap())
            .unwrap();
        assert_eq!(entry.args[1], Value::Ctor("Green".into()));
        assert!(r
            .resolve_entry(&crate::syntax::parse_entry("P(W)").unwrap())
            .is_err());
        assert!(r
            .resolve_entry(&crate::syntax::parse_entry("Q").unwrap())
            .is_err());
    }
}
