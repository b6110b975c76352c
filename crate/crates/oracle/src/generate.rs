//! Seeded random specifications for equivalence testing.
//!
//! Generated specs are small (a handful of events), always well-typed and
//! guarded: calls only appear as prefix continuations, so every recursion
//! consumes an event.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cspmon_core::syntax::ast::{
    ChannelDecl, Clause, DatatypeDecl, EventExpr, EventItem, Expr, Name, NamedSetDecl, Pattern,
    ProcessDef, ProcessExpr, Spec, TypeRef,
};
use cspmon_core::Value;

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub max_channels: usize,
    /// Largest parameter domain.
    pub max_values: usize,
    /// Deepest nesting of process operators in one clause body.
    pub max_depth: usize,
    pub max_processes: usize,
    /// Upper bound on the alphabet size.
    pub max_events: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_channels: 4,
            max_values: 3,
            max_depth: 4,
            max_processes: 3,
            max_events: 8,
        }
    }
}

/// A generated specification: raw (unresolved) syntax, its source text and
/// an entry call.
#[derive(Debug, Clone)]
pub struct Generated {
    pub spec: Spec,
    pub source: String,
    pub entry: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Int,
    Ctor,
    Set,
}

const INTS: &str = "D";
const CTORS: &str = "T";

struct Gen {
    rng: ChaCha8Rng,
    cfg: GenConfig,
    ints: i64,
    ctors: Vec<Name>,
    channels: Vec<(Name, Vec<Kind>)>,
    processes: Vec<(Name, Vec<Kind>)>,
    fresh: usize,
}

pub fn generate_spec(seed: u64) -> Generated {
    generate_spec_with(seed, GenConfig::default())
}

pub fn generate_spec_with(seed: u64, cfg: GenConfig) -> Generated {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        cfg,
        ints: 0,
        ctors: Vec::new(),
        channels: Vec::new(),
        processes: Vec::new(),
        fresh: 0,
    };
    g.run()
}

fn name(s: impl AsRef<str>) -> Name {
    s.as_ref().into()
}

fn lit_int(i: i64) -> Expr {
    Expr::Lit(Value::Int(i))
}

impl Gen {
    fn run(&mut self) -> Generated {
        let cfg = self.cfg;
        self.ints = self.rng.gen_range(2..=cfg.max_values.max(2)) as i64;
        let mut spec = Spec::default();
        spec.named_sets.push(NamedSetDecl {
            name: name(INTS),
            value: Expr::Range(Box::new(lit_int(0)), Box::new(lit_int(self.ints - 1))),
        });
        if self.rng.gen_bool(0.5) {
            let n = self.rng.gen_range(2..=cfg.max_values.max(2));
            self.ctors = ["A", "B", "C", "E"][..n.min(4)].iter().map(name).collect();
            spec.datatypes.push(DatatypeDecl {
                name: name(CTORS),
                constructors: self.ctors.clone(),
            });
        }

        let n_channels = self.rng.gen_range(1..=cfg.max_channels.max(1));
        let mut events = 0;
        for c in 0..n_channels {
            let mut kinds = Vec::new();
            let arity = *[0, 0, 1, 1, 1, 2].choose(&mut self.rng).unwrap();
            let mut size = 1;
            for _ in 0..arity {
                let k = if !self.ctors.is_empty() && self.rng.gen_bool(0.4) {
                    Kind::Ctor
                } else {
                    Kind::Int
                };
                let d = self.domain_size(k);
                if events + size * d > cfg.max_events {
                    break;
                }
                size *= d;
                kinds.push(k);
            }
            if events + size > cfg.max_events {
                break;
            }
            events += size;
            spec.channels.push(ChannelDecl {
                name: name(format!("c{c}")),
                param_types: kinds
                    .iter()
                    .map(|k| TypeRef::Named(name(if *k == Kind::Int { INTS } else { CTORS })))
                    .collect(),
            });
            self.channels.push((name(format!("c{c}")), kinds));
        }

        let n_procs = self.rng.gen_range(1..=cfg.max_processes.max(1));
        for p in 0..n_procs {
            let arity = self.rng.gen_range(0..=2);
            let kinds = (0..arity)
                .map(|_| if self.rng.gen_bool(0.5) { Kind::Int } else { Kind::Set })
                .collect();
            self.processes.push((name(format!("P{p}")), kinds));
        }
        for p in 0..n_procs {
            let def = self.process(p);
            spec.processes.push(def);
        }

        let (entry_name, kinds) = self.processes[0].clone();
        let args: Vec<String> = kinds.iter().map(|&k| self.literal(k).to_string()).collect();
        let entry = if args.is_empty() {
            entry_name.to_string()
        } else {
            format!("{entry_name}({})", args.join(", "))
        };
        Generated {
            source: spec.to_string(),
            spec,
            entry,
        }
    }

    fn domain_size(&self, k: Kind) -> usize {
        match k {
            Kind::Int => self.ints as usize,
            Kind::Ctor => self.ctors.len(),
            Kind::Set => 1 << self.ints,
        }
    }

    fn literal(&mut self, k: Kind) -> Value {
        match k {
            Kind::Int => Value::Int(self.rng.gen_range(0..self.ints)),
            Kind::Ctor => Value::Ctor(self.ctors.choose(&mut self.rng).unwrap().clone()),
            Kind::Set => Value::Set(
                (0..self.ints)
                    .filter(|_| self.rng.gen_bool(0.5))
                    .map(Value::Int)
                    .collect(),
            ),
        }
    }

    fn fresh(&mut self) -> Name {
        self.fresh += 1;
        name(format!("v{}", self.fresh))
    }

    fn process(&mut self, p: usize) -> ProcessDef {
        let (pname, kinds) = self.processes[p].clone();
        let params: Vec<(Name, Kind)> = kinds
            .iter()
            .enumerate()
            .map(|(i, &k)| (name(format!("x{i}")), k))
            .collect();
        let mut clauses = Vec::new();
        if !params.is_empty() && self.rng.gen_bool(0.3) {
            // A special case first, then the general clause.
            let i = self.rng.gen_range(0..params.len());
            let mut scope = Vec::new();
            let patterns = params
                .iter()
                .enumerate()
                .map(|(j, (x, k))| {
                    if j == i {
                        match k {
                            Kind::Set => Pattern::Lit(Value::empty_set()),
                            _ => Pattern::Lit(Value::Int(self.rng.gen_range(0..self.ints))),
                        }
                    } else if self.rng.gen_bool(0.3) {
                        Pattern::Wildcard
                    } else {
                        scope.push((x.clone(), *k));
                        Pattern::Name(x.clone())
                    }
                })
                .collect();
            let body = self.body(self.cfg.max_depth, &mut scope);
            clauses.push(Clause { patterns, body });
        }
        let mut scope = params.clone();
        let patterns = params.iter().map(|(x, _)| Pattern::Name(x.clone())).collect();
        let body = self.body(self.cfg.max_depth, &mut scope);
        clauses.push(Clause { patterns, body });
        ProcessDef {
            name: pname,
            clauses,
        }
    }

    /// Guards only appear as choice operands, so that a false condition
    /// prunes one branch instead of deadlocking a whole state.
    fn body(&mut self, depth: usize, scope: &mut Vec<(Name, Kind)>) -> ProcessExpr {
        self.body_in(depth, scope, false)
    }

    fn body_in(&mut self, depth: usize, scope: &mut Vec<(Name, Kind)>, in_choice: bool) -> ProcessExpr {
        let roll = self.rng.gen_range(0..if in_choice { 10 } else { 9 });
        if depth <= 1 || roll < 6 {
            return if self.rng.gen_bool(0.1) {
                ProcessExpr::Skip
            } else {
                self.prefix(depth, scope)
            };
        }
        match roll {
            6..=8 => {
                let n = self.rng.gen_range(2..=3);
                let ops = (0..n).map(|_| self.body_in(depth - 1, scope, true)).collect::<Vec<_>>();
                ProcessExpr::choice(ops)
            }
            _ => {
                let cond = self.bool_expr(1, scope);
                let body = self.body(depth - 1, scope);
                ProcessExpr::guard(cond, body)
            }
        }
    }

    fn prefix(&mut self, depth: usize, scope: &mut Vec<(Name, Kind)>) -> ProcessExpr {
        let (channel, kinds) = self.channels.choose(&mut self.rng).unwrap().clone();
        let mark = scope.len();
        let mut items = Vec::new();
        for k in kinds {
            let item = match self.rng.gen_range(0..3) {
                0 => EventItem::Dot(self.value_expr(k, scope)),
                1 => {
                    let x = self.fresh();
                    scope.push((x.clone(), k));
                    EventItem::Input(x)
                }
                _ => {
                    let set = match k {
                        Kind::Int => self.set_expr(2, scope),
                        _ => {
                            let picks: Vec<Name> =
                                self.ctors.iter().filter(|_| self.rng.gen_bool(0.5)).cloned().collect();
                            Expr::SetEnum(picks.into_iter().map(Expr::Name).collect())
                        }
                    };
                    let x = self.fresh();
                    scope.push((x.clone(), k));
                    EventItem::InputIn(x, set)
                }
            };
            items.push(item);
        }
        let cont = if depth <= 1 || self.rng.gen_bool(0.35) {
            self.call(scope)
        } else {
            self.body(depth - 1, scope)
        };
        scope.truncate(mark);
        ProcessExpr::prefix(EventExpr { channel, items }, cont)
    }

    fn call(&mut self, scope: &[(Name, Kind)]) -> ProcessExpr {
        let (p, kinds) = self.processes.choose(&mut self.rng).unwrap().clone();
        let args = kinds.iter().map(|&k| self.value_expr(k, scope)).collect();
        ProcessExpr::Call(p, args)
    }

    fn var(&mut self, k: Kind, scope: &[(Name, Kind)]) -> Option<Expr> {
        let vars: Vec<&Name> = scope.iter().filter(|(_, kk)| *kk == k).map(|(x, _)| x).collect();
        vars.choose(&mut self.rng).map(|x| Expr::Name((*x).clone()))
    }

    fn value_expr(&mut self, k: Kind, scope: &[(Name, Kind)]) -> Expr {
        if k == Kind::Set {
            return self.set_expr(2, scope);
        }
        if self.rng.gen_bool(0.6) {
            if let Some(v) = self.var(k, scope) {
                return v;
            }
        }
        match self.literal(k) {
            Value::Ctor(c) => Expr::Name(c),
            v => Expr::Lit(v),
        }
    }

    fn set_expr(&mut self, depth: usize, scope: &[(Name, Kind)]) -> Expr {
        let roll = if depth == 0 { self.rng.gen_range(0..4) } else { self.rng.gen_range(0..6) };
        match roll {
            0 => {
                let n = self.rng.gen_range(0..=2);
                Expr::SetEnum((0..n).map(|_| self.value_expr(Kind::Int, scope)).collect())
            }
            1 => {
                let lo = self.rng.gen_range(0..self.ints);
                let hi = self.rng.gen_range(lo..self.ints);
                Expr::Range(Box::new(lit_int(lo)), Box::new(lit_int(hi)))
            }
            2 => Expr::Name(name(INTS)),
            3 => self.var(Kind::Set, scope).unwrap_or_else(|| Expr::Name(name(INTS))),
            4 => Expr::Diff(
                Box::new(self.set_expr(depth - 1, scope)),
                Box::new(self.set_expr(depth - 1, scope)),
            ),
            _ => Expr::Union(
                Box::new(self.set_expr(depth - 1, scope)),
                Box::new(self.set_expr(depth - 1, scope)),
            ),
        }
    }

    fn bool_expr(&mut self, depth: usize, scope: &[(Name, Kind)]) -> Expr {
        let roll = if depth == 0 { self.rng.gen_range(0..4) } else { self.rng.gen_range(0..7) };
        let b = |e: Expr| Box::new(e);
        match roll {
            0 => Expr::Lit(Value::Bool(self.rng.gen_bool(0.7))),
            1 => Expr::Member(b(self.value_expr(Kind::Int, scope)), b(self.set_expr(1, scope))),
            2 => Expr::Eq(b(self.value_expr(Kind::Int, scope)), b(self.value_expr(Kind::Int, scope))),
            3 => {
                let k = if self.ctors.is_empty() { Kind::Int } else { Kind::Ctor };
                Expr::Ne(b(self.value_expr(k, scope)), b(self.value_expr(k, scope)))
            }
            4 => Expr::Not(b(self.bool_expr(depth - 1, scope))),
            5 => Expr::And(b(self.bool_expr(depth - 1, scope)), b(self.bool_expr(depth - 1, scope))),
            _ => Expr::Or(b(self.bool_expr(depth - 1, scope)), b(self.bool_expr(depth - 1, scope))),
        }
    }
}
