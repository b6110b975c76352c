//! Abstract syntax of the supported CSP_M subset.
//!
//! The same types describe both freshly parsed and resolved specifications.
//! Parsing leaves every identifier used as a value as [`Expr::Name`] (and
//! patterns as [`Pattern::Name`]); resolution rewrites those into variables
//! or literal values, so a resolved tree never contains a `Name`.

use std::sync::Arc;

use crate::value::Value;

/// Interned identifier.
pub type Name = Arc<str>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Spec {
    pub datatypes: Vec<DatatypeDecl>,
    pub named_sets: Vec<NamedSetDecl>,
    pub channels: Vec<ChannelDecl>,
    pub processes: Vec<ProcessDef>,
}

/// `datatype RadLevel = Red | Orange | Green`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatatypeDecl {
    pub name: Name,
    pub constructors: Vec<Name>,
}

/// `nametype Waypoint = {0..4}`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedSetDecl {
    pub name: Name,
    pub value: Expr,
}

/// `channel move : Waypoint`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelDecl {
    pub name: Name,
    pub param_types: Vec<TypeRef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeRef {
    /// A datatype or nametype, by name.
    Named(Name),
    /// An inline set expression such as `{0..3}`.
    Inline(Expr),
}

/// All clauses of one process, in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessDef {
    pub name: Name,
    pub clauses: Vec<Clause>,
}

impl ProcessDef {
    pub fn arity(&self) -> usize {
        self.clauses.first().map_or(0, |c| c.patterns.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub patterns: Vec<Pattern>,
    pub body: ProcessExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    Wildcard,
    /// Unresolved identifier: either a constructor, a named set or a binder.
    Name(Name),
    Bind(Name),
    Lit(Value),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProcessExpr {
    Skip,
    Prefix(EventExpr, Box<ProcessExpr>),
    /// External choice. Nested choices are flattened, so no operand is
    /// itself a `Choice`, and there are always at least two operands.
    Choice(Vec<ProcessExpr>),
    Guard(Expr, Box<ProcessExpr>),
    Call(Name, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EventExpr {
    pub channel: Name,
    pub items: Vec<EventItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EventItem {
    /// `.e` or `!e`
    Dot(Expr),
    /// `?x`
    Input(Name),
    /// `?x:(S)`
    InputIn(Name, Expr),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    /// Unresolved identifier.
    Name(Name),
    Var(Name),
    Lit(Value),
    /// `{a, b, c}`; `{}` is the empty enumeration.
    SetEnum(Vec<Expr>),
    /// `{lo..hi}`
    Range(Box<Expr>, Box<Expr>),
    Member(Box<Expr>, Box<Expr>),
    Diff(Box<Expr>, Box<Expr>),
    Union(Box<Expr>, Box<Expr>),
    Eq(Box<Expr>, Box<Expr>),
    Ne(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

impl ProcessExpr {
    /// Builds an external choice, flattening nested choices.
    pub fn choice(operands: impl IntoIterator<Item = ProcessExpr>) -> ProcessExpr {
        let mut flat = Vec::new();
        for p in operands {
            match p {
                ProcessExpr::Choice(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            ProcessExpr::Choice(flat)
        }
    }

    pub fn prefix(event: EventExpr, cont: ProcessExpr) -> ProcessExpr {
        ProcessExpr::Prefix(event, Box::new(cont))
    }

    pub fn guard(cond: Expr, body: ProcessExpr) -> ProcessExpr {
        ProcessExpr::Guard(cond, Box::new(body))
    }
}

impl Expr {
    /// True when the expression mentions no variables or unresolved names.
    pub fn is_closed(&self) -> bool {
        match self {
            Expr::Name(_) | Expr::Var(_) => false,
            Expr::Lit(_) => true,
            Expr::SetEnum(items) => items.iter().all(Expr::is_closed),
            Expr::Not(e) => e.is_closed(),
            Expr::Range(a, b)
            | Expr::Member(a, b)
            | Expr::Diff(a, b)
            | Expr::Union(a, b)
            | Expr::Eq(a, b)
            | Expr::Ne(a, b)
            | Expr::And(a, b)
            | Expr::Or(a, b) => a.is_closed() && b.is_closed(),
        }
    }
}
