//! Rendering back to concrete syntax. Output reparses to the same tree.

use std::fmt::{self, Display, Formatter, Write};

use super::ast::*;
use crate::value::Value;

impl Display for Spec {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        for d in &self.datatypes {
            write!(f, "datatype {} = ", d.name)?;
            write_sep(f, &d.constructors, " | ")?;
            f.write_char('\n')?;
        }
        for s in &self.named_sets {
            writeln!(f, "nametype {} = {}", s.name, s.value)?;
        }
        for c in &self.channels {
            write!(f, "channel {}", c.name)?;
            if !c.param_types.is_empty() {
                f.write_str(" : ")?;
                for (i, t) in c.param_types.iter().enumerate() {
                    if i > 0 {
                        f.write_char('.')?;
                    }
                    match t {
                        TypeRef::Named(n) => f.write_str(n)?,
                        TypeRef::Inline(e) => write_atom(f, e)?,
                    }
                }
            }
            f.write_char('\n')?;
        }
        for p in &self.processes {
            for c in &p.clauses {
                f.write_str(&p.name)?;
                if !c.patterns.is_empty() {
                    f.write_char('(')?;
                    write_sep(f, &c.patterns, ", ")?;
                    f.write_char(')')?;
                }
                writeln!(f, " = {}", c.body)?;
            }
        }
        Ok(())
    }
}

fn write_sep<T: Display>(f: &mut Formatter<'_>, items: &[T], sep: &str) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

impl Display for Pattern {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Wildcard => f.write_char('_'),
            Pattern::Name(n) | Pattern::Bind(n) => f.write_str(n),
            Pattern::Lit(v) => write!(f, "{v}"),
        }
    }
}

impl Display for ProcessExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            ProcessExpr::Choice(ops) => {
                for (i, op) in ops.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" [] ")?;
                    }
                    write!(f, "{op}")?;
                }
                Ok(())
            }
            other => write_operand(f, other),
        }
    }
}

/// Writes a process at guard/prefix precedence, bracketing choices.
fn write_operand(f: &mut Formatter<'_>, p: &ProcessExpr) -> fmt::Result {
    match p {
        ProcessExpr::Skip => f.write_str("SKIP"),
        ProcessExpr::Choice(_) => write!(f, "({p})"),
        ProcessExpr::Prefix(ev, cont) => {
            write!(f, "{ev} -> ")?;
            write_operand(f, cont)
        }
        ProcessExpr::Guard(cond, body) => {
            write_atom(f, cond)?;
            f.write_str(" & ")?;
            write_operand(f, body)
        }
        ProcessExpr::Call(name, args) => {
            f.write_str(name)?;
            if !args.is_empty() {
                f.write_char('(')?;
                write_sep(f, args, ", ")?;
                f.write_char(')')?;
            }
            Ok(())
        }
    }
}

impl Display for EventExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&self.channel)?;
        for item in &self.items {
            match item {
                EventItem::Dot(e) => {
                    f.write_char('.')?;
                    write_atom(f, e)?;
                }
                EventItem::Input(x) => write!(f, "?{x}")?,
                EventItem::InputIn(x, s) => {
                    write!(f, "?{x}:")?;
                    write_atom(f, s)?;
                }
            }
        }
        Ok(())
    }
}

fn is_atomic(e: &Expr) -> bool {
    matches!(
        e,
        Expr::Name(_)
            | Expr::Var(_)
            | Expr::Lit(_)
            | Expr::SetEnum(_)
            | Expr::Range(..)
            | Expr::Member(..)
            | Expr::Diff(..)
            | Expr::Union(..)
    )
}

fn write_atom(f: &mut Formatter<'_>, e: &Expr) -> fmt::Result {
    if is_atomic(e) {
        write!(f, "{e}")
    } else {
        write!(f, "({e})")
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Name(n) | Expr::Var(n) => f.write_str(n),
            Expr::Lit(v) => write_value(f, v),
            Expr::SetEnum(items) => {
                f.write_char('{')?;
                write_sep(f, items, ", ")?;
                f.write_char('}')
            }
            Expr::Range(lo, hi) => write!(f, "{{{lo}..{hi}}}"),
            Expr::Member(a, b) => write!(f, "member({a}, {b})"),
            Expr::Diff(a, b) => write!(f, "diff({a}, {b})"),
            Expr::Union(a, b) => write!(f, "union({a}, {b})"),
            Expr::Eq(a, b) => {
                write_atom(f, a)?;
                f.write_str(" == ")?;
                write_atom(f, b)
            }
            Expr::Ne(a, b) => {
                write_atom(f, a)?;
                f.write_str(" != ")?;
                write_atom(f, b)
            }
            Expr::Not(e) => {
                f.write_str("not ")?;
                match **e {
                    Expr::And(..) | Expr::Or(..) => write!(f, "({e})"),
                    _ => write!(f, "{e}"),
                }
            }
            Expr::And(a, b) => {
                write_bool_operand(f, a, true)?;
                f.write_str(" and ")?;
                write_bool_operand(f, b, false)
            }
            Expr::Or(a, b) => {
                write_bool_operand(f, a, false)?;
                f.write_str(" or ")?;
                match **b {
                    Expr::Or(..) => write!(f, "({b})"),
                    _ => write!(f, "{b}"),
                }
            }
        }
    }
}

/// Operands of `and` bracket any `or`, and a right-nested `and`, so that
/// left associativity reproduces the tree.
fn write_bool_operand(f: &mut Formatter<'_>, e: &Expr, left_of_and: bool) -> fmt::Result {
    match e {
        Expr::Or(..) => write!(f, "({e})"),
        Expr::And(..) if !left_of_and => write!(f, "({e})"),
        _ => write!(f, "{e}"),
    }
}

// Literal values print as expressions that evaluate back to them.
fn write_value(f: &mut Formatter<'_>, v: &Value) -> fmt::Result {
    write!(f, "{v}")
}
