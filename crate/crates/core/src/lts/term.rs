//! Closed process terms used as state identities during synthesis.
//!
//! A successor state is identified either by a call `(process, argument
//! values)` or by its continuation with every free variable replaced by its
//! value and every closed sub-expression folded to a literal.

use std::rc::Rc;

use crate::syntax::ast::{EventExpr, EventItem, Expr, Name, ProcessExpr};
use crate::value::{eval, Env, EvalError, Value};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum Key {
    Call(usize, Vec<Value>),
    Term(Rc<ProcessExpr>),
    /// The state reached by `tick`.
    Terminated,
}

pub(crate) fn subst_process(
    p: &ProcessExpr,
    env: &Env,
    bound: &mut Vec<Name>,
) -> Result<ProcessExpr, EvalError> {
    Ok(match p {
        ProcessExpr::Skip => ProcessExpr::Skip,
        ProcessExpr::Choice(ops) => ProcessExpr::Choice(
            ops.iter()
                .map(|op| subst_process(op, env, bound))
                .collect::<Result<_, _>>()?,
        ),
        ProcessExpr::Guard(c, body) => {
            ProcessExpr::guard(subst_expr(c, env, bound)?, subst_process(body, env, bound)?)
        }
        ProcessExpr::Call(name, args) => ProcessExpr::Call(
            name.clone(),
            args.iter()
                .map(|a| subst_expr(a, env, bound))
                .collect::<Result<_, _>>()?,
        ),
        ProcessExpr::Prefix(ev, cont) => {
            let depth = bound.len();
            let mut items = Vec::with_capacity(ev.items.len());
            for item in &ev.items {
                items.push(match item {
                    EventItem::Dot(e) => EventItem::Dot(subst_expr(e, env, bound)?),
                    EventItem::Input(x) => {
                        bound.push(x.clone());
                        EventItem::Input(x.clone())
                    }
                    EventItem::InputIn(x, s) => {
                        let s = subst_expr(s, env, bound)?;
                        bound.push(x.clone());
                        EventItem::InputIn(x.clone(), s)
                    }
                });
            }
            let cont = subst_process(cont, env, bound)?;
            bound.truncate(depth);
            ProcessExpr::prefix(
                EventExpr {
                    channel: ev.channel.clone(),
                    items,
                },
                cont,
            )
        }
    })
}

pub(crate) fn subst_expr(e: &Expr, env: &Env, bound: &[Name]) -> Result<Expr, EvalError> {
    let sub = |x: &Expr| subst_expr(x, env, bound).map(Box::new);
    let out = match e {
        Expr::Var(n) if bound.contains(n) => return Ok(e.clone()),
        Expr::Var(n) => match env.get(n) {
            Some(v) => return Ok(Expr::Lit(v.clone())),
            None => return Err(EvalError::Unbound(n.clone())),
        },
        Expr::Name(n) => return Err(EvalError::Unresolved(n.clone())),
        Expr::Lit(_) => return Ok(e.clone()),
        Expr::SetEnum(items) => Expr::SetEnum(
            items
                .iter()
                .map(|i| subst_expr(i, env, bound))
                .collect::<Result<_, _>>()?,
        ),
        Expr::Not(a) => Expr::Not(sub(a)?),
        Expr::Range(a, b) => Expr::Range(sub(a)?, sub(b)?),
        Expr::Member(a, b) => Expr::Member(sub(a)?, sub(b)?),
        Expr::Diff(a, b) => Expr::Diff(sub(a)?, sub(b)?),
        Expr::Union(a, b) => Expr::Union(sub(a)?, sub(b)?),
        Expr::Eq(a, b) => Expr::Eq(sub(a)?, sub(b)?),
        Expr::Ne(a, b) => Expr::Ne(sub(a)?, sub(b)?),
        Expr::And(a, b) => Expr::And(sub(a)?, sub(b)?),
        Expr::Or(a, b) => Expr::Or(sub(a)?, sub(b)?),
    };
    if out.is_closed() {
        Ok(Expr::Lit(eval(&out, &Env::new())?))
    } else {
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_process;

    fn resolve_vars(p: ProcessExpr) -> ProcessExpr {
        // Test helper: turn every Name into Var so that substitution applies.
        fn e(x: &Expr) -> Expr {
            match x {
                Expr::Name(n) => Expr::Var(n.clone()),
                Expr::SetEnum(v) => Expr::SetEnum(v.iter().map(e).collect()),
                Expr::Diff(a, b) => Expr::Diff(Box::new(e(a)), Box::new(e(b))),
                Expr::Member(a, b) => Expr::Member(Box::new(e(a)), Box::new(e(b))),
                other => other.clone(),
            }
        }
        match p {
            ProcessExpr::Prefix(ev, cont) => ProcessExpr::prefix(
                EventExpr {
                    channel: ev.channel,
                    items: ev
                        .items
                        .iter()
                        .map(|i| match i {
                            EventItem::Dot(x) => EventItem::Dot(e(x)),
                            EventItem::InputIn(v, s) => EventItem::InputIn(v.clone(), e(s)),
                            other => other.clone(),
                        })
                        .collect(),
                },
                resolve_vars(*cont),
            ),
            ProcessExpr::Call(n, args) => ProcessExpr::Call(n, args.iter().map(e).collect()),
            ProcessExpr::Guard(c, b) => ProcessExpr::guard(e(&c), resolve_vars(*b)),
            ProcessExpr::Choice(ops) => ProcessExpr::Choice(ops.into_iter().map(resolve_vars).collect()),
            ProcessExpr::Skip => ProcessExpr::Skip,
        }
    }

    #[test]
    fn folds_closed_arguments_and_respects_binders() {
        let p = resolve_vars(parse_process("c?x -> P(diff(s, {x}), x) [] d.y -> Q(diff(s, {y}))").unwrap());
        let env = Env::new()
            .with("s".into(), Value::Set([0, 1, 2].map(Value::Int).into()))
            .with("x".into(), Value::Int(9))
            .with("y".into(), Value::Int(1));
        let out = subst_process(&p, &env, &mut Vec::new()).unwrap();
        let expected = "c?x -> P(diff({0, 1, 2}, {x}), x) [] d.1 -> Q({0, 2})";
        assert_eq!(out.to_string(), expected);
    }

    #[test]
    fn unbound_variable_is_an_error() {
        let p = resolve_vars(parse_process("c.z -> SKIP").unwrap());
        assert!(subst_process(&p, &Env::new(), &mut Vec::new()).is_err());
    }
}
