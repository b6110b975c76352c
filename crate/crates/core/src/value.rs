//! Runtime values and expression evaluation.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::syntax::ast::{Expr, Name};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Ctor(Name),
    Set(BTreeSet<Value>),
    Bool(bool),
}

impl Value {
    pub fn empty_set() -> Value {
        Value::Set(BTreeSet::new())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Value::Int(_) => "integer",
            Value::Ctor(_) => "constructor",
            Value::Set(_) => "set",
            Value::Bool(_) => "boolean",
        }
    }

    pub fn as_set(&self) -> Option<&BTreeSet<Value>> {
        match self {
            Value::Set(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Ctor(c) => f.write_str(c),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Set(items) => {
                f.write_str("{")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(Name),
    #[error("unresolved name `{0}`")]
    Unresolved(Name),
    #[error("{op} expects {expected}, found {found}")]
    Type {
        op: &'static str,
        expected: &'static str,
        found: &'static str,
    },
    #[error("set mixes {0} and {1} elements")]
    Heterogeneous(&'static str, &'static str),
}

/// Variable bindings. Lookups scan from the most recent binding, so later
/// bindings shadow earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Env {
    bindings: Vec<(Name, Value)>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn bind(&mut self, name: Name, value: Value) {
        self.bindings.push((name, value));
    }

    /// Drops the most recent binding.
    pub fn pop(&mut self) {
        self.bindings.pop();
    }

    pub fn with(&self, name: Name, value: Value) -> Env {
        let mut env = self.clone();
        env.bind(name, value);
        env
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.bindings
            .iter()
            .rev()
            .find(|(n, _)| &**n == name)
            .map(|(_, v)| v)
    }
}

fn make_set(items: impl IntoIterator<Item = Value>) -> Result<Value, EvalError> {
    let set: BTreeSet<Value> = items.into_iter().collect();
    check_homogeneous(&set)?;
    Ok(Value::Set(set))
}

fn check_homogeneous(set: &BTreeSet<Value>) -> Result<(), EvalError> {
    // Ordering groups kinds together, so comparing the ends is enough.
    if let (Some(first), Some(last)) = (set.first(), set.last()) {
        if first.kind() != last.kind() {
            return Err(EvalError::Heterogeneous(first.kind(), last.kind()));
        }
    }
    Ok(())
}

fn want_set(op: &'static str, v: Value) -> Result<BTreeSet<Value>, EvalError> {
    match v {
        Value::Set(s) => Ok(s),
        other => Err(EvalError::Type {
            op,
            expected: "a set",
            found: other.kind(),
        }),
    }
}

fn want_int(op: &'static str, v: Value) -> Result<i64, EvalError> {
    match v {
        Value::Int(i) => Ok(i),
        other => Err(EvalError::Type {
            op,
            expected: "an integer",
            found: other.kind(),
        }),
    }
}

fn want_bool(op: &'static str, v: Value) -> Result<bool, EvalError> {
    match v {
        Value::Bool(b) => Ok(b),
        other => Err(EvalError::Type {
            op,
            expected: "a boolean",
            found: other.kind(),
        }),
    }
}

/// Evaluates `expr` under `env`.
pub fn eval(expr: &Expr, env: &Env) -> Result<Value, EvalError> {
    Ok(match expr {
        Expr::Lit(v) => v.clone(),
        Expr::Var(n) => env.get(n).cloned().ok_or_else(|| EvalError::Unbound(n.clone()))?,
        Expr::Name(n) => return Err(EvalError::Unresolved(n.clone())),
        Expr::SetEnum(items) => make_set(
            items
                .iter()
                .map(|e| eval(e, env))
                .collect::<Result<Vec<_>, _>>()?,
        )?,
        Expr::Range(lo, hi) => {
            let lo = want_int("range", eval(lo, env)?)?;
            let hi = want_int("range", eval(hi, env)?)?;
            Value::Set((lo..=hi).map(Value::Int).collect())
        }
        Expr::Member(e, s) => {
            let e = eval(e, env)?;
            Value::Bool(want_set("member", eval(s, env)?)?.contains(&e))
        }
        Expr::Diff(a, b) => {
            let mut a = want_set("diff", eval(a, env)?)?;
            for v in want_set("diff", eval(b, env)?)? {
                a.remove(&v);
            }
            Value::Set(a)
        }
        Expr::Union(a, b) => {
            let mut a = want_set("union", eval(a, env)?)?;
            a.extend(want_set("union", eval(b, env)?)?);
            check_homogeneous(&a)?;
            Value::Set(a)
        }
        Expr::Eq(a, b) => Value::Bool(eval(a, env)? == eval(b, env)?),
        Expr::Ne(a, b) => Value::Bool(eval(a, env)? != eval(b, env)?),
        Expr::Not(e) => Value::Bool(!want_bool("not", eval(e, env)?)?),
        Expr::And(a, b) => {
            Value::Bool(want_bool("and", eval(a, env)?)? && want_bool("and", eval(b, env)?)?)
        }
        Expr::Or(a, b) => {
            Value::Bool(want_bool("or", eval(a, env)?)? || want_bool("or", eval(b, env)?)?)
        }
    })
}

pub fn eval_bool(expr: &Expr, env: &Env) -> Result<bool, EvalError> {
    want_bool("guard", eval(expr, env)?)
}

pub fn eval_set(expr: &Expr, env: &Env) -> Result<BTreeSet<Value>, EvalError> {
    want_set("set expression", eval(expr, env)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(i: i64) -> Expr {
        Expr::Lit(Value::Int(i))
    }

    fn set(items: &[i64]) -> Expr {
        Expr::SetEnum(items.iter().map(|&i| int(i)).collect())
    }

    #[test]
    fn set_functions() {
        let env = Env::new();
        let d = Expr::Diff(Box::new(set(&[0, 1, 2])), Box::new(set(&[1])));
        assert_eq!(eval(&d, &env).unwrap(), eval(&set(&[0, 2]), &env).unwrap());
        let m = Expr::Member(Box::new(int(0)), Box::new(d.clone()));
        assert_eq!(eval(&m, &env).unwrap(), Value::Bool(true));
        let u = Expr::Union(Box::new(set(&[])), Box::new(set(&[3])));
        assert_eq!(eval(&u, &env).unwrap(), eval(&set(&[3]), &env).unwrap());
        let r = Expr::Range(Box::new(int(2)), Box::new(int(4)));
        assert_eq!(eval(&r, &env).unwrap(), eval(&set(&[2, 3, 4]), &env).unwrap());
    }

    #[test]
    fn shadowing_and_unbound() {
        let x: Name = "x".into();
        let env = Env::new().with(x.clone(), Value::Int(1)).with(x.clone(), Value::Int(2));
        assert_eq!(eval(&Expr::Var(x), &env).unwrap(), Value::Int(2));
        assert!(matches!(
            eval(&Expr::Var("y".into()), &env),
            Err(EvalError::Unbound(_))
        ));
    }

    #[test]
    fn mixed_sets_are_rejected() {
        let e = Expr::SetEnum(vec![int(1), Expr::Lit(Value::Ctor("Red".into()))]);
        assert!(matches!(eval(&e, &Env::new()), Err(EvalError::Heterogeneous(..))));
    }

    #[test]
    fn cross_kind_equality_is_false() {
        let e = Expr::Eq(Box::new(int(1)), Box::new(Expr::Lit(Value::Ctor("A".into()))));
        assert_eq!(eval(&e, &Env::new()).unwrap(), Value::Bool(false));
    }
}
