use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::syntax::ast::Name;
use crate::value::Value;

/// A concrete communication: channel plus fully instantiated parameters.
///
/// The canonical text form is `chan` or `chan.v1.v2`, where each value is an
/// integer or a constructor name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    pub channel: Name,
    pub values: Vec<Value>,
}

impl Event {
    pub fn new(channel: impl Into<Name>, values: Vec<Value>) -> Event {
        Event {
            channel: channel.into(),
            values,
        }
    }

    pub fn bare(channel: impl Into<Name>) -> Event {
        Event::new(channel, Vec::new())
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.channel)?;
        for v in &self.values {
            write!(f, ".{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{text}` is not a well-formed event")]
pub struct EventParseError {
    pub text: String,
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

impl FromStr for Event {
    type Err = EventParseError;

    fn from_str(text: &str) -> Result<Event, EventParseError> {
        let err = || EventParseError {
            text: text.to_string(),
        };
        let mut parts = text.trim().split('.');
        let channel = parts.next().filter(|c| is_ident(c)).ok_or_else(err)?;
        let values = parts
            .map(|p| {
                if !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()) {
                    p.parse().map(Value::Int).map_err(|_| err())
                } else if is_ident(p) {
                    Ok(Value::Ctor(p.into()))
                } else {
                    Err(err())
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Event::new(channel, values))
    }
}
