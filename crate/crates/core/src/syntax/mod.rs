//! Concrete syntax: lexing, parsing, printing and resolution of the
//! supported CSP_M subset.
//!
//! Accepted declarations:
//!
//! ```text
//! datatype RadLevel = Red | Orange | Green
//! nametype Waypoint = {0..4}
//! channel mission_start, mission_complete
//! channel move : Waypoint
//! channel report : Waypoint.RadLevel
//! P(s, _) = c?x:(s) -> P(diff(s, {x}), x) [] member(0, s) & d.0 -> SKIP
//! ```

pub mod ast;
mod lexer;
mod parser;
mod pretty;
mod resolve;

pub use lexer::{tokenize, LexError, Pos, Token, TokenKind};
pub use parser::{parse_entry, parse_expr, parse_process, parse_spec, EntryRef, ParseError};
pub use resolve::{validate_spec, Entry, ResolveError, ResolvedSpec, Violation};
