//! CSP runtime verification core.
//!
//! A specification is parsed and resolved ([`syntax`]), compiled into a
//! labelled transition system ([`lts`]) and then used as an oracle by a
//! [`monitor`] that checks observed events one at a time.

pub mod event;
pub mod lts;
pub mod monitor;
pub mod syntax;
pub mod value;

pub use event::Event;
pub use lts::{Label, Lts, StateId};
pub use monitor::{Mode, Observed, Session, Verdict};
pub use value::Value;
