//! Test oracle for `cspmon-core`.
//!
//! [`Interpreter`] decides trace acceptance straight from the resolved
//! syntax tree, folding over sets of process terms. It shares no code with
//! LTS synthesis beyond expression evaluation, so agreement between the two
//! is real evidence. [`generate_spec`] produces seeded random specifications
//! to compare them on.

mod equiv;
mod generate;
mod interp;

pub use equiv::{compare_exhaustive, monitor_oracle, Agreement, Disagreement, FOREIGN};
pub use generate::{generate_spec, generate_spec_with, GenConfig, Generated};
pub use interp::{InterpState, Interpreter, Move, Outcome, Reach};
