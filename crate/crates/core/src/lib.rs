//! Incremental fuzzy scene knowledge.
//!
//! Symbolic scene observations are encoded into fuzzy belief cardinalities,
//! one-shot learned as conjunctions of minimum-cardinality restrictions,
//! structured into a weighted implication graph and classified against it.

pub mod experiments;
pub mod fuzzy;
pub mod grounding;
pub mod io;
pub mod model;
pub mod sit;
