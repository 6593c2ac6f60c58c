//! Attributed tree transducers with monadic output and a decision pipeline
//! for top-down definability.

pub mod analysis;
pub mod constructions;
pub mod corpus;
pub mod equivalence;
pub mod functionality;
pub mod model;
pub mod pipeline;
pub mod semantics;
pub mod trees;
pub mod words;
