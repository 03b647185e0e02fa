//! Evolutionary splitters.

pub mod multi;
pub mod operators;
pub mod single;
