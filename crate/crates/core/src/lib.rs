//! Symbolic household simulator, goal language and evaluation kernels.

pub mod domain;
pub mod executor;
pub mod goals;
pub mod ltl;
pub mod sexpr;
pub mod subgoal;
pub mod tmodel;
pub mod world;

#[cfg(test)]
mod testutil;
