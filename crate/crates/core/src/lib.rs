//! Continuous error correction for Ising anyons on an L×L torus.

pub mod engine;
pub mod error;
pub mod fermion;
pub mod fusion;
pub mod harness;
pub mod lattice;
pub mod ledger;
pub mod matching;
