//! Probabilistic type hierarchies over typed feature structures.
//!
//! A signature declares types, their subtypes and the features each type
//! introduces. Structures are generated top-down by refining each node
//! one subtype at a time; the parameters of that process can be scored,
//! enumerated, sampled and estimated from corpora. Re-entrancy is scored
//! by independent pairwise equate decisions, and a context-free baseline
//! lives in [`pcfg`].

pub mod cli;
pub mod format;
pub mod fstruct;
pub mod generate;
pub mod pcfg;
pub mod pth;
pub mod reentrancy;
pub mod signature;
pub mod train;
pub mod weight;

#[cfg(test)]
mod testutil;
