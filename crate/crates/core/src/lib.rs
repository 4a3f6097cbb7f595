//! Quantum and classical Bayesian nets.
//!
//! A net is a DAG whose nodes carry amplitude (QB) or probability (CB)
//! matrices. The library evaluates story amplitudes, builds the meta state of
//! a net, reduces it with partial traces, projections and entry sums, and
//! computes classical and quantum entropies of compound expressions over the
//! resulting density matrices. On top of that sit POM measurements with their
//! unitary dilations, signal ensembles with Holevo and accessible
//! information, and builders for a set of worked protocol nets.

pub mod density;
pub mod entexpr;
pub mod error;
pub mod infotheory;
pub mod linalg;
pub mod measure;
pub mod netcore;
pub mod protocols;
pub mod qprob;
pub mod random;
pub mod recipe;
pub mod suites;

pub use error::{Error, Result};
