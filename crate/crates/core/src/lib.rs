//! Exact combinatorics behind the limit spectral moments of generalized
//! Marchenko-Pastur ensembles.
//!
//! The pipeline is: set partitions ([`partition`]) give quotient cycle graphs and
//! edge partitions ([`quotient`]), whose acyclic hypergraphs are weighted by a
//! moment-scaling functional ([`gamma`]) and by the cumulants of an infinitely
//! divisible law ([`levy`]) to produce limit moments ([`moments`]).

pub mod error;
pub mod gamma;
pub mod levy;
pub mod moments;
pub mod partition;
pub mod quotient;

pub use error::{Error, Result};
pub use gamma::{GammaSpec, GammaVariant, Time};
pub use levy::{CumulantSeq, IdLaw, Jump, SigmaAtom};
pub use moments::{MomentEngine, MomentTable, K_MOMENT_MAX};
pub use partition::{InducedPartition, Partition, K_MAX};
pub use quotient::{EdgePartition, Hypergraph, QuotientCycleGraph};
