//! Monte Carlo sampling of the matrix ensembles, their spectra and the
//! finite-N checks that go with them.

pub mod brownian;
pub mod charfun;
pub mod ensemble;
pub mod estimators;
pub mod heavy;
pub mod matrix;
pub mod resolvent;
pub mod rng;
pub mod sample;
pub mod vectors;

pub use ensemble::{EnsembleKind, EnsembleSpec, EntryFamily};
pub use matrix::HermitianMatrix;
pub use sample::{simulate, EmpiricalMoments, SpectralSample};
pub use faer::c64;
pub use vectors::{Field, VectorKind};
