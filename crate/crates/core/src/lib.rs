//! Simulation toolkit for quasi-1D non-Hermitian tight-binding transport.
//!
//! The lattice under study is a zigzag arrangement of two sublattices with an
//! imaginary intra-sublattice hopping `-iκ`, a Hermitian inter-sublattice
//! hopping `ρ` carrying Peierls phases `φ`, `φ'`, and a uniform loss rate `γ`.
//! The crate builds the lattice operators in three equivalent representations
//! ([`model`]), evaluates their complex band structure ([`spectrum`]),
//! time-integrates single-site and Gaussian wave-packet excitations
//! ([`propagator`]), provides exact and asymptotic clean-lattice solutions as
//! oracles ([`asymptotics`]), derives the observables used in transport and
//! localization experiments ([`observables`]), and runs seeded disorder
//! ensembles ([`ensemble`]).

pub mod asymptotics;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod model;
pub mod observables;
pub mod propagator;
pub mod spectrum;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
