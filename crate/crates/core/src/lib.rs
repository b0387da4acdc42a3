//! Thermodynamics of isolated quantum systems after a sudden quench.
//!
//! The diagonal ensemble of a quenched pure state gives an entropy and an
//! energy; their finite-difference ratio defines a temperature without any
//! bath. Long-time distributions of a reaction coordinate, sampled station by
//! station along a quench protocol, give work statistics and a free-energy
//! estimate through the exponential average.
//!
//! Two models are provided: a harmonic oscillator with closed forms
//! ([`oscillator`]) and hard-core bosons on a 1D lattice mapped to free
//! fermions ([`lattice`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distribution;
pub mod ensemble;
pub mod error;
pub mod exec;
pub mod io;
pub mod jarzynski;
pub mod lattice;
pub mod oscillator;
pub mod protocol;

pub use distribution::PositionDistribution;
pub use ensemble::{
    entropy, mean_energy, temperature_from_pair, DiagonalEnsemble, TemperatureEstimate,
};
pub use error::{Error, Result};
pub use exec::Exec;
pub use jarzynski::{
    build_profile, free_energy_estimate, sample_work_paths, FreeEnergyProfile, LatticeModel,
    OscillatorModel, QuenchModel, WorkDistribution,
};
pub use lattice::{Lattice, LatticeParams};
pub use oscillator::OscillatorParams;
pub use protocol::QuenchProtocol;
