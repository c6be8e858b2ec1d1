//! Simulator for magnon-assisted microwave-to-optical quantum transduction in
//! erbium-doped magnets.
//!
//! The model: erbium ions sit inside two overlapping cavity modes, one
//! microwave and one optical. Each ion carries a ground-state spin doublet and
//! one optical excited level. When the host crystal is ferromagnetic, the
//! uniform magnon mode of the iron lattice couples to both the microwave
//! cavity and, through interfacial exchange, the erbium spins, opening a
//! second, collectively enhanced path from microwave photon to spin flip.
//!
//! The crate is organized as a pipeline:
//!
//! * [`params`]: config documents, physical constants, and the maps from
//!   material numbers (exchange strengths, field amplitudes, populations) to
//!   coupling rates.
//! * [`levels`]: static energies of the magnon, spin, and optical transitions
//!   versus bias field, and the magnon-spin resonance crossing.
//! * [`effective`]: the five-mode rotating-frame Hamiltonian, adiabatic
//!   elimination of the ion levels, the resulting beam-splitter rate between
//!   the two cavities, and validity diagnostics for the elimination.
//! * [`inout`]: stationary scattering of the two-port network built on that
//!   rate: conversion efficiency, impedance matching, bandwidth.
//! * [`oracle`]: direct numerical integration of the five-mode dynamics and
//!   of the reduced two-mode model, for cross-checking the analytics.
//! * [`sweep`]: parameter grids over any two axes, producing CSV with
//!   deterministic layout; the figure presets live here too.
//!
//! All frequencies are plain Hz (not angular). The single place where a
//! 2*pi appears is inside the time integrators, which need radians.

pub mod effective;
pub mod error;
pub mod inout;
pub mod levels;
pub mod oracle;
pub mod params;
pub mod sweep;

pub use error::{Error, Result};
