//! Harmonic explorer and chordal SLE(4) simulation on the triangular lattice.

pub mod cli;
pub mod excursion;
pub mod explorer;
pub mod harmonic;
pub mod lattice;
pub mod loewner;
pub mod rng;
pub mod stats;
pub mod verify;
