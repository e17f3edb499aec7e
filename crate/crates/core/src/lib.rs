//! Majorana stellar representation of spin-S pure states.
//!
//! A spin-S state is equivalent to 2S points on the sphere, the roots of its
//! stellar polynomial. This crate converts between states and
//! constellations, measures quantumness through state multipoles, searches
//! for maximally unpolarized constellations, and integrates the motion of the
//! stars under a spin Hamiltonian.

// `!(x <= y)` is used on purpose where NaN must take the failing branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assignment;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod kings;
pub mod multipoles;
pub mod optim;
pub mod poly;
pub mod roots;
pub mod sphere;
pub mod spin;
pub mod state;
pub mod stellar;

pub use dynamics::{evolve, evolve_exact, EvolveOptions, HamiltonianSpec, StarTrajectory};
pub use error::{Error, Result};
pub use kings::{KingResult, SearchConfig};
pub use multipoles::{
    cumulative_quantumness, husimi_q, multipoles, q_grid, MultipoleSpectrum, QGrid,
};
pub use num_complex::Complex64 as C64;
pub use sphere::{sphere_to_stereo, stereo_to_sphere, ExtendedComplex, SpherePoint};
pub use spin::SpinLabel;
pub use state::{coherent_state, noon_state, overlap, random_state, rotate, SpinState};
pub use stellar::{
    constellation_from_state, state_from_constellation, stellar_polynomial, Constellation,
    StellarOptions, StellarPolynomial,
};
