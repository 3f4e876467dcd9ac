//! Single-excitation quantum dynamics of a two-level emitter coupled to a
//! one-dimensional coupled-cavity array whose cavity frequencies grow
//! linearly along the array (a synthetic force acting on the photons).
//!
//! The crate is `no_std` compatible (it needs `alloc`). The default `std`
//! feature switches the momentum-space transform to an FFT backend; without
//! it a direct discrete Fourier transform is used.
//!
//! Units: the hopping rate `J` is the energy unit in every preset and test,
//! times are measured in `1/J`. All routines nevertheless carry `J`
//! explicitly through [`LatticeSpec::hopping`].
//!
//! Modules:
//! * [`specfun`]: integer-order Bessel functions of the first kind.
//! * [`lattice`]: parameters, derived scales, Hamiltonian, Wannier-Stark modes.
//! * [`propagator`]: time evolution and observables.
//! * [`semiclassics`]: Bloch-oscillation kinematics and return times.
//! * [`kernel_dde`]: memory kernels and the delay-differential reduction.

#![cfg_attr(not(feature = "std"), no_std)]
// NaN must fail every validation, so `!(x > 0.0)` is deliberate
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod kernel_dde;
pub mod lattice;
pub mod propagator;
pub mod semiclassics;
pub mod specfun;

pub use error::{Error, Result};
pub use lattice::{
    build_hamiltonian, DerivedScales, HamiltonianMatrix, LatticeSpec, QubitSpec, Regime, RegimeReport, WannierStarkMode,
};
pub use num_complex::Complex64 as C64;
pub use propagator::{Method, PropagationOptions, SingleExcitationState, TimeSeries};
