//! qlab is a laboratory for quantum measurement statistics: spin
//! observables and their moments, reconstruction of outcome frequencies
//! from expectation values, density-matrix decoherence and state-vector
//! reduction, entanglement correlation experiments (EPR, CHSH, GHZ), and
//! time-dependent wave-packet scattering with position sampling.
//!
//! The crate is organized as a library first; the `examples/` directory
//! holds one runnable program per capability, and the `qlab` binary wraps
//! the same experiment runners behind a seed-reproducible CLI that writes
//! CSV data with JSON sidecars.
//!
//! A quick taste — the spin-3/2 frequencies recovered two ways:
//!
//! ```
//! use qlab::observables::make_spin;
//! use qlab::born::{reconstruct_frequencies, MomentSystem};
//!
//! let spin = make_spin(1.5)?;
//! let top = spin.highest_weight();
//!
//! // moment route: <Jx>, <Jx^2>, <Jx^3>, <Jx^4> pin the frequencies
//! let sys = MomentSystem::from_state(&top, spin.jx())?;
//! let table = reconstruct_frequencies(&sys)?;
//!
//! // projector route: |<n|psi>|^2 branch by branch
//! let direct = spin.jx().frequencies(&top)?;
//!
//! for (reconstructed, born) in table.frequencies().iter().zip(&direct) {
//!     assert!((reconstructed - born).abs() < 1e-7);
//! }
//! assert!((table.frequencies()[0] - 0.125).abs() < 1e-7);
//! assert!((table.frequencies()[1] - 0.375).abs() < 1e-7);
//! # Ok::<(), qlab::Error>(())
//! ```

pub mod born;
pub mod entangle;
pub mod error;
pub mod experiments;
pub mod hilbert;
pub mod measure;
pub mod numfmt;
pub mod observables;
pub mod rng;
pub mod states;
pub mod tol;
pub mod wavepacket;

pub use error::{Error, Result};
