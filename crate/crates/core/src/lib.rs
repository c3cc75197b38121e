//! Numerical laboratory for the edge spectrum of a disordered quantum Hall
//! Hamiltonian on a semi-infinite cylinder threaded by a magnetic flux.
//!
//! The cylinder Hamiltonian
//!
//! ```text
//! H(Φ) = ½ p_x² + ½ (p_y − B x + Φ/L)² + W(x) + V(x, y)
//! ```
//!
//! is discretized with a five-point stencil (Peierls phases on the y bonds,
//! periodic in y, Dirichlet in x). On top of the discretization the crate
//! provides
//!
//! * [`spectra`]: windowed Hermitian eigensolves (shift-invert Lanczos on a
//!   banded LDLᴴ factorization with Sylvester inertia counts), clean edge
//!   dispersion tables ε_n(k), the Fermi velocity and the flow lower bound α;
//! * [`flow`]: flux sweeps over one flux quantum with overlap-based branch
//!   tracking, Feynman–Hellmann edge currents, the spectral shift
//!   E_k(2π) = E_{k+1}(0), crossing counts, level-spacing statistics and the
//!   flux-averaged edge conductance;
//! * [`index`]: projections, the relative index Tr(P − Q), and the
//!   decoupling comparison between the full and truncated-disorder operators;
//! * [`toymodel`]: the exactly solvable chiral model used as an oracle.
//!
//! Units are ħ = e = m = 1 throughout.

pub mod cli;
pub mod config;
pub mod error;
pub mod flow;
pub mod hamiltonian;
pub mod index;
pub mod io;
pub mod model;
pub mod spectra;
pub mod toymodel;

pub use error::{Error, Result};
pub use num_complex::Complex64;
