//! Scattering of identical diatom pairs prepared in entangled internal
//! states.
//!
//! Pipeline: [`basis`] enumerates channels, [`pes`] supplies the potential
//! expansion, [`ccsolve`] propagates the coupled equations per total J,
//! [`tmx`] stores T = I − S, [`amplitude`] contracts T into symmetrized
//! amplitudes f± and [`xsec`] turns them into σ(θ), totals and the control
//! metric. [`entangle`] handles the state algebra, [`vibwave`] is the
//! collinear wavepacket model and [`cli`] the command-line front end.
//!
//! Units: cm⁻¹, Å, amu, radians; cross sections in Å².

pub mod angmom;
pub mod constants;
pub mod error;
pub mod quadrature;

pub mod basis;
pub mod pes;
pub mod ccsolve;
pub mod tmx;
pub mod entangle;
pub mod amplitude;
pub mod xsec;
pub mod vibwave;
pub mod cli;

pub use error::{Error, Result};
