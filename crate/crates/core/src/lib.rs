//! Simulation and analysis toolkit for single-photon wave packets in hot
//! cesium vapor near the D1 line.
//!
//! The crate is organized around the chain of physics that turns an emitted
//! photon into a detected waveform:
//!
//! * [`atomdata`] — Cs D1 hyperfine structure, relative line strengths from
//!   angular-momentum algebra, and vapor number density vs. temperature.
//! * [`susceptibility`] — complex electric susceptibility on a frequency
//!   grid, refractive index, absorption, optical depth and group delay.
//! * [`propagation`] — temporal wave packets, frequency-domain transfer
//!   through the cell, spectral-diffusion averaging, Fabry-Pérot filtering,
//!   detector response and delay/transmission observables.
//! * [`pumping`] — two-ground-state optical-pumping rate equations and
//!   optically controlled delay/transmission sweeps.
//! * [`fitting`] — least-squares estimation of lifetime, Voigt resonance,
//!   antibunching and vapor-transmission scan models.
//!
//! All quantities are SI (Hz, s, m, K) unless a name says otherwise.

pub mod atomdata;
pub mod constants;
pub mod error;
pub mod fitting;
pub mod fourier;
pub mod grid;
pub mod propagation;
pub mod pumping;
pub mod quadrature;
pub mod susceptibility;

pub use error::{Error, Result};
