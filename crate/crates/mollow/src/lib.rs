//! Simulator for pulsed Mollow absorption spectroscopy of a driven two-level
//! system.
//!
//! A strong, pulsed drive dresses a qubit; a weak signal field probes the
//! dressed transitions. This crate simulates that physics exactly at the
//! two-level Schrödinger level and provides:
//!
//! - [`spin`]: closed-form 2×2 propagator algebra (the numerical kernel),
//! - [`frames`]: rotating-frame generators for signal and drive fields,
//! - [`sequences`]: declarative pulse-program builders (CPMG, XY4, XY8 with
//!   and without per-window phase switching, CW sideband drive), validation,
//!   and a text serialization format,
//! - [`sensitivity`]: the piecewise-constant sensitivity function of a
//!   sequence and the closed-form linear-response prediction,
//! - [`engine`]: time-domain evolution of a state through a sequence,
//! - [`dephasing`]: quasi-static Gaussian ensemble averaging (Gauss–Hermite
//!   quadrature) and free-induction-decay spectra,
//! - [`experiments`]: figure-level drivers — detuning scans, 2-D maps, Rabi
//!   traces, linewidth extraction, breakdown scans — with deterministic
//!   parallel fan-out.
//!
//! All internal frequencies are angular (rad/s); cyclic Hz appears only at
//! I/O boundaries. The propagator convention is `U = exp(-i (w·σ) t / 2)`,
//! so a field of magnitude `|w|` applied for `t = π/|w|` is a π pulse.

pub mod dephasing;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod frames;
pub mod sensitivity;
pub mod sequences;
pub mod spin;

pub use error::{Error, Result};
