//! Pulse design and simulation toolkit for transferring a qubit stored in the
//! two excited levels of a V-type emitter onto a cavity field mode.
//!
//! The qubit lives in the excited levels `|0>` and `|1>` of a three-level
//! system in the V configuration; the ground level `|2>` is the intermediate
//! state of a stimulated Raman transition. A classical laser drives
//! `|0> <-> |2>` with Rabi amplitude `Omega` while the cavity couples
//! `|1> <-> |2>` with strength `g`. All rates are expressed in units of `g`
//! and all times in units of `1/g`.
//!
//! The crate is organized around the pipeline
//!
//! * [`hilbert`]: truncated atom-cavity basis and Hamiltonian assembly,
//! * [`propagate`]: numerically exact time evolution and pulse execution,
//! * [`analytic`]: closed-form amplitudes used as a cross-check oracle,
//! * [`design`]: detuning families, pulse timing, and two-stage planners,
//! * [`evaluate`]: fidelity metrics, worst-case search, and fine tuning,
//! * [`cli`]: command-line front end with CSV emission.

// validation uses `!(x > 0.0)` so NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod design;
pub mod error;
pub mod evaluate;
pub mod hilbert;
pub mod optim;
pub mod propagate;

pub use error::{Error, Result};
