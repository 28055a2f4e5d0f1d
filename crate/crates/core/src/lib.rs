//! Classical and quantum information geometry on finite-dimensional systems.
//!
//! Divergences, monotone metrics, hypothesis testing bounds and a few
//! physical applications (estimation, speed limits, thermodynamics), built on
//! dense complex linear algebra.
//!
//! Everything here is exact dense arithmetic on `DMatrix<Complex64>`; the
//! Hilbert space dimension is capped at `2^12` by default (override with the
//! `QIG_DIM_CAP` environment variable, in qubits).

pub mod applications;
pub mod classical;
pub mod error;
pub mod extended;
pub mod httesting;
pub mod io;
pub mod numerics;
pub mod qdivergences;
pub mod qmetrics;
pub mod states;

pub use error::{Error, Result};
pub use extended::ExtReal;
