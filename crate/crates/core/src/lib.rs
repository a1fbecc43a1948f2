//! Exact-arithmetic harmonic analysis on little q-Legendre polynomial
//! hypergroups: recurrence data, linearization coefficients, characters
//! with certified decay bounds, Worpitzky continued fractions, Fourier and
//! Plancherel transforms, and idempotent approximations.

pub mod characters;
pub mod cli;
pub mod contfrac;
pub mod error;
pub mod fourier;
pub mod hypergroup;
pub mod idempotents;
pub mod poly;
pub mod recurrence;
pub mod scalar;

pub use error::{Error, Result};
pub use hypergroup::{HSeq, Hypergroup, LittleQLegendre, Norm};
pub use recurrence::{CoeffProvider, Family, HaarWeights};
pub use scalar::{Enclosure, QParam, Rational};
